pub mod arith;
pub mod error;
pub mod field;
pub mod poly;

pub use error::{Error, Result};
pub mod sidelnikov;
pub mod array;
pub mod family;
pub mod correlation;
pub mod counting;
pub mod verify;
