pub mod alignment;
pub mod alphabet;
pub mod combine;
pub mod error;
pub mod network;
pub mod numfmt;
pub mod sim;
pub mod site_ctmc;
pub mod tree;

pub use error::{Error, Result};
