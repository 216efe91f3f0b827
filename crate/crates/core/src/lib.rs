pub mod bell;
pub mod cat_eraser;
pub mod cli;
pub mod error;
pub mod ghz;
pub mod photo;
pub mod qcore;
pub mod selftest;
pub mod zwm;

pub use error::{Error, Result};
