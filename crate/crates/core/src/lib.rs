//! Training and inference over functionally encrypted data.

pub mod authority;
pub mod bench;
pub mod cli;
pub mod client;
pub mod encoding;
pub mod error;
pub mod febo;
pub mod feip;
pub mod group;
pub mod mnist;
pub mod nn;
pub mod parallel;
pub mod secure_conv;
pub mod secure_matrix;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
