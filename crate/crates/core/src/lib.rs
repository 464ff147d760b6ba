//! Finite-model workbench for stable canonical rules of intuitionistic
//! modal and bimodal logics.

pub mod algebra;
pub mod collapse;
pub mod duality;
pub mod error;
pub mod filtration;
pub mod relation;
pub mod rules;
pub mod search;
pub mod syntax;
pub mod translate;
pub mod verify;

pub use error::{Error, Result};
