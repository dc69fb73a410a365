//! Recipe-driven experiments on top of the `difftomo` core: forward
//! simulation, reconstruction, image export, forward-model comparison and the
//! acceptance suite.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod error;
pub mod pipeline;
pub mod recipe;
pub mod render;
pub mod verify;

pub use error::{CliError, CliResult};
pub use recipe::ExperimentRecipe;
