//! Linear time-invariant building blocks: transfer functions, realizations and
//! the standard filters used around reset elements.

pub mod blocks;
mod ss;
mod tf;

pub use blocks::{normalize_gain, PidParams};
pub use ss::StateSpace;
pub use tf::TransferFunction;
