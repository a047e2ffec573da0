// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod lti;
pub mod reset;
pub mod hosidf;
pub mod stability;
pub mod closedloop;
pub mod design;
pub mod frf;
pub mod cli;
