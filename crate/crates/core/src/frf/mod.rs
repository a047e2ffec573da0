//! Measured frequency-response data and plant identification.

mod data;
mod fit;

pub use data::{load_frf, parse_frf, FrfData, FrfFormat, FrfPoint};
pub use fit::{fit_second_order_delay, FitReport, FitWeight, SecondOrderDelay};
