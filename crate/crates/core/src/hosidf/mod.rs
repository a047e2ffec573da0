//! Higher-order sinusoidal-input describing functions of reset elements, in
//! closed form and from simulated steady-state spectra.

mod closed_form;
mod empirical;
mod tradeoff;

pub use closed_form::{describing_matrix, hosidf, hosidf_table, path_hosidf, phase_advantage, HosidfRow, HosidfTable};
pub use empirical::{hosidf_empirical, EmpiricalOptions};
pub use tradeoff::{third_harmonic_integral, HarmonicTradeoff};
