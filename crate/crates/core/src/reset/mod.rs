//! Reset elements, their linear wrappers and the hybrid time-domain simulator.

mod element;
mod sim;
mod trace;

pub use element::{CrElement, ResetElement, ResetPath};
pub use sim::{predicted_reset_instants, Chain, ChainBlock, Excitation, LoopMode, Sample, SimConfig, Simulator};
pub use trace::{JumpStats, Signal, SimTrace};
