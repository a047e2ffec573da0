//! Unity-feedback loops built from a PID, optional low-pass filter, plant and an
//! optional reset stage, with their frequency- and time-domain evaluations.

mod config;
mod metrics;
mod sensitivity;

pub use config::{CglpParams, CrParams, DfOpenLoop, LoopConfig, Topology};
pub use metrics::{step_metrics, step_response, step_response_with, StepMetrics, StepResponse, SETTLING_BAND};
pub use sensitivity::{sensitivity_scan, SensitivityCurve, SensitivityOptions};
