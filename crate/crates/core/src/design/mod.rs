//! Synthesis of constant-gain phase-lead reset stages, tuning presets, and the
//! parameter sweeps used to map transient behaviour.

mod cglp;
mod fit;
mod presets;
mod sweep;

pub use cglp::{design_cglp, solve_gamma_for_pm, AlphaRule, CglpDesign, CglpDesignOptions};
pub use fit::{fit_overshoot_plane, overshoot_estimate, PlaneFit, REFERENCE_PLANE};
pub use presets::{
    gain_study_loops, gain_variation_experiment, guideline_preset, lead_ratio_for_pm, practical_loop, GainVariation,
    PracticalController,
};
pub use sweep::{sweep_harmonics, sweep_transient, SweepCell, SweepResult, TransientPreset};
