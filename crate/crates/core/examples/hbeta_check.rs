//! Stability test of the tuning-guideline loop on a pure mass and on a
//! positioning-stage plant.

use std::f64::consts::PI;

use reset_control::design::guideline_preset;
use reset_control::lti::blocks::{mass_plant, precision_stage};
use reset_control::numerics::logspace;

fn main() -> reset_control::Result<()> {
    for (name, plant, wc) in [("mass", mass_plant(), 100.0), ("stage", precision_stage(), 2.0 * PI * 400.0)] {
        let l = guideline_preset(wc, plant)?;
        let r = l.hbeta(&logspace(wc * 1e-3, wc * 1e3, 600))?;
        println!(
            "{name:>6}: gamma {:.4}, PM {:.1} deg, theta1 {:.2}, theta2 {:.2}, satisfied {}",
            l.cglp.map_or(f64::NAN, |c| c.gamma),
            l.phase_margin()?,
            r.theta1,
            r.theta2,
            r.satisfied
        );
    }
    Ok(())
}
