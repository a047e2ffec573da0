//! Phase margin before and after a loop-gain increase, for a PID loop and a
//! CR-CgLp loop with the same crossover.

use std::f64::consts::PI;

use reset_control::design::{gain_study_loops, gain_variation_experiment};

fn main() -> reset_control::Result<()> {
    let (pid, cr) = gain_study_loops()?;
    for (name, l) in [("pid", pid), ("cr-cglp", cr)] {
        for delta in [-5.0, 5.0] {
            let g = gain_variation_experiment(&l, delta)?;
            println!(
                "{name:>8} {delta:+} dB: crossover {:.0} -> {:.0} Hz, PM {:.1} -> {:.1} deg",
                g.crossover_before / (2.0 * PI),
                g.crossover_after / (2.0 * PI),
                g.pm_before,
                g.pm_after
            );
        }
    }
    Ok(())
}
