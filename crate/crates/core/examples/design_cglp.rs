//! Reset factor for a requested phase advantage, then a full loop tuned to a
//! phase margin.

use reset_control::closedloop::{CglpParams, CrParams, LoopConfig};
use reset_control::design::{design_cglp, solve_gamma_for_pm, CglpDesignOptions};
use reset_control::lti::blocks::mass_plant;
use reset_control::lti::PidParams;

fn main() -> reset_control::Result<()> {
    let wc = 100.0;
    for pa in [10.0, 20.0, 25.0, 40.0] {
        match design_cglp(wc, pa, &CglpDesignOptions::default()) {
            Ok(d) => println!("PA {pa:>4}: gamma {:+.4}, achieved {:.3} deg, gain flatness {:.2} dB", d.gamma, d.phase_advantage, d.gain_flatness_db),
            Err(e) => println!("PA {pa:>4}: {e}"),
        }
    }

    let template = LoopConfig::linear(wc, PidParams::with_lead_ratio(wc, 1.2), None, mass_plant())
        .with_cglp(CglpParams { omega_r: 1.2 * wc, gamma: 1.0, alpha: 1.0, omega_f: 20.0 * wc })
        .with_cr(CrParams { omega_l: 0.4 * wc, omega_h: 20.0 * wc });
    let gamma = solve_gamma_for_pm(&template, 20.0)?;
    let tuned = template.with_gamma(gamma).normalized()?;
    println!("loop at PM 20: gamma {gamma:+.4}, check {:.3} deg", tuned.phase_margin()?);
    Ok(())
}
