//! Simulated error-to-reference ratio of the guideline CR-CgLp loop and of its
//! linear counterpart.

use reset_control::closedloop::{sensitivity_scan, SensitivityOptions};
use reset_control::design::guideline_preset;
use reset_control::lti::blocks::mass_plant;
use reset_control::numerics::{db, logspace};

fn main() -> reset_control::Result<()> {
    let cr = guideline_preset(100.0, mass_plant())?;
    let linear = cr.clone().with_gamma(1.0).normalized()?;
    let omegas = logspace(20.0, 500.0, 15);
    let opts = SensitivityOptions::default();
    let a = sensitivity_scan(&cr, &omegas, &opts)?;
    let b = sensitivity_scan(&linear, &omegas, &opts)?;

    println!("{:>10} {:>12} {:>12}", "omega", "CR-CgLp dB", "linear dB");
    for ((w, x), y) in omegas.iter().zip(&a.values).zip(&b.values) {
        println!("{w:>10.2} {:>12.2} {:>12.2}", db(*x), db(*y));
    }
    println!("peaks: {:.2} dB vs {:.2} dB", db(a.peak().1), db(b.peak().1));
    Ok(())
}
