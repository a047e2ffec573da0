//! Third-harmonic content below crossover against the phase lead still available,
//! as the reset corner moves relative to the crossover.

use reset_control::design::sweep_harmonics;
use reset_control::numerics::linspace;

fn main() -> reset_control::Result<()> {
    let rows = sweep_harmonics(-1.0, &linspace(0.5, 2.0, 16), 100.0)?;
    println!("{:>8} {:>14} {:>10}", "wr/wc", "integral |H3|", "max PA");
    for r in rows {
        println!("{:>8.2} {:>14.3} {:>10.2}", r.omega_r_ratio, r.third_harmonic_integral, r.max_phase_advantage);
    }
    Ok(())
}
