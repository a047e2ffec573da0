//! Harmonic content of a Clegg integrator and of its CR counterpart, closed form
//! next to the values measured from simulated steady-state responses.

use reset_control::hosidf::{hosidf_empirical, path_hosidf, EmpiricalOptions};
use reset_control::numerics::db;
use reset_control::reset::{CrElement, ResetElement, ResetPath};

fn main() -> reset_control::Result<()> {
    let clegg = ResetPath::bare(ResetElement::clegg());
    let cr = CrElement::new(ResetElement::clegg(), 0.1, 1e3)?.path()?;
    let omega = 1.0;
    let measured = hosidf_empirical(&clegg, omega, 5, &EmpiricalOptions::default())?;

    println!("Clegg integrator at {omega} rad/s");
    println!("{:>3} {:>12} {:>10} {:>12} {:>10} {:>12}", "n", "|H| dB", "phase", "sim dB", "sim phase", "CR |H| dB");
    for n in 1..=5 {
        let h = path_hosidf(&clegg, omega, n)?;
        let h_cr = path_hosidf(&cr, omega, n)?;
        let m = measured[n - 1];
        println!(
            "{n:>3} {:>12.3} {:>10.3} {:>12.3} {:>10.3} {:>12.3}",
            db(h.norm()),
            h.arg().to_degrees(),
            db(m.norm()),
            m.arg().to_degrees(),
            db(h_cr.norm())
        );
    }
    Ok(())
}
