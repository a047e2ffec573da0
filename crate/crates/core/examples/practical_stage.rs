//! Step responses of four controllers on the positioning-stage plant.

use reset_control::closedloop::step_response;
use reset_control::design::{practical_loop, PracticalController};

fn main() -> reset_control::Result<()> {
    println!("{:>8} {:>8} {:>10} {:>12}", "loop", "PM", "overshoot", "settling ms");
    for c in PracticalController::ALL {
        let l = practical_loop(c)?;
        let m = step_response(&l, 1.0, 0.05)?.metrics;
        let ts = m.settling_time.map_or(f64::NAN, |t| t * 1e3);
        println!("{:>8} {:>8.1} {:>10.3} {:>12.2}", c.label(), l.phase_margin()?, m.overshoot, ts);
    }
    Ok(())
}
