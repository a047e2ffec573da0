//! Output of a FORE and of the same element wrapped in CR filters under a
//! sinusoid: the bare output jumps at every reset, the CR output does not.

use reset_control::reset::{Chain, CrElement, Excitation, LoopMode, ResetElement, ResetPath, Signal, SimConfig, Simulator};

fn main() -> reset_control::Result<()> {
    let fore = ResetElement::fore(100.0, 0.0)?;
    let paths = [("bare", ResetPath::bare(fore.clone())), ("cr", CrElement::new(fore, 10.0, 1e4)?.path()?)];
    let base = SimConfig::for_corner(1e4, 1.0).step;

    println!("{:>6} {:>12} {:>14} {:>14} {:>8}", "path", "step", "reset jump", "typical", "resets");
    for (name, path) in &paths {
        let chain = Chain::from_path(path)?;
        for refine in [1.0, 2.0, 4.0] {
            let cfg = SimConfig::with_step(base / refine, 2.0);
            let trace = Simulator::new(&chain, LoopMode::Open, Excitation::sine(1.0, 47.0), cfg)?.run()?;
            let s = trace.jump_stats(Signal::U, 1.0);
            println!("{name:>6} {:>12.3e} {:>14.4e} {:>14.4e} {:>8}", base / refine, s.max_reset_jump, s.typical_increment, trace.resets.len());
        }
    }
    Ok(())
}
