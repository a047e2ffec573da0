//! Step-response overshoot of CR-CgLp loops over phase margin and the CR
//! corner, with a plane fitted to ln(overshoot).

use reset_control::design::{overshoot_estimate, sweep_transient, TransientPreset};

fn main() -> reset_control::Result<()> {
    let preset = TransientPreset::mass(100.0);
    let pms = [10.0, 14.0, 18.0, 22.0];
    let ratios = [0.1, 0.4, 0.7, 1.0];
    let sweep = sweep_transient(&preset, &pms, &ratios)?;

    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "PM", "wl/wc", "gamma", "overshoot", "estimate");
    for c in &sweep.cells {
        let os = c.metrics.map_or(f64::NAN, |m| m.overshoot);
        println!("{:>6} {:>8} {:>10.4} {:>10.4} {:>10.4}", c.pm, c.wl_ratio, c.gamma.unwrap_or(f64::NAN), os, overshoot_estimate(c.wl_ratio, c.pm));
    }
    if let Some(f) = sweep.fit {
        println!("ln(OS) = {:.3} ln(wl/wc) + {:.4} PM + {:.3}   rms {:.4} over {} cells", f.c_log, f.c_pm, f.c_0, f.rms, f.samples);
    }
    if let Some(l) = sweep.linear {
        println!("without reset: overshoot {:.3}", l.overshoot);
    }
    Ok(())
}
