//! Fits a mass-spring-damper with input delay to a frequency response file, or
//! to a synthetic one when no path is given.

use reset_control::frf::{fit_second_order_delay, load_frf, FitWeight, FrfData};
use reset_control::lti::blocks::precision_stage;
use reset_control::numerics::logspace;

fn main() -> reset_control::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(path) => load_frf(path, None)?,
        None => FrfData::from_model("precision_stage", &precision_stage(), &logspace(1.0, 2000.0, 120))?,
    };
    for weight in [FitWeight::Uniform, FitWeight::LowFrequency] {
        let r = fit_second_order_delay(&data, weight)?;
        println!("{weight:?}: {}", r.model);
        println!("  residual {:.3e} (start {:.3e}) after {} iterations", r.residual, r.initial_residual, r.iterations);
        if let Some(w) = r.warning {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
