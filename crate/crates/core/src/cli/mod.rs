//! Command-line front end: experiments driven by flags or `key = value` config files.

mod experiments;
mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use experiments::{run_experiment, Experiment};
pub use settings::Settings;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "resetctl", version, about = "Analysis, simulation and tuning of reset control loops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Higher-order describing functions of a reset element.
    Hosidf(Flags),
    /// Frequency-domain stability test of a loop.
    Stability(Flags),
    /// Closed-loop step response.
    Step(Flags),
    /// Closed-loop sensitivity from sinusoidal simulations.
    Sens(Flags),
    /// Describing-function open loop.
    Dfloop(Flags),
    /// Parameter sweeps (transient surfaces or harmonic trade-off).
    Sweep(Flags),
    /// Reset factor for a target phase advantage.
    Design(Flags),
    /// Second-order-plus-delay fit of measured frequency-response data.
    Fit(Flags),
    /// Phase margin before and after a loop-gain change.
    Gainvar(Flags),
    /// Run the experiment named by `experiment = ...` in a config file.
    Run {
        #[arg(value_name = "CONFIG")]
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Args, Default)]
struct Flags {
    /// Config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// guideline, bls, pid, pid1, pid2, cglp, cr-cglp, gain-pid or gain-cr.
    #[arg(long)]
    preset: Option<String>,
    /// Crossover frequency, rad/s.
    #[arg(long)]
    wc: Option<f64>,
    /// Target phase margin, degrees.
    #[arg(long)]
    pm: Option<f64>,
    /// Reset factor.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Pre-filter corner of the continuous-reset stage, rad/s.
    #[arg(long)]
    wl: Option<f64>,
    /// Roll-off corner of the pre-filter, rad/s.
    #[arg(long)]
    wh: Option<f64>,
    /// Reset element corner, rad/s.
    #[arg(long)]
    wr: Option<f64>,
    /// Lead-filter pole, rad/s.
    #[arg(long)]
    wf: Option<f64>,
    /// Lead-filter zero as a multiple of the reset corner.
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise low-pass corner, rad/s.
    #[arg(long)]
    lowpass: Option<f64>,
    /// mass, msd or file.
    #[arg(long)]
    plant: Option<String>,
    /// Plant for `--plant file`: FRF CSV (fitted) or transfer-function text.
    #[arg(long)]
    plant_file: Option<PathBuf>,
    /// clegg, fore, cglp or cr-cglp.
    #[arg(long)]
    element: Option<String>,
    /// Highest harmonic order.
    #[arg(long)]
    n: Option<usize>,
    /// Measured frequency-response CSV.
    #[arg(long)]
    frf: Option<PathBuf>,
    /// uniform or low-frequency.
    #[arg(long)]
    weight: Option<String>,
    /// Target phase advantage, degrees.
    #[arg(long)]
    pa: Option<f64>,
    /// Loop-gain change, dB.
    #[arg(long, allow_hyphen_values = true)]
    delta_db: Option<f64>,
    /// transient or harmonics.
    #[arg(long)]
    kind: Option<String>,
    /// Simulated time, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Lower grid frequency, rad/s.
    #[arg(long)]
    w_min: Option<f64>,
    /// Upper grid frequency, rad/s.
    #[arg(long)]
    w_max: Option<f64>,
    /// Grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Label used in output file names.
    #[arg(long)]
    label: Option<String>,
}

impl Flags {
    fn apply(&self, s: &mut Settings) {
        macro_rules! put {
            ($field:ident, $key:literal, $flag:literal) => {
                if let Some(v) = &self.$field {
                    s.set_flag($key, v, $flag);
                }
            };
        }
        macro_rules! put_path {
            ($field:ident, $key:literal, $flag:literal) => {
                if let Some(v) = &self.$field {
                    s.set_flag($key, v.display(), $flag);
                }
            };
        }
        put!(preset, "loop.preset", "preset");
        put!(wc, "loop.wc", "wc");
        put!(pm, "loop.pm", "pm");
        put!(gamma, "loop.gamma", "gamma");
        put!(wl, "loop.wl", "wl");
        put!(wh, "loop.wh", "wh");
        put!(wr, "loop.wr", "wr");
        put!(wf, "loop.wf", "wf");
        put!(alpha, "loop.alpha", "alpha");
        put!(lowpass, "loop.lowpass", "lowpass");
        put!(plant, "loop.plant", "plant");
        put_path!(plant_file, "loop.plant_file", "plant-file");
        put!(element, "hosidf.element", "element");
        put!(n, "hosidf.n", "n");
        put_path!(frf, "fit.frf", "frf");
        put!(weight, "fit.weight", "weight");
        put!(pa, "design.pa", "pa");
        put!(delta_db, "gainvar.delta_db", "delta-db");
        put!(kind, "sweep.kind", "kind");
        put!(duration, "sim.duration", "duration");
        put!(w_min, "grid.w_min", "w-min");
        put!(w_max, "grid.w_max", "w-max");
        put!(points, "grid.points", "points");
        put_path!(out, "output.dir", "out");
        put!(label, "output.label", "label");
    }
}

/// Runs the command line `args` (program name first) and returns the exit code:
/// 0 on success, 2 for invalid input or configuration, 3 for numerical failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) if e.is_input_error() => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            3
        }
    }
}

fn dispatch(cli: Cli) -> Result<experiments::Outcome> {
    let (requested, flags) = match cli.command {
        Command::Hosidf(f) => (Some(Experiment::Hosidf), f),
        Command::Stability(f) => (Some(Experiment::Stability), f),
        Command::Step(f) => (Some(Experiment::Step), f),
        Command::Sens(f) => (Some(Experiment::Sens), f),
        Command::Dfloop(f) => (Some(Experiment::Dfloop), f),
        Command::Sweep(f) => (Some(Experiment::Sweep), f),
        Command::Design(f) => (Some(Experiment::Design), f),
        Command::Fit(f) => (Some(Experiment::Fit), f),
        Command::Gainvar(f) => (Some(Experiment::Gainvar), f),
        Command::Run { file, mut flags } => {
            if flags.config.is_some() {
                return Err(Error::Config("`run` takes the config file as its argument; drop --config".into()));
            }
            flags.config = Some(file);
            (None, flags)
        }
    };
    let mut settings = match &flags.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    flags.apply(&mut settings);
    let declared = settings.choice("experiment", Experiment::NAMES)?;
    let experiment = match (requested, declared) {
        (Some(r), Some(d)) if r != d => {
            return Err(settings.invalid("experiment", format!("config declares `{}` but `{}` was requested", d.name(), r.name())))
        }
        (Some(r), _) => r,
        (None, Some(d)) => d,
        (None, None) => return Err(Error::Config("config file does not name an experiment (`experiment = ...`)".into())),
    };
    run_experiment(experiment, &settings)
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
