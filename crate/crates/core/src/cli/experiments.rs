use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::Settings;
use crate::closedloop::{sensitivity_scan, step_response, CrParams, LoopConfig, SensitivityOptions};
use crate::design::{
    design_cglp, gain_study_loops, gain_variation_experiment, guideline_preset, lead_ratio_for_pm, practical_loop,
    solve_gamma_for_pm, sweep_harmonics, sweep_transient, AlphaRule, CglpDesignOptions, PracticalController,
    TransientPreset,
};
use crate::error::{Error, Result};
use crate::frf::{fit_second_order_delay, load_frf, FitWeight};
use crate::hosidf::{hosidf_table, phase_advantage, path_hosidf};
use crate::lti::blocks::{mass_plant, precision_stage};
use crate::lti::{PidParams, TransferFunction};
use crate::numerics::{db, linspace, logspace};
use crate::reset::{CrElement, ResetElement, ResetPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Hosidf,
    Stability,
    Step,
    Sens,
    Dfloop,
    Sweep,
    Design,
    Fit,
    Gainvar,
}

impl Experiment {
    pub const NAMES: &'static [(&'static str, Experiment)] = &[
        ("hosidf", Experiment::Hosidf),
        ("stability", Experiment::Stability),
        ("step", Experiment::Step),
        ("sens", Experiment::Sens),
        ("dfloop", Experiment::Dfloop),
        ("sweep", Experiment::Sweep),
        ("design", Experiment::Design),
        ("fit", Experiment::Fit),
        ("gainvar", Experiment::Gainvar),
    ];

    pub fn name(&self) -> &'static str {
        Self::NAMES.iter().find(|(_, e)| e == self).map_or("", |(n, _)| n)
    }
}

/// Files written by one run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
}

/// Output directory, label and the headline metrics destined for `summary.txt`.
struct Report {
    dir: PathBuf,
    experiment: Experiment,
    label: String,
    summary: Vec<(String, String)>,
    files: Vec<PathBuf>,
}

impl Report {
    fn new(s: &Settings, experiment: Experiment, default_label: &str) -> Result<Self> {
        let dir = s.path("output.dir").unwrap_or_else(|| PathBuf::from("out"));
        let label = s.str("output.label").unwrap_or(default_label).to_string();
        if label.is_empty() || label.contains(['/', '\\']) {
            return Err(s.invalid("output.label", "label must be a plain file-name fragment"));
        }
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, experiment, label, summary: Vec::new(), files: Vec::new() })
    }

    fn add(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    fn file(&mut self, suffix: &str, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(format!("{}_{}.{suffix}", self.experiment.name(), self.label));
        let mut w = BufWriter::new(File::create(&path)?);
        write(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        self.file("csv", write)
    }

    fn finish(mut self) -> Result<Outcome> {
        let path = self.dir.join("summary.txt");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "experiment: {}", self.experiment.name())?;
        writeln!(w, "label: {}", self.label)?;
        for (k, v) in &self.summary {
            writeln!(w, "{k}: {v}")?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(Outcome { files: self.files })
    }
}

pub fn run_experiment(experiment: Experiment, s: &Settings) -> Result<Outcome> {
    match experiment {
        Experiment::Hosidf => hosidf(s),
        Experiment::Stability => stability(s),
        Experiment::Step => step(s),
        Experiment::Sens => sens(s),
        Experiment::Dfloop => dfloop(s),
        Experiment::Sweep => sweep(s),
        Experiment::Design => design(s),
        Experiment::Fit => fit(s),
        Experiment::Gainvar => gainvar(s),
    }
}

fn f3(v: f64) -> String {
    format!("{v:.3}")
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn crossover(s: &Settings) -> Result<f64> {
    Ok(s.number("loop.wc", true)?.unwrap_or(100.0))
}

fn grid(s: &Settings, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    let lo = s.number("grid.w_min", true)?.unwrap_or(lo);
    let hi = s.number("grid.w_max", true)?.unwrap_or(hi);
    let n: usize = s.parsed("grid.points")?.unwrap_or(points);
    if !(hi > lo) {
        return Err(s.invalid("grid.w_max", format!("upper grid frequency {hi} must exceed the lower {lo}")));
    }
    if n < 2 {
        return Err(s.invalid("grid.points", "at least 2 grid points are needed"));
    }
    Ok(logspace(lo, hi, n))
}

fn plant(s: &Settings) -> Result<TransferFunction> {
    #[derive(Clone, Copy)]
    enum Kind {
        Mass,
        Stage,
        File,
    }
    let kind = s.choice("loop.plant", &[("mass", Kind::Mass), ("msd", Kind::Stage), ("file", Kind::File)])?.unwrap_or(Kind::Mass);
    match kind {
        Kind::Mass => Ok(mass_plant()),
        Kind::Stage => Ok(precision_stage()),
        Kind::File => {
            let path = s.path("loop.plant_file").ok_or_else(|| s.invalid("loop.plant", "`file` needs plant_file (--plant-file)"))?;
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                let data = load_frf(&path, None)?;
                fit_second_order_delay(&data, FitWeight::Uniform)?.model.tf()
            } else {
                let text = fs::read_to_string(&path)?;
                text.trim()
                    .parse::<TransferFunction>()
                    .map_err(|e| Error::Parse { path: path.clone(), line: 1, message: e.to_string() })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Preset {
    Guideline,
    Bls,
    Pid,
    Practical(PracticalController),
    GainPid,
    GainCr,
}

const PRESETS: &[(&str, Preset)] = &[
    ("guideline", Preset::Guideline),
    ("bls", Preset::Bls),
    ("pid", Preset::Pid),
    ("pid1", Preset::Practical(PracticalController::Pid1)),
    ("pid2", Preset::Practical(PracticalController::Pid2)),
    ("cglp", Preset::Practical(PracticalController::Cglp)),
    ("cr-cglp", Preset::Practical(PracticalController::CrCglp)),
    ("gain-pid", Preset::GainPid),
    ("gain-cr", Preset::GainCr),
];

const RESET_KEYS: [&str; 6] = ["loop.gamma", "loop.wr", "loop.wf", "loop.alpha", "loop.wl", "loop.wh"];

/// Loop from the preset plus overrides, and its label.
fn build_loop(s: &Settings) -> Result<(LoopConfig, String)> {
    let preset = s.choice("loop.preset", PRESETS)?.unwrap_or(Preset::Guideline);
    let name = PRESETS.iter().find(|(_, p)| *p == preset).map_or("loop", |(n, _)| n).to_string();
    let fixed = !matches!(preset, Preset::Guideline | Preset::Bls | Preset::Pid);
    if fixed {
        for key in ["loop.wc", "loop.plant"] {
            if s.contains(key) {
                return Err(s.invalid(key, format!("preset `{name}` fixes the crossover and plant")));
            }
        }
    }
    let mut l = match preset {
        Preset::Guideline | Preset::Bls => guideline_preset(crossover(s)?, plant(s)?)?,
        Preset::Pid => {
            let wc = crossover(s)?;
            LoopConfig::linear(wc, PidParams::weak_derivative(wc), None, plant(s)?)
        }
        Preset::Practical(c) => practical_loop(c)?,
        Preset::GainPid => gain_study_loops()?.0,
        Preset::GainCr => gain_study_loops()?.1,
    };
    if let Some(z) = s.number("loop.lowpass", true)? {
        l.lowpass = Some(z);
    }
    let wc = l.omega_c;

    if l.cglp.is_none() {
        if let Some(key) = RESET_KEYS.iter().find(|k| s.contains(k)) {
            return Err(s.invalid(key, format!("preset `{name}` has no reset element")));
        }
        if let Some(pm) = s.number("loop.pm", false)? {
            let beta = lead_ratio_for_pm(&l, pm).map_err(|_| s.invalid("loop.pm", format!("no PID lead ratio gives {pm} deg")))?;
            let kp = l.pid.kp;
            l.pid = PidParams { kp, ..PidParams::with_lead_ratio(wc, beta) };
        }
        return Ok((l.normalized()?, name));
    }

    let touched = RESET_KEYS.iter().chain(["loop.pm", "loop.lowpass"].iter()).any(|k| s.contains(k));
    if touched {
        let current_pm = l.phase_margin()?;
        let mut c = l.cglp.expect("reset stage present");
        c.omega_r = s.number("loop.wr", true)?.unwrap_or(c.omega_r);
        c.omega_f = s.number("loop.wf", true)?.unwrap_or(c.omega_f);
        c.alpha = s.number("loop.alpha", true)?.unwrap_or(c.alpha);
        l.cglp = Some(c);
        if s.contains("loop.wl") || s.contains("loop.wh") {
            let cr = l.cr.unwrap_or(CrParams { omega_l: 0.45 * wc, omega_h: 20.0 * wc });
            l.cr = Some(CrParams {
                omega_l: s.number("loop.wl", true)?.unwrap_or(cr.omega_l),
                omega_h: s.number("loop.wh", true)?.unwrap_or(cr.omega_h),
            });
        }
        if let Some(g) = s.number("loop.gamma", false)? {
            l = l.with_gamma(g);
        } else {
            let pm = s.number("loop.pm", false)?.unwrap_or(current_pm);
            let g = solve_gamma_for_pm(&l, pm).map_err(|e| match e {
                Error::Config(m) if s.contains("loop.pm") => s.invalid("loop.pm", m),
                other => other,
            })?;
            l = l.with_gamma(g);
        }
    }
    if preset == Preset::Bls {
        l = l.with_gamma(1.0);
    }
    l.validate()?;
    Ok((l.normalized()?, name))
}

fn describe_loop(r: &mut Report, l: &LoopConfig) -> Result<()> {
    r.add("topology", format!("{:?}", l.topology()));
    r.add("omega_c", f3(l.omega_c));
    r.add("pid", format!("kp={} omega_i={} omega_d={} omega_t={}", sci(l.pid.kp), f3(l.pid.omega_i), f3(l.pid.omega_d), f3(l.pid.omega_t)));
    if let Some(z) = l.lowpass {
        r.add("lowpass", f3(z));
    }
    r.add("plant", l.plant.to_string());
    if let Some(c) = l.cglp {
        r.add("reset", format!("omega_r={} gamma={:.6} alpha={} omega_f={}", f3(c.omega_r), c.gamma, c.alpha, f3(c.omega_f)));
    }
    if let Some(c) = l.cr {
        r.add("cr", format!("omega_l={} omega_h={}", f3(c.omega_l), f3(c.omega_h)));
    }
    r.add("phase_margin_deg", f3(l.phase_margin()?));
    for lint in l.lints() {
        r.add("lint", lint);
    }
    Ok(())
}

fn hosidf(s: &Settings) -> Result<Outcome> {
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Clegg,
        Fore,
        Cglp,
        CrCglp,
    }
    let names = [("clegg", Kind::Clegg), ("fore", Kind::Fore), ("cglp", Kind::Cglp), ("cr-cglp", Kind::CrCglp)];
    let kind = s.choice("hosidf.element", &names)?.unwrap_or(Kind::CrCglp);
    let label = names.iter().find(|(_, k)| *k == kind).map_or("", |(n, _)| n);
    let wc = crossover(s)?;
    let n_max: usize = s.parsed("hosidf.n")?.unwrap_or(5);
    if n_max == 0 {
        return Err(s.invalid("hosidf.n", "harmonic order must be at least 1"));
    }
    let gamma = s.number("loop.gamma", false)?.unwrap_or(0.0);
    let wr = s.number("loop.wr", true)?.unwrap_or(1.2 * wc);
    let wf = s.number("loop.wf", true)?.unwrap_or(20.0 * wc);
    let alpha = s.number("loop.alpha", true)?.unwrap_or(1.0);
    let wl = s.number("loop.wl", true)?.unwrap_or(0.45 * wc);
    let wh = s.number("loop.wh", true)?.unwrap_or(20.0 * wc);
    let path = match kind {
        Kind::Clegg => ResetPath::bare(ResetElement::clegg()),
        Kind::Fore => ResetPath::bare(ResetElement::fore(wr, gamma)?),
        Kind::Cglp => ResetPath::cglp(wr, gamma, alpha, wf)?,
        Kind::CrCglp => {
            let lead = crate::lti::blocks::cglp_lead(wr, alpha, wf)?;
            CrElement::new(ResetElement::fore(wr, gamma)?, wl, wh)?.with_shaping(lead).path()?
        }
    };
    let omegas = grid(s, wc / 100.0, wc * 100.0, 121)?;
    let table = hosidf_table(&path, &omegas, n_max)?;
    let mut r = Report::new(s, Experiment::Hosidf, label)?;
    r.csv(|w| table.write_csv(w))?;
    r.add("element", label);
    r.add("harmonics", n_max);
    let h1 = path_hosidf(&path, wc, 1)?;
    r.add("h1_at_wc_db", f3(db(h1.norm())));
    r.add("h1_at_wc_phase_deg", f3(h1.arg().to_degrees()));
    if kind != Kind::Clegg {
        r.add("phase_advantage_deg", f3(phase_advantage(&path, wc)?));
    }
    if !table.gaps.is_empty() {
        r.add("singular_frequencies", table.gaps.len());
    }
    r.finish()
}

fn stability(s: &Settings) -> Result<Outcome> {
    let (l, label) = build_loop(s)?;
    let report = l.hbeta(&grid(s, l.omega_c / 1000.0, l.omega_c * 1000.0, 600)?)?;
    let mut r = Report::new(s, Experiment::Stability, &label)?;
    r.csv(|w| report.write_csv(w))?;
    describe_loop(&mut r, &l)?;
    r.add("hbeta_satisfied", report.satisfied);
    r.add("theta1_deg", f3(report.theta1));
    r.add("theta2_deg", f3(report.theta2));
    r.add("lower_margin_deg", f3(report.lower_margin));
    r.add("upper_margin_deg", f3(report.upper_margin));
    r.add("spread_margin_deg", f3(report.spread_margin));
    r.add("violating_frequencies", report.violating.len());
    r.finish()
}

fn step(s: &Settings) -> Result<Outcome> {
    let (l, label) = build_loop(s)?;
    let duration = s.number("sim.duration", true)?.unwrap_or(300.0 / l.omega_c);
    let amplitude = s.number("sim.amplitude", true)?.unwrap_or(1.0);
    let resp = step_response(&l, amplitude, duration)?;
    let mut r = Report::new(s, Experiment::Step, &label)?;
    r.csv(|w| resp.trace.write_csv(w))?;
    describe_loop(&mut r, &l)?;
    let m = resp.metrics;
    r.add("overshoot", format!("{:.6}", m.overshoot));
    r.add("peak_time_s", sci(m.peak_time));
    r.add("settling_time_s", m.settling_time.map_or("not settled".to_string(), sci));
    r.add("final_error", sci(m.final_error));
    r.add("resets", resp.trace.resets.len());
    r.add("suppressed_resets", resp.trace.suppressed_resets);
    r.finish()
}

fn sens(s: &Settings) -> Result<Outcome> {
    let (l, label) = build_loop(s)?;
    let omegas = grid(s, l.omega_c / 10.0, l.omega_c * 10.0, 25)?;
    let curve = sensitivity_scan(&l, &omegas, &SensitivityOptions::default())?;
    let mut r = Report::new(s, Experiment::Sens, &label)?;
    r.csv(|w| curve.write_csv(w))?;
    describe_loop(&mut r, &l)?;
    let (w, v) = curve.peak();
    r.add("peak_omega", f3(w));
    r.add("peak_db", f3(db(v)));
    r.add("unsettled_points", curve.settled.iter().filter(|x| !**x).count());
    r.finish()
}

fn dfloop(s: &Settings) -> Result<Outcome> {
    let (l, label) = build_loop(s)?;
    let df = l.df_open_loop(&grid(s, l.omega_c / 100.0, l.omega_c * 100.0, 200)?)?;
    let mut r = Report::new(s, Experiment::Dfloop, &label)?;
    r.csv(|w| df.write_csv(w))?;
    describe_loop(&mut r, &l)?;
    r.add("crossover", f3(df.crossover));
    r.finish()
}

fn sweep(s: &Settings) -> Result<Outcome> {
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Transient,
        Harmonics,
    }
    let kind = s.choice("sweep.kind", &[("transient", Kind::Transient), ("harmonics", Kind::Harmonics)])?.unwrap_or(Kind::Transient);
    let wc = crossover(s)?;
    if kind == Kind::Harmonics {
        let gamma = s.number("sweep.gamma", false)?.or(s.number("loop.gamma", false)?).unwrap_or(-1.0);
        let ratios = s.list("sweep.ratios")?.unwrap_or_else(|| linspace(0.5, 2.0, 7));
        if ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(s.invalid("sweep.ratios", "ratios must be positive"));
        }
        let rows = sweep_harmonics(gamma, &ratios, wc)?;
        let mut r = Report::new(s, Experiment::Sweep, "harmonics")?;
        r.csv(|w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["omega_r_ratio", "gamma", "third_harmonic_integral", "phase_advantage_deg", "max_phase_advantage_deg"])?;
            for row in &rows {
                c.write_record([
                    format!("{}", row.omega_r_ratio),
                    format!("{gamma}"),
                    format!("{:.9e}", row.third_harmonic_integral),
                    format!("{:.6}", row.phase_advantage),
                    format!("{:.6}", row.max_phase_advantage),
                ])?;
            }
            c.flush()?;
            Ok(())
        })?;
        r.add("gamma", gamma);
        r.add("ratios", ratios.len());
        let monotone = rows.windows(2).all(|w| w[1].third_harmonic_integral <= w[0].third_harmonic_integral);
        r.add("integral_monotone_decreasing", monotone);
        return r.finish();
    }

    let mut preset = TransientPreset::mass(wc);
    if s.contains("loop.plant") {
        preset.plant = plant(s)?;
    }
    preset.duration = s.number("sim.duration", true)?.unwrap_or(300.0 / wc);
    let pms = s.list("sweep.pm")?.unwrap_or_else(|| vec![10.0, 14.0, 18.0, 22.0]);
    let wls = s.list("sweep.wl")?.unwrap_or_else(|| vec![0.1, 0.4, 0.7, 1.0]);
    if wls.iter().any(|w| !(*w > 0.0)) {
        return Err(s.invalid("sweep.wl", "ratios must be positive"));
    }
    let result = sweep_transient(&preset, &pms, &wls)?;
    let mut r = Report::new(s, Experiment::Sweep, "transient")?;
    r.csv(|w| result.write_csv(w))?;
    r.add("cells", result.cells.len());
    r.add("failed_cells", result.cells.iter().filter(|c| c.failed()).count());
    if let Some(m) = result.linear {
        r.add("bls_overshoot", format!("{:.6}", m.overshoot));
        r.add("bls_settling_s", m.settling_time.map_or("not settled".to_string(), sci));
    }
    if let Some(c) = result.fastest_settling() {
        r.add("fastest_settling", format!("pm={} wl_ratio={} t={}", c.pm, c.wl_ratio, sci(c.metrics.and_then(|m| m.settling_time).unwrap_or(f64::NAN))));
    }
    match result.fit {
        Some(f) => {
            r.add("plane_fit", format!("c_log={:.6} c_pm={:.6} c_0={:.6}", f.c_log, f.c_pm, f.c_0));
            r.add("plane_fit_rms", format!("{:.6}", f.rms));
            r.add("plane_fit_samples", f.samples);
        }
        None => r.add("plane_fit", "not enough overshooting cells"),
    }
    r.finish()
}

fn design(s: &Settings) -> Result<Outcome> {
    let wc = crossover(s)?;
    let pa = s.number("design.pa", true)?.ok_or_else(|| Error::Config("design needs a target phase advantage (--pa)".into()))?;
    let rule = s
        .choice("design.alpha", &[("unity", AlphaRule::Unity), ("unit-gain", AlphaRule::UnitGainAtCrossover)])?
        .unwrap_or(AlphaRule::Unity);
    let cr = match (s.number("loop.wl", true)?, s.number("loop.wh", true)?) {
        (None, None) => None,
        (wl, wh) => Some(CrParams { omega_l: wl.unwrap_or(0.45 * wc), omega_h: wh.unwrap_or(20.0 * wc) }),
    };
    let opts = CglpDesignOptions {
        omega_r_ratio: s.number("design.wr_ratio", true)?.unwrap_or(1.2),
        omega_f_ratio: s.number("design.wf_ratio", true)?.unwrap_or(20.0),
        alpha: rule,
        cr,
    };
    let d = design_cglp(wc, pa, &opts)?;
    let path = d.path()?;
    let omegas = grid(s, wc / 100.0, wc * 100.0, 200)?;
    let mut r = Report::new(s, Experiment::Design, if cr.is_some() { "cr-cglp" } else { "cglp" })?;
    r.csv(|w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["omega", "mag_db", "phase_deg", "phase_advantage_deg"])?;
        for &om in &omegas {
            let h = path_hosidf(&path, om, 1)?;
            c.write_record([
                format!("{om:.9e}"),
                format!("{:.9}", db(h.norm())),
                format!("{:.9}", h.arg().to_degrees()),
                format!("{:.9}", phase_advantage(&path, om)?),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    r.add("omega_c", f3(wc));
    r.add("target_phase_advantage_deg", f3(pa));
    r.add("gamma", format!("{:.6}", d.gamma));
    r.add("alpha", format!("{:.6}", d.alpha));
    r.add("omega_r", f3(d.omega_r));
    r.add("omega_ra", f3(d.omega_ra()));
    r.add("omega_f", f3(d.omega_f));
    r.add("phase_advantage_deg", f3(d.phase_advantage));
    r.add("gain_flatness_db", f3(d.gain_flatness_db));
    r.finish()
}

fn fit(s: &Settings) -> Result<Outcome> {
    let path = s.path("fit.frf").ok_or_else(|| Error::Config("fit needs a frequency-response file (--frf)".into()))?;
    let weight = s
        .choice("fit.weight", &[("uniform", FitWeight::Uniform), ("low-frequency", FitWeight::LowFrequency)])?
        .unwrap_or(FitWeight::Uniform);
    let data = load_frf(&path, None)?;
    let report = fit_second_order_delay(&data, weight)?;
    let m = report.model;
    let tf = m.tf()?;
    let label = Path::new(&path).file_stem().map_or("frf".to_string(), |x| x.to_string_lossy().into_owned());
    let mut r = Report::new(s, Experiment::Fit, &label)?;
    r.csv(|w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["freq_hz", "meas_mag_db", "meas_phase_deg", "model_mag_db", "model_phase_deg"])?;
        for p in data.points() {
            let h = m.response(p.omega());
            c.write_record([
                format!("{:.9e}", p.freq_hz),
                format!("{:.9}", db(p.response.norm())),
                format!("{:.9}", p.response.arg().to_degrees()),
                format!("{:.9}", db(h.norm())),
                format!("{:.9}", h.arg().to_degrees()),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    r.file("tf", |w| Ok(writeln!(w, "{tf}")?))?;
    r.add("model", &tf);
    r.add("gain", sci(m.gain));
    r.add("damping", sci(m.damping));
    r.add("stiffness", sci(m.stiffness));
    r.add("delay_s", sci(m.delay));
    r.add("natural_frequency", sci(m.natural_frequency()));
    r.add("damping_ratio", sci(m.damping_ratio()));
    r.add("residual", sci(report.residual));
    r.add("initial_residual", sci(report.initial_residual));
    r.add("double_integrator", report.degenerate);
    if let Some(w) = &report.warning {
        r.add("warning", w);
    }
    r.finish()
}

fn gainvar(s: &Settings) -> Result<Outcome> {
    let delta = s.number("gainvar.delta_db", false)?.unwrap_or(5.0);
    let loops: Vec<(LoopConfig, String)> = if s.contains("loop.preset") {
        vec![build_loop(s)?]
    } else {
        let (pid, cr) = gain_study_loops()?;
        vec![(pid, "gain-pid".into()), (cr, "gain-cr".into())]
    };
    let label = if loops.len() == 1 { loops[0].1.clone() } else { "gain-study".to_string() };
    let rows = loops.iter().map(|(l, name)| gain_variation_experiment(l, delta).map(|g| (name.clone(), l.topology(), g))).collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(s, Experiment::Gainvar, &label)?;
    r.csv(|w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["loop", "delta_db", "crossover_before", "crossover_after", "pm_before_deg", "pm_after_deg", "phase_slope_deg_per_decade"])?;
        for (name, _, g) in &rows {
            c.write_record([
                name.clone(),
                format!("{}", g.delta_db),
                format!("{:.6}", g.crossover_before),
                format!("{:.6}", g.crossover_after),
                format!("{:.6}", g.pm_before),
                format!("{:.6}", g.pm_after),
                format!("{:.6}", g.phase_slope),
            ])?;
        }
        c.flush()?;
        Ok(())
    })?;
    r.add("delta_db", delta);
    for (name, topo, g) in &rows {
        let trend = if g.pm_after > g.pm_before { "increases" } else if g.pm_after < g.pm_before { "decreases" } else { "unchanged" };
        r.add(
            name,
            format!(
                "{topo:?}: crossover {} -> {} rad/s, PM {} -> {} deg ({trend}), phase slope {} deg/decade",
                f3(g.crossover_before),
                f3(g.crossover_after),
                f3(g.pm_before),
                f3(g.pm_after),
                f3(g.phase_slope)
            ),
        );
    }
    r.finish()
}
