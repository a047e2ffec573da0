use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn resetctl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resetctl")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "cfg")).collect();
    v.sort();
    v
}

fn summary(dir: &Path) -> String {
    fs::read_to_string(dir.join("summary.txt")).unwrap()
}

fn field(summary: &str, key: &str) -> String {
    summary.lines().find_map(|l| l.strip_prefix(&format!("{key}: "))).unwrap_or_else(|| panic!("no `{key}` in\n{summary}")).to_string()
}

#[test]
fn every_experiment_kind_has_a_bundled_config_that_runs() {
    let mut kinds = Vec::new();
    for cfg in configs() {
        let tmp = tempfile::tempdir().unwrap();
        let out = resetctl(&["run", cfg.to_str().unwrap()], tmp.path());
        assert!(out.status.success(), "{}: {}", cfg.display(), String::from_utf8_lossy(&out.stderr));
        kinds.push(field(&summary(tmp.path()), "experiment"));
    }
    for k in ["hosidf", "stability", "step", "sens", "dfloop", "sweep", "design", "fit", "gainvar"] {
        assert!(kinds.iter().any(|x| x == k), "no bundled config for {k}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [vec!["step", "--preset", "guideline", "--wc", "100"], vec!["sweep", "--kind", "harmonics"], vec!["hosidf", "--element", "cr-cglp"]] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert!(resetctl(&args, a.path()).status.success());
        assert!(resetctl(&args, b.path()).status.success());
        let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for n in names {
            assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?} differs for {args:?}");
        }
    }
}

#[test]
fn step_reports_overshoot_and_settling() {
    let tmp = tempfile::tempdir().unwrap();
    let out = resetctl(&["step", "--preset", "guideline", "--wc", "100"], tmp.path());
    assert!(out.status.success());
    let s = summary(tmp.path());
    let os: f64 = field(&s, "overshoot").parse().unwrap();
    assert!((0.0..1.0).contains(&os));
    field(&s, "settling_time_s").parse::<f64>().unwrap();
    let trace = fs::read_to_string(tmp.path().join("step_guideline.csv")).unwrap();
    assert!(trace.starts_with("t,e,x1,x2,u,y,uc\n"));
}

#[test]
fn clegg_even_harmonics_are_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(resetctl(&["hosidf", "--element", "clegg", "--n", "5"], tmp.path()).status.success());
    let mut rdr = csv::Reader::from_path(tmp.path().join("hosidf_clegg.csv")).unwrap();
    let mut even = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let n: usize = rec[1].parse().unwrap();
        assert!(n <= 5);
        if n.is_multiple_of(2) {
            assert_eq!(&rec[2], "-inf");
            even += 1;
        } else {
            assert!(rec[2].parse::<f64>().unwrap().is_finite());
        }
    }
    assert!(even > 0);
}

#[test]
fn fit_recovers_stage_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let frf = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/spyder.csv");
    assert!(resetctl(&["fit", "--frf", frf.to_str().unwrap()], tmp.path()).status.success());
    let s = summary(tmp.path());
    for (key, truth) in [("gain", 9836.0), ("damping", 8.737), ("stiffness", 7376.0), ("delay_s", 1e-4)] {
        let v: f64 = field(&s, key).parse().unwrap();
        assert!(((v - truth) / truth).abs() < 0.01, "{key} = {v}");
    }
    let text = fs::read_to_string(tmp.path().join("fit_spyder.tf")).unwrap();
    let tf: reset_control::lti::TransferFunction = text.trim().parse().unwrap();
    assert!((tf.delay() - 1e-4).abs() < 1e-6);
}

#[test]
fn config_errors_exit_2_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "experiment = step\n\n[loop]\nwc = 100\nwidth = 3\n").unwrap();
    let out = resetctl(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:5:"), "{err}");

    fs::write(&cfg, "experiment = step\n[loop]\nwc = -1\n").unwrap();
    let out = resetctl(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg:3:"));

    let out = resetctl(&["step", "--wc", "fast"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = resetctl(&["stability", "--preset", "pid1", "--wc", "10"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3_with_module() {
    let tmp = tempfile::tempdir().unwrap();
    let out = resetctl(&["design", "--pa", "49", "--wc", "100"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[design]"));
}
