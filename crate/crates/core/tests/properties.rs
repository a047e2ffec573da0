//! Closed-form invariants checked on random parameters.

use std::f64::consts::PI;

use proptest::prelude::*;
use reset_control::closedloop::{CglpParams, CrParams, LoopConfig};
use reset_control::design::{design_cglp, guideline_preset, solve_gamma_for_pm, CglpDesignOptions};
use reset_control::hosidf::{path_hosidf, phase_advantage};
use reset_control::lti::blocks::{cglp_lead, cr_postfilter, cr_prefilter, mass_plant, precision_stage};
use reset_control::lti::PidParams;
use reset_control::numerics::{db, linspace, logspace, wrap_deg};
use reset_control::reset::{CrElement, ResetElement, ResetPath};

fn cr_loop(wl_ratio: f64, wh_ratio: f64) -> LoopConfig {
    let wc = 100.0;
    LoopConfig::linear(wc, PidParams::with_lead_ratio(wc, 1.2), None, mass_plant())
        .with_cglp(CglpParams { omega_r: 1.2 * wc, gamma: 1.0, alpha: 1.0, omega_f: 20.0 * wc })
        .with_cr(CrParams { omega_l: wl_ratio * wc, omega_h: wh_ratio * wc })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn even_harmonics_vanish(gamma in -1.0f64..0.99, wr in 1.0f64..1e3, w in 0.1f64..1e4, k in 1usize..4) {
        let path = ResetPath::bare(ResetElement::fore(wr, gamma).unwrap());
        prop_assert_eq!(path_hosidf(&path, w, 2 * k).unwrap().norm(), 0.0);
    }

    #[test]
    fn cr_harmonics_scaled_by_filter_gains(gamma in -1.0f64..0.9, wl in 1.0f64..100.0, w in 0.1f64..1e3, n in 1usize..4) {
        let n = 2 * n + 1;
        let fore = ResetElement::fore(100.0, gamma).unwrap();
        let wh = 1e8;
        let cr = CrElement::new(fore.clone(), wl, wh).unwrap().path().unwrap();
        let bare = ResetPath::bare(fore);
        let l = cr_prefilter(wl, wh).unwrap().freq_response(w).unwrap().norm();
        let r = cr_postfilter(wl).unwrap().freq_response(n as f64 * w).unwrap().norm();
        let h = path_hosidf(&bare, w, n).unwrap().norm();
        let h_cr = path_hosidf(&cr, w, n).unwrap().norm();
        prop_assert!((h_cr - h * l * r).abs() <= 1e-9 * h);
        prop_assert!(l * r < 1.0 && h_cr < h);
    }

    #[test]
    fn cr_describing_function_ignores_lower_corner(gamma in -1.0f64..0.9, w in 1.0f64..1e4) {
        let shaping = cglp_lead(100.0, 1.0, 1500.0).unwrap();
        let values: Vec<_> = logspace(10.0, 100.0, 6)
            .into_iter()
            .map(|wl| {
                let p = CrElement::new(ResetElement::fore(100.0, gamma).unwrap(), wl, 1e8).unwrap().with_shaping(shaping.clone()).path().unwrap();
                path_hosidf(&p, w, 1).unwrap()
            })
            .collect();
        for v in &values[1..] {
            prop_assert!((db(v.norm()) - db(values[0].norm())).abs() <= 0.1);
            prop_assert!(wrap_deg((v.arg() - values[0].arg()).to_degrees()).abs() <= 0.1);
        }
    }

    #[test]
    fn solved_gamma_reproduces_margin(pm in 6.0f64..25.0, wl_ratio in 0.1f64..1.0) {
        let template = cr_loop(wl_ratio, 20.0);
        let gamma = solve_gamma_for_pm(&template, pm).unwrap();
        let tuned = template.with_gamma(gamma).normalized().unwrap();
        let df = tuned.df_open_loop(&logspace(10.0, 1e3, 50)).unwrap();
        prop_assert!((df.phase_margin - pm).abs() <= 0.5, "target {pm}, got {}", df.phase_margin);
    }

    #[test]
    fn designed_advantage_round_trips(pa in 1.0f64..28.0) {
        let d = design_cglp(100.0, pa, &CglpDesignOptions::default()).unwrap();
        prop_assert!((phase_advantage(&d.path().unwrap(), 100.0).unwrap() - pa).abs() <= 0.5);
    }

    #[test]
    fn nested_grids_only_widen_angle_range(wl_ratio in 0.1f64..1.0, gamma in -0.5f64..1.0, points in 10usize..60) {
        let wc = 100.0;
        let l = LoopConfig { pid: PidParams::with_lead_ratio(wc, 3.0), ..cr_loop(wl_ratio, 20.0) }.with_gamma(gamma).normalized().unwrap();
        let coarse = logspace(0.1, 1e5, points);
        let fine = logspace(0.1, 1e5, 2 * points - 1);
        let (a, b) = (l.hbeta(&coarse).unwrap(), l.hbeta(&fine).unwrap());
        prop_assert!(b.theta1 <= a.theta1 + 1e-12 && b.theta2 >= a.theta2 - 1e-12);
        prop_assert!(a.satisfied || !b.satisfied);
    }
}

#[test]
fn describing_phase_is_monotone_in_reset_factor() {
    // A monotone phase means a solved reset factor is the only one in [-1, 1].
    for wr_ratio in [0.8, 1.2, 2.0] {
        let phases: Vec<f64> = linspace(-1.0, 1.0, 2001)
            .into_iter()
            .map(|g| path_hosidf(&ResetPath::cglp(wr_ratio * 100.0, g, 1.0, 2000.0).unwrap(), 100.0, 1).unwrap().arg())
            .collect();
        assert!(phases.windows(2).all(|p| p[1] < p[0]), "ratio {wr_ratio}");
    }
}

#[test]
fn base_linear_preset_has_five_degree_margin() {
    let wc = 100.0;
    let l = LoopConfig::linear(wc, PidParams::weak_derivative(wc), None, mass_plant());
    let pm = 180.0 + l.df_at(wc).unwrap().arg().to_degrees();
    assert!((pm - 5.0).abs() <= 0.5, "{pm}");
}

#[test]
fn guideline_loops_pass_stability_test() {
    for (plant, wc) in [(mass_plant(), 100.0), (precision_stage(), 2.0 * PI * 400.0)] {
        let l = guideline_preset(wc, plant).unwrap();
        assert!(l.hbeta(&logspace(wc * 1e-3, wc * 1e3, 600)).unwrap().satisfied);
    }
}

#[test]
fn remote_cr_filters_leave_stability_angles_unchanged() {
    let wc = 100.0;
    let plain = LoopConfig { cr: None, ..guideline_preset(wc, mass_plant()).unwrap() };
    let grid = logspace(wc * 1e-3, wc * 1e3, 600);
    let reference = plain.hbeta(&grid).unwrap();
    for wl in [0.1, 0.45, 1.0] {
        let r = plain.clone().with_cr(CrParams { omega_l: wl * wc, omega_h: 1e4 * wc }).hbeta(&grid).unwrap();
        assert!((r.theta1 - reference.theta1).abs() <= 0.1);
        assert!((r.theta2 - reference.theta2).abs() <= 0.1);
    }
}
