//! End-to-end pipeline runs at desk scale.

use degiorgi_iss::backstepping::{
    compatible_initial_condition, simulate_closed_loop, simulate_open_loop, solve_kernel, target_residual,
    Coefficient, ReactionDiffusionParams,
};
use degiorgi_iss::burgers::{
    simulate, BurgersParams, ForcingSpec, InitialConditionSpec, RunSettings, SignalSpec, SpatialProfile,
    TemporalProfile,
};
use degiorgi_iss::harness::{self, parse_config, RawConfig, RunMode};
use degiorgi_iss::iss::{evaluate_lemma5, level_set_profile};
use degiorgi_iss::numerics::l2_norm;
use degiorgi_iss::{make_grid, Error, Execution};

const CANONICAL: &str = include_str!("../../../configs/burgers_canonical.cfg");

fn with(base: &str, extra: &str) -> String {
    format!("{base}{extra}\n")
}

#[test]
fn canonical_theorem1_pipeline() {
    let cfg = parse_config(CANONICAL).unwrap();
    let out = harness::execute(&cfg, RunMode::Verify, None, Execution::Parallel).unwrap();
    let t1 = &out.reports[0];
    let a = t1.admissibility.unwrap();
    // 0.2 + 4√2 · 0.05
    assert!((a.value - (0.2 + 0.2 * 2f64.sqrt())).abs() < 1e-15);
    assert!(a.pass);
    assert!(t1.satisfied && t1.min_margin > 0.0);
    // worst case is t = 0, where the margin is ||u0||² = B(7, 7) = 1/12012
    assert!((t1.min_margin - 1.0 / 12012.0).abs() < 1e-9);
    assert!(out.passes());
}

#[test]
fn unforced_solution_decays_like_lemma5() {
    let params = BurgersParams::new(1.0, 1.0).unwrap();
    let u = simulate(
        &params,
        &InitialConditionSpec::Bump { amplitude: 1.0 },
        &SignalSpec::Zero,
        &ForcingSpec::Zero,
        &RunSettings::default(),
        make_grid(401).unwrap(),
    )
    .unwrap();
    let r = evaluate_lemma5(&u, l2_norm(u.initial()), &params);
    assert!(r.satisfied);
    assert!(r.records[1..].iter().all(|x| x.margin > 0.0));
}

#[test]
fn nu_sweep_flips_admissibility() {
    // sup|d| + 4√2 sup|f| = 0.3 + 0.2828 = 0.5828: passes μ/ν = 1, fails μ/ν = 0.5
    let text = CANONICAL.replace("disturbance.amplitude = 0.1", "disturbance.amplitude = 0.15");
    let text = with(&text, "n_nodes = 101\ndt = 1e-4\nt_end = 0.5");
    let raw = RawConfig::parse(&text).unwrap();
    let values: Vec<String> = ["0.5", "1", "2"].iter().map(|s| s.to_string()).collect();
    let rows = harness::sweep(&raw, "nu", &values, Execution::Parallel).unwrap();
    let pass: Vec<bool> = rows.iter().map(|r| r.pass()).collect();
    assert_eq!(pass, vec![true, true, false]);
    let last = rows[2].result.as_ref().unwrap();
    let t1 = last.iter().find(|c| c.name == "theorem1").unwrap();
    assert!(t1.satisfied && !t1.pass);
}

#[test]
fn n_nodes_sweep_is_grid_independent() {
    let raw = RawConfig::parse(&with(CANONICAL, "t_end = 0.5")).unwrap();
    let values: Vec<String> = ["401", "101", "201"].iter().map(|s| s.to_string()).collect();
    let rows = harness::sweep(&raw, "n_nodes", &values, Execution::Parallel).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![101.0, 201.0, 401.0]);
    let margins: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap()[0].min_margin).collect();
    for m in &margins {
        assert!((m - margins[2]).abs() <= 1e-6 * margins[2], "{margins:?}");
    }
    assert!(rows.iter().all(|r| r.pass()));
}

#[test]
fn splitting_a_level_set_vanishes_at_k_star() {
    let text = CANONICAL.replace("system = burgers", "system = burgers_split_a").replace(
        "checks = theorem1, theorem2",
        "checks = lemma4, lemma5",
    );
    let cfg = parse_config(&text).unwrap();
    let out = harness::execute(&cfg, RunMode::Verify, None, Execution::Parallel).unwrap();
    assert!(out.passes());
    let w = out.trajectory("w").unwrap();
    let t_end = cfg.settings.t_end;
    let k_star = cfg.disturbance.sup_abs(t_end).max(0.0) + 4.0 * 2f64.sqrt() * cfg.forcing.sup_abs(t_end);
    let h = w.grid().spacing();
    let p = level_set_profile(w, &[k_star - h, k_star, k_star + h]).unwrap();
    assert_eq!(p.phi[1], 0.0);
    assert_eq!(p.phi[2], 0.0);
}

fn plant() -> ReactionDiffusionParams {
    ReactionDiffusionParams::new(1.0, Coefficient::constant(-10.0), 1.0).unwrap()
}

#[test]
fn feedback_stabilizes_what_open_loop_cannot() {
    let params = plant();
    let grid = make_grid(101).unwrap();
    let k = solve_kernel(&params, grid).unwrap();
    let u0 = compatible_initial_condition(&params, 1.0, &k).unwrap();
    let settings = RunSettings::new(1e-3, 3.0).with_stride(100);
    let closed = simulate_closed_loop(&params, &u0, &SignalSpec::Zero, &ForcingSpec::Zero, &k, &settings).unwrap();
    let sup: Vec<f64> = closed.fields().iter().map(|f| f.max_abs()).collect();
    assert!(sup.last().unwrap() < &(1e-3 * sup[0]));
    let open = simulate_open_loop(&params, &u0, &SignalSpec::Zero, &ForcingSpec::Zero, &settings, grid).unwrap();
    let tail = open.fields().last().unwrap().max_abs();
    let mid = open.fields()[open.len() / 2].max_abs();
    assert!(tail > mid);
    let long = RunSettings::new(1e-3, 300.0).with_stride(1000);
    let err = simulate_open_loop(&params, &u0, &SignalSpec::Zero, &ForcingSpec::Zero, &long, grid).unwrap_err();
    assert!(matches!(err, Error::Divergence { time } if time > 3.0 && time < 300.0));
}

#[test]
fn closed_loop_satisfies_target_dynamics() {
    let params = plant();
    let grid = make_grid(401).unwrap();
    let k = solve_kernel(&params, grid).unwrap();
    let u0 = compatible_initial_condition(&params, 1.0, &k).unwrap();
    let d = SignalSpec::RampedCosine { amplitude: 0.05, omega: 1.0 };
    let f = ForcingSpec::separable(0.02, SpatialProfile::Sine { wavenumber: 1 }, TemporalProfile::SinSquared { omega: 1.0 });
    let settings = RunSettings::new(2.5e-5, 0.05).with_stride(1);
    let u = simulate_closed_loop(&params, &u0, &d, &f, &k, &settings).unwrap();
    let res = target_residual(&u, &k, &params, &f).unwrap();
    let worst = res.iter().map(|r| r.1).fold(0.0, f64::max);
    assert!(worst <= 5e-2, "target residual {worst:e}");
    // the corner layer fades: late residuals are far smaller
    let late = res.iter().filter(|r| r.0 >= 0.025).map(|r| r.1).fold(0.0, f64::max);
    assert!(late < 0.1 * worst);
}
