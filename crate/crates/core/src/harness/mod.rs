//! Scenario files, end-to-end runs, parameter sweeps and CSV artifacts.
//!
//! A run goes compatibility check → kernels (when the system needs them) →
//! simulation → requested evaluators. [`execute`] is pure; [`write_artifacts`]
//! serializes an [`Outcome`] into a directory. All numbers are written as
//! `{:.16e}` (17 significant digits), so repeated runs are byte-identical.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::backstepping::{
    check_closed_loop_compatibility, compatible_initial_condition, forward_transform, gain_constants,
    simulate_closed_loop, simulate_open_loop, simulate_target_split, solve_inverse_kernel_with, solve_kernel_with,
    GainConstants, Kernel, ReactionDiffusionParams,
};
use crate::burgers::{
    check_compatibility, simulate, simulate_splitting_a, simulate_splitting_b, BurgersParams, CompatibilityReport,
    InitialConditionSpec, COMPATIBILITY_TOL,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::iss::{
    admissibility_theorem1, admissibility_theorem2, evaluate_lemma4, evaluate_lemma5, evaluate_lemma6,
    evaluate_lemma7, evaluate_prop2, evaluate_theorem1, evaluate_theorem2, linf_decay, lyapunov_lp_decay,
    BoundReport, Tolerance,
};
use crate::numerics::{l2_norm, make_grid, Trajectory};

pub use config::{parse_config, InitialData, RawConfig, ScenarioConfig, SystemKind, NUMERIC_KEYS};

/// Whether evaluators run after the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Simulate,
    Verify,
}

#[derive(Debug, Clone)]
pub struct KernelSet {
    pub k: Kernel,
    pub l: Option<Kernel>,
    pub gains: Option<GainConstants>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub system: SystemKind,
    /// Named trajectories: `u`, or `w`/`v` for the splittings, or `g`/`h`.
    pub trajectories: Vec<(&'static str, Trajectory)>,
    pub reports: Vec<BoundReport>,
    pub compatibility: Option<CompatibilityReport>,
    pub kernels: Option<KernelSet>,
}

impl Outcome {
    /// True when every requested check passed (vacuously true with none).
    pub fn passes(&self) -> bool {
        self.reports.iter().all(|r| r.passes())
    }

    pub fn trajectory(&self, name: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|(n, _)| *n == name).map(|(_, t)| t)
    }
}

fn burgers_params(cfg: &ScenarioConfig) -> Result<BurgersParams> {
    BurgersParams::new(cfg.mu, cfg.nu)
}

fn rd_params(cfg: &ScenarioConfig) -> Result<ReactionDiffusionParams> {
    ReactionDiffusionParams::new(cfg.mu, cfg.a, cfg.nu)
}

fn plain_initial(cfg: &ScenarioConfig) -> &InitialConditionSpec {
    match &cfg.initial {
        InitialData::Spec(s) => s,
        InitialData::Compatible { .. } => unreachable!("rejected by the parser for Burgers systems"),
    }
}

fn resolve_initial(cfg: &ScenarioConfig, params: &ReactionDiffusionParams, k: &Kernel) -> Result<InitialConditionSpec> {
    match &cfg.initial {
        InitialData::Spec(s) => Ok(s.clone()),
        InitialData::Compatible { amplitude } => compatible_initial_condition(params, *amplitude, k),
    }
}

fn tolerate(report: BoundReport, tol: Option<f64>) -> BoundReport {
    match tol {
        Some(t) => report.with_tol(Tolerance::Absolute(t)),
        None => report,
    }
}

/// Kernels for a reaction-diffusion scenario; `with_inverse` adds l and the
/// gain constants.
pub fn synthesize_kernels(cfg: &ScenarioConfig, with_inverse: bool, exec: Execution) -> Result<KernelSet> {
    if !cfg.system.is_reaction_diffusion() {
        return Err(Error::config(None, "system", format!("system `{}` has no kernels", cfg.system)));
    }
    let params = rd_params(cfg)?;
    let grid = make_grid(cfg.n_nodes)?;
    let k = solve_kernel_with(&params, grid, exec)?;
    if !with_inverse {
        return Ok(KernelSet { k, l: None, gains: None });
    }
    let l = solve_inverse_kernel_with(&params, grid, exec)?;
    let gains = gain_constants(&k, &l);
    Ok(KernelSet {
        k,
        l: Some(l),
        gains: Some(gains),
    })
}

/// Runs one scenario. Smallness conditions use suprema over all t >= 0.
/// `tol` overrides every report tolerance with an absolute one; `None`
/// keeps the config value, then the per-estimate defaults.
pub fn execute(cfg: &ScenarioConfig, mode: RunMode, tol: Option<f64>, exec: Execution) -> Result<Outcome> {
    let tol = tol.or(cfg.tol);
    let verify = mode == RunMode::Verify;
    let grid = make_grid(cfg.n_nodes)?;
    let settings = &cfg.settings;
    let (d, f) = (&cfg.disturbance, &cfg.forcing);
    let wants = |name: &str| verify && cfg.checks.iter().any(|c| c == name);
    let mut reports = Vec::new();

    let outcome = match cfg.system {
        SystemKind::Burgers => {
            let params = burgers_params(cfg)?;
            let u0 = plain_initial(cfg);
            let compat = check_compatibility(u0, d, f).into_result()?;
            let u = simulate(&params, u0, d, f, settings, grid)?;
            let u0_l2 = l2_norm(u.initial());
            if wants("theorem1") {
                let a = admissibility_theorem1(d, f, &params, f64::INFINITY);
                reports.push(evaluate_theorem1(&u, u0_l2, &params).with_admissibility(a));
            }
            if wants("theorem2") {
                let a = admissibility_theorem2(d, &params, f64::INFINITY);
                reports.push(evaluate_theorem2(&u, u0_l2, &params, cfg.eps)?.with_admissibility(a));
            }
            Outcome {
                system: cfg.system,
                trajectories: vec![("u", u)],
                reports: Vec::new(),
                compatibility: Some(compat),
                kernels: None,
            }
        }
        SystemKind::BurgersSplitA | SystemKind::BurgersSplitB => {
            let params = burgers_params(cfg)?;
            let u0 = plain_initial(cfg);
            let compat = check_compatibility(u0, d, f).into_result()?;
            let split_a = cfg.system == SystemKind::BurgersSplitA;
            let (w, v) = if split_a {
                simulate_splitting_a(&params, u0, d, f, settings, grid)?
            } else {
                simulate_splitting_b(&params, u0, d, f, settings, grid)?
            };
            let u0_l2 = l2_norm(v.initial());
            if split_a {
                if wants("lemma4") {
                    reports.push(evaluate_lemma4(&w, &params));
                }
                if wants("lemma5") {
                    let a = admissibility_theorem1(d, f, &params, f64::INFINITY);
                    reports.push(evaluate_lemma5(&v, u0_l2, &params).with_admissibility(a));
                }
            } else {
                if wants("lemma6") {
                    reports.push(evaluate_lemma6(&w, &params));
                }
                if wants("lemma7") {
                    let a = admissibility_theorem2(d, &params, f64::INFINITY);
                    reports.push(evaluate_lemma7(&v, u0_l2, &params, cfg.eps)?.with_admissibility(a));
                }
            }
            Outcome {
                system: cfg.system,
                trajectories: vec![("w", w), ("v", v)],
                reports: Vec::new(),
                compatibility: Some(compat),
                kernels: None,
            }
        }
        SystemKind::ClosedLoop => {
            let params = rd_params(cfg)?;
            let kernels = synthesize_kernels(cfg, true, exec)?;
            let u0 = resolve_initial(cfg, &params, &kernels.k)?;
            let compat = check_closed_loop_compatibility(&params, &u0, d, f, &kernels.k)?.into_result()?;
            let u = simulate_closed_loop(&params, &u0, d, f, &kernels.k, settings)?;
            if wants("prop2") {
                let gains = kernels.gains.expect("inverse kernel requested");
                reports.push(evaluate_prop2(&u, u.initial().max_abs(), &gains, &params));
            }
            Outcome {
                system: cfg.system,
                trajectories: vec![("u", u)],
                reports: Vec::new(),
                compatibility: Some(compat),
                kernels: Some(kernels),
            }
        }
        SystemKind::OpenLoop => {
            let params = rd_params(cfg)?;
            let (u0, kernels) = match cfg.initial {
                InitialData::Spec(ref s) => (s.clone(), None),
                InitialData::Compatible { .. } => {
                    let ks = synthesize_kernels(cfg, false, exec)?;
                    (resolve_initial(cfg, &params, &ks.k)?, Some(ks))
                }
            };
            let u = simulate_open_loop(&params, &u0, d, f, settings, grid)?;
            Outcome {
                system: cfg.system,
                trajectories: vec![("u", u)],
                reports: Vec::new(),
                compatibility: None,
                kernels,
            }
        }
        SystemKind::TargetSplit => {
            let params = rd_params(cfg)?;
            let kernels = synthesize_kernels(cfg, false, exec)?;
            let u0 = resolve_initial(cfg, &params, &kernels.k)?;
            let compat = CompatibilityReport::from_residuals(vec![
                ("d(0)", d.value(0.0), COMPATIBILITY_TOL),
                ("d'(0)", d.derivative(0.0), COMPATIBILITY_TOL),
                ("f(0,0)", f.value(0.0, 0.0), COMPATIBILITY_TOL),
                ("f(1,0)", f.value(1.0, 0.0), COMPATIBILITY_TOL),
            ])
            .into_result()?;
            let w0 = forward_transform(&u0.sample(grid), &kernels.k)?;
            let (g, h) = simulate_target_split(&params, &w0, d, f, settings)?;
            if verify && cfg.checks.iter().any(|c| c == "lyapunov") {
                for &p in &cfg.lyapunov_orders {
                    reports.push(lyapunov_lp_decay(&h, &params, p)?);
                }
            }
            if wants("linf_decay") {
                reports.push(linf_decay(&h, &params));
            }
            Outcome {
                system: cfg.system,
                trajectories: vec![("g", g), ("h", h)],
                reports: Vec::new(),
                compatibility: Some(compat),
                kernels: Some(kernels),
            }
        }
    };
    Ok(Outcome {
        reports: reports.into_iter().map(|r| tolerate(r, tol)).collect(),
        ..outcome
    })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content)?;
    written.push(path);
    Ok(())
}

/// Wide layout: one row per stored time, one column per node.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t");
    for x in traj.grid().nodes() {
        s.push(',');
        s.push_str(&num(x));
    }
    s.push('\n');
    for (t, field) in traj.times().iter().zip(traj.fields()) {
        s.push_str(&num(*t));
        for v in field.values() {
            s.push(',');
            s.push_str(&num(*v));
        }
        s.push('\n');
    }
    s
}

/// One line per report plus a final `all` line.
pub fn summary_csv(outcome: &Outcome) -> String {
    let mut s = String::from("check,min_margin,satisfied,tolerance,admissibility_value,admissibility_threshold,admissible,pass\n");
    for r in &outcome.reports {
        let (value, threshold, admissible) = match r.admissibility {
            Some(a) => (num(a.value), num(a.threshold), a.pass.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.name,
            num(r.min_margin),
            r.satisfied,
            r.tol,
            value,
            threshold,
            admissible,
            r.passes()
        );
    }
    let _ = writeln!(s, "all,,,,,,,{}", outcome.passes());
    s
}

pub fn compatibility_csv(report: &CompatibilityReport) -> String {
    let mut s = String::from("condition,residual,tol,pass\n");
    for c in &report.conditions {
        let _ = writeln!(s, "\"{}\",{},{},{}", c.name, num(c.residual), num(c.tol), c.pass);
    }
    s
}

/// Lower triangle as `x,y,value` rows, row-major in x.
pub fn kernel_csv(kernel: &Kernel) -> String {
    let grid = kernel.grid();
    let mut s = String::from("x,y,value\n");
    for i in 0..grid.n_nodes() {
        for (j, v) in kernel.row(i).iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", num(grid.node(i)), num(grid.node(j)), num(*v));
        }
    }
    s
}

pub fn gains_csv(set: &KernelSet) -> String {
    let n = set.k.grid().n_nodes();
    let mut s = String::from("quantity,value\n");
    let _ = writeln!(s, "k_max_abs,{}", num(set.k.max_abs()));
    let _ = writeln!(s, "k(1,1),{}", num(set.k.get(n - 1, n - 1)));
    if let Some(l) = &set.l {
        let _ = writeln!(s, "l_max_abs,{}", num(l.max_abs()));
        let _ = writeln!(s, "l(1,1),{}", num(l.get(n - 1, n - 1)));
    }
    if let Some(g) = set.gains {
        let _ = writeln!(s, "c0,{}", num(g.c0));
        let _ = writeln!(s, "c1,{}", num(g.c1));
    }
    s
}

/// Kernel CSVs and gains into `dir`.
pub fn write_kernels(set: &KernelSet, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, "kernel_k.csv", &kernel_csv(&set.k), &mut written)?;
    if let Some(l) = &set.l {
        write(dir, "kernel_l.csv", &kernel_csv(l), &mut written)?;
    }
    write(dir, "gains.csv", &gains_csv(set), &mut written)?;
    Ok(written)
}

/// Writes trajectories, reports, summary, compatibility residuals, kernels
/// and two-column plot data (with a manifest) into `dir`.
pub fn write_artifacts(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, traj) in &outcome.trajectories {
        write(dir, &format!("trajectory_{name}.csv"), &trajectory_csv(traj), &mut written)?;
    }
    if let Some(c) = &outcome.compatibility {
        write(dir, "compatibility.csv", &compatibility_csv(c), &mut written)?;
    }
    if let Some(k) = &outcome.kernels {
        written.extend(write_kernels(k, dir)?);
    }
    if outcome.reports.is_empty() {
        return Ok(written);
    }
    let plot = dir.join("plot");
    fs::create_dir_all(&plot)?;
    let mut manifest = String::from("file,check,curve\n");
    for r in &outcome.reports {
        write(dir, &format!("report_{}.csv", r.name), &r.to_csv(), &mut written)?;
        for (curve, pick) in [("lhs", 0usize), ("rhs", 1)] {
            let mut s = String::new();
            for rec in &r.records {
                let y = if pick == 0 { rec.lhs } else { rec.rhs };
                let _ = writeln!(s, "{} {}", num(rec.t), num(y));
            }
            let file = format!("{}_{curve}.dat", r.name);
            write(&plot, &file, &s, &mut written)?;
            let _ = writeln!(manifest, "{file},{},{curve}", r.name);
        }
    }
    write(&plot, "manifest.csv", &manifest, &mut written)?;
    write(dir, "summary.csv", &summary_csv(outcome), &mut written)?;
    Ok(written)
}

/// One sweep row: the parameter value and either the per-check results or
/// the error that stopped the run.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub raw_value: String,
    pub result: std::result::Result<Vec<SweepCheck>, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCheck {
    pub name: String,
    pub min_margin: f64,
    pub satisfied: bool,
    pub admissibility: Option<f64>,
    pub pass: bool,
}

impl SweepRow {
    pub fn pass(&self) -> bool {
        matches!(&self.result, Ok(checks) if checks.iter().all(|c| c.pass))
    }
}

/// Runs the base config once per value of `param`, rows in parallel when
/// `exec` allows. Rows come back sorted by value; per-row failures are
/// recorded, not propagated.
pub fn sweep(base: &RawConfig, param: &str, values: &[String], exec: Execution) -> Result<Vec<SweepRow>> {
    if !NUMERIC_KEYS.contains(&param) {
        return Err(Error::config(None, param, "not a numeric key"));
    }
    let mut parsed = Vec::with_capacity(values.len());
    for v in values {
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::config(None, param, format!("sweep value `{v}` is not a number")))?;
        parsed.push((x, v.trim().to_string()));
    }
    let mut rows = exec::map(exec, &parsed, |(x, raw_value)| {
        let run = || -> Result<Vec<SweepCheck>> {
            let mut raw = base.clone();
            raw.set(param, raw_value)?;
            let cfg = ScenarioConfig::from_raw(&raw)?;
            // rows already run concurrently
            let outcome = execute(&cfg, RunMode::Verify, None, Execution::Sequential)?;
            Ok(outcome
                .reports
                .iter()
                .map(|r| SweepCheck {
                    name: r.name.to_string(),
                    min_margin: r.min_margin,
                    satisfied: r.satisfied,
                    admissibility: r.admissibility.map(|a| a.value),
                    pass: r.passes(),
                })
                .collect())
        };
        SweepRow {
            value: *x,
            raw_value: raw_value.clone(),
            result: run().map_err(|e| e.to_string()),
        }
    });
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

/// `value,pass,<check>_min_margin,<check>_admissibility,...,error`, with
/// check columns taken from the first successful row.
pub fn sweep_csv(param: &str, rows: &[SweepRow]) -> String {
    let names: Vec<String> = rows
        .iter()
        .find_map(|r| r.result.as_ref().ok())
        .map(|c| c.iter().map(|c| c.name.clone()).collect())
        .unwrap_or_default();
    let mut s = format!("{param},pass");
    for n in &names {
        let _ = write!(s, ",{n}_min_margin,{n}_satisfied,{n}_admissibility");
    }
    s.push_str(",error\n");
    for r in rows {
        let _ = write!(s, "{},{}", r.raw_value, r.pass());
        match &r.result {
            Ok(checks) => {
                for n in &names {
                    match checks.iter().find(|c| &c.name == n) {
                        Some(c) => {
                            let adm = c.admissibility.map(num).unwrap_or_default();
                            let _ = write!(s, ",{},{},{adm}", num(c.min_margin), c.satisfied);
                        }
                        None => s.push_str(",,,"),
                    }
                }
                s.push_str(",\n");
            }
            Err(e) => {
                s.push_str(&",,,".repeat(names.len()));
                let _ = writeln!(s, ",\"{}\"", e.replace('"', "'"));
            }
        }
    }
    s
}
