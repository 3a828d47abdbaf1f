//! Evaluators for the explicit stability estimates, smallness conditions
//! and De Giorgi level-set diagnostics.
//!
//! Every evaluator turns a trajectory into a [`BoundReport`]: one
//! `(t, lhs, rhs, margin)` record per stored time. Maxima over [0, t] come
//! from the running histories the solvers maintain at every step.

mod levelset;

pub use levelset::{check_chebyshev_link, level_integral, level_set_measure, level_set_profile, LevelSetProfile, CHEBYSHEV_TOL};

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::backstepping::{GainConstants, ReactionDiffusionParams};
use crate::burgers::{BurgersParams, ForcingSpec, SignalSpec};
use crate::error::{Error, Result};
use crate::numerics::{l2_norm_squared, lp_norm_pow, Trajectory};

/// Default absolute tolerance for solver-produced trajectories.
pub const SOLVER_TOL: f64 = 1e-4;
/// Tolerance of the discrete maximum-principle check on the unforced w-subsystem.
pub const MAX_PRINCIPLE_TOL: f64 = 1e-6;
pub const LYAPUNOV_REL_TOL: f64 = 1e-3;
pub const LINF_DECAY_REL_TOL: f64 = 1e-2;

/// How much a record may undershoot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// margin >= -tol
    Absolute(f64),
    /// margin >= -tol * |rhs| at each record
    Relative(f64),
}

impl Tolerance {
    pub fn slack(&self, rhs: f64) -> f64 {
        match *self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(r) => r * rhs.abs(),
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Tolerance::Absolute(t) | Tolerance::Relative(t) => t,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "abs {t:e}"),
            Tolerance::Relative(t) => write!(f, "rel {t:e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimate {
    Theorem1,
    Theorem2,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Prop2,
    /// L^{2p} Lyapunov decay of the h-subsystem.
    Lyapunov(u32),
    /// Sup-norm decay of the h-subsystem.
    LinfDecay,
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimate::Theorem1 => f.write_str("theorem1"),
            Estimate::Theorem2 => f.write_str("theorem2"),
            Estimate::Lemma4 => f.write_str("lemma4"),
            Estimate::Lemma5 => f.write_str("lemma5"),
            Estimate::Lemma6 => f.write_str("lemma6"),
            Estimate::Lemma7 => f.write_str("lemma7"),
            Estimate::Prop2 => f.write_str("prop2"),
            Estimate::Lyapunov(p) => write!(f, "lyapunov_p{p}"),
            Estimate::LinfDecay => f.write_str("linf_decay"),
        }
    }
}

impl FromStr for Estimate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "theorem1" => Estimate::Theorem1,
            "theorem2" => Estimate::Theorem2,
            "lemma4" => Estimate::Lemma4,
            "lemma5" => Estimate::Lemma5,
            "lemma6" => Estimate::Lemma6,
            "lemma7" => Estimate::Lemma7,
            "prop2" => Estimate::Prop2,
            "linf_decay" => Estimate::LinfDecay,
            other => {
                let p = other
                    .strip_prefix("lyapunov_p")
                    .and_then(|p| p.parse::<u32>().ok())
                    .filter(|p| *p >= 1)
                    .ok_or_else(|| format!("unknown estimate `{other}`"))?;
                Estimate::Lyapunov(p)
            }
        })
    }
}

/// Smallness condition `value < threshold`, evaluated over [0, horizon].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub value: f64,
    pub threshold: f64,
    pub horizon: f64,
    pub pass: bool,
}

impl Admissibility {
    fn new(value: f64, threshold: f64, horizon: f64) -> Self {
        Admissibility {
            value,
            threshold,
            horizon,
            pass: value < threshold,
        }
    }
}

/// sup|d| + (4√2/μ) sup|f| < μ/ν over [0, horizon].
pub fn admissibility_theorem1(d: &SignalSpec, f: &ForcingSpec, params: &BurgersParams, horizon: f64) -> Admissibility {
    let value = d.sup_abs(horizon) + 4.0 * SQRT_2 / params.mu() * f.sup_abs(horizon);
    Admissibility::new(value, params.mu() / params.nu(), horizon)
}

/// sup|d| < μ/ν over [0, horizon].
pub fn admissibility_theorem2(d: &SignalSpec, params: &BurgersParams, horizon: f64) -> Admissibility {
    Admissibility::new(d.sup_abs(horizon), params.mu() / params.nu(), horizon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: Estimate,
    pub records: Vec<BoundRecord>,
    pub min_margin: f64,
    pub satisfied: bool,
    pub tol: Tolerance,
    pub admissibility: Option<Admissibility>,
}

impl BoundReport {
    pub fn new(name: Estimate, records: Vec<BoundRecord>, tol: Tolerance) -> Self {
        let mut report = BoundReport {
            name,
            records,
            min_margin: f64::INFINITY,
            satisfied: true,
            tol,
            admissibility: None,
        };
        report.settle();
        report
    }

    fn settle(&mut self) {
        self.min_margin = self.records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        self.satisfied = self
            .records
            .iter()
            .all(|r| r.rhs.is_finite() && r.margin >= -self.tol.slack(r.rhs));
    }

    pub fn with_tol(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self.settle();
        self
    }

    pub fn with_admissibility(mut self, a: Admissibility) -> Self {
        self.admissibility = Some(a);
        self
    }

    /// Bound satisfied and, where one applies, its smallness condition met.
    pub fn passes(&self) -> bool {
        self.satisfied && self.admissibility.is_none_or(|a| a.pass)
    }

    pub fn worst(&self) -> Option<&BoundRecord> {
        self.records.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    /// `t,lhs,rhs,margin` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,lhs,rhs,margin\n");
        for r in &self.records {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r.t, r.lhs, r.rhs, r.margin));
        }
        s
    }
}

fn build(
    name: Estimate,
    traj: &Trajectory,
    tol: Tolerance,
    mut side: impl FnMut(usize) -> (f64, f64),
) -> BoundReport {
    let records = traj
        .times()
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let (lhs, rhs) = side(j);
            BoundRecord {
                t,
                lhs,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    BoundReport::new(name, records, tol)
}

fn check_eps(eps: f64, mu: f64) -> Result<()> {
    if !(eps > 0.0 && eps < mu) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, {mu}), got {eps}")));
    }
    Ok(())
}

/// ||u||² <= 2||u0||² e^{-μt} + 4 max|d|² + (128/μ²) max|f|².
pub fn evaluate_theorem1(traj: &Trajectory, u0_l2: f64, params: &BurgersParams) -> BoundReport {
    let mu = params.mu();
    let (bd, fs) = (traj.boundary_sup_history(), traj.forcing_sup_history());
    build(Estimate::Theorem1, traj, Tolerance::Absolute(SOLVER_TOL), |j| {
        let t = traj.times()[j];
        let rhs = 2.0 * u0_l2 * u0_l2 * (-mu * t).exp() + 4.0 * bd[j] * bd[j] + 128.0 / (mu * mu) * fs[j] * fs[j];
        (l2_norm_squared(&traj.fields()[j]), rhs)
    })
}

/// ||u||² <= 2||u0||² e^{-(μ-ε)t} + 2 max|d|² + (2/ε) ∫||f||².
pub fn evaluate_theorem2(traj: &Trajectory, u0_l2: f64, params: &BurgersParams, eps: f64) -> Result<BoundReport> {
    let mu = params.mu();
    check_eps(eps, mu)?;
    let (bd, fl) = (traj.boundary_sup_history(), traj.forcing_l2_history());
    Ok(build(Estimate::Theorem2, traj, Tolerance::Absolute(SOLVER_TOL), |j| {
        let t = traj.times()[j];
        let rhs = 2.0 * u0_l2 * u0_l2 * (-(mu - eps) * t).exp() + 2.0 * bd[j] * bd[j] + 2.0 / eps * fl[j];
        (l2_norm_squared(&traj.fields()[j]), rhs)
    }))
}

/// max|w| <= max|d| + (4√2/μ) max|f|, maxima over [0, t].
pub fn evaluate_lemma4(w: &Trajectory, params: &BurgersParams) -> BoundReport {
    let c = 4.0 * SQRT_2 / params.mu();
    let (ws, bd, fs) = (w.state_sup_history(), w.boundary_sup_history(), w.forcing_sup_history());
    build(Estimate::Lemma4, w, Tolerance::Absolute(SOLVER_TOL), |j| (ws[j], bd[j] + c * fs[j]))
}

/// ||v||² <= ||u0||² e^{-μt}.
pub fn evaluate_lemma5(v: &Trajectory, u0_l2: f64, params: &BurgersParams) -> BoundReport {
    let mu = params.mu();
    build(Estimate::Lemma5, v, Tolerance::Absolute(SOLVER_TOL), |j| {
        let t = v.times()[j];
        (l2_norm_squared(&v.fields()[j]), u0_l2 * u0_l2 * (-mu * t).exp())
    })
}

/// max|w| <= max|d| for the unforced w-subsystem.
pub fn evaluate_lemma6(w: &Trajectory, _params: &BurgersParams) -> BoundReport {
    let (ws, bd) = (w.state_sup_history(), w.boundary_sup_history());
    build(Estimate::Lemma6, w, Tolerance::Absolute(MAX_PRINCIPLE_TOL), |j| (ws[j], bd[j]))
}

/// ||v||² <= ||u0||² e^{-(μ-ε)t} + (1/ε) ∫||f||².
pub fn evaluate_lemma7(v: &Trajectory, u0_l2: f64, params: &BurgersParams, eps: f64) -> Result<BoundReport> {
    let mu = params.mu();
    check_eps(eps, mu)?;
    let fl = v.forcing_l2_history();
    Ok(build(Estimate::Lemma7, v, Tolerance::Absolute(SOLVER_TOL), |j| {
        let t = v.times()[j];
        let rhs = u0_l2 * u0_l2 * (-(mu - eps) * t).exp() + fl[j] / eps;
        (l2_norm_squared(&v.fields()[j]), rhs)
    }))
}

/// max_x|u(x,t)| <= C0 max|u0| e^{-νt} + C1 (max|d| + (4√2/μ) max|f|).
pub fn evaluate_prop2(
    u: &Trajectory,
    u0_sup: f64,
    constants: &GainConstants,
    params: &ReactionDiffusionParams,
) -> BoundReport {
    let (mu, nu) = (params.mu(), params.nu());
    let (bd, fs) = (u.boundary_sup_history(), u.forcing_sup_history());
    build(Estimate::Prop2, u, Tolerance::Absolute(SOLVER_TOL), |j| {
        let t = u.times()[j];
        let rhs = constants.c0 * u0_sup * (-nu * t).exp() + constants.c1 * (bd[j] + 4.0 * SQRT_2 / mu * fs[j]);
        (u.fields()[j].max_abs(), rhs)
    })
}

/// ||h||_{2p}^{2p} <= ||h0||_{2p}^{2p} e^{-2p (ν + 2μ(2p-1)/p²) t}.
pub fn lyapunov_lp_decay(h: &Trajectory, params: &ReactionDiffusionParams, p: u32) -> Result<BoundReport> {
    if p == 0 {
        return Err(Error::InvalidParameter("Lyapunov exponent p must be at least 1".into()));
    }
    let q = 2.0 * p as f64;
    let pf = p as f64;
    let rate = q * (params.nu() + 2.0 * params.mu() * (q - 1.0) / (pf * pf));
    let e0 = lp_norm_pow(h.initial(), q);
    Ok(build(
        Estimate::Lyapunov(p),
        h,
        Tolerance::Relative(LYAPUNOV_REL_TOL),
        |j| (lp_norm_pow(&h.fields()[j], q), e0 * (-rate * h.times()[j]).exp()),
    ))
}

/// max|h(·,t)| <= max|h0| e^{-νt}.
pub fn linf_decay(h: &Trajectory, params: &ReactionDiffusionParams) -> BoundReport {
    let m0 = h.initial().max_abs();
    let nu = params.nu();
    build(Estimate::LinfDecay, h, Tolerance::Relative(LINF_DECAY_REL_TOL), |j| {
        (h.fields()[j].max_abs(), m0 * (-nu * h.times()[j]).exp())
    })
}
