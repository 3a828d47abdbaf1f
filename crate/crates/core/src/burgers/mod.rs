//! IMEX finite-difference solver for
//!
//! ```text
//! u_t - μ u_xx + ν u u_x = f(x, t),   u(0, t) = 0,  u(1, t) = d(t),  u(x, 0) = u0(x)
//! ```
//!
//! and for the two splittings u = w + v used to analyse it.
//!
//! Diffusion is Crank–Nicolson, convection ν (u²/2)_x is explicit and
//! central, forcing is averaged over the step. Both splittings advance w and
//! v in lockstep from the same time level, so the discrete identity
//! w + v = u holds up to roundoff.

mod specs;

pub use specs::{
    ForcingSpec, InitialConditionSpec, SeparableForcing, SignalSpec, SpatialProfile, TemporalProfile,
    DENSE_SAMPLES,
};

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, ScalarField, Trajectory, TrajectoryRecorder};
use crate::stepper::{check_finite, step_count, CrankNicolson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurgersParams {
    mu: f64,
    nu: f64,
}

impl BurgersParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        Ok(BurgersParams { mu, nu })
    }

    /// Heat-equation limit (ν = 0). Only meant for testing the diffusion part.
    pub fn without_convection(mu: f64) -> Result<Self> {
        let p = BurgersParams::new(mu, 1.0)?;
        Ok(BurgersParams { nu: 0.0, ..p })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Time stepping controls. The step actually used is `t_end / ceil(t_end / dt)`
/// so the final sample lands on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Store every `output_stride`-th step (the last step is always stored).
    pub output_stride: usize,
}

impl RunSettings {
    pub const DEFAULT_STRIDE: usize = 100;

    pub fn new(dt: f64, t_end: f64) -> Self {
        RunSettings {
            dt,
            t_end,
            output_stride: Self::DEFAULT_STRIDE,
        }
    }

    pub fn with_stride(self, output_stride: usize) -> Self {
        RunSettings { output_stride, ..self }
    }

    pub(crate) fn resolve(&self) -> Result<(usize, f64)> {
        if self.output_stride == 0 {
            return Err(Error::InvalidParameter("output_stride must be at least 1".into()));
        }
        step_count(self.t_end, self.dt)
    }
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings::new(2.5e-5, 2.0)
    }
}

/// Tolerance on compatibility residuals.
pub const COMPATIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub conditions: Vec<Condition>,
}

impl CompatibilityReport {
    pub(crate) fn from_residuals(items: Vec<(&'static str, f64, f64)>) -> Self {
        let conditions = items
            .into_iter()
            .map(|(name, residual, tol)| Condition {
                name,
                residual: residual.abs(),
                tol,
                pass: residual.abs() <= tol,
            })
            .collect();
        CompatibilityReport { conditions }
    }

    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} (residual {:e})", c.name, c.residual))
            .collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.all_pass() {
            Ok(self)
        } else {
            Err(Error::Incompatible(self.failures()))
        }
    }
}

/// Evaluates the eight corner conditions analytically.
pub fn check_compatibility(u0: &InitialConditionSpec, d: &SignalSpec, f: &ForcingSpec) -> CompatibilityReport {
    let tol = COMPATIBILITY_TOL;
    CompatibilityReport::from_residuals(vec![
        ("u0(0)", u0.value(0.0), tol),
        ("u0''(0)", u0.second_derivative(0.0), tol),
        ("u0(1)", u0.value(1.0), tol),
        ("u0''(1)", u0.second_derivative(1.0), tol),
        ("d(0)", d.value(0.0), tol),
        ("d'(0)", d.derivative(0.0), tol),
        ("f(0,0)", f.value(0.0, 0.0), tol),
        ("f(1,0)", f.value(1.0, 0.0), tol),
    ])
}

/// Largest stable step for the explicit convection: 0.5 h / (ν (speed + |d| + 1)).
pub fn convective_limit(params: &BurgersParams, h: f64, speed: f64, d: f64) -> f64 {
    0.5 * h / (params.nu * (speed + d.abs() + 1.0))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One IMEX step from `state` to time `t_next = t + dt`.
#[allow(clippy::too_many_arguments)]
pub fn step(
    state: &ScalarField,
    params: &BurgersParams,
    f_now: &ScalarField,
    f_next: &ScalarField,
    d_next: f64,
    dt: f64,
    t_next: f64,
) -> Result<ScalarField> {
    let grid = state.grid();
    for f in [f_now, f_next] {
        if f.grid() != grid {
            return Err(Error::ShapeMismatch {
                expected: grid.n_nodes(),
                found: f.len(),
            });
        }
    }
    let cn = CrankNicolson::new(grid, params.mu, dt, &[])?;
    let limit = convective_limit(params, grid.spacing(), state.max_abs(), d_next);
    if dt > limit {
        return Err(Error::StepTooLarge {
            time: t_next - dt,
            dt,
            limit,
        });
    }
    let mut source = vec![0.0; grid.n_nodes()];
    convection(params.nu, grid.spacing(), state.values(), &mut source);
    for ((s, a), b) in source.iter_mut().zip(f_now.values()).zip(f_next.values()) {
        *s += 0.5 * (a + b);
    }
    let mut next = vec![0.0; grid.n_nodes()];
    cn.step(state.values(), &source, 0.0, d_next, &mut next);
    check_finite(&next, t_next)?;
    Ok(ScalarField::from_vec_unchecked(grid, next))
}

/// out_i = -ν (u_{i+1}² - u_{i-1}²) / (4h) at interior nodes.
fn convection(nu: f64, h: f64, u: &[f64], out: &mut [f64]) {
    let c = -nu / (4.0 * h);
    for i in 1..u.len() - 1 {
        out[i] = c * (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]);
    }
}

/// out_i += -ν (w_{i+1} v_{i+1} - w_{i-1} v_{i-1}) / (2h).
fn coupling(nu: f64, h: f64, w: &[f64], v: &[f64], out: &mut [f64]) {
    let c = -nu / (2.0 * h);
    for i in 1..v.len() - 1 {
        out[i] += c * (w[i + 1] * v[i + 1] - w[i - 1] * v[i - 1]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Full,
    SplitA,
    SplitB,
}

struct Subsystem {
    state: Vec<f64>,
    next: Vec<f64>,
    source: Vec<f64>,
    driven: bool,
    forced: bool,
    coupled: bool,
    recorder: TrajectoryRecorder,
}

fn run(
    params: &BurgersParams,
    u0: &ScalarField,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    mode: Mode,
) -> Result<Vec<Trajectory>> {
    let grid = u0.grid();
    let n = grid.n_nodes();
    let h = grid.spacing();
    let (steps, dt) = settings.resolve()?;
    let cn = CrankNicolson::new(grid, params.mu, dt, &[])?;

    let forcing_active = !f.is_zero();
    let zeros = vec![0.0; n];
    let mut f_now = zeros.clone();
    let mut f_next = zeros.clone();
    if forcing_active {
        f.sample_into(grid, 0.0, &mut f_now);
    }
    let d0 = d.value(0.0);

    // (initial state, boundary-driven, forced, coupled to subsystem 0)
    let layout: Vec<(bool, bool, bool, bool)> = match mode {
        Mode::Full => vec![(true, true, true, false)],
        Mode::SplitA => vec![(false, true, true, false), (true, false, false, true)],
        Mode::SplitB => vec![(false, true, false, false), (true, false, true, true)],
    };
    let mut subs: Vec<Subsystem> = layout
        .into_iter()
        .map(|(carries_u0, driven, forced, coupled)| {
            let init = if carries_u0 { u0.clone() } else { ScalarField::zeros(grid) };
            let recorder = TrajectoryRecorder::new(
                &init,
                if driven { d0 } else { 0.0 },
                if forced { &f_now } else { &zeros },
            );
            Subsystem {
                state: init.into_values(),
                next: vec![0.0; n],
                source: vec![0.0; n],
                driven,
                forced,
                coupled,
                recorder,
            }
        })
        .collect();

    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t = if k == steps { settings.t_end } else { k as f64 * dt };
        let d_next = d.value(t);
        if forcing_active {
            f.sample_into(grid, t, &mut f_next);
        }
        let w_speed = max_abs(&subs[0].state);
        for s in 0..subs.len() {
            let (head, tail) = subs.split_at_mut(s);
            let sub = &mut tail[0];
            let bc = if sub.driven { d_next } else { 0.0 };
            let mut speed = max_abs(&sub.state);
            convection(params.nu, h, &sub.state, &mut sub.source);
            if sub.coupled {
                coupling(params.nu, h, &head[0].state, &sub.state, &mut sub.source);
                speed += w_speed;
            }
            if sub.forced && forcing_active {
                for i in 1..n - 1 {
                    sub.source[i] += 0.5 * (f_now[i] + f_next[i]);
                }
            }
            let limit = convective_limit(params, h, speed, bc);
            if dt > limit {
                return Err(Error::StepTooLarge { time: t_prev, dt, limit });
            }
            cn.step(&sub.state, &sub.source, 0.0, bc, &mut sub.next);
            check_finite(&sub.next, t)?;
        }
        for sub in subs.iter_mut() {
            std::mem::swap(&mut sub.state, &mut sub.next);
            let field = ScalarField::from_vec_unchecked(grid, sub.state.clone());
            let bc = if sub.driven { d_next } else { 0.0 };
            sub.recorder
                .advance(t, bc, if sub.forced { &f_next } else { &zeros }, &field);
            if k % settings.output_stride == 0 || k == steps {
                sub.recorder.record(&field);
            }
        }
        std::mem::swap(&mut f_now, &mut f_next);
    }
    Ok(subs.into_iter().map(|s| s.recorder.finish()).collect())
}

fn prepare(u0: &InitialConditionSpec, d: &SignalSpec, f: &ForcingSpec, grid: Grid1D) -> Result<ScalarField> {
    check_compatibility(u0, d, f).into_result()?;
    Ok(u0.sample(grid))
}

/// Full Burgers solution sampled every `output_stride` steps.
pub fn simulate(
    params: &BurgersParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    grid: Grid1D,
) -> Result<Trajectory> {
    let init = prepare(u0, d, f, grid)?;
    simulate_field(params, &init, d, f, settings)
}

/// As [`simulate`] from sampled initial data, without compatibility checks.
pub fn simulate_field(
    params: &BurgersParams,
    u0: &ScalarField,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
) -> Result<Trajectory> {
    Ok(run(params, u0, d, f, settings, Mode::Full)?.remove(0))
}

fn pair(mut v: Vec<Trajectory>) -> (Trajectory, Trajectory) {
    let second = v.pop().expect("two subsystems");
    (v.pop().expect("two subsystems"), second)
}

/// Splitting with the forcing in w:
/// w carries d and f from zero data; v carries u0 with zero boundary values
/// and the coupling ν (w v)_x. Returns (w, v).
pub fn simulate_splitting_a(
    params: &BurgersParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    grid: Grid1D,
) -> Result<(Trajectory, Trajectory)> {
    let init = prepare(u0, d, f, grid)?;
    Ok(pair(run(params, &init, d, f, settings, Mode::SplitA)?))
}

/// Splitting with the forcing in v: w is unforced and carries d; v carries
/// u0, f and the coupling. Returns (w, v).
pub fn simulate_splitting_b(
    params: &BurgersParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    grid: Grid1D,
) -> Result<(Trajectory, Trajectory)> {
    let init = prepare(u0, d, f, grid)?;
    Ok(pair(run(params, &init, d, f, settings, Mode::SplitB)?))
}
