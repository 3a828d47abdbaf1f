//! Boundary stabilization of
//!
//! ```text
//! u_t - μ u_xx + a(x) u = f(x, t),   u(0, t) = 0,   u(1, t) = U(t)
//! ```
//!
//! by the Volterra transform w = u - ∫_0^x k(x, y) u(y) dy onto the target
//! w_t - μ w_xx + ν w = f, with feedback U(t) = d(t) + ∫_0^1 k(1, y) u(y) dy
//! where d is an actuation error.
//!
//! Integrals along kernel rows use the composite Boole prefix rule, which
//! keeps the forward/inverse composition error near 1e-9 at n = 201.

mod kernel;

pub use kernel::{
    bessel_i1, bessel_j1, bessel_ratio_series, inverse_kernel_closed_form_constant, kernel_closed_form_constant,
    solve_inverse_kernel, solve_inverse_kernel_with, solve_kernel, solve_kernel_with, Kernel, KERNEL_MAX_ITER,
    KERNEL_TOL, THREE_LEVEL_LIMIT,
};

use crate::burgers::{CompatibilityReport, ForcingSpec, InitialConditionSpec, RunSettings, SignalSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_prefix_with, second_derivative, Grid1D, ScalarField, Trajectory, Tridiagonal,
    TrajectoryRecorder,
};
use crate::stepper::{check_finite, CrankNicolson};

/// a(x) = a0 + a1 x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub a0: f64,
    pub a1: f64,
}

impl Coefficient {
    pub fn constant(a0: f64) -> Self {
        Coefficient { a0, a1: 0.0 }
    }

    pub fn affine(a0: f64, a1: f64) -> Self {
        Coefficient { a0, a1 }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.a0 + self.a1 * x
    }

    pub fn derivative(&self, _x: f64) -> f64 {
        self.a1
    }

    /// ∫_0^x a.
    pub fn integral(&self, x: f64) -> f64 {
        self.a0 * x + 0.5 * self.a1 * x * x
    }

    pub fn is_constant(&self) -> bool {
        self.a1 == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionDiffusionParams {
    pub(crate) mu: f64,
    pub(crate) a: Coefficient,
    pub(crate) nu: f64,
}

impl ReactionDiffusionParams {
    pub fn new(mu: f64, a: Coefficient, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        if !(a.a0.is_finite() && a.a1.is_finite()) {
            return Err(Error::InvalidParameter("reaction coefficient must be finite".into()));
        }
        Ok(ReactionDiffusionParams { mu, a, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn coefficient(&self) -> Coefficient {
        self.a
    }

    /// ∫_0^x (ν - a).
    pub fn reaction_integral(&self, x: f64) -> f64 {
        self.nu * x - self.a.integral(x)
    }

    /// k(x, x) = l(x, x) = -(1 / 2μ) ∫_0^x (ν - a).
    pub fn kernel_diagonal(&self, x: f64) -> f64 {
        -0.5 * self.reaction_integral(x) / self.mu
    }

    /// d/dx k(x, x) = -(ν - a(x)) / 2μ.
    pub fn kernel_diagonal_slope(&self, x: f64) -> f64 {
        -0.5 * (self.nu - self.a.value(x)) / self.mu
    }
}

/// C1 = 1 + max|l|, C0 = C1 (1 + max|k|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConstants {
    pub c0: f64,
    pub c1: f64,
}

impl GainConstants {
    pub fn from_maxima(max_k: f64, max_l: f64) -> Self {
        let c1 = 1.0 + max_l;
        GainConstants {
            c0: c1 * (1.0 + max_k),
            c1,
        }
    }
}

pub fn gain_constants(k: &Kernel, l: &Kernel) -> GainConstants {
    GainConstants::from_maxima(k.max_abs(), l.max_abs())
}

fn check_grid(field: &ScalarField, k: &Kernel) -> Result<()> {
    if field.grid() != k.grid() {
        return Err(Error::ShapeMismatch {
            expected: k.grid().n_nodes(),
            found: field.len(),
        });
    }
    Ok(())
}

fn volterra(field: &ScalarField, k: &Kernel, sign: f64) -> Result<ScalarField> {
    check_grid(field, k)?;
    let h = field.grid().spacing();
    let u = field.values();
    let out = (0..u.len())
        .map(|i| {
            let row = k.row(i);
            u[i] + sign * integrate_prefix_with(i, h, |j| row[j] * u[j])
        })
        .collect();
    ScalarField::new(field.grid(), out)
}

/// w(x) = u(x) - ∫_0^x k(x, y) u(y) dy.
pub fn forward_transform(field: &ScalarField, k: &Kernel) -> Result<ScalarField> {
    volterra(field, k, -1.0)
}

/// u(x) = w(x) + ∫_0^x l(x, y) w(y) dy.
pub fn inverse_transform(field: &ScalarField, l: &Kernel) -> Result<ScalarField> {
    volterra(field, l, 1.0)
}

fn boundary_integral(u: &[f64], k: &Kernel) -> f64 {
    let n = u.len() - 1;
    let row = k.row(n);
    integrate_prefix_with(n, k.grid().spacing(), |j| row[j] * u[j])
}

/// U = d + ∫_0^1 k(1, y) u(y) dy.
pub fn control_input(u: &ScalarField, k: &Kernel, d_value: f64) -> Result<f64> {
    check_grid(u, k)?;
    Ok(d_value + boundary_integral(u.values(), k))
}

/// Tolerance on the integral compatibility u0(1) = ∫ k(1, y) u0(y) dy.
pub const INTEGRAL_COMPAT_TOL: f64 = 1e-8;
/// Tolerance on the slope compatibility condition.
pub const SLOPE_COMPAT_TOL: f64 = 1e-6;

/// Corner conditions for the closed loop: u0(0) = 0, the feedback identity
/// u0(1) = ∫ k(1, y) u0(y) dy, its slope counterpart
/// u0(1) dk(x,x)/dx|₁ + u0'(1) k(1,1) = 0, and d(0) = d'(0) = f(0,0) = f(1,0) = 0.
pub fn check_closed_loop_compatibility(
    params: &ReactionDiffusionParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    k: &Kernel,
) -> Result<CompatibilityReport> {
    let grid = k.grid();
    let sampled = u0.sample(grid);
    let feedback = control_input(&sampled, k, 0.0)?;
    let slope = u0.value(1.0) * params.kernel_diagonal_slope(1.0) + u0.derivative(1.0) * params.kernel_diagonal(1.0);
    let tight = crate::burgers::COMPATIBILITY_TOL;
    Ok(CompatibilityReport::from_residuals(vec![
        ("u0(0)", u0.value(0.0), tight),
        ("u0(1) - int k(1,y) u0", u0.value(1.0) - feedback, INTEGRAL_COMPAT_TOL),
        ("slope condition at x=1", slope, SLOPE_COMPAT_TOL),
        ("d(0)", d.value(0.0), tight),
        ("d'(0)", d.derivative(0.0), tight),
        ("f(0,0)", f.value(0.0, 0.0), tight),
        ("f(1,0)", f.value(1.0, 0.0), tight),
    ]))
}

/// Initial profile A x³(1-x)³ + c (x³ + γ x³(1-x)) satisfying both feedback
/// compatibility conditions for the given kernel.
///
/// γ = 3 + κ₁/κ₂ with κ₁ = dk(x,x)/dx at 1 and κ₂ = k(1,1) fixes the slope
/// condition; c then solves the integral condition with the same quadrature
/// the controller uses.
pub fn compatible_initial_condition(
    params: &ReactionDiffusionParams,
    amplitude: f64,
    k: &Kernel,
) -> Result<InitialConditionSpec> {
    let kappa1 = params.kernel_diagonal_slope(1.0);
    let kappa2 = params.kernel_diagonal(1.0);
    let gamma = if kappa2.abs() > 1e-300 { 3.0 + kappa1 / kappa2 } else { 3.0 };
    let bump = InitialConditionSpec::Bump { amplitude };
    let corr = InitialConditionSpec::Polynomial {
        coefficients: vec![0.0, 0.0, 0.0, 1.0 + gamma, -gamma],
    };
    let grid = k.grid();
    let ib = control_input(&bump.sample(grid), k, 0.0)?;
    let iq = control_input(&corr.sample(grid), k, 0.0)?;
    let denom = 1.0 - iq;
    if denom.abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "no compatible correction: feedback integral of the corrector equals its boundary value".into(),
        ));
    }
    let c = ib / denom;
    let mut coefficients = bump.polynomial_coefficients().expect("polynomial");
    coefficients[3] += c * (1.0 + gamma);
    coefficients[4] -= c * gamma;
    Ok(InitialConditionSpec::Polynomial { coefficients })
}

/// How the right boundary value is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Actuation<'a> {
    /// U = d + ∫ k(1, y) u dy at the new time level.
    Feedback(&'a Kernel),
    /// U = d.
    Open,
}

fn run_linear(
    mu: f64,
    reaction: &[f64],
    u0: &ScalarField,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    actuation: Actuation,
) -> Result<Trajectory> {
    let grid = u0.grid();
    let n = grid.n_nodes();
    let (steps, dt) = settings.resolve()?;
    let cn = CrankNicolson::new(grid, mu, dt, reaction)?;
    let phi = cn.boundary_response();
    let gain = match actuation {
        Actuation::Feedback(k) => {
            let g = 1.0 - boundary_integral(&phi, k);
            if g.abs() < 1e-14 {
                return Err(Error::InvalidParameter("feedback loop is singular for this step".into()));
            }
            g
        }
        Actuation::Open => 1.0,
    };

    let forcing_active = !f.is_zero();
    let mut f_now = vec![0.0; n];
    let mut f_next = vec![0.0; n];
    if forcing_active {
        f.sample_into(grid, 0.0, &mut f_now);
    }
    let mut source = vec![0.0; n];
    let mut state = u0.values().to_vec();
    let mut next = vec![0.0; n];
    let mut rec = TrajectoryRecorder::new(u0, d.value(0.0), &f_now);

    for step in 1..=steps {
        let t = if step == steps { settings.t_end } else { step as f64 * dt };
        let d_next = d.value(t);
        if forcing_active {
            f.sample_into(grid, t, &mut f_next);
            for i in 1..n - 1 {
                source[i] = 0.5 * (f_now[i] + f_next[i]);
            }
        }
        cn.step(&state, &source, 0.0, 0.0, &mut next);
        let boundary = match actuation {
            Actuation::Feedback(k) => (d_next + boundary_integral(&next, k)) / gain,
            Actuation::Open => d_next,
        };
        for (v, p) in next.iter_mut().zip(&phi) {
            *v += boundary * p;
        }
        check_finite(&next, t)?;
        std::mem::swap(&mut state, &mut next);
        let field = ScalarField::from_vec_unchecked(grid, state.clone());
        rec.advance(t, d_next, &f_next, &field);
        if step % settings.output_stride == 0 || step == steps {
            rec.record(&field);
        }
        std::mem::swap(&mut f_now, &mut f_next);
    }
    Ok(rec.finish())
}

fn plant_reaction(params: &ReactionDiffusionParams, grid: Grid1D) -> Vec<f64> {
    grid.nodes().map(|x| params.a.value(x)).collect()
}

/// Closed loop with feedback U(t) = d(t) + ∫ k(1, y) u(y, t) dy. The
/// boundary value is solved together with the interior at each step.
pub fn simulate_closed_loop(
    params: &ReactionDiffusionParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    k: &Kernel,
    settings: &RunSettings,
) -> Result<Trajectory> {
    check_closed_loop_compatibility(params, u0, d, f, k)?.into_result()?;
    let grid = k.grid();
    run_linear(
        params.mu,
        &plant_reaction(params, grid),
        &u0.sample(grid),
        d,
        f,
        settings,
        Actuation::Feedback(k),
    )
}

/// Plant without feedback: u(1, t) = d(t). Diverges for unstable plants.
pub fn simulate_open_loop(
    params: &ReactionDiffusionParams,
    u0: &InitialConditionSpec,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
    grid: Grid1D,
) -> Result<Trajectory> {
    run_linear(
        params.mu,
        &plant_reaction(params, grid),
        &u0.sample(grid),
        d,
        f,
        settings,
        Actuation::Open,
    )
}

/// Target system split into g (zero data, boundary d, forcing f) and
/// h (data w0, zero boundary, no forcing). Returns (g, h).
pub fn simulate_target_split(
    params: &ReactionDiffusionParams,
    w0: &ScalarField,
    d: &SignalSpec,
    f: &ForcingSpec,
    settings: &RunSettings,
) -> Result<(Trajectory, Trajectory)> {
    let grid = w0.grid();
    let reaction = vec![params.nu; grid.n_nodes()];
    let g = run_linear(
        params.mu,
        &reaction,
        &ScalarField::zeros(grid),
        d,
        f,
        settings,
        Actuation::Open,
    )?;
    let mut h0 = w0.values().to_vec();
    let last = h0.len() - 1;
    h0[0] = 0.0;
    h0[last] = 0.0;
    let h = run_linear(
        params.mu,
        &reaction,
        &ScalarField::new(grid, h0)?,
        &SignalSpec::Zero,
        &ForcingSpec::Zero,
        settings,
        Actuation::Open,
    )?;
    Ok((g, h))
}

/// Which discrete operator to examine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// μ ∂xx - a(x) with Dirichlet ends.
    OpenLoop,
    /// μ ∂xx - ν with Dirichlet ends.
    Target,
}

/// Largest eigenvalue of the interior finite-difference operator, by
/// shifted inverse iteration. The shift sits above the Gershgorin bound, so
/// iteration converges to the top of the spectrum.
pub fn largest_eigenvalue(params: &ReactionDiffusionParams, grid: Grid1D, op: Operator) -> Result<f64> {
    let n = grid.n_nodes();
    let m = n - 2;
    let h = grid.spacing();
    let c = params.mu / (h * h);
    let reaction: Vec<f64> = (1..n - 1)
        .map(|i| match op {
            Operator::OpenLoop => params.a.value(grid.node(i)),
            Operator::Target => params.nu,
        })
        .collect();
    let sigma = reaction.iter().fold(f64::NEG_INFINITY, |s, r| s.max(-r)) + 1.0;
    // σ I - A is symmetric positive definite
    let diag: Vec<f64> = reaction.iter().map(|r| sigma + 2.0 * c + r).collect();
    let off = vec![-c; m - 1];
    let lu = Tridiagonal::factor(&off, &diag, &off)?;
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < m { v[i + 1] } else { 0.0 };
                c * (left - 2.0 * v[i] + right) - reaction[i] * v[i]
            })
            .collect()
    };
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let mut lambda = f64::NAN;
    for _ in 0..10_000 {
        lu.solve_in_place(&mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let av = apply(&v);
        let rq: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        if (rq - lambda).abs() <= 1e-13 * rq.abs().max(1.0) {
            return Ok(rq);
        }
        lambda = rq;
    }
    Ok(lambda)
}

/// Sup-norm of the discrete target residual
/// (w^{j+1} - w^j)/Δt - μ w_xx^{j+1} + ν w^{j+1} - F^{j+1}
/// at interior nodes, per consecutive snapshot pair, with w the forward
/// transform of the closed-loop state and F = f - ∫_0^x k(x, y) f(y) dy the
/// image of the plant forcing under the same transform. Returns
/// (t_{j+1}, residual) pairs.
pub fn target_residual(
    traj: &Trajectory,
    k: &Kernel,
    params: &ReactionDiffusionParams,
    f: &ForcingSpec,
) -> Result<Vec<(f64, f64)>> {
    let grid = traj.grid();
    let n = grid.n_nodes();
    let ws = traj
        .fields()
        .iter()
        .map(|u| forward_transform(u, k))
        .collect::<Result<Vec<_>>>()?;
    let times = traj.times();
    let mut out = Vec::with_capacity(ws.len().saturating_sub(1));
    for j in 0..ws.len().saturating_sub(1) {
        let dt = times[j + 1] - times[j];
        let wn = ws[j + 1].values();
        let wp = ws[j].values();
        let wxx = second_derivative(&ws[j + 1]);
        let fx = forward_transform(&f.sample(grid, times[j + 1]), k)?;
        let mut worst: f64 = 0.0;
        for i in 1..n - 1 {
            let r = (wn[i] - wp[i]) / dt - params.mu * wxx.values()[i] + params.nu * wn[i] - fx.values()[i];
            worst = worst.max(r.abs());
        }
        out.push((times[j + 1], worst));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unstable() -> ReactionDiffusionParams {
        ReactionDiffusionParams::new(1.0, Coefficient::constant(-10.0), 1.0).unwrap()
    }

    #[test]
    fn gain_examples() {
        let g = GainConstants::from_maxima(3.0, 2.0);
        assert_eq!((g.c1, g.c0), (3.0, 12.0));
        let grid = Grid1D::new(5).unwrap();
        let z = Kernel::zeros(grid);
        assert_eq!(gain_constants(&z, &z), GainConstants { c0: 1.0, c1: 1.0 });
    }

    #[test]
    fn transforms_with_zero_kernel_are_identity() {
        let grid = Grid1D::new(21).unwrap();
        let z = Kernel::zeros(grid);
        let u = ScalarField::from_fn(grid, |x| x.sin());
        assert_eq!(forward_transform(&u, &z).unwrap(), u);
        assert_eq!(inverse_transform(&u, &z).unwrap(), u);
        assert_eq!(control_input(&u, &z, 0.0).unwrap(), 0.0);
        assert_eq!(control_input(&ScalarField::zeros(grid), &z, 0.7).unwrap(), 0.7);
    }

    #[test]
    fn composition_is_identity() {
        let grid = Grid1D::new(101).unwrap();
        let p = unstable();
        let k = solve_kernel(&p, grid).unwrap();
        let l = solve_inverse_kernel(&p, grid).unwrap();
        let u = ScalarField::from_fn(grid, |x| (3.0 * x).sin() + x * x);
        let back = inverse_transform(&forward_transform(&u, &k).unwrap(), &l).unwrap();
        assert!(back.sub(&u).unwrap().max_abs() < 1e-7);
    }

    #[test]
    fn compatible_profile_satisfies_conditions() {
        let grid = Grid1D::new(101).unwrap();
        let p = unstable();
        let k = solve_kernel(&p, grid).unwrap();
        let u0 = compatible_initial_condition(&p, 1.0, &k).unwrap();
        let rep = check_closed_loop_compatibility(&p, &u0, &SignalSpec::Zero, &ForcingSpec::Zero, &k).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures());
        let bad = InitialConditionSpec::Bump { amplitude: 1.0 };
        let rep = check_closed_loop_compatibility(&p, &bad, &SignalSpec::Zero, &ForcingSpec::Zero, &k).unwrap();
        assert!(!rep.all_pass());
    }

    #[test]
    fn eigenvalue_signs() {
        let grid = Grid1D::new(101).unwrap();
        let p = unstable();
        let open = largest_eigenvalue(&p, grid, Operator::OpenLoop).unwrap();
        let target = largest_eigenvalue(&p, grid, Operator::Target).unwrap();
        // continuous values 10 - π² and -1 - π²
        assert!(open > 0.0 && (open - (10.0 - std::f64::consts::PI.powi(2))).abs() < 1e-2, "{open}");
        assert!((target + 1.0 + std::f64::consts::PI.powi(2)).abs() < 1e-2, "{target}");
    }

    #[test]
    fn closed_loop_boundary_matches_feedback() {
        let grid = Grid1D::new(51).unwrap();
        let p = unstable();
        let k = solve_kernel(&p, grid).unwrap();
        let u0 = compatible_initial_condition(&p, 1.0, &k).unwrap();
        let d = SignalSpec::RampedCosine { amplitude: 0.05, omega: 1.0 };
        let s = RunSettings::new(1e-3, 0.5).with_stride(10);
        let traj = simulate_closed_loop(&p, &u0, &d, &ForcingSpec::Zero, &k, &s).unwrap();
        for (t, u) in traj.times().iter().zip(traj.fields()) {
            let expect = control_input(u, &k, d.value(*t)).unwrap();
            assert!((u.values()[50] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn stable_plant_without_kernel_decays() {
        let grid = Grid1D::new(41).unwrap();
        let p = ReactionDiffusionParams::new(1.0, Coefficient::constant(1.0), 1.0).unwrap();
        let k = solve_kernel(&p, grid).unwrap();
        assert_eq!(k.max_abs(), 0.0);
        let u0 = InitialConditionSpec::Bump { amplitude: 10.0 };
        let s = RunSettings::new(1e-3, 1.0).with_stride(50);
        let traj = simulate_closed_loop(&p, &u0, &SignalSpec::Zero, &ForcingSpec::Zero, &k, &s).unwrap();
        let sups: Vec<f64> = traj.fields().iter().map(|f| f.max_abs()).collect();
        assert!(sups.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn target_split_trivial_cases() {
        let grid = Grid1D::new(31).unwrap();
        let p = unstable();
        let s = RunSettings::new(1e-3, 0.2).with_stride(20);
        let w0 = ScalarField::from_fn(grid, |x| x * (1.0 - x));
        let (g, h) = simulate_target_split(&p, &w0, &SignalSpec::Zero, &ForcingSpec::Zero, &s).unwrap();
        assert!(g.fields().iter().all(|f| f.max_abs() == 0.0));
        assert!(h.last().max_abs() < w0.max_abs());
        let d = SignalSpec::RampedCosine { amplitude: 0.1, omega: 2.0 };
        let (_, h) = simulate_target_split(&p, &ScalarField::zeros(grid), &d, &ForcingSpec::Zero, &s).unwrap();
        assert!(h.fields().iter().all(|f| f.max_abs() == 0.0));
    }
}
