//! Uniform grid on [0, 1], nodal fields, discrete norms, finite differences,
//! quadrature and the tridiagonal solver shared by every other module.

use crate::error::{Error, Result};

/// Uniform grid `x_i = i h` on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_nodes: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::InvalidGrid(n_nodes));
        }
        Ok(Grid1D {
            n_nodes,
            h: 1.0 / (n_nodes - 1) as f64,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        // exact at both ends
        if i + 1 == self.n_nodes {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|i| self.node(i))
    }
}

pub fn make_grid(n_nodes: usize) -> Result<Grid1D> {
    Grid1D::new(n_nodes)
}

/// Samples of a function of x on a [`Grid1D`]. Always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::ShapeMismatch {
                expected: grid.n_nodes(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        ScalarField { grid, values }
    }

    /// Skips the finiteness scan; callers guarantee finite values.
    pub(crate) fn from_vec_unchecked(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_nodes());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &ScalarField, op: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            values,
        })
    }

    /// Linear interpolation at `x` in [0, 1].
    pub fn interpolate(&self, x: f64) -> f64 {
        let h = self.grid.spacing();
        let n = self.len();
        let s = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let theta = s - i as f64;
        (1.0 - theta) * self.values[i] + theta * self.values[i + 1]
    }
}

/// Norm order: a finite `p >= 1` or the sup norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

/// Composite trapezoid rule for samples with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

fn trapezoid_map(values: &[f64], h: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().map(|&v| f(v)).sum();
    h * (inner + 0.5 * (f(values[0]) + f(values[n - 1])))
}

/// Squared L2(0,1) norm by the trapezoid rule.
pub fn l2_norm_squared(field: &ScalarField) -> f64 {
    trapezoid_map(field.values(), field.grid().spacing(), |v| v * v)
}

pub fn l2_norm(field: &ScalarField) -> f64 {
    l2_norm_squared(field).sqrt()
}

/// `p`-th power of the Lp norm, `∫|u|^p`, by the trapezoid rule.
pub fn lp_norm_pow(field: &ScalarField, p: f64) -> f64 {
    trapezoid_map(field.values(), field.grid().spacing(), |v| v.abs().powf(p))
}

pub fn lp_norm(field: &ScalarField, order: Order) -> Result<f64> {
    match order {
        Order::Infinity => Ok(field.max_abs()),
        Order::Finite(p) if p.is_nan() || p < 1.0 => Err(Error::InvalidOrder(p)),
        Order::Finite(p) if p.is_infinite() => Ok(field.max_abs()),
        Order::Finite(p) => {
            // Scale by the sup norm so large p cannot overflow.
            let m = field.max_abs();
            if m == 0.0 {
                return Ok(0.0);
            }
            let scaled = trapezoid_map(field.values(), field.grid().spacing(), |v| {
                (v.abs() / m).powf(p)
            });
            Ok(m * scaled.powf(1.0 / p))
        }
    }
}

/// First derivative: central differences inside, second-order one-sided
/// stencils at both ends. Exact for quadratics.
pub fn derivative(field: &ScalarField) -> ScalarField {
    let u = field.values();
    let n = u.len();
    let h = field.grid().spacing();
    let mut out = vec![0.0; n];
    // written in differences so constants give exactly zero
    out[0] = (4.0 * (u[1] - u[0]) - (u[2] - u[0])) / (2.0 * h);
    out[n - 1] = (4.0 * (u[n - 1] - u[n - 2]) - (u[n - 1] - u[n - 3])) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    }
    ScalarField::from_vec_unchecked(field.grid(), out)
}

/// Second derivative: three-point stencil inside; the end values are
/// copied from the neighbouring interior node.
pub fn second_derivative(field: &ScalarField) -> ScalarField {
    let u = field.values();
    let n = u.len();
    let h2 = field.grid().spacing().powi(2);
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    ScalarField::from_vec_unchecked(field.grid(), out)
}

/// LU factors of a tridiagonal matrix (Thomas algorithm), reusable across
/// right-hand sides.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    // modified upper coefficients c'_i and inverse pivots 1/d'_i
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `lower` and `upper` are the sub- and super-diagonals (length `n - 1`).
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::ShapeMismatch {
                expected: n.saturating_sub(1),
                found: lower.len().max(upper.len()),
            });
        }
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let l = if i > 0 { lower[i - 1] } else { 0.0 };
            let pivot = diag[i] - l * prev_c;
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem(i));
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper_mod[i] = upper[i] * inv_pivot[i];
                prev_c = upper_mod[i];
            }
        }
        Ok(Tridiagonal {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != diag.len() {
        return Err(Error::ShapeMismatch {
            expected: diag.len(),
            found: rhs.len(),
        });
    }
    let lu = Tridiagonal::factor(lower, diag, upper)?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x);
    Ok(x)
}

// Unit-spacing weights of the prefix rule below.
const BOOLE: [f64; 5] = [14.0 / 45.0, 64.0 / 45.0, 8.0 / 15.0, 64.0 / 45.0, 14.0 / 45.0];
// Degree-4 interpolant through the last five nodes, integrated over the last
// r = 1, 2, 3 intervals.
const TAIL: [[f64; 5]; 3] = [
    [-19.0 / 720.0, 53.0 / 360.0, -11.0 / 30.0, 323.0 / 360.0, 251.0 / 720.0],
    [-1.0 / 90.0, 2.0 / 45.0, 4.0 / 15.0, 62.0 / 45.0, 29.0 / 90.0],
    [-3.0 / 80.0, 21.0 / 40.0, 9.0 / 10.0, 51.0 / 40.0, 27.0 / 80.0],
];
const SHORT: [&[f64]; 3] = [
    &[0.5, 0.5],
    &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
    &[3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0],
];

/// `∫_0^{x_i} F` from the samples `F(x_0..=x_i)`, using composite Boole
/// blocks and a degree-4 interpolatory tail (exact for quartics).
/// Short prefixes fall back to closed Newton-Cotes rules.
pub fn integrate_prefix_with(i: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    if i == 0 {
        return 0.0;
    }
    if i < 4 {
        let w = SHORT[i - 1];
        return h * w.iter().enumerate().map(|(j, wj)| wj * f(j)).sum::<f64>();
    }
    let r = i % 4;
    let full = i - r;
    let mut s = 0.0;
    for start in (0..full).step_by(4) {
        s += BOOLE.iter().enumerate().map(|(j, wj)| wj * f(start + j)).sum::<f64>();
    }
    if r > 0 {
        let base = i - 4;
        s += TAIL[r - 1]
            .iter()
            .enumerate()
            .map(|(j, wj)| wj * f(base + j))
            .sum::<f64>();
    }
    h * s
}

pub fn integrate_prefix(samples: &[f64], h: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    integrate_prefix_with(samples.len() - 1, h, |j| samples[j])
}

/// Time-ordered field snapshots plus the disturbance histories the bound
/// evaluators need.
///
/// The histories are running quantities updated at every solver step, not
/// only at stored snapshots, so a coarse output stride does not
/// under-sample the maxima.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid1D,
    times: Vec<f64>,
    fields: Vec<ScalarField>,
    boundary: Vec<f64>,
    boundary_sup: Vec<f64>,
    boundary_peak: Vec<f64>,
    forcing_sup: Vec<f64>,
    forcing_l2: Vec<f64>,
    state_sup: Vec<f64>,
}

impl Trajectory {
    /// Snapshots with zero disturbance histories; the state running maximum
    /// is taken over the snapshots themselves.
    pub fn from_snapshots(times: Vec<f64>, fields: Vec<ScalarField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidParameter("trajectory needs at least one field".into()))?;
        let grid = first.grid();
        if times.len() != fields.len() {
            return Err(Error::ShapeMismatch {
                expected: fields.len(),
                found: times.len(),
            });
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "times must start at 0 and increase strictly".into(),
            ));
        }
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(Error::InvalidParameter("fields live on different grids".into()));
        }
        let mut state_sup = Vec::with_capacity(fields.len());
        let mut running: f64 = 0.0;
        for f in &fields {
            running = running.max(f.max_abs());
            state_sup.push(running);
        }
        let zeros = vec![0.0; times.len()];
        Ok(Trajectory {
            grid,
            times,
            fields,
            boundary: zeros.clone(),
            boundary_sup: zeros.clone(),
            boundary_peak: zeros.clone(),
            forcing_sup: zeros.clone(),
            forcing_l2: zeros,
            state_sup,
        })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }
    pub fn initial(&self) -> &ScalarField {
        &self.fields[0]
    }
    pub fn last(&self) -> &ScalarField {
        &self.fields[self.fields.len() - 1]
    }
    /// d(t_j) at the snapshot times.
    pub fn boundary_history(&self) -> &[f64] {
        &self.boundary
    }
    /// max_{s <= t_j} |d(s)| over every solver step.
    pub fn boundary_sup_history(&self) -> &[f64] {
        &self.boundary_sup
    }
    /// max_{s <= t_j} d(s) (signed) over every solver step.
    pub fn boundary_peak_history(&self) -> &[f64] {
        &self.boundary_peak
    }
    /// max |f(x, s)| over grid nodes and steps up to t_j.
    pub fn forcing_sup_history(&self) -> &[f64] {
        &self.forcing_sup
    }
    /// ∫_0^{t_j} ||f(., s)||^2 ds (trapezoid over the steps).
    pub fn forcing_l2_history(&self) -> &[f64] {
        &self.forcing_l2
    }
    /// max |field| over grid nodes and steps up to t_j.
    pub fn state_sup_history(&self) -> &[f64] {
        &self.state_sup
    }

    /// Pointwise sum of two trajectories on the same time samples. Histories
    /// are taken from `self` except the state maximum, which is recomputed
    /// from the summed snapshots.
    pub fn sum(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.times != other.times {
            return Err(Error::InvalidParameter("trajectories sampled at different times".into()));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        let mut running: f64 = 0.0;
        out.state_sup = fields
            .iter()
            .map(|f| {
                running = running.max(f.max_abs());
                running
            })
            .collect();
        out.fields = fields;
        Ok(out)
    }
}

/// Accumulates running histories step by step and stores snapshots.
#[derive(Debug)]
pub(crate) struct TrajectoryRecorder {
    traj: Trajectory,
    time: f64,
    d_now: f64,
    boundary_sup: f64,
    boundary_peak: f64,
    forcing_sup: f64,
    forcing_l2: f64,
    forcing_sq_now: f64,
    state_sup: f64,
}

impl TrajectoryRecorder {
    pub fn new(initial: &ScalarField, d0: f64, f0: &[f64]) -> Self {
        let grid = initial.grid();
        let h = grid.spacing();
        let mut rec = TrajectoryRecorder {
            traj: Trajectory {
                grid,
                times: Vec::new(),
                fields: Vec::new(),
                boundary: Vec::new(),
                boundary_sup: Vec::new(),
                boundary_peak: Vec::new(),
                forcing_sup: Vec::new(),
                forcing_l2: Vec::new(),
                state_sup: Vec::new(),
            },
            time: 0.0,
            d_now: d0,
            boundary_sup: d0.abs(),
            boundary_peak: d0,
            forcing_sup: f0.iter().fold(0.0, |m, v| m.max(v.abs())),
            forcing_l2: 0.0,
            forcing_sq_now: trapezoid_map(f0, h, |v| v * v),
            state_sup: initial.max_abs(),
        };
        rec.record(initial);
        rec
    }

    /// Registers one solver step ending at `t` with the new state.
    pub fn advance(&mut self, t: f64, d: f64, f: &[f64], state: &ScalarField) {
        let h = self.traj.grid.spacing();
        let sq = trapezoid_map(f, h, |v| v * v);
        self.forcing_l2 += 0.5 * (t - self.time) * (self.forcing_sq_now + sq);
        self.forcing_sq_now = sq;
        self.time = t;
        self.d_now = d;
        self.boundary_sup = self.boundary_sup.max(d.abs());
        self.boundary_peak = self.boundary_peak.max(d);
        self.forcing_sup = f.iter().fold(self.forcing_sup, |m, v| m.max(v.abs()));
        self.state_sup = self.state_sup.max(state.max_abs());
    }

    pub fn record(&mut self, state: &ScalarField) {
        let t = &mut self.traj;
        t.times.push(self.time);
        t.fields.push(state.clone());
        t.boundary.push(self.d_now);
        t.boundary_sup.push(self.boundary_sup);
        t.boundary_peak.push(self.boundary_peak);
        t.forcing_sup.push(self.forcing_sup);
        t.forcing_l2.push(self.forcing_l2);
        t.state_sup.push(self.state_sup);
    }

    pub fn finish(self) -> Trajectory {
        self.traj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn grid_spacing() {
        assert_eq!(make_grid(3).unwrap().spacing(), 0.5);
        assert!(close(make_grid(101).unwrap().spacing(), 0.01, 1e-15));
        assert!(matches!(make_grid(2), Err(Error::InvalidGrid(2))));
        let g = make_grid(7).unwrap();
        assert_eq!(g.node(6), 1.0);
        assert!(close(g.spacing() * 6.0, 1.0, 1e-15));
    }

    #[test]
    fn field_validation() {
        let g = make_grid(5).unwrap();
        assert!(matches!(
            ScalarField::new(g, vec![0.0; 4]),
            Err(Error::ShapeMismatch { expected: 5, found: 4 })
        ));
        assert!(matches!(
            ScalarField::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(2))
        ));
    }

    #[test]
    fn l2_examples() {
        for n in [3, 10, 101] {
            let g = make_grid(n).unwrap();
            assert!(close(l2_norm(&ScalarField::from_fn(g, |_| 1.0)), 1.0, 1e-14));
            assert_eq!(l2_norm(&ScalarField::zeros(g)), 0.0);
        }
        let g = make_grid(1001).unwrap();
        let x = ScalarField::from_fn(g, |x| x);
        assert!(close(l2_norm(&x), (1.0f64 / 3.0).sqrt(), 1e-6));
    }

    #[test]
    fn lp_examples() {
        let g = make_grid(11).unwrap();
        let two = ScalarField::from_fn(g, |_| 2.0);
        assert_eq!(lp_norm(&two, Order::Infinity).unwrap(), 2.0);
        assert!(close(lp_norm(&two, Order::Finite(2.0)).unwrap(), 2.0, 1e-14));
        assert!(matches!(
            lp_norm(&two, Order::Finite(0.5)),
            Err(Error::InvalidOrder(_))
        ));
        let g = make_grid(2001).unwrap();
        let s = ScalarField::from_fn(g, |x| (PI * x).sin());
        assert!(close(lp_norm(&s, Order::Finite(2.0)).unwrap(), 0.5f64.sqrt(), 1e-6));
    }

    #[test]
    fn derivative_examples() {
        let g = make_grid(101).unwrap();
        let d = derivative(&ScalarField::from_fn(g, |x| x));
        assert!(d.values().iter().all(|v| close(*v, 1.0, 1e-12)));
        let d = derivative(&ScalarField::from_fn(g, |_| 3.5));
        assert!(d.values().iter().all(|v| *v == 0.0));
        let d = derivative(&ScalarField::from_fn(g, |x| x * x));
        let err = g
            .nodes()
            .zip(d.values())
            .fold(0.0f64, |m, (x, v)| m.max((v - 2.0 * x).abs()));
        assert!(err <= 1e-10, "max error {err}");
    }

    #[test]
    fn tridiagonal_examples() {
        let x = solve_tridiagonal(&[0.0, 0.0], &[1.0; 3], &[0.0, 0.0], &[4.0, -1.0, 2.5]).unwrap();
        assert_eq!(x, vec![4.0, -1.0, 2.5]);
        let x = solve_tridiagonal(&[-1.0, -1.0], &[2.0; 3], &[-1.0, -1.0], &[1.0; 3]).unwrap();
        for (a, b) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert!(close(*a, b, 1e-14));
        }
        assert!(matches!(
            solve_tridiagonal(&[0.0, 0.0], &[0.0, 1.0, 1.0], &[0.0, 0.0], &[1.0; 3]),
            Err(Error::SingularSystem(0))
        ));
    }

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let g = make_grid(11).unwrap();
        let f = ScalarField::from_fn(g, |x| 3.0 * x - 1.0);
        for x in [0.0, 0.05, 0.333, 0.99, 1.0] {
            assert!(close(f.interpolate(x), 3.0 * x - 1.0, 1e-14));
        }
    }

    #[test]
    fn prefix_rule_exact_for_quartics() {
        let h = 0.1;
        for i in 4..30 {
            let x_end = i as f64 * h;
            let got = integrate_prefix_with(i, h, |j| {
                let x = j as f64 * h;
                x.powi(4) - 2.0 * x.powi(3) + x
            });
            let exact = x_end.powi(5) / 5.0 - x_end.powi(4) / 2.0 + x_end.powi(2) / 2.0;
            assert!(close(got, exact, 1e-12 * (1.0 + exact.abs())), "i={i}");
        }
        for i in 1..4 {
            let got = integrate_prefix_with(i, h, |j| j as f64 * h);
            assert!(close(got, 0.5 * (i as f64 * h).powi(2), 1e-14));
        }
    }
}
