//! Volterra kernels of the backstepping transform.
//!
//! The forward kernel solves
//!
//! ```text
//! μ (k_xx - k_yy) = (ν - a(y)) k,   k(x, 0) = 0,   k(x, x) = -(1 / 2μ) ∫_0^x (ν - a)
//! ```
//!
//! and the inverse kernel the same problem with reaction -(ν - a(x)) l.
//! In ξ = x + y, η = x - y both become the integral equation
//!
//! ```text
//! G(ξ, η) = g(ξ) - g(η) + 1/4 ∫_η^ξ ∫_0^η c(τ, s) G(τ, s) ds dτ
//! ```
//!
//! with g(ξ) = k(ξ/2, ξ/2). It is solved by successive approximation on a
//! trapezoid grid; three grid levels are then combined by Richardson
//! extrapolation to remove the h² and h⁴ error terms.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numerics::Grid1D;

use super::ReactionDiffusionParams;

pub const KERNEL_TOL: f64 = 1e-12;
pub const KERNEL_MAX_ITER: usize = 200;
/// Above this many intervals only two extrapolation levels are used.
pub const THREE_LEVEL_LIMIT: usize = 400;

/// Samples k(x_i, y_j), 0 <= j <= i, packed row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    grid: Grid1D,
    values: Vec<f64>,
}

fn offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl Kernel {
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n_nodes();
        let mut values = Vec::with_capacity(offset(n));
        for i in 0..n {
            let x = grid.node(i);
            for j in 0..=i {
                values.push(f(x, grid.node(j)));
            }
        }
        Kernel { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Kernel {
            grid,
            values: vec![0.0; offset(grid.n_nodes())],
        }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// k(x_i, y_j) for j <= i.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(j <= i);
        self.values[offset(i) + j]
    }

    /// k(x_i, y_0..=y_i).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[offset(i)..offset(i + 1)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |self - other| over the triangle.
    pub fn max_diff(&self, other: &Kernel) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: self.grid.n_nodes(),
                found: other.grid.n_nodes(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Largest deviation of k(x_i, x_i) from `diag(x_i)`.
    pub fn diagonal_residual(&self, diag: impl Fn(f64) -> f64) -> f64 {
        (0..self.grid.n_nodes())
            .map(|i| (self.get(i, i) - diag(self.grid.node(i))).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// G on a characteristic grid with `m` intervals per unit of ξ and η.
/// Column q holds G(p h, q h) for p = q..=2m - q.
fn solve_characteristic(
    params: &ReactionDiffusionParams,
    m: usize,
    dir: Direction,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let h = 1.0 / m as f64;
    let pmax = 2 * m;
    let mu = params.mu;
    let b = |x: f64| (params.nu - params.a.value(x)) / mu;
    let g = |xi: f64| -0.5 * params.reaction_integral(0.5 * xi) / mu;
    let c = |t: usize, s: usize| match dir {
        Direction::Forward => b(0.5 * (t - s) as f64 * h),
        Direction::Inverse => -b(0.5 * (t + s) as f64 * h),
    };
    let gv: Vec<f64> = (0..=pmax).map(|p| g(p as f64 * h)).collect();
    let base: Vec<Vec<f64>> = (0..=m)
        .map(|q| (q..=pmax - q).map(|p| gv[p] - gv[q]).collect())
        .collect();
    // c(t, s) sampled once; row t holds s = 0..=min(t, 2m - t)
    let coef: Vec<Vec<f64>> = exec::map_range(exec, pmax + 1, |t| (0..=t.min(pmax - t)).map(|s| c(t, s)).collect());

    let mut cur = base.clone();
    let mut update = f64::INFINITY;
    for _ in 0..KERNEL_MAX_ITER {
        // S(t, q) = ∫_0^{q h} c(t, s) G(t, s) ds, cumulative trapezoid in s.
        let inner: Vec<Vec<f64>> = exec::map_range(exec, pmax + 1, |t| {
            let smax = t.min(pmax - t);
            let mut out = Vec::with_capacity(smax + 1);
            let mut acc = 0.0;
            let mut prev = coef[t][0] * cur[0][t];
            out.push(0.0);
            for s in 1..=smax {
                let v = coef[t][s] * cur[s][t - s];
                acc += 0.5 * h * (prev + v);
                prev = v;
                out.push(acc);
            }
            out
        });
        // G(p, q) = base + 1/4 ∫_{q h}^{p h} S(τ, q) dτ, cumulative in p.
        let next: Vec<Vec<f64>> = exec::map_range(exec, m + 1, |q| {
            let mut col = Vec::with_capacity(pmax - 2 * q + 1);
            let mut acc = 0.0;
            col.push(base[q][0]);
            for p in q + 1..=pmax - q {
                acc += 0.5 * h * (inner[p - 1][q] + inner[p][q]);
                col.push(base[q][p - q] + 0.25 * acc);
            }
            col
        });
        update = next
            .iter()
            .zip(&cur)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if !update.is_finite() {
            break;
        }
        cur = next;
        if update < KERNEL_TOL {
            return Ok(cur);
        }
    }
    Err(Error::KernelDivergence {
        iterations: KERNEL_MAX_ITER,
        update,
    })
}

fn kernel_at_level(
    params: &ReactionDiffusionParams,
    grid: Grid1D,
    refine: usize,
    dir: Direction,
    exec: Execution,
) -> Result<Vec<f64>> {
    let n = grid.n_nodes() - 1;
    let cols = solve_characteristic(params, n * refine, dir, exec)?;
    let mut out = Vec::with_capacity(offset(n + 1));
    for i in 0..=n {
        for j in 0..=i {
            // q = refine (i - j), p - q = 2 refine j
            out.push(cols[refine * (i - j)][2 * refine * j]);
        }
    }
    Ok(out)
}

fn solve(params: &ReactionDiffusionParams, grid: Grid1D, dir: Direction, exec: Execution) -> Result<Kernel> {
    let n = grid.n_nodes() - 1;
    let k1 = kernel_at_level(params, grid, 1, dir, exec)?;
    let k2 = kernel_at_level(params, grid, 2, dir, exec)?;
    let values = if n > THREE_LEVEL_LIMIT {
        k1.iter().zip(&k2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
    } else {
        let k4 = kernel_at_level(params, grid, 4, dir, exec)?;
        k1.iter()
            .zip(&k2)
            .zip(&k4)
            .map(|((a, b), c)| (64.0 * c - 20.0 * b + a) / 45.0)
            .collect()
    };
    let mut kernel = Kernel { grid, values };
    // The diagonal is known in closed form; pin it exactly.
    for i in 0..=n {
        let x = grid.node(i);
        kernel.values[offset(i) + i] = params.kernel_diagonal(x);
    }
    Ok(kernel)
}

/// Forward kernel k by successive approximation with Richardson extrapolation.
pub fn solve_kernel(params: &ReactionDiffusionParams, grid: Grid1D) -> Result<Kernel> {
    solve_kernel_with(params, grid, Execution::default())
}

pub fn solve_kernel_with(params: &ReactionDiffusionParams, grid: Grid1D, exec: Execution) -> Result<Kernel> {
    solve(params, grid, Direction::Forward, exec)
}

/// Inverse kernel l.
pub fn solve_inverse_kernel(params: &ReactionDiffusionParams, grid: Grid1D) -> Result<Kernel> {
    solve_inverse_kernel_with(params, grid, Execution::default())
}

pub fn solve_inverse_kernel_with(params: &ReactionDiffusionParams, grid: Grid1D, exec: Execution) -> Result<Kernel> {
    solve(params, grid, Direction::Inverse, exec)
}

/// Σ_m q^m / (m! (m+1)!), summed until the term drops below 1e-16 of the sum.
///
/// With q = z²/4 this is 2 I₁(z)/z; with q = -z²/4 it is 2 J₁(z)/z.
pub fn bessel_ratio_series(q: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..500 {
        term *= q / (m as f64 * (m + 1) as f64);
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
    }
    sum
}

/// Modified Bessel function I₁(z).
pub fn bessel_i1(z: f64) -> f64 {
    0.5 * z * bessel_ratio_series(0.25 * z * z)
}

/// Ordinary Bessel function J₁(z).
pub fn bessel_j1(z: f64) -> f64 {
    0.5 * z * bessel_ratio_series(-0.25 * z * z)
}

/// k(x, y) = -λ y I₁(z)/z with λ = (ν - a0)/μ, z² = λ (x² - y²). For λ < 0
/// the series turns into the J₁ branch automatically.
fn closed_form(lambda: f64, x: f64, y: f64) -> f64 {
    -0.5 * lambda * y * bessel_ratio_series(0.25 * lambda * (x * x - y * y))
}

/// Forward kernel for constant a ≡ a0 from the Bessel series.
pub fn kernel_closed_form_constant(a0: f64, nu: f64, mu: f64, grid: Grid1D) -> Kernel {
    let lambda = (nu - a0) / mu;
    Kernel::from_fn(grid, |x, y| closed_form(lambda, x, y))
}

/// Inverse kernel for constant a ≡ a0: l(x, y) = -λ y J₁(z)/z.
pub fn inverse_kernel_closed_form_constant(a0: f64, nu: f64, mu: f64, grid: Grid1D) -> Kernel {
    let lambda = (nu - a0) / mu;
    Kernel::from_fn(grid, |x, y| -closed_form(-lambda, x, y))
}
