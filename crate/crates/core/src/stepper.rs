//! Crank–Nicolson step for u_t = μ u_xx − c(x) u + s(x, t) with Dirichlet
//! ends, shared by the Burgers and reaction-diffusion solvers.
//!
//! The interior tridiagonal system is factored once per (grid, dt, μ, c).
//! Explicit terms (convection, coupling, forcing) arrive through `source`.

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, Tridiagonal};

#[derive(Debug, Clone)]
pub(crate) struct CrankNicolson {
    n: usize,
    dt: f64,
    r: f64,
    reaction: Vec<f64>,
    lu: Tridiagonal,
}

impl CrankNicolson {
    /// `reaction` holds c(x_i) at every node (ends ignored), or is empty for c ≡ 0.
    pub fn new(grid: Grid1D, mu: f64, dt: f64, reaction: &[f64]) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let n = grid.n_nodes();
        let h = grid.spacing();
        let r = mu * dt / (h * h);
        let reaction = if reaction.is_empty() {
            vec![0.0; n]
        } else if reaction.len() == n {
            reaction.to_vec()
        } else {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: reaction.len(),
            });
        };
        let m = n - 2;
        let off = vec![-0.5 * r; m - 1];
        let diag: Vec<f64> = (1..n - 1).map(|i| 1.0 + r + 0.5 * dt * reaction[i]).collect();
        let lu = Tridiagonal::factor(&off, &diag, &off)?;
        Ok(CrankNicolson { n, dt, r, reaction, lu })
    }

    /// Advances `prev` to `next`. `source[i]` is the explicit right-hand side
    /// at node i (time-centred by the caller); pass an empty slice for none.
    pub fn step(&self, prev: &[f64], source: &[f64], left: f64, right: f64, next: &mut [f64]) {
        let n = self.n;
        let (r, dt) = (self.r, self.dt);
        let rhs = &mut next[1..n - 1];
        for (k, out) in rhs.iter_mut().enumerate() {
            let i = k + 1;
            let lap = prev[i - 1] - 2.0 * prev[i] + prev[i + 1];
            let s = if source.is_empty() { 0.0 } else { source[i] };
            *out = prev[i] + 0.5 * r * lap - 0.5 * dt * self.reaction[i] * prev[i] + dt * s;
        }
        rhs[0] += 0.5 * r * left;
        rhs[n - 3] += 0.5 * r * right;
        self.lu.solve_in_place(rhs);
        next[0] = left;
        next[n - 1] = right;
    }

    /// Response of one step from a zero state to a unit right boundary value.
    pub fn boundary_response(&self) -> Vec<f64> {
        let zeros = vec![0.0; self.n];
        let mut out = vec![0.0; self.n];
        self.step(&zeros, &[], 0.0, 1.0, &mut out);
        out
    }
}

/// n_steps = ceil(t_end / dt) and the effective step t_end / n_steps.
pub(crate) fn step_count(t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok((steps, t_end / steps as f64))
}

/// Overflow guard shared by every simulation.
pub(crate) const BLOW_UP: f64 = 1e8;

pub(crate) fn check_finite(values: &[f64], time: f64) -> Result<()> {
    if values.iter().any(|v| !(v.abs() <= BLOW_UP)) {
        return Err(Error::Divergence { time });
    }
    Ok(())
}
