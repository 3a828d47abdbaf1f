//! Super-level sets A_k(s) = {x : w(x, s) > k} on the grid.
//!
//! The measure of A_k counts interior nodes strictly above k, each weighted
//! by h. Whether the set is taken open or closed differs by at most one
//! cell.

use crate::error::{Error, Result};
use crate::inequalities::InequalityMargin;
use crate::numerics::{ScalarField, Trajectory};

pub const CHEBYSHEV_TOL: f64 = 1e-10;

/// h · #{interior i : field_i > k}.
pub fn level_set_measure(field: &ScalarField, k: f64) -> f64 {
    let v = field.values();
    let count = v[1..v.len() - 1].iter().filter(|&&x| x > k).count();
    count as f64 * field.grid().spacing()
}

/// I_k = ∫ ((w - k)₊)², trapezoid rule.
pub fn level_integral(field: &ScalarField, k: f64) -> f64 {
    let v = field.values();
    let h = field.grid().spacing();
    let sq = |x: f64| {
        let e = (x - k).max(0.0);
        e * e
    };
    let n = v.len();
    h * (v[1..n - 1].iter().map(|&x| sq(x)).sum::<f64>() + 0.5 * (sq(v[0]) + sq(v[n - 1])))
}

/// φ(k) = sup over stored times of |A_k(s)|, for increasing levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetProfile {
    pub levels: Vec<f64>,
    pub phi: Vec<f64>,
}

impl LevelSetProfile {
    /// Smallest stored level with φ = 0.
    pub fn vanishing_level(&self) -> Option<f64> {
        self.levels.iter().zip(&self.phi).find(|(_, p)| **p == 0.0).map(|(k, _)| *k)
    }
}

pub fn level_set_profile(traj: &Trajectory, levels: &[f64]) -> Result<LevelSetProfile> {
    if levels.iter().any(|k| k.is_nan()) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidLevels("levels must be strictly increasing".into()));
    }
    let phi = levels
        .iter()
        .map(|&k| traj.fields().iter().map(|f| level_set_measure(f, k)).fold(0.0, f64::max))
        .collect();
    Ok(LevelSetProfile {
        levels: levels.to_vec(),
        phi,
    })
}

/// Worst margin over stored times of I_k(s) >= (h_level - k)² |A_{h_level}(s)|.
pub fn check_chebyshev_link(traj: &Trajectory, k: f64, h_level: f64) -> Result<InequalityMargin> {
    if !(h_level > k) {
        return Err(Error::InvalidLevels(format!("need h > k, got h = {h_level}, k = {k}")));
    }
    let gap = (h_level - k) * (h_level - k);
    let mut worst: Option<InequalityMargin> = None;
    for f in traj.fields() {
        let m = InequalityMargin::new(gap * level_set_measure(f, h_level), level_integral(f, k), CHEBYSHEV_TOL);
        worst = Some(match worst {
            Some(w) => w.worst(m),
            None => m,
        });
    }
    Ok(worst.expect("trajectory has at least one field"))
}
