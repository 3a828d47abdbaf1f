//! The functional inequalities behind the level-set argument: the closed
//! form of the De Giorgi iteration lemma, the C¹ embedding bound, the
//! pointwise bound it is derived from, and the Dirichlet Poincaré step.
//!
//! Checks on a general interval [a, b] reuse the unit grid: the samples are
//! read as `u(a + (b - a) s)` for `s` in [0, 1] and the norms are rescaled
//! analytically.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numerics::{derivative, l2_norm_squared, lp_norm, lp_norm_pow, Grid1D, Order, ScalarField};
use crate::random::Lcg64;

pub const DEFAULT_TOL: f64 = 1e-6;
const BOUNDARY_ZERO_TOL: f64 = 1e-12;

/// Hypotheses of the iteration lemma: φ nonincreasing on [k0, ∞) with
/// φ(h) <= (M / (h - k))^α φ(k)^β for all h > k >= k0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeGiorgiHypothesis {
    pub m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k0: f64,
    pub phi_k0: f64,
}

impl DeGiorgiHypothesis {
    pub fn new(m: f64, alpha: f64, beta: f64, k0: f64, phi_k0: f64) -> Result<Self> {
        let hyp = DeGiorgiHypothesis {
            m,
            alpha,
            beta,
            k0,
            phi_k0,
        };
        hyp.validate()?;
        Ok(hyp)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidHypothesis(what.to_string()));
        if !(self.m > 0.0) || !self.m.is_finite() {
            return bad("M must be positive");
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad("alpha must be positive");
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return bad("beta must exceed 1");
        }
        if !(self.phi_k0 >= 0.0) || !self.phi_k0.is_finite() {
            return bad("phi(k0) must be non-negative");
        }
        if !self.k0.is_finite() {
            return bad("k0 must be finite");
        }
        Ok(())
    }

    /// Level above which φ vanishes: φ(k0 + l0) = 0.
    pub fn vanishing_level(&self) -> Result<f64> {
        Ok(self.k0 + degiorgi_l0(self)?)
    }
}

/// l0 = 2^{β/(β-1)} M φ(k0)^{(β-1)/α}.
pub fn degiorgi_l0(hyp: &DeGiorgiHypothesis) -> Result<f64> {
    hyp.validate()?;
    let b = hyp.beta;
    Ok(2f64.powf(b / (b - 1.0)) * hyp.m * hyp.phi_k0.powf((b - 1.0) / hyp.alpha))
}

/// Both sides of one inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub tol: f64,
}

impl InequalityMargin {
    pub fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        InequalityMargin {
            lhs,
            rhs,
            margin,
            satisfied: margin >= -tol,
            tol,
        }
    }

    /// The worse of two margins, keeping the tolerance of `self`.
    pub fn worst(self, other: InequalityMargin) -> InequalityMargin {
        if other.margin < self.margin {
            InequalityMargin::new(other.lhs, other.rhs, self.tol)
        } else {
            self
        }
    }
}

fn check_interval(a: f64, b: f64) -> Result<f64> {
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok(b - a)
}

/// ||u||^2 and ||u_x||^2 on [a, b] from samples on the unit grid.
fn interval_norms(field: &ScalarField, len: f64) -> (f64, f64) {
    let u2 = l2_norm_squared(field) * len;
    let ux2 = l2_norm_squared(&derivative(field)) / len;
    (u2, ux2)
}

/// (∫_a^b |u|^p)^{1/p} <= (b-a)^{1/p} ((2/(b-a))||u||^2 + (b-a)||u_x||^2)^{1/2}.
pub fn check_embedding(field: &ScalarField, a: f64, b: f64, order: Order) -> Result<InequalityMargin> {
    let len = check_interval(a, b)?;
    let lhs = match order {
        Order::Infinity => lp_norm(field, Order::Infinity)?,
        Order::Finite(p) => {
            lp_norm(field, order)?;
            (len * lp_norm_pow(field, p)).powf(1.0 / p)
        }
    };
    let (u2, ux2) = interval_norms(field, len);
    let scale = match order {
        Order::Infinity => 1.0,
        Order::Finite(p) => len.powf(1.0 / p),
    };
    let rhs = scale * (2.0 / len * u2 + len * ux2).sqrt();
    Ok(InequalityMargin::new(lhs, rhs, DEFAULT_TOL))
}

/// u(c)^2 <= (2/(b-a))||u||^2 + (b-a)||u_x||^2 for c in [a, b].
pub fn check_pointwise(field: &ScalarField, a: f64, b: f64, c: f64) -> Result<InequalityMargin> {
    let len = check_interval(a, b)?;
    if !(a..=b).contains(&c) {
        return Err(Error::InvalidPoint { c, a, b });
    }
    let uc = field.interpolate((c - a) / len);
    let (u2, ux2) = interval_norms(field, len);
    Ok(InequalityMargin::new(uc * uc, 2.0 / len * u2 + len * ux2, DEFAULT_TOL))
}

/// ||v||^2 <= (1/2)||v_x||^2 for v vanishing at both ends.
pub fn check_poincare_dirichlet(field: &ScalarField) -> Result<InequalityMargin> {
    let v = field.values();
    let (left, right) = (v[0], v[v.len() - 1]);
    if left.abs() > BOUNDARY_ZERO_TOL || right.abs() > BOUNDARY_ZERO_TOL {
        return Err(Error::BoundaryNotZero { left, right });
    }
    let lhs = l2_norm_squared(field);
    let rhs = 0.5 * l2_norm_squared(&derivative(field));
    Ok(InequalityMargin::new(lhs, rhs, DEFAULT_TOL))
}

/// Random trigonometric polynomial
/// `Σ_{j<=deg} a_j cos(jπx) + b_j sin(jπx)` with coefficients in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn random(seed: u64, max_degree: usize) -> Self {
        let mut rng = Lcg64::new(seed);
        let deg = rng.integer(0, max_degree as u64) as usize;
        let mut cos = Vec::with_capacity(deg + 1);
        let mut sin = Vec::with_capacity(deg + 1);
        for j in 0..=deg {
            cos.push(rng.uniform(-1.0, 1.0));
            // sin(0) vanishes; keep the slot for alignment
            sin.push(if j == 0 { 0.0 } else { rng.uniform(-1.0, 1.0) });
        }
        TrigPolynomial { cos, sin }
    }

    /// Pure sine series (vanishes at 0 and 1), degree 1..=max_degree.
    pub fn random_sine(seed: u64, max_degree: usize) -> Self {
        let mut rng = Lcg64::new(seed);
        let deg = rng.integer(1, max_degree.max(1) as u64) as usize;
        let mut sin = vec![0.0];
        sin.extend((1..=deg).map(|_| rng.uniform(-1.0, 1.0)));
        TrigPolynomial {
            cos: vec![0.0; deg + 1],
            sin,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(j, (a, b))| {
                let t = j as f64 * PI * x;
                a * t.cos() + b * t.sin()
            })
            .sum()
    }

    pub fn sample(&self, grid: Grid1D) -> ScalarField {
        let mut f = ScalarField::from_fn(grid, |x| self.eval(x));
        if self.cos.iter().all(|&c| c == 0.0) {
            // sin(jπ) is only zero up to roundoff
            let mut v = f.into_values();
            let n = v.len();
            v[0] = 0.0;
            v[n - 1] = 0.0;
            f = ScalarField::from_vec_unchecked(grid, v);
        }
        f
    }
}

/// Which random family the property suite draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// General trigonometric polynomials (embedding and pointwise checks).
    Trig,
    /// Sine series (Poincaré check).
    Sine,
    /// Both of the above.
    All,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trig" => Ok(Family::Trig),
            "sine" => Ok(Family::Sine),
            "all" => Ok(Family::All),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }
}

/// One row of the property suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRecord {
    pub seed: u64,
    pub check: String,
    pub margin: InequalityMargin,
}

#[derive(Debug, Clone)]
pub struct SuiteSettings {
    pub seeds: u64,
    pub family: Family,
    pub n_nodes: usize,
    pub max_degree: usize,
    pub orders: Vec<f64>,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            seeds: 200,
            family: Family::All,
            n_nodes: 2001,
            max_degree: 8,
            orders: vec![1.0, 2.0, 4.0, 8.0],
        }
    }
}

fn suite_for_seed(seed: u64, s: &SuiteSettings, grid: Grid1D) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    let mut push = |check: String, margin| {
        out.push(SuiteRecord { seed, check, margin });
    };
    if matches!(s.family, Family::Trig | Family::All) {
        let poly = TrigPolynomial::random(seed, s.max_degree);
        let field = poly.sample(grid);
        // Interval and evaluation point drawn from the same stream, after
        // the coefficients.
        let mut rng = Lcg64::new(seed ^ 0x9E37_79B9_7F4A_7C15);
        let a = rng.uniform(-2.0, 2.0);
        let b = a + rng.uniform(0.1, 3.0);
        let c = rng.uniform(a, b);
        for &p in &s.orders {
            push(format!("embedding_p{p}"), check_embedding(&field, a, b, Order::Finite(p))?);
        }
        push("pointwise".into(), check_pointwise(&field, a, b, c)?);
        // sup over c: ||u||_∞^2 <= 2||u||^2 + ||u_x||^2 on [0, 1]
        let sup = field.max_abs();
        let (u2, ux2) = interval_norms(&field, 1.0);
        push("pointwise_sup".into(), InequalityMargin::new(sup * sup, 2.0 * u2 + ux2, DEFAULT_TOL));
    }
    if matches!(s.family, Family::Sine | Family::All) {
        let field = TrigPolynomial::random_sine(seed, s.max_degree).sample(grid);
        push("poincare".into(), check_poincare_dirichlet(&field)?);
    }
    Ok(out)
}

/// Runs every inequality check over `settings.seeds` seeded random fields.
pub fn run_property_suite(settings: &SuiteSettings, exec: Execution) -> Result<Vec<SuiteRecord>> {
    let grid = Grid1D::new(settings.n_nodes)?;
    let seeds: Vec<u64> = (0..settings.seeds).collect();
    let per_seed = exec::map(exec, &seeds, |&seed| suite_for_seed(seed, settings, grid));
    let mut out = Vec::new();
    for r in per_seed {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn l0_examples() {
        let h = DeGiorgiHypothesis::new(1.0, 2.0, 2.0, 0.0, 1.0).unwrap();
        assert!(close(degiorgi_l0(&h).unwrap(), 4.0, 1e-12));
        let h = DeGiorgiHypothesis::new(3.0, 0.7, 1.5, 2.0, 0.0).unwrap();
        assert_eq!(degiorgi_l0(&h).unwrap(), 0.0);
        let h = DeGiorgiHypothesis::new(2.0, 1.0, 3.0, 0.0, 4.0).unwrap();
        // 2^{3/2} * 2 * 4^2
        let expect = 64.0 * 2f64.sqrt();
        assert!(close(degiorgi_l0(&h).unwrap(), expect, 1e-12 * expect));
    }

    #[test]
    fn l0_rejects_bad_hypotheses() {
        assert!(DeGiorgiHypothesis::new(0.0, 1.0, 2.0, 0.0, 1.0).is_err());
        assert!(DeGiorgiHypothesis::new(1.0, -1.0, 2.0, 0.0, 1.0).is_err());
        assert!(DeGiorgiHypothesis::new(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(DeGiorgiHypothesis::new(1.0, 1.0, 2.0, 0.0, -0.1).is_err());
        let raw = DeGiorgiHypothesis {
            m: 1.0,
            alpha: 1.0,
            beta: 0.5,
            k0: 0.0,
            phi_k0: 1.0,
        };
        assert!(matches!(degiorgi_l0(&raw), Err(Error::InvalidHypothesis(_))));
    }

    #[test]
    fn embedding_examples() {
        let g = make_grid(2001).unwrap();
        let one = ScalarField::from_fn(g, |_| 1.0);
        let m = check_embedding(&one, 0.0, 1.0, Order::Finite(2.0)).unwrap();
        assert!(close(m.lhs, 1.0, 1e-12));
        assert!(close(m.rhs, 2f64.sqrt(), 1e-12));
        assert!(close(m.margin, 2f64.sqrt() - 1.0, 1e-12));

        let x = ScalarField::from_fn(g, |x| x);
        let m = check_embedding(&x, 0.0, 1.0, Order::Finite(2.0)).unwrap();
        assert!(close(m.lhs, (1.0f64 / 3.0).sqrt(), 1e-6));
        assert!(close(m.rhs, (5.0f64 / 3.0).sqrt(), 1e-6));

        let s = ScalarField::from_fn(g, |x| (PI * x).sin());
        let m = check_embedding(&s, 0.0, 1.0, Order::Finite(4.0)).unwrap();
        assert!(m.margin >= -1e-6 && m.satisfied);

        assert!(matches!(
            check_embedding(&s, 1.0, 1.0, Order::Finite(2.0)),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn embedding_on_shifted_interval_matches_direct_integrals() {
        // u(x) = x on [1, 3]: samples s -> 1 + 2s
        let g = make_grid(4001).unwrap();
        let f = ScalarField::from_fn(g, |s| 1.0 + 2.0 * s);
        let m = check_embedding(&f, 1.0, 3.0, Order::Finite(2.0)).unwrap();
        // ∫_1^3 x^2 = 26/3, ||u_x||^2 = 2
        assert!(close(m.lhs, (26.0f64 / 3.0).sqrt(), 1e-6));
        let rhs = 2f64.sqrt() * (26.0f64 / 3.0 + 2.0 * 2.0).sqrt();
        assert!(close(m.rhs, rhs, 1e-6));
    }

    #[test]
    fn pointwise_examples() {
        let g = make_grid(1001).unwrap();
        let one = ScalarField::from_fn(g, |_| 1.0);
        for c in [0.0, 0.37, 1.0] {
            let m = check_pointwise(&one, 0.0, 1.0, c).unwrap();
            assert!(close(m.lhs, 1.0, 1e-12) && close(m.rhs, 2.0, 1e-12));
        }
        let x = ScalarField::from_fn(g, |x| x);
        let m = check_pointwise(&x, 0.0, 1.0, 1.0).unwrap();
        assert!(close(m.lhs, 1.0, 1e-12));
        assert!(close(m.rhs, 5.0 / 3.0, 1e-6));
        let z = ScalarField::zeros(g);
        let m = check_pointwise(&z, 0.0, 1.0, 0.5).unwrap();
        assert_eq!((m.lhs, m.rhs, m.margin), (0.0, 0.0, 0.0));
        assert!(matches!(
            check_pointwise(&z, 0.0, 1.0, 1.5),
            Err(Error::InvalidPoint { .. })
        ));
    }

    #[test]
    fn poincare_examples() {
        let g = make_grid(2001).unwrap();
        let mut v = ScalarField::from_fn(g, |x| (PI * x).sin()).into_values();
        *v.last_mut().unwrap() = 0.0;
        let s = ScalarField::new(g, v).unwrap();
        let m = check_poincare_dirichlet(&s).unwrap();
        assert!(close(m.lhs, 0.5, 1e-6));
        assert!(close(m.rhs, PI * PI / 4.0, 1e-5));

        let z = ScalarField::zeros(g);
        let m = check_poincare_dirichlet(&z).unwrap();
        assert_eq!((m.lhs, m.rhs), (0.0, 0.0));

        let q = ScalarField::from_fn(g, |x| x * (1.0 - x));
        let m = check_poincare_dirichlet(&q).unwrap();
        assert!(close(m.lhs, 1.0 / 30.0, 1e-7));
        assert!(close(m.rhs, 1.0 / 6.0, 1e-7));

        let bad = ScalarField::from_fn(g, |x| x);
        assert!(matches!(
            check_poincare_dirichlet(&bad),
            Err(Error::BoundaryNotZero { .. })
        ));
    }

    #[test]
    fn small_suite_passes() {
        let s = SuiteSettings {
            seeds: 12,
            n_nodes: 801,
            ..SuiteSettings::default()
        };
        let rows = run_property_suite(&s, Execution::Sequential).unwrap();
        assert!(rows.iter().all(|r| r.margin.satisfied), "{rows:?}");
        let par = run_property_suite(&s, Execution::Parallel).unwrap();
        assert_eq!(rows, par);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("trig".parse::<Family>().unwrap(), Family::Trig);
        assert!("cosine".parse::<Family>().is_err());
    }
}
