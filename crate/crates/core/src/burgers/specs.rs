//! Analytic families for the boundary disturbance d(t), the in-domain
//! disturbance f(x, t) and the initial profile u0(x).
//!
//! Every family is built so that the corner compatibility conditions hold
//! exactly: d(0) = d'(0) = 0, f(0, 0) = f(1, 0) = 0 and
//! u0(0) = u0''(0) = u0(1) = u0''(1) = 0 (the polynomial family excepted,
//! which is free-form and checked at run time).

use std::f64::consts::PI;

use crate::numerics::{Grid1D, ScalarField};
use crate::random::Lcg64;

/// Dense sampling resolution used when no closed-form supremum exists.
pub const DENSE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    Zero,
    /// A (1 - cos(ω t))
    RampedCosine { amplitude: f64, omega: f64 },
    /// A t³ / (1 + t³)
    SmoothStep { amplitude: f64 },
    /// Σ_j c_j (1 - cos(j ω0 t)), j = 1..=len
    FourierRandom { omega0: f64, coefficients: Vec<f64> },
}

impl SignalSpec {
    /// Coefficients drawn uniformly from [-A/terms, A/terms].
    pub fn fourier_random(seed: u64, terms: usize, amplitude: f64, omega0: f64) -> Self {
        let mut rng = Lcg64::new(seed);
        let scale = amplitude / terms.max(1) as f64;
        let coefficients = (0..terms).map(|_| rng.uniform(-scale, scale)).collect();
        SignalSpec::FourierRandom { omega0, coefficients }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            SignalSpec::Zero => 0.0,
            SignalSpec::RampedCosine { amplitude, omega } => amplitude * (1.0 - (omega * t).cos()),
            SignalSpec::SmoothStep { amplitude } => {
                let t3 = t * t * t;
                amplitude * t3 / (1.0 + t3)
            }
            SignalSpec::FourierRandom { omega0, coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(j, c)| c * (1.0 - ((j + 1) as f64 * omega0 * t).cos()))
                .sum(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            SignalSpec::Zero => 0.0,
            SignalSpec::RampedCosine { amplitude, omega } => amplitude * omega * (omega * t).sin(),
            SignalSpec::SmoothStep { amplitude } => {
                let t3 = t * t * t;
                amplitude * 3.0 * t * t / ((1.0 + t3) * (1.0 + t3))
            }
            SignalSpec::FourierRandom { omega0, coefficients } => coefficients
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let w = (j + 1) as f64 * omega0;
                    c * w * (w * t).sin()
                })
                .sum(),
        }
    }

    /// sup_{s in [0, horizon]} |d(s)|; `horizon` may be infinite.
    pub fn sup_abs(&self, horizon: f64) -> f64 {
        match self {
            SignalSpec::Zero => 0.0,
            SignalSpec::RampedCosine { amplitude, omega } => {
                let phase = omega.abs() * horizon;
                let peak = if phase >= PI { 2.0 } else { 1.0 - phase.cos() };
                amplitude.abs() * peak
            }
            SignalSpec::SmoothStep { amplitude } if horizon.is_infinite() => amplitude.abs(),
            SignalSpec::SmoothStep { amplitude } => {
                let t3 = horizon.powi(3);
                amplitude.abs() * t3 / (1.0 + t3)
            }
            SignalSpec::FourierRandom { omega0, .. } => {
                if *omega0 == 0.0 {
                    return 0.0;
                }
                // periodic with period 2π/ω0
                let span = horizon.min(2.0 * PI / omega0.abs());
                (0..=DENSE_SAMPLES)
                    .map(|i| self.value(span * i as f64 / DENSE_SAMPLES as f64).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// The same family with every amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SignalSpec::Zero => SignalSpec::Zero,
            SignalSpec::RampedCosine { amplitude, omega } => SignalSpec::RampedCosine {
                amplitude: c * amplitude,
                omega: *omega,
            },
            SignalSpec::SmoothStep { amplitude } => SignalSpec::SmoothStep { amplitude: c * amplitude },
            SignalSpec::FourierRandom { omega0, coefficients } => SignalSpec::FourierRandom {
                omega0: *omega0,
                coefficients: coefficients.iter().map(|x| c * x).collect(),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SignalSpec::Zero => true,
            SignalSpec::RampedCosine { amplitude, .. } | SignalSpec::SmoothStep { amplitude } => *amplitude == 0.0,
            SignalSpec::FourierRandom { coefficients, .. } => coefficients.iter().all(|c| *c == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialProfile {
    /// sin(kπx)
    Sine { wavenumber: u32 },
    /// x³ (1 - x)³
    Poly33,
}

impl SpatialProfile {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            SpatialProfile::Sine { wavenumber } => (*wavenumber as f64 * PI * x).sin(),
            SpatialProfile::Poly33 => (x * (1.0 - x)).powi(3),
        }
    }

    fn sup(&self) -> f64 {
        match self {
            SpatialProfile::Sine { wavenumber: 0 } => 0.0,
            SpatialProfile::Sine { .. } => 1.0,
            SpatialProfile::Poly33 => 1.0 / 64.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalProfile {
    /// sin²(ω t)
    SinSquared { omega: f64 },
    /// 1 - e^{-t}
    Saturating,
}

impl TemporalProfile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TemporalProfile::SinSquared { omega } => (omega * t).sin().powi(2),
            TemporalProfile::Saturating => -(-t).exp_m1(),
        }
    }

    fn sup(&self, horizon: f64) -> f64 {
        match self {
            TemporalProfile::SinSquared { omega } => {
                let phase = omega.abs() * horizon;
                if phase >= PI / 2.0 {
                    1.0
                } else {
                    phase.sin().powi(2)
                }
            }
            TemporalProfile::Saturating => -(-horizon).exp_m1(),
        }
    }
}

/// A g(x) q(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableForcing {
    pub amplitude: f64,
    pub spatial: SpatialProfile,
    pub temporal: TemporalProfile,
}

impl SeparableForcing {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.amplitude * self.spatial.value(x) * self.temporal.value(t)
    }

    pub fn sup_abs(&self, horizon: f64) -> f64 {
        self.amplitude.abs() * self.spatial.sup() * self.temporal.sup(horizon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Zero,
    Separable(SeparableForcing),
    /// Sum of separable sine atoms with seeded amplitudes, wavenumbers and
    /// frequencies.
    FourierRandom(Vec<SeparableForcing>),
}

impl ForcingSpec {
    pub fn separable(amplitude: f64, spatial: SpatialProfile, temporal: TemporalProfile) -> Self {
        ForcingSpec::Separable(SeparableForcing {
            amplitude,
            spatial,
            temporal,
        })
    }

    /// Atoms A_j sin(k_j π x) sin²(ω_j t) with A_j in [-A/terms, A/terms],
    /// k_j in 1..=4 and ω_j in [0.5, 2].
    pub fn fourier_random(seed: u64, terms: usize, amplitude: f64) -> Self {
        let mut rng = Lcg64::new(seed);
        let scale = amplitude / terms.max(1) as f64;
        let atoms = (0..terms)
            .map(|_| {
                let amplitude = rng.uniform(-scale, scale);
                let wavenumber = rng.integer(1, 4) as u32;
                let omega = rng.uniform(0.5, 2.0);
                SeparableForcing {
                    amplitude,
                    spatial: SpatialProfile::Sine { wavenumber },
                    temporal: TemporalProfile::SinSquared { omega },
                }
            })
            .collect();
        ForcingSpec::FourierRandom(atoms)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        match self {
            ForcingSpec::Zero => 0.0,
            ForcingSpec::Separable(s) => s.value(x, t),
            ForcingSpec::FourierRandom(atoms) => atoms.iter().map(|a| a.value(x, t)).sum(),
        }
    }

    /// Writes f(x_i, t) into `out`.
    pub fn sample_into(&self, grid: Grid1D, t: f64, out: &mut [f64]) {
        match self {
            ForcingSpec::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            ForcingSpec::Separable(s) => {
                let q = s.amplitude * s.temporal.value(t);
                for (i, v) in out.iter_mut().enumerate() {
                    *v = q * s.spatial.value(grid.node(i));
                }
            }
            ForcingSpec::FourierRandom(_) => {
                for (i, v) in out.iter_mut().enumerate() {
                    *v = self.value(grid.node(i), t);
                }
            }
        }
    }

    pub fn sample(&self, grid: Grid1D, t: f64) -> ScalarField {
        let mut v = vec![0.0; grid.n_nodes()];
        self.sample_into(grid, t, &mut v);
        ScalarField::from_vec_unchecked(grid, v)
    }

    /// Declared upper bound on sup |f| over [0, 1] × [0, horizon]. Exact for
    /// the separable family; a triangle-inequality bound for random sums.
    pub fn sup_bound(&self, horizon: f64) -> f64 {
        match self {
            ForcingSpec::Zero => 0.0,
            ForcingSpec::Separable(s) => s.sup_abs(horizon),
            ForcingSpec::FourierRandom(atoms) => atoms.iter().map(|a| a.sup_abs(horizon)).sum(),
        }
    }

    /// sup |f| over [0, 1] × [0, horizon]: analytic for separable forcing,
    /// dense sampling (100 × 100 points) for random sums over a finite
    /// horizon, [`sup_bound`](Self::sup_bound) over an infinite one.
    pub fn sup_abs(&self, horizon: f64) -> f64 {
        match self {
            ForcingSpec::FourierRandom(_) if horizon.is_finite() => {
                let side = (DENSE_SAMPLES as f64).sqrt() as usize;
                let mut m: f64 = 0.0;
                for it in 0..=side {
                    let t = horizon * it as f64 / side as f64;
                    for ix in 0..=side {
                        m = m.max(self.value(ix as f64 / side as f64, t).abs());
                    }
                }
                m
            }
            _ => self.sup_bound(horizon),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let scale = |a: &SeparableForcing| SeparableForcing {
            amplitude: c * a.amplitude,
            ..*a
        };
        match self {
            ForcingSpec::Zero => ForcingSpec::Zero,
            ForcingSpec::Separable(s) => ForcingSpec::Separable(scale(s)),
            ForcingSpec::FourierRandom(atoms) => ForcingSpec::FourierRandom(atoms.iter().map(scale).collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::Zero => true,
            ForcingSpec::Separable(s) => s.amplitude == 0.0,
            ForcingSpec::FourierRandom(atoms) => atoms.iter().all(|a| a.amplitude == 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConditionSpec {
    Zero,
    /// A x³ (1 - x)³
    Bump { amplitude: f64 },
    /// A sin³(πx)
    SineCubed { amplitude: f64 },
    /// Σ c_j x^j
    Polynomial { coefficients: Vec<f64> },
}

// x³(1-x)³ = x³ - 3x⁴ + 3x⁵ - x⁶
const BUMP: [f64; 7] = [0.0, 0.0, 0.0, 1.0, -3.0, 3.0, -1.0];

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(j, a)| j as f64 * a).collect()
}

impl InitialConditionSpec {
    /// Monomial coefficients when the profile is polynomial.
    pub fn polynomial_coefficients(&self) -> Option<Vec<f64>> {
        match self {
            InitialConditionSpec::Zero => Some(vec![0.0]),
            InitialConditionSpec::Bump { amplitude } => Some(BUMP.iter().map(|b| amplitude * b).collect()),
            InitialConditionSpec::Polynomial { coefficients } => Some(coefficients.clone()),
            InitialConditionSpec::SineCubed { .. } => None,
        }
    }

    fn nth_derivative(&self, x: f64, order: usize) -> f64 {
        if let Some(mut c) = self.polynomial_coefficients() {
            for _ in 0..order {
                c = poly_derivative(&c);
            }
            return horner(&c, x);
        }
        let InitialConditionSpec::SineCubed { amplitude } = self else {
            unreachable!()
        };
        let (s, c) = (PI * x).sin_cos();
        match order {
            0 => amplitude * s.powi(3),
            1 => 3.0 * amplitude * PI * s * s * c,
            _ => 3.0 * amplitude * PI * PI * s * (2.0 * c * c - s * s),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.nth_derivative(x, 0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.nth_derivative(x, 1)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.nth_derivative(x, 2)
    }

    pub fn sample(&self, grid: Grid1D) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.value(x))
    }
}
