//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! # canonical admissible Burgers run
//! system = burgers
//! mu = 1
//! nu = 1
//! initial.family = bump
//! initial.amplitude = 1
//! disturbance.family = ramped_cosine
//! disturbance.amplitude = 0.1
//! disturbance.omega = 1
//! forcing.family = separable
//! forcing.amplitude = 0.05
//! forcing.spatial = sine
//! forcing.temporal = sin_squared
//! checks = theorem1, theorem2
//! ```
//!
//! Blank lines and text after `#` are ignored. Every error names the
//! offending key and, when the key appears in the file, its line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::backstepping::Coefficient;
use crate::burgers::{ForcingSpec, InitialConditionSpec, RunSettings, SignalSpec, SpatialProfile, TemporalProfile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Burgers,
    BurgersSplitA,
    BurgersSplitB,
    ClosedLoop,
    OpenLoop,
    TargetSplit,
}

impl SystemKind {
    pub fn is_reaction_diffusion(self) -> bool {
        matches!(self, SystemKind::ClosedLoop | SystemKind::OpenLoop | SystemKind::TargetSplit)
    }

    /// Check names accepted for this system.
    pub fn applicable_checks(self) -> &'static [&'static str] {
        match self {
            SystemKind::Burgers => &["theorem1", "theorem2"],
            SystemKind::BurgersSplitA => &["lemma4", "lemma5"],
            SystemKind::BurgersSplitB => &["lemma6", "lemma7"],
            SystemKind::ClosedLoop => &["prop2"],
            SystemKind::OpenLoop => &[],
            SystemKind::TargetSplit => &["lyapunov", "linf_decay"],
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Burgers => "burgers",
            SystemKind::BurgersSplitA => "burgers_split_a",
            SystemKind::BurgersSplitB => "burgers_split_b",
            SystemKind::ClosedLoop => "reaction_diffusion_closed_loop",
            SystemKind::OpenLoop => "reaction_diffusion_open_loop",
            SystemKind::TargetSplit => "target_split",
        })
    }
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "burgers" => SystemKind::Burgers,
            "burgers_split_a" => SystemKind::BurgersSplitA,
            "burgers_split_b" => SystemKind::BurgersSplitB,
            "reaction_diffusion_closed_loop" => SystemKind::ClosedLoop,
            "reaction_diffusion_open_loop" => SystemKind::OpenLoop,
            "target_split" => SystemKind::TargetSplit,
            other => return Err(format!("unknown system `{other}`")),
        })
    }
}

/// Initial data: an analytic family, or the feedback-compatible profile
/// built from the kernel (reaction-diffusion systems only).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Spec(InitialConditionSpec),
    Compatible { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    pub mu: f64,
    pub nu: f64,
    pub a: Coefficient,
    pub initial: InitialData,
    pub disturbance: SignalSpec,
    pub forcing: ForcingSpec,
    pub n_nodes: usize,
    pub settings: RunSettings,
    pub checks: Vec<String>,
    pub lyapunov_orders: Vec<u32>,
    pub eps: f64,
    pub seed: u64,
    pub tol: Option<f64>,
}

pub const DEFAULT_N_NODES: usize = 401;
pub const DEFAULT_DT: f64 = 2.5e-5;
pub const DEFAULT_T_END: f64 = 2.0;

const KNOWN_KEYS: &[&str] = &[
    "system",
    "mu",
    "nu",
    "a0",
    "a1",
    "n_nodes",
    "dt",
    "t_end",
    "output_stride",
    "checks",
    "eps",
    "seed",
    "tol",
    "lyapunov.orders",
    "initial.family",
    "initial.amplitude",
    "initial.coefficients",
    "disturbance.family",
    "disturbance.amplitude",
    "disturbance.omega",
    "disturbance.omega0",
    "disturbance.terms",
    "forcing.family",
    "forcing.amplitude",
    "forcing.spatial",
    "forcing.wavenumber",
    "forcing.temporal",
    "forcing.omega",
    "forcing.terms",
];

/// Keys a sweep may vary.
pub const NUMERIC_KEYS: &[&str] = &[
    "mu",
    "nu",
    "a0",
    "a1",
    "n_nodes",
    "dt",
    "t_end",
    "output_stride",
    "eps",
    "seed",
    "tol",
    "initial.amplitude",
    "disturbance.amplitude",
    "disturbance.omega",
    "disturbance.omega0",
    "disturbance.terms",
    "forcing.amplitude",
    "forcing.wavenumber",
    "forcing.omega",
    "forcing.terms",
];

/// The key/value pairs of a scenario file before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (Option<usize>, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(Some(line), content, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::config(Some(line), key, "unknown key"));
            }
            if value.is_empty() {
                return Err(Error::config(Some(line), key, "empty value"));
            }
            if let Some((first, _)) = entries.get(key) {
                let first: &Option<usize> = first;
                return Err(Error::config(
                    Some(line),
                    key,
                    format!("duplicate key (first set on line {})", first.unwrap_or(0)),
                ));
            }
            entries.insert(key.to_string(), (Some(line), value.to_string()));
        }
        Ok(RawConfig { entries })
    }

    /// Overrides one key, as a sweep does.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(None, key, "unknown key"));
        }
        let line = self.entries.get(key).and_then(|(l, _)| *l);
        self.entries.insert(key.to_string(), (line, value.to_string()));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(Option<usize>, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn required(&self, key: &str) -> Result<(Option<usize>, &str)> {
        self.get(key)
            .ok_or_else(|| Error::config(None, key, "missing required key"))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::config(line, key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.parsed::<f64>(key)? {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(Error::config(self.line(key), key, format!("value {v} is not finite"))),
            None => default.ok_or_else(|| Error::config(None, key, "missing required key")),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|(l, _)| l)
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        let Some((line, v)) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>()
                    .map_err(|e| Error::config(line, key, format!("cannot parse `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = self.number(key, default)?;
        if v <= 0.0 {
            return Err(Error::config(self.line(key), key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.number(key, Some(default as f64))?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::config(self.line(key), key, format!("expected a whole number, got {v}")));
        }
        Ok(v as usize)
    }
}

fn parse_initial(raw: &RawConfig, system: SystemKind) -> Result<InitialData> {
    let (line, family) = raw.required("initial.family")?;
    let amplitude = || raw.number("initial.amplitude", Some(1.0));
    Ok(match family {
        "zero" => InitialData::Spec(InitialConditionSpec::Zero),
        "bump" => InitialData::Spec(InitialConditionSpec::Bump { amplitude: amplitude()? }),
        "sine_cubed" => InitialData::Spec(InitialConditionSpec::SineCubed { amplitude: amplitude()? }),
        "polynomial" => {
            let coefficients = raw
                .list::<f64>("initial.coefficients")?
                .ok_or_else(|| Error::config(None, "initial.coefficients", "missing required key"))?;
            InitialData::Spec(InitialConditionSpec::Polynomial { coefficients })
        }
        "compatible" if system.is_reaction_diffusion() => InitialData::Compatible { amplitude: amplitude()? },
        "compatible" => {
            return Err(Error::config(
                line,
                "initial.family",
                "`compatible` needs a reaction-diffusion system",
            ))
        }
        other => return Err(Error::config(line, "initial.family", format!("unknown family `{other}`"))),
    })
}

fn parse_disturbance(raw: &RawConfig, seed: u64) -> Result<SignalSpec> {
    let (line, family) = raw.required("disturbance.family")?;
    let amplitude = || raw.number("disturbance.amplitude", None);
    Ok(match family {
        "zero" => SignalSpec::Zero,
        "ramped_cosine" => SignalSpec::RampedCosine {
            amplitude: amplitude()?,
            omega: raw.number("disturbance.omega", Some(1.0))?,
        },
        "smooth_step" => SignalSpec::SmoothStep { amplitude: amplitude()? },
        "fourier_random" => SignalSpec::fourier_random(
            seed,
            raw.count("disturbance.terms", 4)?,
            amplitude()?,
            raw.number("disturbance.omega0", Some(1.0))?,
        ),
        other => return Err(Error::config(line, "disturbance.family", format!("unknown family `{other}`"))),
    })
}

fn parse_forcing(raw: &RawConfig, seed: u64) -> Result<ForcingSpec> {
    let (line, family) = raw.required("forcing.family")?;
    let amplitude = || raw.number("forcing.amplitude", None);
    Ok(match family {
        "zero" => ForcingSpec::Zero,
        "separable" => {
            let spatial = match raw.get("forcing.spatial") {
                None | Some((_, "sine")) => SpatialProfile::Sine {
                    wavenumber: raw.count("forcing.wavenumber", 1)? as u32,
                },
                Some((_, "poly33")) => SpatialProfile::Poly33,
                Some((l, other)) => {
                    return Err(Error::config(l, "forcing.spatial", format!("unknown profile `{other}`")))
                }
            };
            let temporal = match raw.get("forcing.temporal") {
                None | Some((_, "sin_squared")) => TemporalProfile::SinSquared {
                    omega: raw.number("forcing.omega", Some(1.0))?,
                },
                Some((_, "saturating")) => TemporalProfile::Saturating,
                Some((l, other)) => {
                    return Err(Error::config(l, "forcing.temporal", format!("unknown profile `{other}`")))
                }
            };
            ForcingSpec::separable(amplitude()?, spatial, temporal)
        }
        "fourier_random" => ForcingSpec::fourier_random(
            seed.wrapping_add(1),
            raw.count("forcing.terms", 4)?,
            amplitude()?,
        ),
        other => return Err(Error::config(line, "forcing.family", format!("unknown family `{other}`"))),
    })
}

impl ScenarioConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let system = match raw.get("system") {
            None => SystemKind::Burgers,
            Some((line, v)) => v.parse().map_err(|e: String| Error::config(line, "system", e))?,
        };
        let mu = raw.positive("mu", None)?;
        let nu = raw.positive("nu", None)?;
        let a = if system.is_reaction_diffusion() {
            Coefficient::affine(raw.number("a0", None)?, raw.number("a1", Some(0.0))?)
        } else {
            for key in ["a0", "a1"] {
                if raw.get(key).is_some() {
                    return Err(Error::config(raw.line(key), key, format!("not used by system `{system}`")));
                }
            }
            Coefficient::constant(0.0)
        };
        let seed = raw.count("seed", 0)? as u64;
        let initial = parse_initial(raw, system)?;
        let disturbance = parse_disturbance(raw, seed)?;
        let forcing = parse_forcing(raw, seed)?;

        let n_nodes = raw.count("n_nodes", DEFAULT_N_NODES)?;
        if n_nodes < 3 {
            return Err(Error::config(raw.line("n_nodes"), "n_nodes", "need at least 3 nodes"));
        }
        let dt = raw.positive("dt", Some(DEFAULT_DT))?;
        let t_end = raw.positive("t_end", Some(DEFAULT_T_END))?;
        let stride = raw.count("output_stride", RunSettings::DEFAULT_STRIDE)?;
        if stride == 0 {
            return Err(Error::config(raw.line("output_stride"), "output_stride", "must be at least 1"));
        }

        let applicable = system.applicable_checks();
        let checks = match raw.list::<String>("checks")? {
            None => applicable.iter().map(|s| s.to_string()).collect(),
            Some(list) => {
                for c in &list {
                    if !applicable.contains(&c.as_str()) {
                        return Err(Error::config(
                            raw.line("checks"),
                            "checks",
                            format!("check `{c}` does not apply to system `{system}`"),
                        ));
                    }
                }
                list
            }
        };
        let lyapunov_orders = raw.list::<u32>("lyapunov.orders")?.unwrap_or_else(|| vec![1, 2, 4, 8]);
        if lyapunov_orders.contains(&0) {
            return Err(Error::config(raw.line("lyapunov.orders"), "lyapunov.orders", "orders must be at least 1"));
        }
        let eps = raw.number("eps", Some(0.5 * mu))?;
        if !(eps > 0.0 && eps < mu) {
            return Err(Error::config(raw.line("eps"), "eps", format!("must lie in (0, mu = {mu}), got {eps}")));
        }
        let tol = match raw.get("tol") {
            None => None,
            Some(_) => Some(raw.number("tol", None)?).filter(|t| *t >= 0.0).map(Some).ok_or_else(|| {
                Error::config(raw.line("tol"), "tol", "must be nonnegative")
            })?,
        };
        Ok(ScenarioConfig {
            system,
            mu,
            nu,
            a,
            initial,
            disturbance,
            forcing,
            n_nodes,
            settings: RunSettings {
                dt,
                t_end,
                output_stride: stride,
            },
            checks,
            lyapunov_orders,
            eps,
            seed,
            tol,
        })
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_raw(&RawConfig::parse(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mu = 1\nnu = 1\ninitial.family = bump\ndisturbance.family = zero\nforcing.family = zero\n";

    fn line_of(err: Error) -> (Option<usize>, String) {
        match err {
            Error::Config { line, key, .. } => (line, key),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_are_filled() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.system, SystemKind::Burgers);
        assert_eq!(c.n_nodes, 401);
        assert_eq!(c.settings.dt, 2.5e-5);
        assert_eq!(c.settings.t_end, 2.0);
        assert_eq!(c.eps, 0.5);
        assert_eq!(c.checks, vec!["theorem1", "theorem2"]);
    }

    #[test]
    fn inapplicable_check_is_rejected() {
        let err = parse_config(&format!("{MINIMAL}checks = prop2\n")).unwrap_err();
        assert_eq!(line_of(err), (Some(6), "checks".into()));
    }

    #[test]
    fn negative_dt_is_rejected() {
        let err = parse_config(&format!("{MINIMAL}dt = -1\n")).unwrap_err();
        assert_eq!(line_of(err), (Some(6), "dt".into()));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = parse_config("mu = 1\nspeed = 3\n").unwrap_err();
        assert_eq!(line_of(err), (Some(2), "speed".into()));
        let err = parse_config("mu = 1\ninitial.family = bump\n").unwrap_err();
        assert_eq!(line_of(err), (None, "nu".into()));
        let err = parse_config("mu = 1\nmu = 2\n").unwrap_err();
        assert_eq!(line_of(err), (Some(2), "mu".into()));
    }

    #[test]
    fn comments_and_families() {
        let text = "# scenario\nsystem = reaction_diffusion_closed_loop # trailing\nmu = 1\nnu = 1\na0 = -10\n\
                    initial.family = compatible\ndisturbance.family = ramped_cosine\ndisturbance.amplitude = 0.05\n\
                    forcing.family = separable\nforcing.amplitude = 0.02\nforcing.temporal = saturating\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.system, SystemKind::ClosedLoop);
        assert_eq!(c.a, Coefficient::constant(-10.0));
        assert_eq!(c.initial, InitialData::Compatible { amplitude: 1.0 });
        assert_eq!(c.checks, vec!["prop2"]);
        assert!(matches!(c.forcing, ForcingSpec::Separable(s) if s.temporal == TemporalProfile::Saturating));
    }

    #[test]
    fn sweep_override() {
        let mut raw = RawConfig::parse(MINIMAL).unwrap();
        raw.set("nu", "2").unwrap();
        assert_eq!(ScenarioConfig::from_raw(&raw).unwrap().nu, 2.0);
        assert!(raw.set("bogus", "1").is_err());
    }
}
