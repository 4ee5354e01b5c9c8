//! Model variants, parameters and priors.
//!
//! A model is an infectious-period law crossed with an infection mechanism.
//! The textual form used on the command line is `<period>[+<mechanism>]`:
//!
//! ```text
//! exp                 exponential periods, standard mass action
//! gamma:10            gamma periods with known shape 10
//! exp+power:0.3       infection rate beta/n X Y^0.3
//! exp+power           exponent inferred, uniform(0, 0.5) prior
//! exp+decay           infection rate beta/n exp(-b t) X Y, b inferred
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end of the uniform prior on an inferred power exponent.
pub const EXPONENT_PRIOR_UPPER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InfectiousPeriod {
    /// Exp(rate gamma).
    Exponential,
    /// Gamma(shape, rate delta) with the shape held fixed.
    Gamma { shape: f64 },
}

impl InfectiousPeriod {
    pub fn shape(&self) -> f64 {
        match *self {
            InfectiousPeriod::Exponential => 1.0,
            InfectiousPeriod::Gamma { shape } => shape,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Fixed(f64),
    Inferred,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanism {
    Standard,
    PowerY { exponent: Exponent },
    ExpDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub period: InfectiousPeriod,
    pub mechanism: Mechanism,
}

impl ModelSpec {
    pub const STANDARD_EXP: ModelSpec = ModelSpec {
        period: InfectiousPeriod::Exponential,
        mechanism: Mechanism::Standard,
    };

    pub fn exponential() -> Self {
        Self::STANDARD_EXP
    }

    pub fn gamma(shape: f64) -> Self {
        Self {
            period: InfectiousPeriod::Gamma { shape },
            mechanism: Mechanism::Standard,
        }
    }

    pub fn with_mechanism(mut self, mechanism: Mechanism) -> Self {
        self.mechanism = mechanism;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let InfectiousPeriod::Gamma { shape } = self.period {
            if !(shape.is_finite() && shape >= 1.0) {
                return Err(Error::InvalidModel(format!(
                    "gamma shape must be finite and >= 1, got {shape}"
                )));
            }
        }
        if let Mechanism::PowerY {
            exponent: Exponent::Fixed(p),
        } = self.mechanism
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidModel(format!(
                    "power exponent must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    pub fn infers_exponent(&self) -> bool {
        matches!(
            self.mechanism,
            Mechanism::PowerY {
                exponent: Exponent::Inferred
            }
        )
    }

    pub fn infers_decay(&self) -> bool {
        matches!(self.mechanism, Mechanism::ExpDecay)
    }

    /// The concrete infection kernel for a given parameter vector.
    pub fn kernel(&self, params: &Params) -> Kernel {
        match self.mechanism {
            Mechanism::Standard => Kernel::Standard,
            Mechanism::PowerY {
                exponent: Exponent::Fixed(p),
            } => Kernel::Power(p),
            Mechanism::PowerY {
                exponent: Exponent::Inferred,
            } => Kernel::Power(params.exponent.unwrap_or(1.0)),
            Mechanism::ExpDecay => Kernel::Decay(params.decay.unwrap_or(0.0)),
        }
    }

    /// Parses the textual form, letting `--alpha` / `--p` style values fill
    /// in a bare `gamma` or `power`.
    pub fn parse_with(s: &str, shape: Option<f64>, exponent: Option<f64>) -> Result<Self> {
        let (period_txt, mech_txt) = match s.trim().split_once('+') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let period = match split_arg(period_txt)? {
            ("exp", None) => InfectiousPeriod::Exponential,
            ("gamma", Some(a)) => InfectiousPeriod::Gamma { shape: a },
            ("gamma", None) => InfectiousPeriod::Gamma {
                shape: shape.ok_or_else(|| {
                    Error::InvalidModel("gamma period needs a shape (gamma:<alpha>)".into())
                })?,
            },
            (other, _) => {
                return Err(Error::InvalidModel(format!(
                    "unknown infectious period `{other}` (expected exp or gamma:<alpha>)"
                )))
            }
        };
        let mechanism = match mech_txt.map(split_arg).transpose()? {
            None | Some(("standard", None)) => Mechanism::Standard,
            Some(("power", Some(p))) => Mechanism::PowerY {
                exponent: Exponent::Fixed(p),
            },
            Some(("power", None)) => Mechanism::PowerY {
                exponent: exponent.map_or(Exponent::Inferred, Exponent::Fixed),
            },
            Some(("decay", None)) => Mechanism::ExpDecay,
            Some((other, _)) => {
                return Err(Error::InvalidModel(format!(
                    "unknown infection mechanism `{other}` (expected standard, power[:p] or decay)"
                )))
            }
        };
        let spec = ModelSpec { period, mechanism };
        spec.validate()?;
        Ok(spec)
    }
}

fn split_arg(s: &str) -> Result<(&str, Option<f64>)> {
    match s.split_once(':') {
        None => Ok((s, None)),
        Some((name, v)) => {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidModel(format!("bad number `{v}` in `{s}`")))?;
            Ok((name.trim(), Some(v)))
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, None, None)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.period {
            InfectiousPeriod::Exponential => write!(f, "exp")?,
            InfectiousPeriod::Gamma { shape } => write!(f, "gamma:{shape}")?,
        }
        match self.mechanism {
            Mechanism::Standard => Ok(()),
            Mechanism::PowerY {
                exponent: Exponent::Fixed(p),
            } => write!(f, "+power:{p}"),
            Mechanism::PowerY {
                exponent: Exponent::Inferred,
            } => write!(f, "+power"),
            Mechanism::ExpDecay => write!(f, "+decay"),
        }
    }
}

/// Infection kernel with every parameter resolved to a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Standard,
    /// Infection rate `beta/n X Y^p`.
    Power(f64),
    /// Infection rate `beta/n exp(-b t) X Y`.
    Decay(f64),
}

/// Model parameters. `removal_rate` is gamma for exponential periods and
/// delta for gamma periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: f64,
    pub removal_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
}

impl Params {
    pub fn new(beta: f64, removal_rate: f64) -> Self {
        Self {
            beta,
            removal_rate,
            exponent: None,
            decay: None,
        }
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.exponent = Some(p);
        self
    }

    pub fn with_decay(mut self, b: f64) -> Self {
        self.decay = Some(b);
        self
    }

    /// Checks that the parameters fit `model`.
    pub fn check(&self, model: &ModelSpec) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidModel(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.removal_rate > 0.0 && self.removal_rate.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "removal rate must be > 0, got {}",
                self.removal_rate
            )));
        }
        if model.infers_exponent() {
            match self.exponent {
                Some(p) if (0.0..=1.0).contains(&p) => {}
                _ => return Err(Error::InvalidModel("model needs an exponent p in [0, 1]".into())),
            }
        }
        if model.infers_decay() {
            match self.decay {
                Some(b) if b >= 0.0 && b.is_finite() => {}
                _ => return Err(Error::InvalidModel("model needs a decay rate b >= 0".into())),
            }
        }
        Ok(())
    }
}

/// Gamma(shape, rate) prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Self {
        Self { shape, rate }
    }

    /// Exp(rate), i.e. Gamma(1, rate).
    pub fn exponential(rate: f64) -> Self {
        Self { shape: 1.0, rate }
    }

    /// Reparameterised by mean and variance.
    pub fn from_mean_variance(mean: f64, variance: f64) -> Self {
        Self {
            shape: mean * mean / variance,
            rate: mean / variance,
        }
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - crate::ln_gamma(self.shape) + (self.shape - 1.0) * x.ln()
            - self.rate * x
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.shape > 0.0 && self.rate > 0.0 && self.shape.is_finite() && self.rate.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidPrior(format!(
                "{name} prior needs positive finite shape and rate, got ({}, {})",
                self.shape, self.rate
            )))
        }
    }
}

/// Priors for every model variant. The exponent prior is fixed at
/// Uniform(0, 0.5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub beta: GammaPrior,
    pub gamma: GammaPrior,
    pub delta: GammaPrior,
    /// Rate of the exponential prior on the decay parameter b.
    #[serde(default = "one")]
    pub decay_rate: f64,
    /// Rate psi of the exponential prior on `R_min - I_z`.
    #[serde(default = "one")]
    pub initial_time_rate: f64,
}

fn one() -> f64 {
    1.0
}

impl PriorSpec {
    /// Exp(rate) priors on beta, gamma and delta; Exp(1) on b and on
    /// `R_min - I_z`.
    pub fn exponential(rate: f64) -> Self {
        Self {
            beta: GammaPrior::exponential(rate),
            gamma: GammaPrior::exponential(rate),
            delta: GammaPrior::exponential(rate),
            decay_rate: 1.0,
            initial_time_rate: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.beta.check("beta")?;
        self.gamma.check("gamma")?;
        self.delta.check("delta")?;
        for (name, v) in [("decay", self.decay_rate), ("initial time", self.initial_time_rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidPrior(format!("{name} rate must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Prior on the removal rate of `period`.
    pub fn removal_rate(&self, period: &InfectiousPeriod) -> GammaPrior {
        match period {
            InfectiousPeriod::Exponential => self.gamma,
            InfectiousPeriod::Gamma { .. } => self.delta,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PriorSpec = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self::exponential(1.0)
    }
}
