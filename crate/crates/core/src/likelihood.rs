//! Augmented log-likelihood `log π(I, R | θ)` of a complete outbreak.
//!
//! Conventions: `n = N - 1`; every secondary infection contributes
//! `log(n⁻¹ Y(I_j-))` (with `Y^p` or the decay factor for the variants) and
//! the exposure term is `β n⁻¹ A`. All work is done in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ln_gamma;
use crate::model::{InfectiousPeriod, Kernel, ModelSpec, Params};
use crate::outbreak::{sorted_events, Event, EventKind, Outbreak};

/// Sufficient statistics of a complete outbreak for one infection kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTerms {
    pub n_cases: usize,
    pub population: usize,
    /// `∫ X Y dt`.
    pub a: f64,
    /// Kernel-specific exposure: `A`, `A_p = ∫ X Y^p dt` or `A_b = ∫ e^{-bt} X Y dt`.
    pub exposure: f64,
    /// `Σ_{j≠z} log Y(I_j-)`.
    pub log_prod_y: f64,
    /// `Σ_{j≠z} I_j`, needed by the decay kernel.
    pub sum_secondary_infection_times: f64,
    /// `Σ_j (R_j - I_j)`.
    pub sum_periods: f64,
    /// `Σ_j log(R_j - I_j)`.
    pub sum_log_periods: f64,
    /// `∫ Y dt`; equals `sum_periods`.
    pub int_y: f64,
    #[serde(skip, default = "standard")]
    pub kernel: Kernel,
}

fn standard() -> Kernel {
    Kernel::Standard
}

impl LikelihoodTerms {
    /// `n = N - 1`.
    pub fn n(&self) -> f64 {
        self.population.saturating_sub(1) as f64
    }

    pub fn n_secondary(&self) -> usize {
        self.n_cases - 1
    }

    /// `Σ_{j≠z} p log Y(I_j-)` for the power kernel (`p = 1` otherwise).
    pub fn log_prod_yp(&self) -> f64 {
        match self.kernel {
            Kernel::Power(p) => p * self.log_prod_y,
            _ => self.log_prod_y,
        }
    }

    /// Exposure divided by `n`, zero when there is nobody to infect.
    pub fn scaled_exposure(&self) -> f64 {
        let n = self.n();
        if n == 0.0 {
            0.0
        } else {
            self.exposure / n
        }
    }

    /// Infection-process part of the log-likelihood.
    pub fn infection_log_lik(&self, beta: f64) -> f64 {
        let m = self.n_secondary() as f64;
        let kernel_sum = match self.kernel {
            Kernel::Standard => self.log_prod_y,
            Kernel::Power(p) => p * self.log_prod_y,
            Kernel::Decay(b) => self.log_prod_y - b * self.sum_secondary_infection_times,
        };
        let mut ll = -beta * self.scaled_exposure();
        if m > 0.0 {
            ll += m * (beta.ln() - self.n().ln()) + kernel_sum;
        }
        ll
    }

    /// Removal-process part of the log-likelihood.
    pub fn removal_log_lik(&self, period: &InfectiousPeriod, rate: f64) -> f64 {
        let n_r = self.n_cases as f64;
        match *period {
            InfectiousPeriod::Exponential => n_r * rate.ln() - rate * self.sum_periods,
            InfectiousPeriod::Gamma { shape } => {
                -n_r * ln_gamma(shape) + (shape - 1.0) * self.sum_log_periods
                    + shape * n_r * rate.ln()
                    - rate * self.sum_periods
            }
        }
    }

    pub fn log_lik(&self, period: &InfectiousPeriod, params: &Params) -> f64 {
        self.infection_log_lik(params.beta) + self.removal_log_lik(period, params.removal_rate)
    }
}

/// Reusable scratch space for computing [`LikelihoodTerms`] many times.
#[derive(Debug, Default, Clone)]
pub struct TermsWorkspace {
    events: Vec<Event>,
}

impl TermsWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sweeps the event list once. Returns `None` when the configuration is
    /// impossible: a non-positive infectious period or some secondary
    /// infection with `Y(I_j-) = 0`.
    pub fn compute(
        &mut self,
        population: usize,
        infection: &[f64],
        removal: &[f64],
        kernel: Kernel,
    ) -> Option<LikelihoodTerms> {
        let n_cases = removal.len();
        if n_cases == 0 || infection.len() != n_cases || n_cases > population {
            return None;
        }
        let mut sum_periods = 0.0;
        let mut sum_log_periods = 0.0;
        for (&i, &r) in infection.iter().zip(removal) {
            let d = r - i;
            if !(d > 0.0) {
                return None;
            }
            sum_periods += d;
            sum_log_periods += d.ln();
        }
        sorted_events(infection, removal, &mut self.events);

        let mut x = population as f64;
        let mut y = 0u32;
        let mut t = self.events[0].time;
        let mut a = 0.0;
        let mut exposure = 0.0;
        let mut int_y = 0.0;
        let mut log_prod_y = 0.0;
        let mut sum_sec = 0.0;
        let mut seen_first = false;
        for ev in &self.events {
            if y > 0 && ev.time > t {
                let dt = ev.time - t;
                let yf = f64::from(y);
                let xy = x * yf;
                a += xy * dt;
                int_y += yf * dt;
                exposure += match kernel {
                    Kernel::Standard => xy * dt,
                    Kernel::Power(p) => x * yf.powf(p) * dt,
                    Kernel::Decay(b) => xy * decay_integral(b, t, dt),
                };
            }
            t = ev.time;
            match ev.kind {
                EventKind::Infection => {
                    if seen_first {
                        if y == 0 {
                            return None;
                        }
                        log_prod_y += f64::from(y).ln();
                        sum_sec += ev.time;
                    }
                    seen_first = true;
                    x -= 1.0;
                    y += 1;
                }
                EventKind::Removal => y -= 1,
            }
        }
        Some(LikelihoodTerms {
            n_cases,
            population,
            a,
            exposure,
            log_prod_y,
            sum_secondary_infection_times: sum_sec,
            sum_periods,
            sum_log_periods,
            int_y,
            kernel,
        })
    }
}

/// `∫_s^{s+dt} e^{-b u} du`, accurate as `b → 0`.
pub(crate) fn decay_integral(b: f64, s: f64, dt: f64) -> f64 {
    if b == 0.0 {
        dt
    } else {
        (-b * s).exp() * (-(-b * dt).exp_m1()) / b
    }
}

fn terms_of(outbreak: &Outbreak, kernel: Kernel) -> Result<LikelihoodTerms> {
    let violations = outbreak.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidOutbreak(violations));
    }
    TermsWorkspace::new()
        .compute(
            outbreak.population(),
            outbreak.infection_times(),
            outbreak.removal_times(),
            kernel,
        )
        .ok_or_else(|| Error::InvalidData("outbreak has an impossible configuration".into()))
}

/// Sufficient statistics of a validated outbreak.
pub fn terms(outbreak: &Outbreak, kernel: Kernel) -> Result<LikelihoodTerms> {
    terms_of(outbreak, kernel)
}

/// `A = ∫ X(t) Y(t) dt` over `[I_z, max R]`, by piecewise integration.
pub fn integral_xy(outbreak: &Outbreak) -> Result<f64> {
    let a = terms_of(outbreak, Kernel::Standard)?.a;
    debug_assert!({
        let b = integral_xy_double_sum(outbreak);
        (a - b).abs() <= 1e-9 * a.abs().max(1.0)
    });
    Ok(a)
}

/// `A` via `Σ_j Σ_k (R_j ∧ I_k − I_k ∧ I_j)` with `I_k = ∞` for the
/// `N − n_R` individuals never infected.
pub fn integral_xy_double_sum(outbreak: &Outbreak) -> f64 {
    let inf = outbreak.infection_times();
    let rem = outbreak.removal_times();
    let never = outbreak.population().saturating_sub(outbreak.n_cases()) as f64;
    let mut total = 0.0;
    for (j, (&ij, &rj)) in inf.iter().zip(rem).enumerate() {
        for (k, &ik) in inf.iter().enumerate() {
            if k != j {
                total += rj.min(ik) - ik.min(ij);
            }
        }
        total += never * (rj - ij);
    }
    total
}

/// `A_p = ∫ X(t) Y(t)^p dt` for `p ∈ [0, 1]`.
pub fn integral_xyp(outbreak: &Outbreak, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidModel(format!("exponent must lie in [0, 1], got {p}")));
    }
    Ok(terms_of(outbreak, Kernel::Power(p))?.exposure)
}

/// `A_b = ∫ e^{-bt} X(t) Y(t) dt` for `b >= 0`.
pub fn integral_xy_decay(outbreak: &Outbreak, b: f64) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidModel(format!("decay must be >= 0, got {b}")));
    }
    Ok(terms_of(outbreak, Kernel::Decay(b))?.exposure)
}

/// Infection and removal parts of the augmented log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLikelihood {
    pub infection: f64,
    pub removal: f64,
    pub total: f64,
}

pub fn log_augmented_likelihood_parts(
    outbreak: &Outbreak,
    model: &ModelSpec,
    params: &Params,
) -> Result<LogLikelihood> {
    model.validate()?;
    params.check(model)?;
    let violations = outbreak.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidOutbreak(violations));
    }
    let kernel = model.kernel(params);
    let Some(t) = TermsWorkspace::new().compute(
        outbreak.population(),
        outbreak.infection_times(),
        outbreak.removal_times(),
        kernel,
    ) else {
        return Ok(LogLikelihood {
            infection: f64::NEG_INFINITY,
            removal: f64::NEG_INFINITY,
            total: f64::NEG_INFINITY,
        });
    };
    let infection = t.infection_log_lik(params.beta);
    let removal = t.removal_log_lik(&model.period, params.removal_rate);
    Ok(LogLikelihood {
        infection,
        removal,
        total: infection + removal,
    })
}

/// `log π(I, R | θ)`.
pub fn log_augmented_likelihood(outbreak: &Outbreak, model: &ModelSpec, params: &Params) -> Result<f64> {
    Ok(log_augmented_likelihood_parts(outbreak, model, params)?.total)
}
