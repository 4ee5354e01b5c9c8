//! Closed-form Bayes factors for completely observed outbreaks.
//!
//! With conjugate gamma priors both the infection and removal parts of the
//! augmented likelihood integrate analytically. Comparing two infectious
//! period laws only involves the removal part; comparing two infection
//! mechanisms only the infection part.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{terms, LikelihoodTerms};
use crate::ln_gamma;
use crate::model::{Exponent, GammaPrior, InfectiousPeriod, Kernel, Mechanism, ModelSpec, PriorSpec};
use crate::outbreak::Outbreak;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfVariant {
    ExpVsGammaFull,
    ExpVsGammaEqualPriors,
    ExpVsGammaDiffuseLimit,
    StandardVsPowerFull,
    StandardVsPowerDiffuseLimit,
    StandardVsPowerConcentratedLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompleteDataBf {
    pub log_bf: f64,
    pub variant: BfVariant,
}

fn check_prior(p: &GammaPrior, name: &str) -> Result<()> {
    if p.shape > 0.0 && p.rate > 0.0 && p.shape.is_finite() && p.rate.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPrior(format!("{name} prior must have positive shape and rate")))
    }
}

fn check_shape(alpha: f64) -> Result<()> {
    if alpha >= 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("gamma shape must be >= 1, got {alpha}")))
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("exponent must lie in [0, 1], got {p}")))
    }
}

/// `log ∫ r^{k} e^{-r s} Gamma(r; λ, ν) dr` for removal-rate integrals.
fn log_gamma_integral(k: f64, s: f64, prior: &GammaPrior) -> f64 {
    prior.shape * prior.rate.ln() - ln_gamma(prior.shape) + ln_gamma(k + prior.shape)
        - (k + prior.shape) * (prior.rate + s).ln()
}

/// Log Bayes factor of Exp(γ) against Gamma(α, δ) infectious periods under
/// Gamma priors on γ and δ. Does not depend on the prior for β.
pub fn log_bf_exp_vs_gamma(
    outbreak: &Outbreak,
    alpha: f64,
    gamma_prior: &GammaPrior,
    delta_prior: &GammaPrior,
) -> Result<f64> {
    check_shape(alpha)?;
    check_prior(gamma_prior, "gamma")?;
    check_prior(delta_prior, "delta")?;
    let t = terms(outbreak, Kernel::Standard)?;
    let n_r = t.n_cases as f64;
    let s = t.sum_periods;
    let (lg, ng) = (gamma_prior.shape, gamma_prior.rate);
    let (ld, nd) = (delta_prior.shape, delta_prior.rate);
    Ok(lg * ng.ln() - ld * nd.ln() + ln_gamma(ld) - ln_gamma(lg) + n_r * ln_gamma(alpha)
        - (alpha - 1.0) * t.sum_log_periods
        + (alpha * n_r + ld) * (nd + s).ln()
        + ln_gamma(n_r + lg)
        - (n_r + lg) * (ng + s).ln()
        - ln_gamma(alpha * n_r + ld))
}

/// As [`log_bf_exp_vs_gamma`] with the same Gamma(λ, ν) prior on γ and δ.
pub fn log_bf_exp_vs_gamma_equal_priors(outbreak: &Outbreak, alpha: f64, lambda: f64, nu: f64) -> Result<f64> {
    check_shape(alpha)?;
    check_prior(&GammaPrior::new(lambda, nu), "removal rate")?;
    let t = terms(outbreak, Kernel::Standard)?;
    let n_r = t.n_cases as f64;
    Ok(ln_gamma(n_r + lambda) + n_r * ln_gamma(alpha) - ln_gamma(alpha * n_r + lambda)
        - (alpha - 1.0) * t.sum_log_periods
        + n_r * (alpha - 1.0) * (nu + t.sum_periods).ln())
}

/// Limit of the equal-prior Bayes factor as the prior variance grows without
/// bound at fixed mean.
pub fn log_bf_exp_vs_gamma_diffuse(outbreak: &Outbreak, alpha: f64) -> Result<f64> {
    check_shape(alpha)?;
    let t = terms(outbreak, Kernel::Standard)?;
    Ok(exp_vs_gamma_diffuse_from_terms(&t, alpha))
}

pub(crate) fn exp_vs_gamma_diffuse_from_terms(t: &LikelihoodTerms, alpha: f64) -> f64 {
    let n_r = t.n_cases as f64;
    ln_gamma(n_r) + n_r * ln_gamma(alpha) - ln_gamma(alpha * n_r) - (alpha - 1.0) * t.sum_log_periods
        + n_r * (alpha - 1.0) * t.sum_periods.ln()
}

/// Log Bayes factor of the standard mechanism against `β n⁻¹ X Y^p` with `p`
/// known, under a Gamma prior on β. Does not depend on the infectious period.
pub fn log_bf_standard_vs_power(outbreak: &Outbreak, p: f64, beta_prior: &GammaPrior) -> Result<f64> {
    check_exponent(p)?;
    check_prior(beta_prior, "beta")?;
    let std = terms(outbreak, Kernel::Standard)?;
    let pow = terms(outbreak, Kernel::Power(p))?;
    let n = std.n();
    let (a, a_p) = if n > 0.0 { (std.a / n, pow.exposure / n) } else { (0.0, 0.0) };
    // ln_1p keeps the ratio accurate when the prior rate dwarfs the exposures
    Ok((1.0 - p) * std.log_prod_y
        + (std.n_cases as f64 + beta_prior.shape - 1.0) * ((a_p - a) / (beta_prior.rate + a)).ln_1p())
}

/// Diffuse-prior limit of [`log_bf_standard_vs_power`].
pub fn log_bf_standard_vs_power_diffuse(outbreak: &Outbreak, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let std = terms(outbreak, Kernel::Standard)?;
    let pow = terms(outbreak, Kernel::Power(p))?;
    standard_vs_power_diffuse_from_terms(&std, &pow, p)
}

pub(crate) fn standard_vs_power_diffuse_from_terms(
    std: &LikelihoodTerms,
    pow: &LikelihoodTerms,
    p: f64,
) -> Result<f64> {
    let product = (1.0 - p) * std.log_prod_y;
    if std.n_cases == 1 {
        return Ok(product);
    }
    if !(std.a > 0.0) {
        return Err(Error::InvalidData("exposure integral A is zero".into()));
    }
    Ok((std.n_cases as f64 - 1.0) * (pow.exposure / std.a).ln() + product)
}

/// The product term alone, the concentrated-prior form of
/// [`log_bf_standard_vs_power`]. With the prior mean `μ` held fixed the exact
/// limit also carries `μ n⁻¹ (A_p - A)`; the two agree as `μ → 0`.
pub fn log_bf_standard_vs_power_concentrated(outbreak: &Outbreak, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok((1.0 - p) * terms(outbreak, Kernel::Standard)?.log_prod_y)
}

/// Closed-form `log π(I, R | m)` of a complete outbreak with β and the
/// removal rate integrated against their Gamma priors. Only fixed-exponent
/// mechanisms have a closed form.
pub fn log_marginal_complete(outbreak: &Outbreak, model: &ModelSpec, priors: &PriorSpec) -> Result<f64> {
    model.validate()?;
    priors.validate()?;
    let kernel = match model.mechanism {
        Mechanism::Standard => Kernel::Standard,
        Mechanism::PowerY {
            exponent: Exponent::Fixed(p),
        } => Kernel::Power(p),
        _ => {
            return Err(Error::InvalidModel(format!(
                "no closed-form marginal likelihood for {model}"
            )))
        }
    };
    let t = terms(outbreak, kernel)?;
    let m = t.n_secondary() as f64;
    let mut ll = t.log_prod_yp();
    if m > 0.0 {
        ll -= m * t.n().ln();
    }
    ll += log_gamma_integral(m, t.scaled_exposure(), &priors.beta);
    let n_r = t.n_cases as f64;
    ll += match model.period {
        InfectiousPeriod::Exponential => log_gamma_integral(n_r, t.sum_periods, &priors.gamma),
        InfectiousPeriod::Gamma { shape } => {
            -n_r * ln_gamma(shape)
                + (shape - 1.0) * t.sum_log_periods
                + log_gamma_integral(shape * n_r, t.sum_periods, &priors.delta)
        }
    };
    Ok(ll)
}
