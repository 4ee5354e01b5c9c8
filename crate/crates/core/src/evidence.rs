//! Thermodynamic-integration estimate of the log marginal likelihood.
//!
//! For a ladder `0 = t_0 < … < t_r = 1` a chain at each `t_j` gives the mean
//! `m_j` and variance `v_j` of the log augmented likelihood under the power
//! posterior. Since `d/dt E_t[log L] = Var_t[log L]`, the corrected
//! trapezoidal rule
//!
//! ```text
//! Σ_j h_j (m_j + m_{j-1}) / 2 - Σ_j h_j² (v_j - v_{j-1}) / 12
//! ```
//!
//! integrates the curve with the endpoint-derivative correction for free.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{
    prior_mean_params, run_chain_from, Acceptance, ChainInit, ChainOptions, ChainOutput, EpidemicData, McmcConfig,
};
use crate::model::{ModelSpec, Params, PriorSpec};

pub const DEFAULT_LADDER_POWER: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLadder {
    pub r: usize,
    pub c: f64,
    pub temperatures: Vec<f64>,
}

impl TemperatureLadder {
    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }
}

/// `t_j = (j / r)^c` for `j = 0..=r`.
pub fn build_ladder(r: usize, c: f64) -> Result<TemperatureLadder> {
    if r == 0 {
        return Err(Error::InvalidConfig("ladder needs r >= 1".into()));
    }
    if !(c > 1.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!("ladder power must exceed 1, got {c}")));
    }
    let temperatures = (0..=r)
        .map(|j| if j == r { 1.0 } else { (j as f64 / r as f64).powf(c) })
        .collect();
    Ok(TemperatureLadder { r, c, temperatures })
}

fn check_lengths(means: &[f64], vars: &[f64], temps: &[f64]) -> Result<()> {
    if means.len() != temps.len() || vars.len() != temps.len() {
        return Err(Error::InvalidConfig(format!(
            "{} means and {} variances for {} temperatures",
            means.len(),
            vars.len(),
            temps.len()
        )));
    }
    if temps.is_empty() {
        return Err(Error::InvalidConfig("empty ladder".into()));
    }
    Ok(())
}

/// Corrected trapezoidal rule over an arbitrary grid.
pub fn corrected_trapezoid_on(means: &[f64], vars: &[f64], temps: &[f64]) -> Result<f64> {
    check_lengths(means, vars, temps)?;
    let mut total = 0.0;
    for j in 1..temps.len() {
        let h = temps[j] - temps[j - 1];
        total += 0.5 * h * (means[j] + means[j - 1]) - h * h / 12.0 * (vars[j] - vars[j - 1]);
    }
    Ok(total)
}

pub fn corrected_trapezoid(means: &[f64], vars: &[f64], ladder: &TemperatureLadder) -> Result<f64> {
    corrected_trapezoid_on(means, vars, &ladder.temperatures)
}

/// Weights `(w, u)` such that the rule equals `Σ w_j m_j + Σ u_j v_j`.
pub fn quadrature_weights(temps: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = temps.len();
    let mut w = vec![0.0; k];
    let mut u = vec![0.0; k];
    for j in 1..k {
        let h = temps[j] - temps[j - 1];
        w[j] += 0.5 * h;
        w[j - 1] += 0.5 * h;
        u[j] -= h * h / 12.0;
        u[j - 1] += h * h / 12.0;
    }
    (w, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceMode {
    /// Chains run concurrently, each started from a prior draw.
    #[default]
    Independent,
    /// Chains run in ladder order, each started at the previous posterior
    /// mean and final latent state.
    SequentialWarmStart,
}

impl std::str::FromStr for EvidenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "sequential" | "sequential_warm_start" | "sequential-warm-start" => Ok(Self::SequentialWarmStart),
            _ => Err(Error::InvalidConfig(format!("unknown evidence mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperaturePoint {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub samples: usize,
    pub acceptance: Acceptance,
}

impl TemperaturePoint {
    /// True when this mean lies below `previous.mean` by more than three
    /// combined standard errors.
    pub fn drops_below(&self, previous: &TemperaturePoint) -> bool {
        let se = (self.se_mean.powi(2) + previous.se_mean.powi(2)).sqrt();
        self.mean < previous.mean - 3.0 * se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub model: ModelSpec,
    pub ladder: TemperatureLadder,
    pub mode: EvidenceMode,
    pub points: Vec<TemperaturePoint>,
    pub log_marginal: f64,
    /// Monte Carlo standard error propagated through the quadrature weights.
    pub se: f64,
    /// Same rule with the first panel taken as `h_1 m_1`, ignoring the
    /// `t = 0` node. Differs materially from `log_marginal` only when the
    /// prior expectation of the log likelihood diverges, as it does for the
    /// decay kernel whenever the prior lets `b` exceed the initial-time rate.
    pub log_marginal_without_origin: f64,
    /// False when some `mean_j` drops below its predecessor by more than
    /// three combined standard errors, which points at poor mixing.
    pub monotone: bool,
    /// Posterior means of the parameters at `t = 1`.
    pub posterior_mean: Params,
}

impl EvidenceEstimate {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn variances(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.variance).collect()
    }

    fn assemble(
        model: ModelSpec,
        ladder: TemperatureLadder,
        mode: EvidenceMode,
        chains: &[ChainOutput],
    ) -> Result<Self> {
        let points: Vec<TemperaturePoint> = chains
            .iter()
            .map(|c| TemperaturePoint {
                t: c.temperature,
                mean: c.log_lik.mean,
                variance: c.log_lik.variance,
                se_mean: c.log_lik.se_mean,
                se_variance: c.log_lik.se_variance,
                samples: c.log_lik.n,
                acceptance: c.acceptance,
            })
            .collect();
        let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
        let vars: Vec<f64> = points.iter().map(|p| p.variance).collect();
        let log_marginal = corrected_trapezoid(&means, &vars, &ladder)?;
        let t = &ladder.temperatures;
        let log_marginal_without_origin = if t.len() > 1 {
            t[1] * means[1] + corrected_trapezoid_on(&means[1..], &vars[1..], &t[1..])?
        } else {
            log_marginal
        };
        let (w, u) = quadrature_weights(&ladder.temperatures);
        let se = points
            .iter()
            .zip(w.iter().zip(&u))
            .map(|(p, (w, u))| (w * p.se_mean).powi(2) + (u * p.se_variance).powi(2))
            .sum::<f64>()
            .sqrt();
        let monotone = !points.windows(2).any(|p| p[1].drops_below(&p[0]));
        let posterior_mean = chains.last().expect("non-empty ladder").mean_params();
        Ok(Self {
            model,
            ladder,
            mode,
            points,
            log_marginal,
            se,
            log_marginal_without_origin,
            monotone,
            posterior_mean,
        })
    }
}

/// Runs one chain per temperature and integrates the expected log
/// augmented likelihood curve.
pub fn estimate_log_marginal(
    data: &EpidemicData,
    model: &ModelSpec,
    priors: &PriorSpec,
    ladder: &TemperatureLadder,
    config: &McmcConfig,
    mode: EvidenceMode,
) -> Result<EvidenceEstimate> {
    model.validate()?;
    priors.validate()?;
    config.validate()?;
    let temps = &ladder.temperatures;
    let chains: Vec<ChainOutput> = match mode {
        EvidenceMode::Independent => temps
            .par_iter()
            .enumerate()
            .map(|(j, &t)| {
                let options = ChainOptions {
                    stream: j as u64,
                    ..ChainOptions::default()
                };
                run_chain_from(data, model, priors, t, config, ChainInit::default(), options)
            })
            .collect::<Result<_>>()?,
        EvidenceMode::SequentialWarmStart => {
            let mut out: Vec<ChainOutput> = Vec::with_capacity(temps.len());
            let mut init = ChainInit {
                params: Some(prior_mean_params(model, priors)),
                infection_times: None,
            };
            for (j, &t) in temps.iter().enumerate() {
                let options = ChainOptions {
                    stream: j as u64,
                    ..ChainOptions::default()
                };
                let chain = run_chain_from(data, model, priors, t, config, init, options)?;
                init = ChainInit {
                    params: Some(chain.mean_params()),
                    infection_times: data.has_latent().then(|| chain.final_state.infection_times.clone()),
                };
                out.push(chain);
            }
            out
        }
    };
    EvidenceEstimate::assemble(*model, ladder.clone(), mode, &chains)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorEstimate {
    /// `log π(y | m₁) - log π(y | m₂)`.
    pub log_bf: f64,
    pub se: f64,
    pub log_bf_without_origin: f64,
    pub first: EvidenceEstimate,
    pub second: EvidenceEstimate,
}

/// Log Bayes factor of `first` against `second`. Both models see the same
/// ladder, chain settings and seed.
pub fn log_bayes_factor(
    data: &EpidemicData,
    first: (&ModelSpec, &PriorSpec),
    second: (&ModelSpec, &PriorSpec),
    ladder: &TemperatureLadder,
    config: &McmcConfig,
    mode: EvidenceMode,
) -> Result<BayesFactorEstimate> {
    let a = estimate_log_marginal(data, first.0, first.1, ladder, config, mode)?;
    let b = estimate_log_marginal(data, second.0, second.1, ladder, config, mode)?;
    Ok(BayesFactorEstimate {
        log_bf: a.log_marginal - b.log_marginal,
        se: a.se.hypot(b.se),
        log_bf_without_origin: a.log_marginal_without_origin - b.log_marginal_without_origin,
        first: a,
        second: b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelCheck {
    /// Panel between `t_j` and `t_{j+1}`.
    pub j: usize,
    pub slope: f64,
    pub mean_variance: f64,
    /// Combined Monte Carlo standard error of `slope - mean_variance`.
    pub se: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub panels: Vec<PanelCheck>,
    pub fraction_consistent: f64,
}

/// Compares finite-difference slopes of the curve with the averaged
/// variances on interior panels (all but the first and last), flagging a
/// panel as consistent when the gap is within `k` combined standard errors.
pub fn gradient_identity(estimate: &EvidenceEstimate, k: f64) -> GradientCheck {
    let pts = &estimate.points;
    let mut panels = Vec::new();
    for j in 1..pts.len().saturating_sub(2) {
        let (a, b) = (&pts[j], &pts[j + 1]);
        let h = b.t - a.t;
        let slope = (b.mean - a.mean) / h;
        let mean_variance = 0.5 * (a.variance + b.variance);
        let se = ((a.se_mean.powi(2) + b.se_mean.powi(2)) / (h * h)
            + 0.25 * (a.se_variance.powi(2) + b.se_variance.powi(2)))
        .sqrt();
        panels.push(PanelCheck {
            j,
            slope,
            mean_variance,
            se,
            consistent: (slope - mean_variance).abs() <= k * se,
        });
    }
    let fraction_consistent = if panels.is_empty() {
        1.0
    } else {
        panels.iter().filter(|p| p.consistent).count() as f64 / panels.len() as f64
    };
    GradientCheck {
        panels,
        fraction_consistent,
    }
}
