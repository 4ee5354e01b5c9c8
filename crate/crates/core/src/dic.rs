//! DIC₆ for models with latent infection times:
//!
//! ```text
//! DIC₆ = -4 E_{θ,x|y}[log π(y, x | θ)] + 2 E_{x|y,θ̂}[log π(y, x | θ̂)]
//! ```
//!
//! The first expectation comes from an ordinary posterior run. The second
//! comes from a run with the parameters fixed at their posterior means and
//! the initial case and its infection time held at their point estimates,
//! updating only the remaining infection times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{prior_mean_params, run_chain_from, ChainInit, ChainOptions, ChainOutput, EpidemicData, McmcConfig};
use crate::model::{ModelSpec, Params, PriorSpec};
use crate::stats::Moments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DicResult {
    pub dic6: f64,
    pub first_run_mean: f64,
    pub plugin_mean: f64,
    /// Posterior means of the parameters.
    pub theta_hat: Params,
    /// Most frequent initial case (0-based).
    pub z_hat: usize,
    /// Posterior mean of the initial infection time given `z_hat`.
    pub iz_hat: f64,
    pub first_run: Option<Moments>,
    pub plugin_run: Option<Moments>,
}

impl DicResult {
    pub fn from_expectations(first_run_mean: f64, plugin_mean: f64, theta_hat: Params, z_hat: usize, iz_hat: f64) -> Self {
        Self {
            dic6: -4.0 * first_run_mean + 2.0 * plugin_mean,
            first_run_mean,
            plugin_mean,
            theta_hat,
            z_hat,
            iz_hat,
            first_run: None,
            plugin_run: None,
        }
    }
}

/// Two-run DIC₆ estimate. Both runs use the iteration budget of `config`;
/// the second run draws from an independent RNG stream.
pub fn dic6(data: &EpidemicData, model: &ModelSpec, priors: &PriorSpec, config: &McmcConfig) -> Result<DicResult> {
    dic6_runs(data, model, priors, config).map(|(r, _, _)| r)
}

/// [`dic6`] together with the posterior run and the plug-in run.
pub fn dic6_runs(
    data: &EpidemicData,
    model: &ModelSpec,
    priors: &PriorSpec,
    config: &McmcConfig,
) -> Result<(DicResult, ChainOutput, ChainOutput)> {
    let mut first = run_chain_from(
        data,
        model,
        priors,
        1.0,
        config,
        ChainInit {
            params: Some(prior_mean_params(model, priors)),
            infection_times: None,
        },
        ChainOptions {
            record_latent: data.has_latent(),
            ..ChainOptions::default()
        },
    )?;
    let theta_hat = first.mean_params();
    let n = data.n_cases();
    let mut counts = vec![0usize; n];
    for s in &first.samples {
        counts[s.initial_case] += 1;
    }
    // ties go to the lowest index
    let z_hat = (0..n).max_by_key(|&k| (counts[k], std::cmp::Reverse(k))).unwrap_or(0);
    let at_z: Vec<f64> = first
        .samples
        .iter()
        .filter(|s| s.initial_case == z_hat)
        .map(|s| s.initial_time)
        .collect();
    let iz_hat = at_z.iter().sum::<f64>() / at_z.len() as f64;

    let start = match (data, &first.latent_trace) {
        (EpidemicData::Complete(o), _) => o.infection_times().to_vec(),
        (EpidemicData::Removals(_), Some(trace)) => {
            // Any kept state with z = ẑ and I_ẑ ≥ Î_z stays feasible when I_ẑ
            // is moved back to Î_z.
            let mut state = first
                .samples
                .iter()
                .zip(trace)
                .filter(|(s, _)| s.initial_case == z_hat && s.initial_time >= iz_hat)
                .map(|(_, x)| x.clone())
                .next()
                .ok_or_else(|| Error::InvalidData("no posterior state to start the plug-in run".into()))?;
            state[z_hat] = iz_hat;
            state
        }
        (EpidemicData::Removals(_), None) => unreachable!("latent trace is recorded for removal data"),
    };
    let plugin = run_chain_from(
        data,
        model,
        priors,
        1.0,
        config,
        ChainInit {
            params: Some(theta_hat),
            infection_times: Some(start),
        },
        ChainOptions {
            fixed_params: true,
            pinned_initial_case: Some(z_hat),
            record_latent: false,
            stream: 1,
        },
    )?;
    let mut out = DicResult::from_expectations(first.log_lik.mean, plugin.log_lik.mean, theta_hat, z_hat, iz_hat);
    out.first_run = Some(first.log_lik);
    out.plugin_run = Some(plugin.log_lik);
    first.latent_trace = None;
    Ok((out, first, plugin))
}
