//! Data-augmented Metropolis-within-Gibbs sampler for the power posterior
//!
//! ```text
//! π_t(θ, I | R) ∝ π(I, R | θ)^t π(θ) ψ e^{-ψ (R_min - I_z)}
//! ```
//!
//! at any temperature `t ∈ [0, 1]`. The prior on the initial infection time
//! stays outside the power. β and the removal rate have conjugate Gamma full
//! conditionals; the power exponent and the decay rate use random-walk
//! Metropolis; infection times are updated one at a time with an
//! independence proposal `I_j' = R_j - Exp(rate)`, except that the current
//! initial case proposes `I_z' = R_min - Exp(ψ)`. Because the proposal family
//! depends on the state, the Hastings ratio uses the family the reverse move
//! would pick.
//!
//! The initial case is not a separate variable: it is whichever case has the
//! earliest infection time, so it changes whenever a proposal undercuts the
//! current minimum. Configurations with `Y(I_j-) = 0` are outside the
//! support at every temperature, including `t = 0`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{LikelihoodTerms, TermsWorkspace};
use crate::model::{GammaPrior, InfectiousPeriod, ModelSpec, Params, PriorSpec, EXPONENT_PRIOR_UPPER};
use crate::outbreak::{argmin, Outbreak, RemovalDataset};
use crate::stats::{moments, Moments};
use crate::{stream_rng, SimRng};

/// Observed data: removal times only, or a complete outbreak (infection
/// times then stay fixed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpidemicData {
    Removals(RemovalDataset),
    Complete(Outbreak),
}

impl EpidemicData {
    pub fn removal_times(&self) -> &[f64] {
        match self {
            EpidemicData::Removals(d) => d.removal_times(),
            EpidemicData::Complete(o) => o.removal_times(),
        }
    }

    pub fn population(&self) -> usize {
        match self {
            EpidemicData::Removals(d) => d.population(),
            EpidemicData::Complete(o) => o.population(),
        }
    }

    pub fn n_cases(&self) -> usize {
        self.removal_times().len()
    }

    pub fn has_latent(&self) -> bool {
        matches!(self, EpidemicData::Removals(_))
    }
}

impl From<RemovalDataset> for EpidemicData {
    fn from(d: RemovalDataset) -> Self {
        EpidemicData::Removals(d)
    }
}

impl From<Outbreak> for EpidemicData {
    fn from(o: Outbreak) -> Self {
        EpidemicData::Complete(o)
    }
}

fn default_exponent_step() -> f64 {
    0.05
}

fn default_decay_step() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Infection-time moves per sweep; `None` means `ceil(n_R / 5)`.
    #[serde(default)]
    pub infection_moves: Option<usize>,
    /// Multiplier on the removal-rate estimate used as the rate of the
    /// infection-time proposal.
    #[serde(default = "default_scale")]
    pub infection_proposal_scale: f64,
    /// Random-walk standard deviation for the power exponent.
    #[serde(default = "default_exponent_step")]
    pub exponent_step: f64,
    /// Random-walk standard deviation for `log b`.
    #[serde(default = "default_decay_step")]
    pub decay_step: f64,
    /// Tune random-walk steps during burn-in, then freeze them.
    #[serde(default = "default_true")]
    pub adapt: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 27_000,
            burn_in: 2_000,
            thin: 5,
            seed: 0,
            infection_moves: None,
            infection_proposal_scale: 1.0,
            exponent_step: default_exponent_step(),
            decay_step: default_decay_step(),
            adapt: true,
        }
    }
}

impl McmcConfig {
    pub fn short(iterations: usize, burn_in: usize, thin: usize, seed: u64) -> Self {
        Self {
            iterations,
            burn_in,
            thin,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        for (name, v) in [
            ("infection proposal scale", self.infection_proposal_scale),
            ("exponent step", self.exponent_step),
            ("decay step", self.decay_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn kept_samples(&self) -> usize {
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: McmcConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// Current point of the chain with its cached likelihood terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub params: Params,
    pub infection_times: Vec<f64>,
    pub log_lik: f64,
    pub terms: LikelihoodTerms,
}

impl ChainState {
    pub fn initial_case(&self) -> usize {
        argmin(&self.infection_times)
    }

    pub fn initial_time(&self) -> f64 {
        self.infection_times[self.initial_case()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub iteration: usize,
    pub params: Params,
    pub log_lik: f64,
    pub initial_case: usize,
    pub initial_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Acceptance {
    pub infection_time: f64,
    pub exponent: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub temperature: f64,
    pub samples: Vec<Sample>,
    /// Moments of the log augmented likelihood over kept samples.
    pub log_lik: Moments,
    pub acceptance: Acceptance,
    pub exponent_step: f64,
    pub decay_step: f64,
    pub final_state: ChainState,
    /// Latent infection times per kept sample, when requested.
    #[serde(skip)]
    pub latent_trace: Option<Vec<Vec<f64>>>,
}

impl ChainOutput {
    pub fn log_liks(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.log_lik).collect()
    }

    /// Posterior means of the parameters.
    pub fn mean_params(&self) -> Params {
        let n = self.samples.len() as f64;
        let avg = |f: &dyn Fn(&Params) -> f64| self.samples.iter().map(|s| f(&s.params)).sum::<f64>() / n;
        let first = self.samples[0].params;
        Params {
            beta: avg(&|p| p.beta),
            removal_rate: avg(&|p| p.removal_rate),
            exponent: first.exponent.map(|_| avg(&|p| p.exponent.unwrap_or(0.0))),
            decay: first.decay.map(|_| avg(&|p| p.decay.unwrap_or(0.0))),
        }
    }
}

/// Starting point of a chain. `infection_times: None` uses a deterministic
/// feasible configuration built from the removal times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainInit {
    pub params: Option<Params>,
    pub infection_times: Option<Vec<f64>>,
}

/// Extra controls used by the DIC plug-in run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainOptions {
    /// Keep the parameters fixed at their initial values.
    pub fixed_params: bool,
    /// Keep this case as the initial infective at its current time.
    pub pinned_initial_case: Option<usize>,
    /// Store every kept latent configuration.
    pub record_latent: bool,
    /// RNG stream, so chains sharing a seed stay independent.
    pub stream: u64,
}

/// Draw from the β full conditional `Gamma(a + t(n_R - 1), ν + t n⁻¹ A)`.
pub fn gibbs_beta<R: Rng + ?Sized>(terms: &LikelihoodTerms, t: f64, prior: &GammaPrior, rng: &mut R) -> f64 {
    let shape = prior.shape + t * terms.n_secondary() as f64;
    let rate = prior.rate + t * terms.scaled_exposure();
    draw_gamma(shape, rate, rng)
}

/// Draw from the γ full conditional `Gamma(a + t n_R, ν + t Σ(R_j - I_j))`.
pub fn gibbs_gamma<R: Rng + ?Sized>(terms: &LikelihoodTerms, t: f64, prior: &GammaPrior, rng: &mut R) -> f64 {
    gibbs_removal_rate(terms, &InfectiousPeriod::Exponential, t, prior, rng)
}

/// Draw from the δ full conditional `Gamma(a + t α n_R, ν + t Σ(R_j - I_j))`.
pub fn gibbs_delta<R: Rng + ?Sized>(
    terms: &LikelihoodTerms,
    shape: f64,
    t: f64,
    prior: &GammaPrior,
    rng: &mut R,
) -> f64 {
    gibbs_removal_rate(terms, &InfectiousPeriod::Gamma { shape }, t, prior, rng)
}

pub fn gibbs_removal_rate<R: Rng + ?Sized>(
    terms: &LikelihoodTerms,
    period: &InfectiousPeriod,
    t: f64,
    prior: &GammaPrior,
    rng: &mut R,
) -> f64 {
    let shape = prior.shape + t * period.shape() * terms.n_cases as f64;
    let rate = prior.rate + t * terms.sum_periods;
    draw_gamma(shape, rate, rng)
}

fn draw_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("positive gamma parameters");
    // Guard against an underflow to exactly zero for tiny shapes.
    g.sample(rng).max(f64::MIN_POSITIVE)
}

/// A feasible latent configuration for sorted removal times: every case is
/// infected a fixed lag before its removal, with that lag exceeding the
/// largest gap between consecutive removals.
pub fn initial_infection_times(sorted_removals: &[f64]) -> Vec<f64> {
    let n = sorted_removals.len();
    let gaps = sorted_removals.windows(2).map(|w| w[1] - w[0]);
    let max_gap = gaps.clone().fold(0.0, f64::max);
    let mean_gap = if n > 1 {
        (sorted_removals[n - 1] - sorted_removals[0]) / (n - 1) as f64
    } else {
        0.0
    };
    let lag = if max_gap > 0.0 { max_gap + mean_gap.max(1e-3 * max_gap) } else { 1.0 };
    let eps = lag * 1e-6;
    sorted_removals
        .iter()
        .enumerate()
        .map(|(j, r)| r - lag + eps * j as f64)
        .collect()
}

/// Draws parameters from the prior.
pub fn draw_prior_params<R: Rng + ?Sized>(model: &ModelSpec, priors: &PriorSpec, rng: &mut R) -> Params {
    let mut p = Params::new(
        draw_gamma(priors.beta.shape, priors.beta.rate, rng),
        {
            let g = priors.removal_rate(&model.period);
            draw_gamma(g.shape, g.rate, rng)
        },
    );
    if model.infers_exponent() {
        p.exponent = Some(rng.random::<f64>() * EXPONENT_PRIOR_UPPER);
    }
    if model.infers_decay() {
        let e: f64 = Exp1.sample(rng);
        p.decay = Some(e / priors.decay_rate);
    }
    p
}

/// Prior means of the parameters.
pub fn prior_mean_params(model: &ModelSpec, priors: &PriorSpec) -> Params {
    let mut p = Params::new(priors.beta.mean(), priors.removal_rate(&model.period).mean());
    if model.infers_exponent() {
        p.exponent = Some(EXPONENT_PRIOR_UPPER / 2.0);
    }
    if model.infers_decay() {
        p.decay = Some(1.0 / priors.decay_rate);
    }
    p
}

/// Sampler for one temperature.
pub struct PowerPosteriorChain {
    model: ModelSpec,
    priors: PriorSpec,
    temperature: f64,
    removal: Vec<f64>,
    population: usize,
    r_min: f64,
    latent: bool,
    options: ChainOptions,
    infection_moves: usize,
    proposal_scale: f64,
    exponent_step: f64,
    decay_step: f64,
    ws: TermsWorkspace,
    scratch: Vec<f64>,
    state: ChainState,
    rng: SimRng,
    tries: [u64; 3],
    accepts: [u64; 3],
}

const MOVE_INFECTION: usize = 0;
const MOVE_EXPONENT: usize = 1;
const MOVE_DECAY: usize = 2;

impl PowerPosteriorChain {
    pub fn new(
        data: &EpidemicData,
        model: &ModelSpec,
        priors: &PriorSpec,
        temperature: f64,
        config: &McmcConfig,
        init: ChainInit,
        options: ChainOptions,
    ) -> Result<Self> {
        model.validate()?;
        priors.validate()?;
        config.validate()?;
        if !(0.0..=1.0).contains(&temperature) {
            return Err(Error::InvalidConfig(format!(
                "temperature must lie in [0, 1], got {temperature}"
            )));
        }
        let removal = data.removal_times().to_vec();
        let population = data.population();
        let n_cases = removal.len();
        if n_cases == 0 || population < n_cases {
            return Err(Error::InvalidData(format!(
                "{n_cases} cases cannot come from a population of {population}"
            )));
        }
        let latent = data.has_latent();
        let infection_times = match (data, init.infection_times) {
            (EpidemicData::Complete(o), _) => o.infection_times().to_vec(),
            (EpidemicData::Removals(_), Some(i)) => {
                if i.len() != n_cases {
                    return Err(Error::InvalidConfig("initial infection times have the wrong length".into()));
                }
                i
            }
            (EpidemicData::Removals(_), None) => initial_infection_times(&removal),
        };
        let mut rng = stream_rng(config.seed, options.stream);
        let params = match init.params {
            Some(p) => p,
            None => draw_prior_params(model, priors, &mut rng),
        };
        params.check(model)?;
        let mut ws = TermsWorkspace::new();
        let kernel = model.kernel(&params);
        let terms = ws
            .compute(population, &infection_times, &removal, kernel)
            .ok_or_else(|| Error::InvalidData("initial infection times are not feasible".into()))?;
        let r_min = removal.iter().copied().fold(f64::INFINITY, f64::min);
        if latent && infection_times.iter().copied().fold(f64::INFINITY, f64::min) >= r_min {
            return Err(Error::InvalidData("initial infection must precede the first removal".into()));
        }
        let log_lik = terms.log_lik(&model.period, &params);
        let infection_moves = if latent {
            config.infection_moves.unwrap_or(n_cases.div_ceil(5))
        } else {
            0
        };
        if let Some(z) = options.pinned_initial_case {
            if z >= n_cases || argmin(&infection_times) != z {
                return Err(Error::InvalidConfig("pinned case is not the initial infective".into()));
            }
        }
        Ok(Self {
            model: *model,
            priors: *priors,
            temperature,
            removal,
            population,
            r_min,
            latent,
            options,
            infection_moves,
            proposal_scale: config.infection_proposal_scale,
            exponent_step: config.exponent_step,
            decay_step: config.decay_step,
            ws,
            scratch: infection_times.clone(),
            state: ChainState {
                params,
                infection_times,
                log_lik,
                terms,
            },
            rng,
            tries: [0; 3],
            accepts: [0; 3],
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    fn refresh_log_lik(&mut self) {
        self.state.log_lik = self.state.terms.log_lik(&self.model.period, &self.state.params);
    }

    /// One full sweep: Gibbs updates, exponent/decay move, infection-time moves.
    pub fn sweep(&mut self) {
        let t = self.temperature;
        if !self.options.fixed_params {
            self.state.params.beta = gibbs_beta(&self.state.terms, t, &self.priors.beta, &mut self.rng);
            let prior = self.priors.removal_rate(&self.model.period);
            self.state.params.removal_rate =
                gibbs_removal_rate(&self.state.terms, &self.model.period, t, &prior, &mut self.rng);
            self.refresh_log_lik();
            if self.model.infers_exponent() {
                self.mh_update_exponent();
            }
            if self.model.infers_decay() {
                self.mh_update_decay();
            }
        }
        for _ in 0..self.infection_moves {
            self.mh_update_infection_time();
        }
        debug_assert!(self.cache_is_consistent());
    }

    /// Recomputes the likelihood from scratch and compares with the cache.
    pub fn cache_is_consistent(&self) -> bool {
        let kernel = self.model.kernel(&self.state.params);
        match TermsWorkspace::new().compute(self.population, &self.state.infection_times, &self.removal, kernel) {
            Some(fresh) => {
                let ll = fresh.log_lik(&self.model.period, &self.state.params);
                (ll - self.state.log_lik).abs() <= 1e-8 * ll.abs().max(1.0)
            }
            None => false,
        }
    }

    fn proposal_rate(&self) -> f64 {
        let r = self.state.params.removal_rate / self.model.period.shape();
        r * self.proposal_scale
    }

    /// One Metropolis-Hastings move on a uniformly chosen infection time.
    pub fn mh_update_infection_time(&mut self) -> bool {
        if !self.latent {
            return false;
        }
        let n = self.removal.len();
        let j = match self.options.pinned_initial_case {
            Some(z) => {
                if n < 2 {
                    return false;
                }
                let k = self.rng.random_range(0..n - 1);
                if k >= z {
                    k + 1
                } else {
                    k
                }
            }
            None => self.rng.random_range(0..n),
        };
        self.tries[MOVE_INFECTION] += 1;
        let rate = self.proposal_rate();
        let psi = self.priors.initial_time_rate;
        let pinned = self.options.pinned_initial_case.is_some();
        let e: f64 = Exp1.sample(&mut self.rng);
        let r_j = self.removal[j];
        let old = self.state.infection_times[j];
        // The current initial case is redrawn from its prior, every other
        // case from the period-scaled exponential behind its removal.
        let from_initial = !pinned && j == self.state.initial_case();
        let new = if from_initial { self.r_min - e / psi } else { r_j - e / rate };
        if let Some(z) = self.options.pinned_initial_case {
            if new <= self.state.infection_times[z] {
                return false;
            }
        }
        self.scratch.copy_from_slice(&self.state.infection_times);
        self.scratch[j] = new;
        let new_min = self.scratch.iter().copied().fold(f64::INFINITY, f64::min);
        if new_min >= self.r_min {
            return false;
        }
        let kernel = self.model.kernel(&self.state.params);
        let Some(terms) = self.ws.compute(self.population, &self.scratch, &self.removal, kernel) else {
            return false;
        };
        let ll = terms.log_lik(&self.model.period, &self.state.params);
        let old_min = self.state.initial_time();
        let mut log_ratio = self.temperature * (ll - self.state.log_lik);
        if !pinned {
            log_ratio += psi * (new_min - old_min);
        }
        // Hastings ratio: the reverse move uses the family picked by the
        // proposed state.
        let back_from_initial = !pinned && argmin(&self.scratch) == j;
        if back_from_initial && old >= self.r_min {
            // the reverse proposal cannot reach the current state
            return false;
        }
        let log_q = |initial: bool, x: f64| {
            if initial {
                psi.ln() - psi * (self.r_min - x)
            } else {
                rate.ln() - rate * (r_j - x)
            }
        };
        log_ratio += log_q(back_from_initial, old) - log_q(from_initial, new);
        if accept(log_ratio, &mut self.rng) {
            std::mem::swap(&mut self.state.infection_times, &mut self.scratch);
            self.state.terms = terms;
            self.state.log_lik = ll;
            self.accepts[MOVE_INFECTION] += 1;
            true
        } else {
            false
        }
    }

    /// Random-walk move on the power exponent, reflected into `(0, 0.5)`.
    pub fn mh_update_exponent(&mut self) -> bool {
        let Some(p) = self.state.params.exponent else {
            return false;
        };
        self.tries[MOVE_EXPONENT] += 1;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let proposed = reflect(p + self.exponent_step * z, 0.0, EXPONENT_PRIOR_UPPER);
        let params = Params {
            exponent: Some(proposed),
            ..self.state.params
        };
        self.try_param_move(params, 0.0, MOVE_EXPONENT)
    }

    /// Random-walk move on `log b` under an exponential prior on `b`.
    pub fn mh_update_decay(&mut self) -> bool {
        let Some(b) = self.state.params.decay else {
            return false;
        };
        self.tries[MOVE_DECAY] += 1;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let proposed = b * (self.decay_step * z).exp();
        let params = Params {
            decay: Some(proposed),
            ..self.state.params
        };
        // prior ratio and the Jacobian of the log transform
        let log_extra = -self.priors.decay_rate * (proposed - b) + (proposed / b).ln();
        self.try_param_move(params, log_extra, MOVE_DECAY)
    }

    fn try_param_move(&mut self, params: Params, log_extra: f64, slot: usize) -> bool {
        let kernel = self.model.kernel(&params);
        let Some(terms) = self
            .ws
            .compute(self.population, &self.state.infection_times, &self.removal, kernel)
        else {
            return false;
        };
        let ll = terms.log_lik(&self.model.period, &params);
        let log_ratio = self.temperature * (ll - self.state.log_lik) + log_extra;
        if accept(log_ratio, &mut self.rng) {
            self.state.params = params;
            self.state.terms = terms;
            self.state.log_lik = ll;
            self.accepts[slot] += 1;
            true
        } else {
            false
        }
    }

    fn rate(&self, slot: usize) -> f64 {
        if self.tries[slot] == 0 {
            0.0
        } else {
            self.accepts[slot] as f64 / self.tries[slot] as f64
        }
    }

    fn reset_counters(&mut self) {
        self.tries = [0; 3];
        self.accepts = [0; 3];
    }

    /// Nudges random-walk steps toward 25–40% acceptance.
    fn adapt(&mut self) {
        for (slot, step) in [(MOVE_EXPONENT, &mut self.exponent_step), (MOVE_DECAY, &mut self.decay_step)] {
            if self.tries[slot] == 0 {
                continue;
            }
            let r = self.accepts[slot] as f64 / self.tries[slot] as f64;
            if r < 0.25 {
                *step *= 0.8;
            } else if r > 0.40 {
                *step *= 1.25;
            }
        }
        // The exponent lives on an interval of width 0.5.
        self.exponent_step = self.exponent_step.clamp(1e-4, 0.5);
        self.decay_step = self.decay_step.clamp(1e-4, 10.0);
    }

    /// Runs `config.iterations` sweeps and collects thinned post-burn-in
    /// samples.
    pub fn run(mut self, config: &McmcConfig) -> ChainOutput {
        const ADAPT_EVERY: usize = 50;
        let mut samples = Vec::with_capacity(config.kept_samples());
        let mut latent_trace = self.options.record_latent.then(Vec::new);
        for it in 0..config.iterations {
            if it == config.burn_in {
                self.reset_counters();
            }
            self.sweep();
            if it < config.burn_in {
                if config.adapt && (it + 1) % ADAPT_EVERY == 0 {
                    self.adapt();
                    self.reset_counters();
                }
                continue;
            }
            if (it - config.burn_in) % config.thin == 0 {
                let z = self.state.initial_case();
                samples.push(Sample {
                    iteration: it,
                    params: self.state.params,
                    log_lik: self.state.log_lik,
                    initial_case: z,
                    initial_time: self.state.infection_times[z],
                });
                if let Some(tr) = latent_trace.as_mut() {
                    tr.push(self.state.infection_times.clone());
                }
            }
        }
        let lls: Vec<f64> = samples.iter().map(|s| s.log_lik).collect();
        ChainOutput {
            temperature: self.temperature,
            log_lik: moments(&lls),
            acceptance: Acceptance {
                infection_time: self.rate(MOVE_INFECTION),
                exponent: self.rate(MOVE_EXPONENT),
                decay: self.rate(MOVE_DECAY),
            },
            exponent_step: self.exponent_step,
            decay_step: self.decay_step,
            samples,
            final_state: self.state,
            latent_trace,
        }
    }
}

fn accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() {
        return false;
    }
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    // Fold into [lo, lo + 2 width), then mirror the upper half.
    x = (x - lo).rem_euclid(2.0 * width);
    if x > width {
        x = 2.0 * width - x;
    }
    let y = lo + x;
    if y <= lo || y >= hi {
        // measure-zero boundary hit
        lo + 0.5 * width
    } else {
        y
    }
}

/// Runs one chain at temperature `t` from prior-drawn parameters.
pub fn run_chain(
    data: &EpidemicData,
    model: &ModelSpec,
    priors: &PriorSpec,
    t: f64,
    config: &McmcConfig,
) -> Result<ChainOutput> {
    run_chain_from(data, model, priors, t, config, ChainInit::default(), ChainOptions::default())
}

pub fn run_chain_from(
    data: &EpidemicData,
    model: &ModelSpec,
    priors: &PriorSpec,
    t: f64,
    config: &McmcConfig,
    init: ChainInit,
    options: ChainOptions,
) -> Result<ChainOutput> {
    let chain = PowerPosteriorChain::new(data, model, priors, t, config, init, options)?;
    Ok(chain.run(config))
}
