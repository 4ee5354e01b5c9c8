//! Exact event-driven simulation of the SIR model and its variants.
//!
//! Removal times are scheduled when an individual is infected, so gamma
//! infectious periods are handled exactly. Between events the infection
//! hazard is either constant or, for the decay kernel, a known exponential
//! in time; waiting times come from inverting the cumulative hazard against
//! a unit exponential draw.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InfectiousPeriod, Kernel, ModelSpec, Params};
use crate::outbreak::Outbreak;
use crate::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    #[default]
    None,
    /// Resample until at least one secondary infection occurs.
    AtLeastOneSecondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub params: Params,
    pub population: usize,
    pub seed: u64,
    #[serde(default)]
    pub condition: Conditioning,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.params.check(&self.model)?;
        if self.population == 0 {
            return Err(Error::InvalidConfig("population must be at least 1".into()));
        }
        if self.condition == Conditioning::AtLeastOneSecondary
            && (self.population < 2 || self.params.beta == 0.0)
        {
            return Err(Error::InvalidConfig(
                "cannot condition on a secondary infection when none is possible".into(),
            ));
        }
        Ok(())
    }
}

/// Draws one outbreak using the RNG stream seeded by `config.seed`.
pub fn simulate(config: &SimConfig) -> Result<Outbreak> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, 0);
    Ok(simulate_with(config, &mut rng))
}

/// Draws one outbreak from `rng`. `config` must already be valid.
pub fn simulate_with<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Outbreak {
    loop {
        let o = simulate_once(&config.model, &config.params, config.population, rng);
        if config.condition == Conditioning::None || o.n_cases() >= 2 {
            return o;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending(f64);

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn draw_period<R: Rng + ?Sized>(period: &InfectiousPeriod, rate: f64, rng: &mut R) -> f64 {
    match *period {
        InfectiousPeriod::Exponential => {
            let e: f64 = Exp1.sample(rng);
            e / rate
        }
        InfectiousPeriod::Gamma { shape } => Gamma::new(shape, 1.0 / rate)
            .expect("validated gamma parameters")
            .sample(rng),
    }
}

/// Time until the next infection given a unit exponential draw `e`, the
/// current time and state. Infinite when the hazard never accumulates `e`.
fn waiting_time(kernel: Kernel, scale: f64, x: f64, y: f64, now: f64, e: f64) -> f64 {
    match kernel {
        Kernel::Standard => e / (scale * x * y),
        Kernel::Power(p) => e / (scale * x * y.powf(p)),
        Kernel::Decay(b) => {
            let c = scale * x * y;
            if b == 0.0 {
                return e / c;
            }
            // c e^{-b now} (1 - e^{-b w}) / b = e
            let q = e * b * (b * now).exp() / c;
            if q >= 1.0 {
                f64::INFINITY
            } else {
                -(-q).ln_1p() / b
            }
        }
    }
}

fn simulate_once<R: Rng + ?Sized>(model: &ModelSpec, params: &Params, population: usize, rng: &mut R) -> Outbreak {
    let kernel = model.kernel(params);
    let n = population - 1;
    let scale = if n > 0 { params.beta / n as f64 } else { 0.0 };
    let mut infection = vec![0.0];
    let mut removal = vec![draw_period(&model.period, params.removal_rate, rng)];
    let mut pending = BinaryHeap::new();
    pending.push(Reverse(Pending(removal[0])));
    let mut now = 0.0;
    let mut x = n;
    let mut y = 1usize;
    while let Some(&Reverse(Pending(next_removal))) = pending.peek() {
        let next_infection = if x > 0 && scale > 0.0 {
            let e: f64 = Exp1.sample(rng);
            now + waiting_time(kernel, scale, x as f64, y as f64, now, e)
        } else {
            f64::INFINITY
        };
        if next_infection < next_removal {
            now = next_infection;
            infection.push(now);
            removal.push(now + draw_period(&model.period, params.removal_rate, rng));
            pending.push(Reverse(Pending(*removal.last().unwrap())));
            x -= 1;
            y += 1;
        } else {
            pending.pop();
            now = next_removal;
            y -= 1;
        }
    }
    debug_assert_eq!(y, 0);
    Outbreak::from_parts(population, infection, removal)
}
