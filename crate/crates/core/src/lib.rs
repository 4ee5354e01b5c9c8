//! Bayesian model choice for partially observed stochastic SIR epidemics.
//!
//! The crate provides
//!
//! * exact event-driven simulation of the SIR model with exponential or
//!   gamma infectious periods, and with standard, power (`Y^p`) or
//!   exponentially decaying infection rates ([`simulate`]);
//! * the augmented likelihood of infection and removal times
//!   ([`likelihood`]) and closed-form Bayes factors when infection times
//!   are observed ([`analytic`]);
//! * a data-augmented Metropolis-within-Gibbs sampler for power posteriors
//!   ([`mcmc`]), thermodynamic-integration estimates of the marginal
//!   likelihood from removal times alone ([`evidence`]) and DIC₆ ([`dic`]);
//! * study harnesses that regenerate the simulation tables ([`studies`]).

pub mod analytic;
pub mod datasets;
pub mod dic;
pub mod error;
pub mod evidence;
pub mod io;
pub mod likelihood;
pub mod mcmc;
pub mod model;
pub mod outbreak;
pub mod simulate;
pub mod stats;
pub mod studies;

pub use error::{Error, Result};
pub use model::{Exponent, GammaPrior, InfectiousPeriod, Mechanism, ModelSpec, Params, PriorSpec};
pub use outbreak::{Outbreak, RemovalDataset, Trajectory, Violation};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG type used throughout.
pub type SimRng = ChaCha8Rng;

/// Independent RNG stream `stream` derived from a root seed.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}
