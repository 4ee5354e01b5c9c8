//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use sirbf::simulate::{simulate, Conditioning, SimConfig};
use sirbf::{ModelSpec, Outbreak, Params};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn simulated(model: ModelSpec, params: Params, population: usize, seed: u64) -> Outbreak {
    simulate(&SimConfig {
        model,
        params,
        population,
        seed,
        condition: Conditioning::AtLeastOneSecondary,
    })
    .unwrap()
}

/// Upper-tail p-value of Pearson's statistic; bins with tiny expectation
/// are pooled into their neighbour first.
pub fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        o_acc += o;
        e_acc += e;
        if e_acc >= 5.0 {
            obs.push(o_acc);
            exp.push(e_acc);
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        *obs.last_mut().unwrap() += o_acc;
        *exp.last_mut().unwrap() += e_acc;
    }
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (obs.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Number of infectives just before `t`, removals at `t` already gone.
pub fn infectives_before(o: &Outbreak, t: f64) -> usize {
    o.infection_times()
        .iter()
        .zip(o.removal_times())
        .filter(|(&i, &r)| i < t && r > t)
        .count()
}

/// `∫ g(t) X(t) Y(t)^p dt` where `∫_a^b g` is supplied by `weight(a, b)`.
/// The state is evaluated at interval midpoints by counting, with no event
/// bookkeeping.
pub fn exposure(o: &Outbreak, p: f64, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let mut times: Vec<f64> = o
        .infection_times()
        .iter()
        .chain(o.removal_times())
        .copied()
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let never = (o.population() - o.n_cases()) as f64;
    let mut total = 0.0;
    for w in times.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let x = never + o.infection_times().iter().filter(|&&i| i > mid).count() as f64;
        let y = infectives_before(o, mid) as f64;
        if y > 0.0 {
            total += x * y.powf(p) * weight(w[0], w[1]);
        }
    }
    total
}

pub fn plain(a: f64, b: f64) -> f64 {
    b - a
}

/// `log π(I, R | β, γ)` for the exponential-period model with `Y^p`,
/// written out term by term.
pub fn log_lik_power(o: &Outbreak, p: f64, beta: f64, gamma: f64) -> f64 {
    let n = (o.population() - 1) as f64;
    let z = o.initial_case();
    let mut ll = 0.0;
    for (j, &i) in o.infection_times().iter().enumerate() {
        if j != z {
            ll += (beta / n * (infectives_before(o, i) as f64).powf(p)).ln();
        }
    }
    ll -= beta / n * exposure(o, p, plain);
    for d in o.infectious_periods() {
        ll += gamma.ln() - gamma * d;
    }
    ll
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log ∫_a^b e^{f(x)} dx` by composite Simpson on `n` (even) panels.
pub fn log_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            f(a + k as f64 * h) + (w * h / 3.0f64).ln()
        })
        .collect();
    log_sum_exp(&terms)
}

/// Mean of the density proportional to `e^{f(x)}` on `[a, b]`.
pub fn density_mean(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let z = log_simpson(&f, a, b, n);
    // E[x] = ∫ x e^f / Z; shift by `a` to keep the integrand positive
    let shifted = log_simpson(|x| f(x) + (x - a).max(1e-300).ln(), a, b, n);
    a + (shifted - z).exp()
}
