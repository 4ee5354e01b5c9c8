mod common;

use common::{exposure, infectives_before, log_simpson, simulated};
use sirbf::analytic::log_marginal_complete;
use sirbf::evidence::{build_ladder, estimate_log_marginal, gradient_identity, log_bayes_factor, EvidenceMode};
use sirbf::mcmc::{EpidemicData, McmcConfig};
use sirbf::stats::{mean, variance};
use sirbf::{Exponent, GammaPrior, Mechanism, ModelSpec, Outbreak, Params, PriorSpec, RemovalDataset};

fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

#[test]
fn complete_data_matches_closed_form() {
    let o = simulated(ModelSpec::exponential(), Params::new(2.0, 1.0), 30, 3);
    let data: EpidemicData = o.clone().into();
    let priors = PriorSpec {
        beta: GammaPrior::new(1.0, 0.5),
        gamma: GammaPrior::new(2.0, 1.0),
        delta: GammaPrior::new(1.0, 0.2),
        ..PriorSpec::default()
    };
    let ladder = build_ladder(20, 5.0).unwrap();
    let config = McmcConfig::short(12_000, 1_000, 2, 4);
    let power = ModelSpec::exponential().with_mechanism(Mechanism::PowerY { exponent: Exponent::Fixed(0.5) });
    for model in [ModelSpec::exponential(), ModelSpec::gamma(4.0), power] {
        let est = estimate_log_marginal(&data, &model, &priors, &ladder, &config, EvidenceMode::Independent).unwrap();
        let exact = log_marginal_complete(&o, &model, &priors).unwrap();
        assert!((est.log_marginal - exact).abs() < 0.5, "{model}: {} vs {exact} (se {})", est.log_marginal, est.se);
        assert!(est.monotone, "{model}");
    }
}

/// `log π(I, R | exp+decay)` with β, γ integrated against Exp(1) priors and
/// b against Exp(1), by quadrature over b.
fn decay_marginal_by_quadrature(o: &Outbreak) -> f64 {
    let n = (o.population() - 1) as f64;
    let z = o.initial_case();
    let m = (o.n_cases() - 1) as f64;
    let (mut log_y, mut sum_i) = (0.0, 0.0);
    for (j, &i) in o.infection_times().iter().enumerate() {
        if j != z {
            log_y += (infectives_before(o, i) as f64).ln();
            sum_i += i;
        }
    }
    let infection = |b: f64| {
        let a_b = exposure(o, 1.0, |s, t| ((-b * s).exp() - (-b * t).exp()) / b);
        -m * n.ln() + log_y - b * sum_i + ln_gamma(1.0 + m) - (1.0 + m) * (1.0 + a_b / n).ln()
    };
    let s: f64 = o.infectious_periods().sum();
    let n_r = o.n_cases() as f64;
    let removal = ln_gamma(1.0 + n_r) - (1.0 + n_r) * (1.0 + s).ln();
    log_simpson(|b| if b <= 0.0 { infection(1e-12) } else { -b + infection(b) }, 0.0, 30.0, 6_000) + removal
}

#[test]
fn complete_data_decay_matches_quadrature() {
    let model = ModelSpec::exponential().with_mechanism(Mechanism::ExpDecay);
    let o = simulated(model, Params::new(2.5, 1.0).with_decay(0.2), 30, 5);
    assert!(o.n_cases() >= 5);
    let exact = decay_marginal_by_quadrature(&o);
    let est = estimate_log_marginal(
        &o.clone().into(),
        &model,
        &PriorSpec::default(),
        &build_ladder(30, 5.0).unwrap(),
        &McmcConfig::short(20_000, 2_000, 2, 6),
        EvidenceMode::Independent,
    )
    .unwrap();
    assert!((est.log_marginal - exact).abs() < 0.5, "{} vs {exact} (se {})", est.log_marginal, est.se);
    assert!((est.log_marginal_without_origin - est.log_marginal).abs() < 0.5);
}

fn single_removal() -> EpidemicData {
    RemovalDataset::new(vec![0.0], 9, "one").unwrap().into()
}

/// With one case, Exp(1) priors and ψ = 1, the evidence is
/// `∫ e^{-d} (1 + d)^{-3} dd`.
fn single_removal_exact() -> f64 {
    log_simpson(|d| -d - 3.0 * (1.0 + d).ln(), 0.0, 60.0, 20_000)
}

#[test]
fn latent_single_case_matches_quadrature() {
    let exact = single_removal_exact();
    let est = estimate_log_marginal(
        &single_removal(),
        &ModelSpec::exponential(),
        &PriorSpec::default(),
        &build_ladder(40, 5.0).unwrap(),
        &McmcConfig::short(20_000, 1_000, 2, 7),
        EvidenceMode::Independent,
    )
    .unwrap();
    assert!((est.log_marginal - exact).abs() < 4.0 * est.se + 0.02, "{} vs {exact} (se {})", est.log_marginal, est.se);
}

#[test]
fn reported_error_is_calibrated_across_seeds() {
    let ladder = build_ladder(10, 5.0).unwrap();
    let estimates: Vec<(f64, f64)> = (0..12)
        .map(|seed| {
            let e = estimate_log_marginal(
                &single_removal(),
                &ModelSpec::exponential(),
                &PriorSpec::default(),
                &ladder,
                &McmcConfig::short(4_000, 500, 1, 100 + seed),
                EvidenceMode::Independent,
            )
            .unwrap();
            (e.log_marginal, e.se)
        })
        .collect();
    let values: Vec<f64> = estimates.iter().map(|e| e.0).collect();
    let spread = variance(&values).sqrt();
    let reported = mean(&estimates.iter().map(|e| e.1).collect::<Vec<_>>());
    let ratio = spread / reported;
    assert!((0.4..2.5).contains(&ratio), "spread {spread} vs reported se {reported}");
}

#[test]
fn modes_agree_on_removal_data() {
    let o = simulated(ModelSpec::exponential(), Params::new(2.0, 1.0), 20, 8);
    let data: EpidemicData = RemovalDataset::from_unsorted(o.removal_times().to_vec(), 20, "x").unwrap().into();
    let ladder = build_ladder(10, 5.0).unwrap();
    let config = McmcConfig::short(8_000, 1_000, 2, 9);
    let run = |mode| estimate_log_marginal(&data, &ModelSpec::exponential(), &PriorSpec::default(), &ladder, &config, mode).unwrap();
    let a = run(EvidenceMode::Independent);
    let b = run(EvidenceMode::SequentialWarmStart);
    let tol = 4.0 * (a.se.powi(2) + b.se.powi(2)).sqrt() + 0.3;
    assert!((a.log_marginal - b.log_marginal).abs() < tol, "{} vs {}", a.log_marginal, b.log_marginal);
    let check = gradient_identity(&a, 3.0);
    assert_eq!(check.panels.len(), 8);
}

#[test]
fn bayes_factor_is_difference_of_marginals() {
    let data = single_removal();
    let ladder = build_ladder(5, 5.0).unwrap();
    let config = McmcConfig::short(3_000, 500, 1, 10);
    let p = PriorSpec::default();
    let bf = log_bayes_factor(&data, (&ModelSpec::exponential(), &p), (&ModelSpec::gamma(2.0), &p), &ladder, &config, EvidenceMode::Independent).unwrap();
    assert!((bf.log_bf - (bf.first.log_marginal - bf.second.log_marginal)).abs() < 1e-12);
    assert!((bf.se - (bf.first.se.powi(2) + bf.second.se.powi(2)).sqrt()).abs() < 1e-12);
}
