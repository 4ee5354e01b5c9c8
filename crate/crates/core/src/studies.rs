//! Harnesses that regenerate the simulation studies and the smallpox
//! analysis at configurable scale.
//!
//! Tables 1 and 2 use complete simulated outbreaks and the diffuse-prior
//! closed forms; `scale` is the number of replicates per row. Tables 3 to 7
//! run the power-posterior and DIC₆ pipelines on removal data; `scale` caps
//! the ladder size `r`. Simulated datasets for Tables 3 to 6 are found by
//! scanning seeds upward from the root seed until the final size matches the
//! published one, and the seed is reported.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{log_bf_exp_vs_gamma_diffuse, log_bf_standard_vs_power_diffuse};
use crate::datasets::abakaliki;
use crate::dic::dic6;
use crate::error::{Error, Result};
use crate::evidence::{
    build_ladder, estimate_log_marginal, EvidenceEstimate, EvidenceMode, DEFAULT_LADDER_POWER,
};
use crate::mcmc::{EpidemicData, McmcConfig};
use crate::model::{Exponent, Mechanism, ModelSpec, Params, PriorSpec};
use crate::outbreak::{Outbreak, RemovalDataset};
use crate::simulate::{simulate, simulate_with, Conditioning, SimConfig};
use crate::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub table: u8,
    pub csv: String,
    pub summary: String,
    /// Expected log-likelihood curves as `(name, csv)`.
    pub curves: Vec<(String, String)>,
}

/// Settings shared by the MCMC-based tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySettings {
    pub scale: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub mode: EvidenceMode,
}

impl StudySettings {
    pub fn new(scale: usize, seed: u64) -> Self {
        Self {
            scale,
            seed,
            mcmc: McmcConfig {
                seed,
                ..McmcConfig::default()
            },
            mode: EvidenceMode::Independent,
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueModel {
    M1,
    M2,
}

/// One row of the replicate tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub true_model: TrueModel,
    /// Gamma shape for Table 1, power exponent for Table 2.
    pub setting: f64,
    pub beta: f64,
    pub population: usize,
    pub replicates: usize,
    pub mean_log_bf: f64,
    pub prob_bf_above_one: f64,
}

fn summarise(true_model: TrueModel, setting: f64, beta: f64, population: usize, log_bfs: &[f64]) -> ReplicateRow {
    let n = log_bfs.len();
    ReplicateRow {
        true_model,
        setting,
        beta,
        population,
        replicates: n,
        mean_log_bf: log_bfs.iter().sum::<f64>() / n as f64,
        prob_bf_above_one: log_bfs.iter().filter(|&&b| b > 0.0).count() as f64 / n as f64,
    }
}

/// Replicate `k` of a row is simulated on its own RNG stream, resampling
/// until at least one secondary infection occurs.
fn conditioned_outbreaks(model: ModelSpec, params: Params, population: usize, reps: usize, seed: u64) -> Vec<Outbreak> {
    let cfg = SimConfig {
        model,
        params,
        population,
        seed,
        condition: Conditioning::AtLeastOneSecondary,
    };
    (0..reps)
        .into_par_iter()
        .map(|k| simulate_with(&cfg, &mut stream_rng(seed, k as u64)))
        .collect()
}

fn row_seed(seed: u64, row: usize) -> u64 {
    seed.wrapping_add((row as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Infectious-period comparison: `m₁` has Exp(1) periods, `m₂` has
/// Gamma(α, α) periods, both with mean 1. Reports the diffuse-limit log
/// Bayes factor of `m₁` against `m₂`.
pub fn period_row(true_model: TrueModel, alpha: f64, beta: f64, population: usize, reps: usize, seed: u64) -> Result<ReplicateRow> {
    let (model, params) = match true_model {
        TrueModel::M1 => (ModelSpec::exponential(), Params::new(beta, 1.0)),
        TrueModel::M2 => (ModelSpec::gamma(alpha), Params::new(beta, alpha)),
    };
    let log_bfs = conditioned_outbreaks(model, params, population, reps, seed)
        .par_iter()
        .map(|o| log_bf_exp_vs_gamma_diffuse(o, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(true_model, alpha, beta, population, &log_bfs))
}

/// Infection-mechanism comparison: `m₁` is the standard model, `m₂` uses
/// `β n⁻¹ X Y^p`; Exp(1) periods for both.
pub fn mechanism_row(true_model: TrueModel, p: f64, beta: f64, population: usize, reps: usize, seed: u64) -> Result<ReplicateRow> {
    let model = match true_model {
        TrueModel::M1 => ModelSpec::exponential(),
        TrueModel::M2 => ModelSpec::exponential().with_mechanism(Mechanism::PowerY {
            exponent: Exponent::Fixed(p),
        }),
    };
    let log_bfs = conditioned_outbreaks(model, Params::new(beta, 1.0), population, reps, seed)
        .par_iter()
        .map(|o| log_bf_standard_vs_power_diffuse(o, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarise(true_model, p, beta, population, &log_bfs))
}

const TABLE1_ROWS: [(TrueModel, f64, f64); 12] = [
    (TrueModel::M1, 10.0, 1.5),
    (TrueModel::M1, 5.0, 1.5),
    (TrueModel::M1, 2.0, 1.5),
    (TrueModel::M1, 10.0, 2.0),
    (TrueModel::M1, 5.0, 2.0),
    (TrueModel::M1, 2.0, 2.0),
    (TrueModel::M2, 10.0, 1.5),
    (TrueModel::M2, 5.0, 1.5),
    (TrueModel::M2, 2.0, 1.5),
    (TrueModel::M2, 10.0, 2.0),
    (TrueModel::M2, 5.0, 2.0),
    (TrueModel::M2, 2.0, 2.0),
];

const TABLE2_ROWS: [(TrueModel, f64, f64); 12] = [
    (TrueModel::M1, 0.5, 2.0),
    (TrueModel::M1, 0.3, 2.0),
    (TrueModel::M1, 0.0, 2.0),
    (TrueModel::M1, 0.5, 4.0),
    (TrueModel::M1, 0.3, 4.0),
    (TrueModel::M1, 0.0, 4.0),
    (TrueModel::M2, 0.5, 2.0),
    (TrueModel::M2, 0.3, 2.0),
    (TrueModel::M2, 0.0, 2.0),
    (TrueModel::M2, 0.5, 4.0),
    (TrueModel::M2, 0.3, 4.0),
    (TrueModel::M2, 0.0, 4.0),
];

fn replicate_table(table: u8, reps: usize, seed: u64) -> Result<StudyOutput> {
    let (rows, populations): (&[(TrueModel, f64, f64)], [usize; 2]) = match table {
        1 => (&TABLE1_ROWS, [30, 50]),
        _ => (&TABLE2_ROWS, [50, 200]),
    };
    let mut out = Vec::new();
    for (k, &(m, setting, beta)) in rows.iter().enumerate() {
        for (c, &n) in populations.iter().enumerate() {
            let s = row_seed(seed, 2 * k + c);
            out.push(if table == 1 {
                period_row(m, setting, beta, n, reps, s)?
            } else {
                mechanism_row(m, setting, beta, n, reps, s)?
            });
        }
    }
    let summary = out
        .iter()
        .map(|r| {
            format!(
                "{:?} setting={} beta={} N={}: E[log BF]={:.2} P(BF>1)={:.3}",
                r.true_model, r.setting, r.beta, r.population, r.mean_log_bf, r.prob_bf_above_one
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(StudyOutput {
        table,
        csv: to_csv(&out)?,
        summary,
        curves: Vec::new(),
    })
}

/// A simulated outbreak with exactly `final_size` cases; returns it with the
/// seed that produced it.
pub fn find_outbreak(
    model: ModelSpec,
    params: Params,
    population: usize,
    final_size: usize,
    seed: u64,
) -> Result<(Outbreak, u64)> {
    const MAX_TRIES: u64 = 1_000_000;
    for s in seed..seed.saturating_add(MAX_TRIES) {
        let o = simulate(&SimConfig {
            model,
            params,
            population,
            seed: s,
            condition: Conditioning::None,
        })?;
        if o.n_cases() == final_size {
            return Ok((o, s));
        }
    }
    Err(Error::InvalidConfig(format!(
        "no outbreak of size {final_size} within {MAX_TRIES} seeds"
    )))
}

fn removal_data(o: &Outbreak, label: &str) -> Result<EpidemicData> {
    Ok(RemovalDataset::from_unsorted(o.removal_times().to_vec(), o.population(), label)?.into())
}

/// Expected log-likelihood curve as CSV: one row per temperature, with a
/// flag on rows whose mean drops significantly below the previous one.
pub fn emit_curve(estimate: &EvidenceEstimate) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        j: usize,
        t: f64,
        mean: f64,
        variance: f64,
        se_mean: f64,
        se_variance: f64,
        decreasing: bool,
    }
    let rows: Vec<Row> = estimate
        .points
        .iter()
        .enumerate()
        .map(|(j, p)| Row {
            j,
            t: p.t,
            mean: p.mean,
            variance: p.variance,
            se_mean: p.se_mean,
            se_variance: p.se_variance,
            decreasing: j > 0 && p.drops_below(&estimate.points[j - 1]),
        })
        .collect();
    to_csv(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRow {
    pub dataset: String,
    pub dataset_seed: Option<u64>,
    pub prior_rate: f64,
    pub r: usize,
    pub log_marginal_m1: f64,
    pub se_m1: f64,
    pub log_marginal_m2: f64,
    pub se_m2: f64,
    pub log_bf: f64,
    pub log_bf_without_origin: f64,
    pub dic_m1: Option<f64>,
    pub dic_m2: Option<f64>,
}

struct Comparison<'a> {
    dataset: &'a str,
    dataset_seed: Option<u64>,
    data: &'a EpidemicData,
    m1: ModelSpec,
    m2: ModelSpec,
}

fn compare(
    cmp: &Comparison,
    priors: PriorSpec,
    r: usize,
    with_dic: bool,
    settings: &StudySettings,
    curves: &mut Vec<(String, String)>,
) -> Result<EvidenceRow> {
    let ladder = build_ladder(r, DEFAULT_LADDER_POWER)?;
    let e1 = estimate_log_marginal(cmp.data, &cmp.m1, &priors, &ladder, &settings.mcmc, settings.mode)?;
    let e2 = estimate_log_marginal(cmp.data, &cmp.m2, &priors, &ladder, &settings.mcmc, settings.mode)?;
    let rate = priors.beta.rate;
    curves.push((format!("{}_m1_prior{rate}_r{r}", cmp.dataset), emit_curve(&e1)?));
    curves.push((format!("{}_m2_prior{rate}_r{r}", cmp.dataset), emit_curve(&e2)?));
    let (dic_m1, dic_m2) = if with_dic {
        (
            Some(dic6(cmp.data, &cmp.m1, &priors, &settings.mcmc)?.dic6),
            Some(dic6(cmp.data, &cmp.m2, &priors, &settings.mcmc)?.dic6),
        )
    } else {
        (None, None)
    };
    Ok(EvidenceRow {
        dataset: cmp.dataset.to_string(),
        dataset_seed: cmp.dataset_seed,
        prior_rate: rate,
        r,
        log_marginal_m1: e1.log_marginal,
        se_m1: e1.se,
        log_marginal_m2: e2.log_marginal,
        se_m2: e2.se,
        log_bf: e1.log_marginal - e2.log_marginal,
        log_bf_without_origin: e1.log_marginal_without_origin - e2.log_marginal_without_origin,
        dic_m1,
        dic_m2,
    })
}

fn ladder_sweep(scale: usize) -> Vec<usize> {
    let rs: Vec<usize> = [10, 20, 40, 100].into_iter().filter(|&r| r <= scale).collect();
    if rs.is_empty() {
        vec![scale.max(1)]
    } else {
        rs
    }
}

fn power_model(exponent: Exponent) -> ModelSpec {
    ModelSpec::exponential().with_mechanism(Mechanism::PowerY { exponent })
}

fn evidence_table(table: u8, settings: &StudySettings) -> Result<StudyOutput> {
    let seed = settings.seed;
    let cap = |r: usize| r.min(settings.scale.max(1));
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let gamma10 = ModelSpec::gamma(10.0);
    let inferred_power = power_model(Exponent::Inferred);
    match table {
        3 => {
            let (o, s) = find_outbreak(ModelSpec::exponential(), Params::new(1.0, 0.5), 30, 22, seed)?;
            let data = removal_data(&o, "sim_m1")?;
            let cmp = Comparison {
                dataset: "sim_m1",
                dataset_seed: Some(s),
                data: &data,
                m1: ModelSpec::exponential(),
                m2: gamma10,
            };
            for rate in [1.0, 0.01] {
                for r in ladder_sweep(settings.scale) {
                    rows.push(compare(&cmp, PriorSpec::exponential(rate), r, false, settings, &mut curves)?);
                }
            }
        }
        4 => {
            let (o1, s1) = find_outbreak(ModelSpec::exponential(), Params::new(2.0, 1.0), 50, 41, seed)?;
            let (o2, s2) = find_outbreak(ModelSpec::gamma(10.0), Params::new(2.0, 10.0), 30, 22, seed)?;
            let d1 = removal_data(&o1, "sim_m1")?;
            let d2 = removal_data(&o2, "sim_m2")?;
            for (name, s, d) in [("sim_m1", s1, &d1), ("sim_m2", s2, &d2)] {
                let cmp = Comparison {
                    dataset: name,
                    dataset_seed: Some(s),
                    data: d,
                    m1: ModelSpec::exponential(),
                    m2: gamma10,
                };
                for (rate, r) in [(1.0, 20), (0.1, 20), (0.01, 40)] {
                    rows.push(compare(&cmp, PriorSpec::exponential(rate), cap(r), true, settings, &mut curves)?);
                }
            }
        }
        5 => {
            let (o, s) = find_outbreak(power_model(Exponent::Fixed(0.3)), Params::new(2.0, 0.2), 100, 87, seed)?;
            let data = removal_data(&o, "sim_m2")?;
            let cmp = Comparison {
                dataset: "sim_m2",
                dataset_seed: Some(s),
                data: &data,
                m1: ModelSpec::exponential(),
                m2: inferred_power,
            };
            for rate in [1.0, 0.01] {
                for r in ladder_sweep(settings.scale) {
                    rows.push(compare(&cmp, PriorSpec::exponential(rate), r, false, settings, &mut curves)?);
                }
            }
        }
        6 => {
            let (o1, s1) = find_outbreak(ModelSpec::exponential(), Params::new(0.5, 0.2), 100, 83, seed)?;
            let (o2, s2) = find_outbreak(power_model(Exponent::Fixed(0.3)), Params::new(2.5, 0.2), 100, 88, seed)?;
            let d1 = removal_data(&o1, "sim_m1")?;
            let d2 = removal_data(&o2, "sim_m2")?;
            for (name, s, d) in [("sim_m1", s1, &d1), ("sim_m2", s2, &d2)] {
                let cmp = Comparison {
                    dataset: name,
                    dataset_seed: Some(s),
                    data: d,
                    m1: ModelSpec::exponential(),
                    m2: inferred_power,
                };
                for (rate, r) in [(1.0, 20), (0.1, 40), (0.01, 40)] {
                    rows.push(compare(&cmp, PriorSpec::exponential(rate), cap(r), true, settings, &mut curves)?);
                }
            }
        }
        7 => {
            let data: EpidemicData = abakaliki().into();
            let cmp = Comparison {
                dataset: "abakaliki",
                dataset_seed: None,
                data: &data,
                m1: ModelSpec::exponential(),
                m2: ModelSpec::exponential().with_mechanism(Mechanism::ExpDecay),
            };
            for rate in [1.0, 0.01] {
                rows.push(compare(&cmp, PriorSpec::exponential(rate), cap(20), true, settings, &mut curves)?);
            }
        }
        _ => unreachable!(),
    }
    let summary = rows
        .iter()
        .map(|r| {
            let dic = match (r.dic_m1, r.dic_m2) {
                (Some(a), Some(b)) => format!(" DIC m1={a:.2} m2={b:.2}"),
                _ => String::new(),
            };
            format!(
                "{} prior Exp({}) r={}: log m1={:.2} log m2={:.2} log BF={:.2}{dic}",
                r.dataset, r.prior_rate, r.r, r.log_marginal_m1, r.log_marginal_m2, r.log_bf
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(StudyOutput {
        table,
        csv: to_csv(&rows)?,
        summary,
        curves,
    })
}

/// Regenerates one table. See the module docs for the meaning of `scale`.
pub fn reproduce_table(table: u8, settings: &StudySettings) -> Result<StudyOutput> {
    if settings.scale == 0 {
        return Err(Error::InvalidConfig("scale must be at least 1".into()));
    }
    match table {
        1 | 2 => replicate_table(table, settings.scale, settings.seed),
        3..=7 => evidence_table(table, settings),
        _ => Err(Error::InvalidConfig(format!("no table {table}; expected 1 to 7"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotRow {
    pub replicate: usize,
    pub dataset_seed: u64,
    pub prior_rate: f64,
    pub complete_log_bf: f64,
    pub incomplete_log_bf: f64,
}

/// Complete-data against removal-only log Bayes factors of Exp against
/// Gamma(α) periods on repeated small `m₁` outbreaks (N = 50, β = 1.15,
/// γ = 1, five cases, α = 10).
pub fn boxplot_study(replicates: usize, r: usize, settings: &StudySettings) -> Result<Vec<BoxplotRow>> {
    use crate::analytic::log_bf_exp_vs_gamma;
    let alpha = 10.0;
    let ladder = build_ladder(r, DEFAULT_LADDER_POWER)?;
    let mut rows = Vec::new();
    let mut next_seed = settings.seed;
    for k in 0..replicates {
        let (o, s) = find_outbreak(ModelSpec::exponential(), Params::new(1.15, 1.0), 50, 5, next_seed)?;
        next_seed = s + 1;
        let data = removal_data(&o, "boxplot")?;
        for rate in [1.0, 0.01] {
            let priors = PriorSpec::exponential(rate);
            let complete = log_bf_exp_vs_gamma(&o, alpha, &priors.gamma, &priors.delta)?;
            let mcmc = McmcConfig {
                seed: s,
                ..settings.mcmc.clone()
            };
            let e1 = estimate_log_marginal(&data, &ModelSpec::exponential(), &priors, &ladder, &mcmc, settings.mode)?;
            let e2 = estimate_log_marginal(&data, &ModelSpec::gamma(alpha), &priors, &ladder, &mcmc, settings.mode)?;
            rows.push(BoxplotRow {
                replicate: k,
                dataset_seed: s,
                prior_rate: rate,
                complete_log_bf: complete,
                incomplete_log_bf: e1.log_marginal - e2.log_marginal,
            });
        }
    }
    Ok(rows)
}

pub fn boxplot_csv(rows: &[BoxplotRow]) -> Result<String> {
    to_csv(rows)
}
