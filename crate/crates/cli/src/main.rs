use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sirbf::analytic::{
    log_bf_exp_vs_gamma, log_bf_exp_vs_gamma_diffuse, log_bf_standard_vs_power, log_bf_standard_vs_power_concentrated,
    log_bf_standard_vs_power_diffuse, BfVariant, CompleteDataBf,
};
use sirbf::datasets::abakaliki;
use sirbf::dic::dic6_runs;
use sirbf::evidence::{build_ladder, estimate_log_marginal, log_bayes_factor, EvidenceMode};
use sirbf::io::{load_csv, output_path, save_json, save_trace, to_csv_string, Report};
use sirbf::likelihood::log_augmented_likelihood_parts;
use sirbf::mcmc::{EpidemicData, McmcConfig};
use sirbf::simulate::{simulate, Conditioning, SimConfig};
use sirbf::studies::{emit_curve, reproduce_table, StudySettings};
use sirbf::{InfectiousPeriod, ModelSpec, Outbreak, Params, PriorSpec};

#[derive(Parser)]
#[command(name = "sirbf", version, about = "Model choice for stochastic SIR epidemics")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = "SIRBF_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one outbreak and write it as CSV.
    Simulate(SimulateArgs),
    /// Log augmented likelihood of a complete outbreak.
    Loglik(LoglikArgs),
    /// Closed-form Bayes factor for a complete outbreak.
    BfComplete(BfCompleteArgs),
    /// Power-posterior estimate of the log marginal likelihood.
    Evidence(EvidenceArgs),
    /// DIC6 from two MCMC runs.
    Dic(DicArgs),
    /// Regenerate one of the study tables.
    Reproduce(ReproduceArgs),
    /// Print a bundled dataset as CSV.
    Dataset(DatasetArgs),
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    beta: f64,
    /// Removal rate for exponential periods.
    #[arg(long)]
    gamma: Option<f64>,
    /// Gamma shape, used with `--model gamma`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Gamma rate.
    #[arg(long)]
    delta: Option<f64>,
    /// Power exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Decay rate.
    #[arg(long)]
    b: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, model_text: &str) -> anyhow::Result<(ModelSpec, Params)> {
        let model = ModelSpec::parse_with(model_text, self.alpha, self.p)?;
        let rate = match model.period {
            InfectiousPeriod::Exponential => self.gamma.context("--gamma is required for exponential periods")?,
            InfectiousPeriod::Gamma { .. } => self.delta.context("--delta is required for gamma periods")?,
        };
        let mut params = Params::new(self.beta, rate);
        if let sirbf::Mechanism::PowerY { exponent } = model.mechanism {
            params.exponent = Some(match exponent {
                sirbf::Exponent::Fixed(p) => p,
                sirbf::Exponent::Inferred => self.p.context("--p is required for the power mechanism")?,
            });
        }
        if model.infers_decay() {
            params.decay = Some(self.b.context("--b is required for the decay mechanism")?);
        }
        params.check(&model)?;
        Ok((model, params))
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Model, e.g. `exp`, `gamma:10`, `exp+power:0.3`, `exp+decay`.
    #[arg(long)]
    model: String,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    pop: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resample until at least one secondary infection occurs.
    #[arg(long)]
    condition: bool,
    /// Write removal times only.
    #[arg(long)]
    removals_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Outbreak CSV.
    #[arg(long)]
    data: PathBuf,
    /// Population size, if the file has no `# population:` line.
    #[arg(long)]
    pop: Option<usize>,
}

impl DataArgs {
    fn load(&self) -> anyhow::Result<EpidemicData> {
        Ok(load_csv(&self.data, self.pop)?)
    }

    fn load_complete(&self) -> anyhow::Result<Outbreak> {
        match self.load()? {
            EpidemicData::Complete(o) => Ok(o),
            EpidemicData::Removals(_) => {
                Err(sirbf::Error::InvalidData("this command needs infection times for every case".into()).into())
            }
        }
    }
}

#[derive(Args)]
struct LoglikArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: String,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Comparison {
    ExpGamma,
    StandardPower,
}

#[derive(Args)]
struct BfCompleteArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    comparison: Comparison,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Priors as `exp:<rate>`, inline JSON or a JSON file.
    #[arg(long, conflicts_with_all = ["diffuse", "concentrated"])]
    priors: Option<String>,
    /// Diffuse-prior limit.
    #[arg(long)]
    diffuse: bool,
    /// Concentrated-prior limit (power comparison only).
    #[arg(long, conflicts_with = "diffuse")]
    concentrated: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    /// MCMC settings as a JSON file; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Infection-time moves per sweep.
    #[arg(long)]
    moves: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ChainArgs {
    fn config(&self) -> anyhow::Result<McmcConfig> {
        let mut c = match &self.config {
            Some(p) => McmcConfig::from_json(&read_text(p)?)?,
            None => McmcConfig::default(),
        };
        c.seed = self.seed;
        if let Some(v) = self.iters {
            c.iterations = v;
        }
        if let Some(v) = self.burnin {
            c.burn_in = v;
        }
        if let Some(v) = self.thin {
            c.thin = v;
        }
        if self.moves.is_some() {
            c.infection_moves = self.moves;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixes the power exponent of a bare `power` mechanism.
    #[arg(long)]
    p: Option<f64>,
    /// Priors as `exp:<rate>`, inline JSON or a JSON file.
    #[arg(long, default_value = "exp:1")]
    priors: String,
}

impl ModelArgs {
    fn resolve(&self) -> anyhow::Result<(ModelSpec, PriorSpec)> {
        Ok((
            ModelSpec::parse_with(&self.model, self.alpha, self.p)?,
            parse_priors(&self.priors)?,
        ))
    }
}

#[derive(Args)]
struct EvidenceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Second model; reports the log Bayes factor of `--model` against it.
    #[arg(long)]
    against: Option<String>,
    #[arg(long, default_value_t = 20)]
    r: usize,
    #[arg(long, default_value_t = 5.0)]
    c: f64,
    #[arg(long, default_value = "independent")]
    mode: String,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Expected log-likelihood curve as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct DicArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace of the posterior run as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    table: u8,
    /// Replicates per row (tables 1, 2) or largest ladder size (tables 3-7).
    #[arg(long)]
    scale: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    Abakaliki,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(value_enum)]
    name: Dataset,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|source| {
        sirbf::Error::File {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn parse_priors(text: &str) -> anyhow::Result<PriorSpec> {
    let text = text.trim();
    if let Some(rate) = text.strip_prefix("exp:") {
        let rate: f64 = rate
            .parse()
            .map_err(|_| sirbf::Error::InvalidPrior(format!("bad rate in `{text}`")))?;
        let p = PriorSpec::exponential(rate);
        p.validate()?;
        return Ok(p);
    }
    if text.starts_with('{') {
        return Ok(PriorSpec::from_json(text)?);
    }
    Ok(PriorSpec::from_json(&read_text(Path::new(text))?)?)
}

struct Ctx {
    output_dir: Option<PathBuf>,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        output_path(self.output_dir.as_deref(), p)
    }

    fn emit_json<T: serde::Serialize>(&self, out: Option<&Path>, value: &T) -> anyhow::Result<()> {
        match out {
            Some(p) => save_json(self.path(p), value)?,
            None => stdout(&(serde_json::to_string_pretty(value)? + "\n"))?,
        }
        Ok(())
    }

    fn emit_text(&self, out: Option<&Path>, text: &str) -> anyhow::Result<()> {
        match out {
            Some(p) => write_text(&self.path(p), text)?,
            None => stdout(text)?,
        }
        Ok(())
    }
}

/// Writes to stdout, treating a closed pipe (`| head`) as success.
fn stdout(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_simulate(ctx: &Ctx, a: &SimulateArgs) -> anyhow::Result<()> {
    let (model, params) = a.params.resolve(&a.model)?;
    let cfg = SimConfig {
        model,
        params,
        population: a.pop,
        seed: a.seed,
        condition: if a.condition {
            Conditioning::AtLeastOneSecondary
        } else {
            Conditioning::None
        },
    };
    let o = simulate(&cfg)?;
    let data = if a.removals_only {
        EpidemicData::Removals(o.removals())
    } else {
        EpidemicData::Complete(o)
    };
    ctx.emit_text(a.out.as_deref(), &to_csv_string(&data))
}

fn run_loglik(a: &LoglikArgs) -> anyhow::Result<()> {
    let o = a.data.load_complete()?;
    let (model, params) = a.params.resolve(&a.model)?;
    let ll = log_augmented_likelihood_parts(&o, &model, &params)?;
    let value = json!({ "model": model.to_string(), "params": params, "log_likelihood": ll });
    stdout(&(serde_json::to_string_pretty(&value)? + "\n"))
}

fn run_bf_complete(ctx: &Ctx, a: &BfCompleteArgs) -> anyhow::Result<()> {
    let o = a.data.load_complete()?;
    let priors = a.priors.as_deref().map(parse_priors).transpose()?;
    let result = match a.comparison {
        Comparison::ExpGamma => {
            let alpha = a.alpha.context("--alpha is required for exp-gamma")?;
            if a.concentrated {
                bail!(sirbf::Error::InvalidConfig("--concentrated applies to standard-power only".into()));
            }
            match priors {
                Some(p) if !a.diffuse => CompleteDataBf {
                    log_bf: log_bf_exp_vs_gamma(&o, alpha, &p.gamma, &p.delta)?,
                    variant: BfVariant::ExpVsGammaFull,
                },
                _ => CompleteDataBf {
                    log_bf: log_bf_exp_vs_gamma_diffuse(&o, alpha)?,
                    variant: BfVariant::ExpVsGammaDiffuseLimit,
                },
            }
        }
        Comparison::StandardPower => {
            let p = a.p.context("--p is required for standard-power")?;
            if a.concentrated {
                CompleteDataBf {
                    log_bf: log_bf_standard_vs_power_concentrated(&o, p)?,
                    variant: BfVariant::StandardVsPowerConcentratedLimit,
                }
            } else {
                match priors {
                    Some(pr) if !a.diffuse => CompleteDataBf {
                        log_bf: log_bf_standard_vs_power(&o, p, &pr.beta)?,
                        variant: BfVariant::StandardVsPowerFull,
                    },
                    _ => CompleteDataBf {
                        log_bf: log_bf_standard_vs_power_diffuse(&o, p)?,
                        variant: BfVariant::StandardVsPowerDiffuseLimit,
                    },
                }
            }
        }
    };
    let report = Report::new(
        "bf-complete",
        None,
        json!({ "data": a.data.data, "alpha": a.alpha, "p": a.p, "priors": priors }),
        result,
    );
    ctx.emit_json(a.out.as_deref(), &report)
}

fn run_evidence(ctx: &Ctx, a: &EvidenceArgs) -> anyhow::Result<()> {
    let data = a.data.load()?;
    let (model, priors) = a.model.resolve()?;
    let ladder = build_ladder(a.r, a.c)?;
    let config = a.chain.config()?;
    let mode: EvidenceMode = a.mode.parse()?;
    let settings = json!({
        "data": a.data.data,
        "model": model.to_string(),
        "against": a.against,
        "priors": priors,
        "r": a.r,
        "c": a.c,
        "mode": mode,
        "mcmc": config,
    });
    match &a.against {
        None => {
            let est = estimate_log_marginal(&data, &model, &priors, &ladder, &config, mode)?;
            if let Some(p) = &a.curve {
                write_text(&ctx.path(p), &emit_curve(&est)?)?;
            }
            eprintln!("log marginal likelihood {:.3} (se {:.3})", est.log_marginal, est.se);
            if !est.monotone {
                eprintln!("warning: expected log-likelihood curve is not monotone; consider longer chains");
            }
            ctx.emit_json(a.out.as_deref(), &Report::new("evidence", Some(config.seed), settings, est))
        }
        Some(other) => {
            let second = ModelSpec::parse_with(other, a.model.alpha, a.model.p)?;
            let bf = log_bayes_factor(&data, (&model, &priors), (&second, &priors), &ladder, &config, mode)?;
            if let Some(p) = &a.curve {
                write_text(&ctx.path(p), &emit_curve(&bf.first)?)?;
                let stem = p.with_extension("");
                write_text(&ctx.path(&PathBuf::from(format!("{}_against.csv", stem.display()))), &emit_curve(&bf.second)?)?;
            }
            eprintln!("log Bayes factor {:.3} (se {:.3})", bf.log_bf, bf.se);
            ctx.emit_json(a.out.as_deref(), &Report::new("bayes-factor", Some(config.seed), settings, bf))
        }
    }
}

fn run_dic(ctx: &Ctx, a: &DicArgs) -> anyhow::Result<()> {
    let data = a.data.load()?;
    let (model, priors) = a.model.resolve()?;
    let config = a.chain.config()?;
    let (result, first, _) = dic6_runs(&data, &model, &priors, &config)?;
    if let Some(p) = &a.trace {
        save_trace(ctx.path(p), &first)?;
    }
    eprintln!("DIC6 {:.3}", result.dic6);
    let settings = json!({ "data": a.data.data, "model": model.to_string(), "priors": priors, "mcmc": config });
    ctx.emit_json(a.out.as_deref(), &Report::new("dic", Some(config.seed), settings, result))
}

fn run_reproduce(ctx: &Ctx, a: &ReproduceArgs) -> anyhow::Result<()> {
    let mut settings = StudySettings::new(a.scale, a.seed);
    if let Some(v) = a.iters {
        settings.mcmc.iterations = v;
    }
    if let Some(v) = a.burnin {
        settings.mcmc.burn_in = v;
    }
    if let Some(v) = a.thin {
        settings.mcmc.thin = v;
    }
    settings.mcmc.validate()?;
    let out = reproduce_table(a.table, &settings)?;
    let dir = ctx.path(&a.out);
    write_text(&dir.join(format!("table{}.csv", a.table)), &out.csv)?;
    for (name, csv) in &out.curves {
        write_text(&dir.join("curves").join(format!("{name}.csv")), csv)?;
    }
    save_json(
        dir.join(format!("table{}.json", a.table)),
        &Report::new("reproduce", Some(a.seed), serde_json::to_value(&settings)?, &out),
    )?;
    stdout(&(out.summary + "\n"))
}

fn run_dataset(ctx: &Ctx, a: &DatasetArgs) -> anyhow::Result<()> {
    let data = match a.name {
        Dataset::Abakaliki => EpidemicData::Removals(abakaliki()),
    };
    ctx.emit_text(a.out.as_deref(), &to_csv_string(&data))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            bail!(sirbf::Error::InvalidConfig("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let ctx = Ctx {
        output_dir: cli.output_dir,
    };
    match &cli.command {
        Command::Simulate(a) => run_simulate(&ctx, a),
        Command::Loglik(a) => run_loglik(a),
        Command::BfComplete(a) => run_bf_complete(&ctx, a),
        Command::Evidence(a) => run_evidence(&ctx, a),
        Command::Dic(a) => run_dic(&ctx, a),
        Command::Reproduce(a) => run_reproduce(&ctx, a),
        Command::Dataset(a) => run_dataset(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // skip causes whose text the outer message already repeats
            let mut message = e.to_string();
            for cause in e.chain().skip(1) {
                let text = cause.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
            }
            eprintln!("error: {message}");
            let validation = e
                .chain()
                .find_map(|c| c.downcast_ref::<sirbf::Error>())
                .is_some_and(sirbf::Error::is_validation);
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}
