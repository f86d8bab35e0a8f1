use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use cmlecon::exchange::{run_exchange, ExchangeRule};
use cmlecon::io::{self, FitReport, OutputDir, StatsReport};
use cmlecon::lattice::ModelParams;
use cmlecon::stats::{self, Histogram, WealthSample};
use cmlecon::sweep::{self, Analysis, AnalysisConfig, ProtocolConfig};
use cmlecon::uniform_map::{self, DEFAULT_KEPT, DEFAULT_TRANSIENT};
use cmlecon::Error;
use serde::Serialize;

use crate::args::{
    BifurcateArgs, Cli, Command, ExchangeArgs, ExchangeModel, ProtocolArgs, SimulateArgs, SweepArgs,
};
use crate::config::{pick, range, require, FileConfig};
use crate::UsageError;

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_EXCHANGE_N: usize = 10_000;
pub const DEFAULT_TRANSACTIONS: u64 = 10_000_000;

pub fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let started = Instant::now();
    let ctx = RunContext { argv, started };
    match cli.command {
        Command::Simulate(a) => simulate(a, &file, ctx),
        Command::Sweep(a) => sweep_cmd(a, &file, ctx),
        Command::Bifurcate(a) => bifurcate(a, &file, ctx),
        Command::Exchange(a) => exchange(a, &file, ctx),
    }
}

struct RunContext {
    argv: Vec<String>,
    started: Instant,
}

impl RunContext {
    fn finish<C: Serialize>(self, out: OutputDir, config: &C, seed: u64) -> anyhow::Result<()> {
        let dir = out.path().to_path_buf();
        let config = serde_json::to_value(config)?;
        out.finish(
            self.argv,
            config,
            seed,
            self.started.elapsed().as_secs_f64(),
        )
        .with_context(|| format!("writing manifest in {}", dir.display()))?;
        Ok(())
    }
}

/// Domain errors raised while validating inputs become usage errors.
fn usage(e: Error) -> anyhow::Error {
    match e {
        Error::Io(_) | Error::Json(_) => e.into(),
        other => UsageError(other.to_string()).into(),
    }
}

fn protocol_config(p: ProtocolArgs, file: &FileConfig) -> anyhow::Result<ProtocolConfig> {
    let d = ProtocolConfig::default();
    let cfg = ProtocolConfig {
        n: pick(p.n, file.n, d.n),
        init_lo: pick(p.init_lo, file.init_lo, d.init_lo),
        init_hi: pick(p.init_hi, file.init_hi, d.init_hi),
        transient: pick(p.transient, file.transient, d.transient),
        measure_iters: pick(p.measure_iters, file.measure_iters, d.measure_iters),
        realizations: pick(p.realizations, file.realizations, d.realizations),
        base_seed: pick(p.seed, file.seed, d.base_seed),
        snapshot_only: p.snapshot_only || file.snapshot_only.unwrap_or(d.snapshot_only),
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn bins(flag: Option<usize>, file: &FileConfig) -> anyhow::Result<usize> {
    let b = pick(flag, file.bins, DEFAULT_BINS);
    if b == 0 {
        return Err(UsageError("--bins must be at least 1".into()).into());
    }
    Ok(b)
}

/// Writes the sample, both histograms, `fit.json` and `stats.json`.
fn write_distribution(
    out: &mut OutputDir,
    sample: &WealthSample,
    analysis: &Analysis,
    scalars: (f64, f64, Option<f64>),
    bins: usize,
) -> anyhow::Result<()> {
    out.write("sample.csv", io::sample_csv(sample).as_bytes())?;
    let linear = Histogram::auto_linear(sample, bins)?;
    out.write("hist_linear.csv", io::histogram_csv(&linear).as_bytes())?;
    let log = match Histogram::auto_log(sample, bins) {
        Ok(h) => io::histogram_csv(&h),
        Err(_) => "bin_lo,bin_hi,count\n".to_string(),
    };
    out.write("hist_log.csv", log.as_bytes())?;
    out.write_json(
        "fit.json",
        &FitReport::new(analysis.label(), analysis.primary_fit()),
    )?;
    let (mean, std, gini) = scalars;
    out.write_json(
        "stats.json",
        &StatsReport {
            label: analysis.label(),
            mean,
            std,
            gini,
            h: analysis.exponential.as_ref().and_then(|f| f.h),
            n_pooled: sample.len(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SimulateConfig {
    a: f64,
    r: f64,
    protocol: ProtocolConfig,
    analysis: AnalysisConfig,
    bins: usize,
    out_dir: PathBuf,
}

fn simulate(args: SimulateArgs, file: &FileConfig, ctx: RunContext) -> anyhow::Result<()> {
    let cfg = SimulateConfig {
        a: pick(args.a, file.a, 0.0),
        r: require(args.r, file.r, "r")?,
        protocol: protocol_config(args.protocol, file)?,
        analysis: AnalysisConfig::default(),
        bins: bins(args.bins, file)?,
        out_dir: file.out_dir(args.out_dir),
    };
    let params = ModelParams::homogeneous(cfg.r, cfg.a).map_err(usage)?;
    let result = sweep::run_protocol(&params, &cfg.protocol)?;
    let analysis = sweep::analyze(&result.sample, &cfg.analysis);
    let mut out = OutputDir::create(&cfg.out_dir)?;
    let s = result.scalars;
    write_distribution(
        &mut out,
        &result.sample,
        &analysis,
        (s.mean, s.std, s.gini),
        cfg.bins,
    )?;
    ctx.finish(out, &cfg, cfg.protocol.base_seed)
}

#[derive(Serialize)]
struct SweepConfig {
    a_values: Vec<f64>,
    r_values: Vec<f64>,
    protocol: ProtocolConfig,
    analysis: AnalysisConfig,
    out_dir: PathBuf,
}

fn sweep_cmd(args: SweepArgs, file: &FileConfig, ctx: RunContext) -> anyhow::Result<()> {
    let a_range = range(args.a_range, file.a_range.as_deref(), "a-range")?;
    let r_range = range(args.r_range, file.r_range.as_deref(), "r-range")?;
    let cfg = SweepConfig {
        a_values: a_range.values().to_vec(),
        r_values: r_range.values().to_vec(),
        protocol: protocol_config(args.protocol, file)?,
        analysis: AnalysisConfig::default(),
        out_dir: file.out_dir(args.out_dir),
    };
    let diagram = sweep::sweep_grid(&a_range, &r_range, &cfg.protocol, &cfg.analysis);
    for c in diagram.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "warning: cell a={} r={}: {}",
            c.a,
            c.r,
            c.error.as_deref().unwrap_or("")
        );
    }
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.write("phase.csv", io::phase_csv(&diagram).as_bytes())?;
    ctx.finish(out, &cfg, cfg.protocol.base_seed)
}

#[derive(Serialize)]
struct BifurcateConfig {
    a: f64,
    r_values: Vec<f64>,
    transient: usize,
    kept: usize,
    x_init: Option<f64>,
    out_dir: PathBuf,
}

fn bifurcate(args: BifurcateArgs, file: &FileConfig, ctx: RunContext) -> anyhow::Result<()> {
    let r_range = range(args.r_range, file.r_range.as_deref(), "r-range")?;
    let transient = match args.transient.or(file.transient) {
        Some(t) => usize::try_from(t).map_err(|_| UsageError("--transient too large".into()))?,
        None => DEFAULT_TRANSIENT,
    };
    let cfg = BifurcateConfig {
        a: pick(args.a, file.a, 0.0),
        r_values: r_range.values().to_vec(),
        transient,
        kept: pick(args.kept, file.kept, DEFAULT_KEPT),
        x_init: args.x_init.or(file.x_init),
        out_dir: file.out_dir(args.out_dir),
    };
    if cfg.kept == 0 {
        return Err(UsageError("--kept must be at least 1".into()).into());
    }
    let orbits =
        uniform_map::bifurcation_scan(&r_range, cfg.a, cfg.transient, cfg.kept, cfg.x_init)
            .map_err(usage)?;
    let mut out = OutputDir::create(&cfg.out_dir)?;
    out.write("bifurcation.csv", io::bifurcation_csv(&orbits).as_bytes())?;
    ctx.finish(out, &cfg, 0)
}

#[derive(Serialize)]
struct ExchangeConfig {
    model: ExchangeModel,
    omega: Option<f64>,
    n: usize,
    transactions: u64,
    seed: u64,
    analysis: AnalysisConfig,
    bins: usize,
    out_dir: PathBuf,
}

fn exchange(args: ExchangeArgs, file: &FileConfig, ctx: RunContext) -> anyhow::Result<()> {
    let model = require(args.model, file.model, "model")?;
    let omega = args.omega.or(file.omega);
    let cfg = ExchangeConfig {
        model,
        omega: if model == ExchangeModel::Angle {
            omega
        } else {
            None
        },
        n: pick(args.n, file.n, DEFAULT_EXCHANGE_N),
        transactions: pick(args.transactions, file.transactions, DEFAULT_TRANSACTIONS),
        seed: pick(args.seed, file.seed, 0),
        analysis: AnalysisConfig::default(),
        bins: bins(args.bins, file)?,
        out_dir: file.out_dir(args.out_dir),
    };
    let rule = match model {
        ExchangeModel::Dy => ExchangeRule::Dy,
        ExchangeModel::Angle => {
            let w = omega
                .ok_or_else(|| UsageError("--omega is required for the angle model".into()))?;
            ExchangeRule::angle(w).map_err(usage)?
        }
        ExchangeModel::AngleHet => {
            if omega.is_some() {
                return Err(UsageError("--omega applies only to the angle model".into()).into());
            }
            ExchangeRule::angle_heterogeneous_random(cfg.n, cfg.seed).map_err(usage)?
        }
    };
    let sample = run_exchange(cfg.n, &rule, cfg.transactions, cfg.seed).map_err(usage)?;
    let analysis = sweep::analyze(&sample, &cfg.analysis);
    let (mean, std) = stats::mean_std(&sample);
    let gini = stats::gini(&sample).ok();
    let mut out = OutputDir::create(&cfg.out_dir)?;
    write_distribution(&mut out, &sample, &analysis, (mean, std, gini), cfg.bins)?;
    ctx.finish(out, &cfg, cfg.seed)
}
