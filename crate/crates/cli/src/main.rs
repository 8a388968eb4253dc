//! `psi`: command-line front-end for Pareto set identification experiments.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use psi_core::harness::{
    aggregate, expand_grid, read_jsonl, record_run, replicate_all, validate_records,
    write_aggregate_csv, write_jsonl, AlgorithmSpec, ExperimentConfig, GridAxis, InstanceSource,
    K1Choice,
};
use psi_core::model::{covboost_instance, write_instance};
use psi_core::pareto::sample_complexity_bound;
use psi_core::DEFAULT_ROUND_CAP;

#[derive(Parser)]
#[command(
    name = "psi",
    version,
    about = "Fixed-confidence Pareto set identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one seeded run and print its record as JSON.
    Run(RunArgs),
    /// Execute replications (optionally over a parameter grid) and summarise them.
    Bench(BenchArgs),
    /// Write an instance CSV.
    Gen(GenArgs),
    /// Print the high-probability sample complexity bound of an instance.
    Bound(BoundArgs),
    /// Re-check a results file against the true means.
    Validate { results: PathBuf },
    /// Print the embedded COV-BOOST instance as CSV.
    Dataset,
}

#[derive(Args, Clone)]
struct Common {
    /// Instance: CSV path, gen:bernoulli:K=..,D=.., gen:lowerbound:p=..,omega=..,D=..,
    /// builtin:covboost, means:r1;r2 or bernoulli-means:r1;r2
    #[arg(long)]
    instance: String,
    #[arg(long, default_value_t = 0.0)]
    eps1: f64,
    /// Cover tolerance; selects the cover stopping rule
    #[arg(long)]
    eps2: Option<f64>,
    /// Number of arms to identify; selects the k-relaxed stopping rule
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// `theoretical` for K(K-1)D/2, or a number
    #[arg(long, default_value = "1")]
    k1: String,
    /// Sub-gaussian constant; defaults to 1 (Gaussian) or 1/2 (Bernoulli)
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of pulls per run
    #[arg(long, default_value_t = DEFAULT_ROUND_CAP)]
    cap: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// ape, psi-unif-elim, lucb, ugapec or lucbpp
    #[arg(long, default_value = "ape")]
    algo: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated algorithms
    #[arg(long, default_value = "ape")]
    algo: String,
    #[arg(long, default_value_t = 100)]
    reps: u64,
    /// Parameter sweep `param=v1,v2,...`; repeat for a product grid
    #[arg(long)]
    grid: Vec<String>,
    /// Draw a new random instance for every replication
    #[arg(long)]
    fresh_instance_per_rep: bool,
    /// JSONL file receiving one record per run
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate CSV path; defaults to `<out>.summary.csv` when --out is set
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.0)]
    eps1: f64,
    /// Omit for the bound without the k-relaxation term
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn base_config(c: &Common, algorithms: Vec<AlgorithmSpec>) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        instance: c.instance.parse()?,
        algorithms,
        eps1: c.eps1,
        eps2: c.eps2,
        k: c.k,
        delta: c.delta,
        k1: c.k1.parse::<K1Choice>()?,
        sigma: c.sigma,
        reps: 1,
        seed: c.seed,
        round_cap: c.cap,
        fresh_instance_per_rep: false,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn run(args: RunArgs) -> Result<()> {
    let algo: AlgorithmSpec = args.algo.parse()?;
    let cfg = base_config(&args.common, vec![algo])?;
    cfg.validate()?;
    let instance = cfg.instance.materialize(cfg.seed)?;
    let seed = cfg.instance.is_random().then_some(cfg.seed);
    let rec = record_run(&cfg, algo, &instance, seed, cfg.seed)?;
    println!("{}", serde_json::to_string_pretty(&rec)?);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg = base_config(&args.common, AlgorithmSpec::parse_list(&args.algo)?)?;
    cfg.reps = args.reps;
    cfg.fresh_instance_per_rep = args.fresh_instance_per_rep;
    let axes = args
        .grid
        .iter()
        .map(|g| g.parse::<GridAxis>())
        .collect::<Result<Vec<_>, _>>()?;
    let configs = expand_grid(&cfg, &axes)?;
    for c in &configs {
        c.validate()?;
    }
    let records = replicate_all(&configs)?;
    let report = aggregate(&records);
    if let Some(out) = &args.out {
        write_jsonl(&records, create(out)?)?;
        let summary = args.summary.clone().unwrap_or_else(|| {
            let mut s = out.clone().into_os_string();
            s.push(".summary.csv");
            PathBuf::from(s)
        });
        write_aggregate_csv(&report, create(&summary)?)?;
    } else if let Some(summary) = &args.summary {
        write_aggregate_csv(&report, create(summary)?)?;
    }
    write_aggregate_csv(&report, io::stdout().lock())?;
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let source: InstanceSource = args.instance.parse()?;
    let instance = source.materialize(args.seed)?;
    match &args.out {
        Some(path) => write_instance(&instance, create(path)?)?,
        None => write_instance(&instance, io::stdout().lock())?,
    }
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    let source: InstanceSource = args.instance.parse()?;
    let instance = source.materialize(args.seed)?;
    let value =
        sample_complexity_bound(&instance.effective_means(), args.delta, args.eps1, args.k)?;
    println!("{value}");
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let records = read_jsonl(BufReader::new(file))?;
    let report = validate_records(&records)?;
    let mut out = io::stdout().lock();
    writeln!(out, "checked {} records", report.checked)?;
    for n in &report.instance_mismatches {
        writeln!(
            out,
            "record {}: regenerated instance differs from {}",
            n + 1,
            records[*n].instance_id
        )?;
    }
    for n in &report.disagreements {
        writeln!(
            out,
            "record {}: stored correctness flag disagrees with the true means",
            n + 1
        )?;
    }
    if !report.is_clean() {
        bail!(
            "{} disagreements, {} instance mismatches",
            report.disagreements.len(),
            report.instance_mismatches.len()
        );
    }
    writeln!(out, "all correctness flags agree")?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Bound(a) => bound(a),
        Command::Validate { results } => validate(&results),
        Command::Dataset => {
            write_instance(&covboost_instance(), io::stdout().lock())?;
            Ok(())
        }
    }
}
