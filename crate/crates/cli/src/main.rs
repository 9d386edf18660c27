use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rydcg_cli::bench::{self, BenchMethod, BenchOptions, Embedding, BENCH_PULSE_AREA};
use rydcg_cli::generate::{self, CorpusSpec, GraphClass, Manifest, CHI_MAX_ORDER, MANIFEST_FILE};
use rydcg_cli::oracle::oracle;
use rydcg_cli::solve::{self, Method, Reduce, SolveOptions};
use rydcg_core::colgen::WarmStart;
use rydcg_core::oracle::brute_chromatic;
use rydcg_core::pricing::device_layout;
use rydcg_core::{Backend, Error, Graph, OutputMode, PricerConfig, Redesign, Result, SpamParams};

#[derive(Parser)]
#[command(
    name = "rydcg",
    version,
    about = "Graph coloring by column generation with classical or emulated Rydberg-atom pricing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded instance corpus and its manifest.
    Generate(GenerateArgs),
    /// Color one graph file.
    Solve(SolveArgs),
    /// Run methods over a generated corpus and aggregate per cell.
    Bench(BenchArgs),
    /// Brute-force chromatic number, MIS and LP bound of one graph file.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    None,
    Spam,
}

#[derive(Clone, Copy, ValueEnum)]
enum Warm {
    Singletons,
    Quantum,
}

impl From<Warm> for WarmStart {
    fn from(w: Warm) -> Self {
        match w {
            Warm::Singletons => WarmStart::Singletons,
            Warm::Quantum => WarmStart::Quantum,
        }
    }
}

#[derive(Args)]
struct PricerArgs {
    /// Redesign of the register and pulse between pricing rounds.
    #[arg(long, default_value = "ar-hdr")]
    redesign: Redesign,
    #[arg(long, value_enum, default_value = "none")]
    noise: Noise,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Sweep duration in microseconds.
    #[arg(long = "pulse-T-us", default_value_t = 4.0)]
    pulse_t_us: f64,
    /// Fixed integration step in microseconds; adaptive when omitted.
    #[arg(long)]
    dt: Option<f64>,
    /// Lengthen sweeps so that Omega_max * T reaches this many radians.
    #[arg(long)]
    min_pulse_area: Option<f64>,
    /// Sampler output mode 1-4.
    #[arg(long, default_value_t = 3)]
    output_mode: u8,
    #[arg(long, default_value_t = 1.0)]
    w_min: f64,
    /// Attempts for the greedy and sa pricers.
    #[arg(long, default_value_t = 1000)]
    tries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PricerArgs {
    fn config(&self, backend: Backend) -> Result<PricerConfig> {
        Ok(PricerConfig {
            backend,
            tries: self.tries,
            w_min: self.w_min,
            output_mode: OutputMode::try_from(self.output_mode)?,
            redesign: self.redesign,
            shots: self.shots,
            duration_us: self.pulse_t_us,
            min_pulse_area: self.min_pulse_area,
            dt: self.dt,
            noise: match self.noise {
                Noise::None => None,
                Noise::Spam => Some(SpamParams::default()),
            },
            seed: self.seed,
            ..PricerConfig::default()
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Instances per (class, order, density) cell.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ud,nonud")]
    classes: Vec<GraphClass>,
    /// Comma list or inclusive range such as 4-10.
    #[arg(long, default_value = "4-10")]
    orders: String,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    densities: Vec<f64>,
}

#[derive(Args)]
struct SolveArgs {
    /// Graph file (JSON, 1-based edges).
    graph: PathBuf,
    #[arg(long, default_value = "colgen")]
    method: Method,
    #[arg(long, default_value = "exact")]
    pricer: Backend,
    #[command(flatten)]
    pricing: PricerArgs,
    #[arg(long, value_enum, default_value = "singletons")]
    warm_start: Warm,
    #[arg(long, default_value_t = 3)]
    stagnation_limit: usize,
    #[arg(long, default_value = "none")]
    reduce: Reduce,
    /// Known chromatic number, or `auto` to compute it, for the gap.
    #[arg(long)]
    chi: Option<String>,
    /// Include the per-iteration trace in the report.
    #[arg(long)]
    trace: bool,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Include wall time, which makes reruns differ.
    #[arg(long)]
    timing: bool,
    /// Write the base atom register (quantum pricer) as JSON.
    #[arg(long)]
    dump_register: Option<PathBuf>,
    /// Report file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    corpus: PathBuf,
    /// Directory for records.csv, summary.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "cg-exact,cg-quantum,greedy-exact,greedy-quantum"
    )]
    methods: Vec<BenchMethod>,
    /// Runs per instance and method.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[command(flatten)]
    pricing: PricerArgs,
    #[arg(long, value_enum, default_value = "singletons")]
    warm_start: Warm,
    /// `spring` lays every graph out; `disk` places unit-disk instances at
    /// their generating points.
    #[arg(long, default_value = "spring")]
    embedding: Embedding,
    #[arg(long, default_value_t = 12)]
    max_quantum_order: usize,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

#[derive(Serialize)]
struct GenerateReport<'a> {
    manifest: String,
    instances: usize,
    classes: &'a [GraphClass],
    orders: &'a [usize],
    densities: &'a [f64],
}

#[derive(Serialize)]
struct BenchReport {
    records: usize,
    cells: usize,
    failures: usize,
    skipped: usize,
    out: String,
}

fn parse_orders(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad order list {s:?}"));
    if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let spec = CorpusSpec {
        classes: args.classes,
        orders: parse_orders(&args.orders)?,
        densities: args.densities,
        count: args.count,
        seed: args.seed,
    };
    let manifest = generate::generate(&spec, &args.out)?;
    emit(
        None,
        &json(&GenerateReport {
            manifest: args.out.join(MANIFEST_FILE).display().to_string(),
            instances: manifest.instances.len(),
            classes: &spec.classes,
            orders: &spec.orders,
            densities: &spec.densities,
        }),
    )
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let g = Graph::read_file(&args.graph)?;
    let pricer = args.pricing.config(args.pricer)?;
    let chi = match args.chi.as_deref() {
        None => None,
        Some("auto") => {
            let (target, _) = solve::reduced_graph(&g, args.reduce);
            if target.n() > CHI_MAX_ORDER {
                return Err(Error::TooLarge {
                    what: "graph for --chi auto",
                    n: target.n(),
                    limit: CHI_MAX_ORDER,
                });
            }
            Some(brute_chromatic(&target)?.0)
        }
        Some(v) => Some(v.parse().map_err(|_| {
            Error::InvalidArgument(format!("--chi expects a count or auto, got {v:?}"))
        })?),
    };
    if let Some(path) = &args.dump_register {
        let (target, _) = solve::reduced_graph(&g, args.reduce);
        fs::write(path, device_layout(&target, &pricer)?.to_json())?;
    }
    let opts = SolveOptions {
        method: args.method,
        pricer,
        warm_start: args.warm_start.into(),
        stagnation_limit: args.stagnation_limit,
        chi,
        reduce: args.reduce,
        trace: args.trace || args.trace_csv.is_some(),
        timing: args.timing,
    };
    let mut report = solve::solve(&g, &opts)?;
    if let Some(path) = &args.trace_csv {
        if let Some(t) = &report.trace {
            fs::write(path, solve::trace_csv(t))?;
        }
        if !args.trace {
            report.trace = None;
        }
    }
    emit(args.out.as_deref(), &report.to_json())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let manifest = Manifest::read(args.corpus.join(MANIFEST_FILE))?;
    let mut pricer = args.pricing.config(Backend::Exact)?;
    pricer.min_pulse_area = Some(args.pricing.min_pulse_area.unwrap_or(BENCH_PULSE_AREA));
    let opts = BenchOptions {
        methods: args.methods,
        seeds: args.seeds,
        pricer,
        warm_start: args.warm_start.into(),
        embedding: args.embedding,
        max_quantum_order: args.max_quantum_order,
    };
    let records = bench::run_bench(&manifest, &args.corpus, &opts)?;
    let cells = bench::summarize(&records);
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("records.csv"), bench::records_csv(&records))?;
    fs::write(args.out.join("summary.csv"), bench::summary_csv(&cells))?;
    fs::write(args.out.join("summary.json"), json(&cells))?;
    let failed: Vec<_> = records.iter().filter(|r| !r.ok()).collect();
    fs::write(args.out.join("failures.json"), json(&failed))?;
    let skipped = failed
        .iter()
        .filter(|r| r.error.as_deref().is_some_and(|e| e.starts_with("skipped")))
        .count();
    emit(
        None,
        &json(&BenchReport {
            records: records.len(),
            cells: cells.len(),
            failures: failed.len() - skipped,
            skipped,
            out: args.out.display().to_string(),
        }),
    )
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let g = Graph::read_file(&args.graph)?;
    emit(args.out.as_deref(), &oracle(&g)?.to_json())
}

fn fail(kind: &str, message: String, code: u8) -> ExitCode {
    eprint!(
        "{}",
        json(&ErrorReport {
            error: kind,
            message
        })
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_owned(), 2),
    };
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string(), 1),
    }
}
