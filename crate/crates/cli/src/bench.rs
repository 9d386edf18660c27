//! Benchmark runner over a generated corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use rydcg_core::colgen::{self, RunConfig, WarmStart};
use rydcg_core::embedding::scale_labeled;
use rydcg_core::rng::derive_seed;
use rydcg_core::{
    greedy_color, greedy_color_with, Backend, Error, Graph, Pricer, PricerConfig, Result,
};

use crate::generate::{GraphClass, InstanceEntry, Manifest};

/// A coloring algorithm together with its pricing backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "String")]
pub enum BenchMethod {
    Colgen(Backend),
    Greedy(Backend),
}

impl BenchMethod {
    pub fn backend(self) -> Backend {
        match self {
            BenchMethod::Colgen(b) | BenchMethod::Greedy(b) => b,
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchMethod::Colgen(b) => write!(f, "cg-{b}"),
            BenchMethod::Greedy(b) => write!(f, "greedy-{b}"),
        }
    }
}

impl From<BenchMethod> for String {
    fn from(m: BenchMethod) -> String {
        m.to_string()
    }
}

impl FromStr for BenchMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown bench method {s:?}"));
        let (kind, backend) = s.split_once('-').ok_or_else(bad)?;
        let backend: Backend = backend.parse()?;
        match kind {
            "cg" => Ok(BenchMethod::Colgen(backend)),
            "greedy" if matches!(backend, Backend::Exact | Backend::Quantum) => {
                Ok(BenchMethod::Greedy(backend))
            }
            _ => Err(bad()),
        }
    }
}

/// How quantum registers are laid out for unit-disk instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// Force-directed layout for every instance.
    Spring,
    /// The generating disk coordinates where the manifest has them.
    Disk,
}

impl FromStr for Embedding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spring" => Ok(Embedding::Spring),
            "disk" => Ok(Embedding::Disk),
            _ => Err(Error::InvalidArgument(format!("unknown embedding {s:?}"))),
        }
    }
}

/// Pulse-area floor applied to benchmark sweeps, in radians.
pub const BENCH_PULSE_AREA: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub methods: Vec<BenchMethod>,
    /// Runs per instance and method, each with its own seed.
    pub seeds: usize,
    /// Template for every pricer; backend and seed are overwritten.
    pub pricer: PricerConfig,
    pub warm_start: WarmStart,
    pub embedding: Embedding,
    /// Quantum methods skip larger instances.
    pub max_quantum_order: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            methods: vec![
                BenchMethod::Colgen(Backend::Exact),
                BenchMethod::Colgen(Backend::Quantum),
                BenchMethod::Greedy(Backend::Exact),
                BenchMethod::Greedy(Backend::Quantum),
            ],
            seeds: 1,
            pricer: PricerConfig {
                min_pulse_area: Some(BENCH_PULSE_AREA),
                ..PricerConfig::default()
            },
            warm_start: WarmStart::Singletons,
            embedding: Embedding::Spring,
            max_quantum_order: 12,
        }
    }
}

/// Outcome of one (instance, method, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub class: GraphClass,
    pub n: usize,
    pub density: f64,
    pub method: BenchMethod,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Mean and 95% normal confidence half-width `1.96 s / sqrt(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci: f64,
}

pub fn estimate(xs: &[f64]) -> Option<Estimate> {
    if xs.is_empty() {
        return None;
    }
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let ci = if xs.len() < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        1.96 * var.sqrt() / k.sqrt()
    };
    Some(Estimate { mean, ci })
}

/// Aggregate over one (class, order, density, method) cell. Failed runs
/// are counted but excluded from the estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub class: GraphClass,
    pub n: usize,
    pub density: f64,
    pub method: BenchMethod,
    pub runs: usize,
    pub failures: usize,
    pub iterations: Option<Estimate>,
    pub gap: Option<Estimate>,
    pub colors: Option<Estimate>,
}

fn instance_pricer(
    entry: &InstanceEntry,
    g: &Graph,
    config: PricerConfig,
    embedding: Embedding,
) -> Result<Pricer> {
    match (&entry.positions, embedding, config.backend) {
        (Some(points), Embedding::Disk, Backend::Quantum) => {
            let labels: Vec<usize> = (0..g.n()).collect();
            let reg = scale_labeled(points, labels, &config.device)?;
            Pricer::with_register(g, config, reg)
        }
        _ => Pricer::new(g, config),
    }
}

fn run_one(
    entry: &InstanceEntry,
    g: &Graph,
    method: BenchMethod,
    seed: u64,
    opts: &BenchOptions,
) -> RunRecord {
    let mut record = RunRecord {
        instance: entry.id.clone(),
        class: entry.class,
        n: entry.n,
        density: entry.density,
        method,
        seed,
        colors: None,
        iterations: None,
        gap: None,
        error: None,
    };
    if method.backend() == Backend::Quantum && g.n() > opts.max_quantum_order {
        record.error = Some(format!(
            "skipped: order {} above the quantum limit {}",
            g.n(),
            opts.max_quantum_order
        ));
        return record;
    }
    let pricer = PricerConfig {
        backend: method.backend(),
        seed,
        ..opts.pricer.clone()
    };
    let outcome = match method {
        BenchMethod::Colgen(_) => {
            let config = RunConfig {
                warm_start: opts.warm_start,
                chi: entry.chi,
                ..RunConfig::with_pricer(pricer.clone())
            };
            instance_pricer(entry, g, pricer, opts.embedding)
                .and_then(|p| colgen::run_with(g, &config, p))
                .map(|t| (t.colors, t.pricing_iterations))
        }
        BenchMethod::Greedy(Backend::Quantum) => instance_pricer(entry, g, pricer, opts.embedding)
            .and_then(|p| greedy_color_with(g, &p))
            .map(|c| (c.colors, c.iterations)),
        BenchMethod::Greedy(_) => greedy_color(g, &pricer).map(|c| (c.colors, c.iterations)),
    };
    match outcome {
        Ok((colors, iterations)) => {
            record.colors = Some(colors);
            record.iterations = Some(iterations);
            record.gap = entry.chi.map(|chi| colgen::gap_percent(colors, chi));
        }
        Err(e) => record.error = Some(format!("{}: {e}", e.kind())),
    }
    record
}

/// Runs every method on every instance of the manifest. Results come back
/// in manifest order whatever the thread count.
pub fn run_bench(manifest: &Manifest, dir: &Path, opts: &BenchOptions) -> Result<Vec<RunRecord>> {
    let graphs = manifest
        .instances
        .iter()
        .map(|e| Graph::read_file(dir.join(&e.file)))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (i, entry) in manifest.instances.iter().enumerate() {
        for &method in &opts.methods {
            for s in 0..opts.seeds {
                jobs.push((i, entry, method, derive_seed(entry.seed, s as u64)));
            }
        }
    }
    Ok(jobs
        .into_par_iter()
        .map(|(i, entry, method, seed)| {
            let r = run_one(entry, &graphs[i], method, seed, opts);
            log::info!(
                "{} {} seed {}: {:?} {:?}",
                r.instance,
                r.method,
                seed,
                r.colors,
                r.error
            );
            r
        })
        .collect())
}

/// One summary per (class, order, density, method) present in `records`,
/// sorted by those keys.
pub fn summarize(records: &[RunRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(GraphClass, usize, u64, BenchMethod), Vec<&RunRecord>> =
        BTreeMap::new();
    for r in records {
        cells
            .entry((r.class, r.n, r.density.to_bits(), r.method))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((class, n, density, method), rs)| {
            let ok: Vec<&&RunRecord> = rs.iter().filter(|r| r.ok()).collect();
            let pick = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
                ok.iter().filter_map(|r| f(r)).collect()
            };
            CellSummary {
                class,
                n,
                density: f64::from_bits(density),
                method,
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                iterations: estimate(&pick(&|r| r.iterations.map(|x| x as f64))),
                gap: estimate(&pick(&|r| r.gap)),
                colors: estimate(&pick(&|r| r.colors.map(|x| x as f64))),
            }
        })
        .collect()
}

pub const RECORD_HEADER: &str = "instance,class,n,density,method,seed,colors,iterations,gap,error";

pub const SUMMARY_HEADER: &str =
    "class,n,density,method,runs,failures,mean_iterations,ci_iterations,mean_gap,ci_gap,mean_colors,ci_colors";

fn opt<T: fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn est(e: Option<Estimate>) -> String {
    e.map_or_else(|| ",".to_string(), |e| format!("{:.6},{:.6}", e.mean, e.ci))
}

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = format!("{RECORD_HEADER}\n");
    for r in records {
        let error = r.error.as_deref().unwrap_or("").replace(['"', ','], ";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.class,
            r.n,
            r.density,
            r.method,
            r.seed,
            opt(r.colors),
            opt(r.iterations),
            r.gap.map_or_else(String::new, |g| format!("{g:.6}")),
            error
        )
        .expect("write to string");
    }
    out
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.class,
            c.n,
            c.density,
            c.method,
            c.runs,
            c.failures,
            est(c.iterations),
            est(c.gap),
            est(c.colors)
        )
        .expect("write to string");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, CorpusSpec};

    #[test]
    fn method_names_round_trip() {
        for name in [
            "cg-exact",
            "cg-greedy",
            "cg-sa",
            "cg-quantum",
            "greedy-exact",
            "greedy-quantum",
        ] {
            assert_eq!(name.parse::<BenchMethod>().unwrap().to_string(), name);
        }
        assert!("greedy-sa".parse::<BenchMethod>().is_err());
        assert!("cg".parse::<BenchMethod>().is_err());
    }

    #[test]
    fn single_sample_has_zero_width() {
        assert_eq!(estimate(&[3.0]), Some(Estimate { mean: 3.0, ci: 0.0 }));
        assert_eq!(estimate(&[]), None);
        let e = estimate(&[1.0, 3.0]).unwrap();
        assert!((e.ci - 1.96 * 2f64.sqrt() / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classical_rows() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            classes: vec![GraphClass::Nonud],
            orders: vec![5, 6],
            densities: vec![0.2, 0.8],
            count: 3,
            seed: 9,
        };
        let manifest = generate(&spec, dir.path()).unwrap();
        let opts = BenchOptions {
            methods: vec![
                BenchMethod::Colgen(Backend::Exact),
                BenchMethod::Greedy(Backend::Exact),
            ],
            ..BenchOptions::default()
        };
        let records = run_bench(&manifest, dir.path(), &opts).unwrap();
        assert_eq!(records.len(), 2 * 2 * 3 * 2);
        assert!(records.iter().all(|r| r.ok() && r.gap.unwrap() >= 0.0));
        let cells = summarize(&records);
        assert_eq!(cells.len(), 2 * 2 * 2);
        assert_eq!(summary_csv(&cells).lines().count(), cells.len() + 1);
        assert_eq!(records_csv(&records).lines().count(), records.len() + 1);
    }

    #[test]
    fn quantum_methods_skip_large_orders() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            classes: vec![GraphClass::Ud],
            orders: vec![5],
            densities: vec![0.5],
            count: 1,
            seed: 1,
        };
        let manifest = generate(&spec, dir.path()).unwrap();
        let opts = BenchOptions {
            methods: vec![BenchMethod::Greedy(Backend::Quantum)],
            max_quantum_order: 4,
            ..BenchOptions::default()
        };
        let records = run_bench(&manifest, dir.path(), &opts).unwrap();
        assert!(records[0].error.as_deref().unwrap().starts_with("skipped"));
        let cells = summarize(&records);
        assert_eq!(cells[0].failures, 1);
        assert_eq!(cells[0].gap, None);
    }
}
