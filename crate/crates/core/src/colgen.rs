//! Column generation for vertex coloring: solve the restricted master LP,
//! price new independent sets with its duals, repeat, then solve the
//! integer master over every column generated.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::embedding::{apply_redesign, Redesign};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lp::{self, LpProblem};
use crate::pricing::{
    sample_register, select_output, valid_sets, Column, OutputMode, Pricer, PricerConfig,
    PricingOutcome,
};
use crate::rng::derive_seed;

/// Objective decrease that counts as progress.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

/// The `n` single-vertex columns.
pub fn warm_start_singletons(g: &Graph) -> Vec<Column> {
    (0..g.n())
        .map(|u| Column {
            vertices: vec![u],
            weight: 1.0,
        })
        .collect()
}

/// Samples the quantum register with unit weights and keeps every distinct
/// independent set, after the singletons.
pub fn warm_start_quantum(g: &Graph, config: &PricerConfig) -> Result<Vec<Column>> {
    let pricer = Pricer::new(
        g,
        PricerConfig {
            backend: crate::pricing::Backend::Quantum,
            ..config.clone()
        },
    )?;
    warm_start_with(g, &pricer)
}

/// Quantum warm start on the base register of an existing quantum pricer.
pub fn warm_start_with(g: &Graph, pricer: &Pricer) -> Result<Vec<Column>> {
    let config = pricer.config();
    let ones = vec![1.0; g.n()];
    let (base, base_omega) = pricer
        .base()
        .ok_or_else(|| Error::InvalidArgument("warm start needs a quantum pricer".into()))?;
    let (reg, omega) = apply_redesign(
        Redesign::AtomRemoval,
        base,
        base_omega,
        g,
        &ones,
        &config.device,
    )?;
    let samples = sample_register(&reg, omega, config, derive_seed(config.seed, u64::MAX))?;
    let (valid, _) = valid_sets(g, &reg, &samples);
    let mut columns = warm_start_singletons(g);
    let mut seen: BTreeSet<Vec<usize>> = columns.iter().map(|c| c.vertices.clone()).collect();
    for set in select_output(valid, &ones, OutputMode::All, 0.0) {
        if seen.insert(set.clone()) {
            columns.push(Column {
                weight: set.len() as f64,
                vertices: set,
            });
        }
    }
    Ok(columns)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmStart {
    Singletons,
    Quantum,
}

impl FromStr for WarmStart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singletons" => Ok(WarmStart::Singletons),
            "quantum" => Ok(WarmStart::Quantum),
            _ => Err(Error::InvalidArgument(format!("unknown warm start {s:?}"))),
        }
    }
}

impl fmt::Display for WarmStart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WarmStart::Singletons => "singletons",
            WarmStart::Quantum => "quantum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub pricer: PricerConfig,
    pub stagnation_limit: usize,
    pub max_iterations: usize,
    pub warm_start: WarmStart,
    /// Known chromatic number, for the gap.
    pub chi: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pricer: PricerConfig::default(),
            stagnation_limit: 3,
            max_iterations: 1000,
            warm_start: WarmStart::Singletons,
            chi: None,
        }
    }
}

impl RunConfig {
    pub fn with_pricer(pricer: PricerConfig) -> Self {
        RunConfig {
            pricer,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Pricing found no improving column.
    NoColumn,
    /// The objective stalled for the configured number of rounds.
    Stagnation,
    IterationLimit,
}

/// One master solve and the pricing round that followed it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub rmp_objective: f64,
    pub duals: Vec<f64>,
    /// Columns added by the pricing round, empty when pricing was skipped
    /// or found nothing.
    pub columns_added: Vec<Column>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pricing: Option<PricingStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingStats {
    pub candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

impl From<&PricingOutcome> for PricingStats {
    fn from(o: &PricingOutcome) -> Self {
        PricingStats {
            candidates: o.candidates,
            valid_fraction: o.valid_fraction,
            atoms: o.atoms,
            omega_max: o.omega_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTrace {
    pub iterations: Vec<IterationRecord>,
    pub pricing_iterations: usize,
    pub termination: Termination,
    pub total_columns: usize,
    pub lp_value: f64,
    pub colors: usize,
    /// `coloring[u]` is the color of vertex `u`.
    pub coloring: Vec<usize>,
    pub color_classes: Vec<Vec<usize>>,
    pub ilp_proven_optimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_percent: Option<f64>,
    #[serde(skip)]
    pub wall: Duration,
}

/// `100 (found - optimal) / optimal`.
pub fn gap_percent(found: usize, optimal: usize) -> f64 {
    assert!(optimal >= 1, "optimal color count must be positive");
    100.0 * (found as f64 - optimal as f64) / optimal as f64
}

/// Runs column generation to termination and solves the final integer
/// master problem.
pub fn run(g: &Graph, config: &RunConfig) -> Result<RunTrace> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    run_with(g, config, Pricer::new(g, config.pricer.clone())?)
}

/// Like [`run`] with a prepared pricer, e.g. one built on a given register.
/// `config.pricer` is ignored in favour of the pricer's own configuration.
pub fn run_with(g: &Graph, config: &RunConfig, pricer: Pricer) -> Result<RunTrace> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let start = Instant::now();
    let initial = match config.warm_start {
        WarmStart::Singletons => warm_start_singletons(g),
        WarmStart::Quantum if pricer.base().is_some() => warm_start_with(g, &pricer)?,
        WarmStart::Quantum => warm_start_quantum(g, pricer.config())?,
    };
    let mut master = LpProblem::new(g.n());
    let mut known = BTreeSet::new();
    for c in &initial {
        master.add_column(1.0, &c.vertices)?;
        known.insert(c.vertices.clone());
    }

    let mut iterations = Vec::new();
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut pricing_iterations = 0;
    let termination = loop {
        let sol = lp::solve(&master)?;
        if !sol.is_optimal() {
            return Err(Error::Infeasible);
        }
        let iteration = iterations.len() + 1;
        if sol.objective < best - IMPROVEMENT_TOL {
            best = sol.objective;
            stalled = 0;
        } else {
            stalled += 1;
        }
        let mut record = IterationRecord {
            iteration,
            rmp_objective: sol.objective,
            duals: sol.duals.clone(),
            columns_added: Vec::new(),
            pricing: None,
        };
        if stalled >= config.stagnation_limit {
            iterations.push(record);
            break Termination::Stagnation;
        }
        if pricing_iterations >= config.max_iterations {
            iterations.push(record);
            break Termination::IterationLimit;
        }
        let outcome = pricer.price(&sol.duals, pricing_iterations as u64, &known)?;
        pricing_iterations += 1;
        record.pricing = Some(PricingStats::from(&outcome));
        if outcome.columns.is_empty() {
            iterations.push(record);
            break Termination::NoColumn;
        }
        for c in &outcome.columns {
            master.add_column(1.0, &c.vertices)?;
            known.insert(c.vertices.clone());
        }
        log::debug!(
            "iteration {iteration}: objective {:.6}, {} columns",
            sol.objective,
            outcome.columns.len()
        );
        record.columns_added = outcome.columns;
        iterations.push(record);
    };

    let lp_value = iterations.last().map_or(f64::NAN, |r| r.rmp_objective);
    let ilp = lp::solve_ilp(&master)?;
    let color_classes: Vec<Vec<usize>> = ilp
        .selected
        .iter()
        .map(|&j| master.column(j).to_vec())
        .collect();
    let mut coloring = vec![usize::MAX; g.n()];
    for (c, class) in color_classes.iter().enumerate() {
        for &u in class {
            coloring[u] = c;
        }
    }
    let colors = color_classes.len();
    Ok(RunTrace {
        pricing_iterations,
        termination,
        total_columns: master.num_columns(),
        lp_value,
        colors,
        coloring,
        color_classes,
        ilp_proven_optimal: ilp.proven_optimal,
        chi: config.chi,
        gap_percent: config.chi.map(|chi| gap_percent(colors, chi)),
        iterations,
        wall: start.elapsed(),
    })
}

impl RunTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.rmp_objective).collect()
    }

    /// Iteration log with 1-based vertex ids, one line per master solve.
    pub fn table(&self) -> String {
        let one_based = |s: &[usize]| {
            let v: Vec<String> = s.iter().map(|u| (u + 1).to_string()).collect();
            format!("[{}]", v.join(", "))
        };
        let mut out = String::from("iter\tobjective\tduals\tcolumns added\n");
        for r in &self.iterations {
            let duals: Vec<String> = r.duals.iter().map(|d| format!("{d:.3}")).collect();
            let cols: Vec<String> = r
                .columns_added
                .iter()
                .map(|c| one_based(&c.vertices))
                .collect();
            out.push_str(&format!(
                "{}\t{:.6}\t[{}]\t{}\n",
                r.iteration,
                r.rmp_objective,
                duals.join(", "),
                cols.join(" ")
            ));
        }
        let classes: Vec<String> = self.color_classes.iter().map(|c| one_based(c)).collect();
        out.push_str(&format!("colors {}: {}\n", self.colors, classes.join(" ")));
        out
    }
}

/// Checks that `classes` partition the vertices into independent sets.
pub fn is_proper_partition(g: &Graph, classes: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; g.n()];
    for class in classes {
        if class.is_empty() || !g.is_independent_set(class) {
            return false;
        }
        for &u in class {
            if seen[u] {
                return false;
            }
            seen[u] = true;
        }
    }
    seen.into_iter().all(|s| s)
}
