//! Single-instance solving and the coloring reductions.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use rydcg_core::colgen::{self, RunConfig, RunTrace, Termination, WarmStart};
use rydcg_core::mwis::max_independent_set;
use rydcg_core::{greedy_color, Error, Graph, PricerConfig, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Colgen,
    Greedy,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "colgen" => Ok(Method::Colgen),
            "greedy" => Ok(Method::Greedy),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Colgen => "colgen",
            Method::Greedy => "greedy",
        })
    }
}

/// Which graph is actually colored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduce {
    None,
    /// Color the line graph: an edge coloring of the instance.
    Line,
    /// Color the complement: a partition of the instance into cliques.
    Complement,
}

impl FromStr for Reduce {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Reduce::None),
            "line" => Ok(Reduce::Line),
            "complement" => Ok(Reduce::Complement),
            _ => Err(Error::InvalidArgument(format!("unknown reduction {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub pricer: PricerConfig,
    pub warm_start: WarmStart,
    pub stagnation_limit: usize,
    pub chi: Option<usize>,
    pub reduce: Reduce,
    pub trace: bool,
    pub timing: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Colgen,
            pricer: PricerConfig::default(),
            warm_start: WarmStart::Singletons,
            stagnation_limit: 3,
            chi: None,
            reduce: Reduce::None,
            trace: false,
            timing: false,
        }
    }
}

/// An edge of the instance with its color, 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColoredEdge {
    pub edge: [usize; 2],
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionReport {
    Line {
        edge_coloring: Vec<ColoredEdge>,
        max_matching: Vec<[usize; 2]>,
    },
    Complement {
        clique_cover: Vec<Vec<usize>>,
        max_clique: Vec<usize>,
    },
}

/// Result of one solve; every vertex and color label is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub pricer: String,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub colors: usize,
    /// `coloring[u - 1]` is the color of vertex `u`.
    pub coloring: Vec<usize>,
    pub color_classes: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_value: Option<f64>,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<RunTrace>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

fn one_based(set: &[usize]) -> Vec<usize> {
    set.iter().map(|u| u + 1).collect()
}

/// The graph that `reduce` colors, and for line graphs the edge behind
/// each vertex.
pub fn reduced_graph(g: &Graph, reduce: Reduce) -> (Graph, Option<Vec<(usize, usize)>>) {
    match reduce {
        Reduce::None => (g.clone(), None),
        Reduce::Line => {
            let (lg, map) = g.line_graph();
            (lg, Some(map))
        }
        Reduce::Complement => (g.complement(), None),
    }
}

/// Maximum matching of `g` as a maximum independent set of its line graph.
pub fn max_matching(g: &Graph) -> Result<Vec<(usize, usize)>> {
    let (lg, map) = g.line_graph();
    Ok(max_independent_set(&lg)?
        .into_iter()
        .map(|e| map[e])
        .collect())
}

/// Maximum clique of `g` as a maximum independent set of its complement.
pub fn max_clique(g: &Graph) -> Result<Vec<usize>> {
    max_independent_set(&g.complement())
}

pub fn solve(g: &Graph, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let (target, edge_map) = reduced_graph(g, opts.reduce);
    if target.n() == 0 {
        return Err(Error::InvalidGraph(
            "nothing to color after the reduction".into(),
        ));
    }
    let (classes, coloring, lp_value, iterations, termination, trace) = match opts.method {
        Method::Colgen => {
            let config = RunConfig {
                pricer: opts.pricer.clone(),
                stagnation_limit: opts.stagnation_limit,
                warm_start: opts.warm_start,
                chi: opts.chi,
                ..RunConfig::default()
            };
            let t = colgen::run(&target, &config)?;
            (
                t.color_classes.clone(),
                t.coloring.clone(),
                Some(t.lp_value),
                t.pricing_iterations,
                Some(t.termination),
                opts.trace.then_some(t),
            )
        }
        Method::Greedy => {
            let c = greedy_color(&target, &opts.pricer)?;
            (c.color_classes, c.coloring, None, c.iterations, None, None)
        }
    };
    debug_assert!(colgen::is_proper_partition(&target, &classes));
    let colors = classes.len();
    let reduction = match opts.reduce {
        Reduce::None => None,
        Reduce::Line => {
            let map = edge_map.expect("line graph has an edge map");
            Some(ReductionReport::Line {
                edge_coloring: map
                    .iter()
                    .zip(&coloring)
                    .map(|(&(u, v), &c)| ColoredEdge {
                        edge: [u + 1, v + 1],
                        color: c + 1,
                    })
                    .collect(),
                max_matching: max_matching(g)?
                    .into_iter()
                    .map(|(u, v)| [u + 1, v + 1])
                    .collect(),
            })
        }
        Reduce::Complement => Some(ReductionReport::Complement {
            clique_cover: classes.iter().map(|c| one_based(c)).collect(),
            max_clique: one_based(&max_clique(g)?),
        }),
    };
    Ok(SolveReport {
        method: opts.method,
        pricer: opts.pricer.backend.to_string(),
        seed: opts.pricer.seed,
        n: target.n(),
        edges: target.num_edges(),
        colors,
        coloring: coloring.iter().map(|c| c + 1).collect(),
        color_classes: classes.iter().map(|c| one_based(c)).collect(),
        lp_value,
        iterations,
        termination,
        chi: opts.chi,
        gap: opts.chi.map(|chi| colgen::gap_percent(colors, chi)),
        wall_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        reduction,
        trace,
    })
}

pub const TRACE_HEADER: &str =
    "iteration,rmp_objective,columns_added,candidates,valid_fraction,atoms,omega_max";

/// One row per master-problem solve.
pub fn trace_csv(trace: &RunTrace) -> String {
    fn cell<T: fmt::Display>(x: Option<T>) -> String {
        x.map_or_else(String::new, |v| v.to_string())
    }
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.iterations {
        let p = r.pricing.as_ref();
        out += &format!(
            "{},{},{},{},{},{},{}\n",
            r.iteration,
            r.rmp_objective,
            r.columns_added.len(),
            cell(p.map(|p| p.candidates)),
            cell(p.and_then(|p| p.valid_fraction)),
            cell(p.and_then(|p| p.atoms)),
            cell(p.and_then(|p| p.omega_max)),
        );
    }
    out
}

/// Checks a report's coloring against the instance it came from.
pub fn validate(g: &Graph, report: &SolveReport) -> bool {
    report.coloring.len() == g.n()
        && g.edges()
            .iter()
            .all(|&(u, v)| report.coloring[u] != report.coloring[v])
        && report
            .coloring
            .iter()
            .all(|&c| c >= 1 && c <= report.colors)
}
