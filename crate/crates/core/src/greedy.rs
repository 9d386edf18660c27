//! Greedy coloring by repeatedly removing a maximum independent set.

use serde::Serialize;

use crate::embedding::{apply_redesign, Redesign};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mwis::max_independent_set;
use crate::pricing::{
    sample_register, select_output, valid_sets, Backend, OutputMode, Pricer, PricerConfig,
};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyColoring {
    pub colors: usize,
    /// `coloring[u]` is the color of vertex `u`.
    pub coloring: Vec<usize>,
    pub color_classes: Vec<Vec<usize>>,
    pub iterations: usize,
    /// Rounds where sampling found no independent set and a single vertex
    /// was colored instead.
    pub fallbacks: usize,
}

/// Colors `g` one independent set at a time. The exact backend removes a
/// maximum independent set of the remaining graph; the quantum backend
/// removes the largest set sampled from the remaining atoms.
pub fn greedy_color(g: &Graph, config: &PricerConfig) -> Result<GreedyColoring> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    match config.backend {
        Backend::Exact => color_rounds(g, None),
        Backend::Quantum => color_rounds(g, Some(&Pricer::new(g, config.clone())?)),
        other => Err(Error::InvalidArgument(format!(
            "greedy coloring supports the exact and quantum backends, not {other}"
        ))),
    }
}

/// Quantum greedy coloring on the base register of a prepared pricer.
pub fn greedy_color_with(g: &Graph, pricer: &Pricer) -> Result<GreedyColoring> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if pricer.base().is_none() {
        return Err(Error::InvalidArgument(
            "greedy_color_with needs a quantum pricer".into(),
        ));
    }
    color_rounds(g, Some(pricer))
}

fn color_rounds(g: &Graph, pricer: Option<&Pricer>) -> Result<GreedyColoring> {
    let mut remaining: Vec<usize> = (0..g.n()).collect();
    let mut coloring = vec![usize::MAX; g.n()];
    let mut color_classes = Vec::new();
    let mut fallbacks = 0;
    while !remaining.is_empty() {
        let round = color_classes.len() as u64;
        let class = match pricer {
            None => {
                let sub = g.induced_subgraph(&remaining);
                sub.to_original(&max_independent_set(&sub.graph)?)
            }
            Some(p) => {
                let config = p.config();
                let (base, omega) = p.base().expect("quantum pricer has a register");
                let mut live = vec![0.0; g.n()];
                for &u in &remaining {
                    live[u] = 1.0;
                }
                let (reg, omega) =
                    apply_redesign(Redesign::AtomRemoval, base, omega, g, &live, &config.device)?;
                let samples =
                    sample_register(&reg, omega, config, derive_seed(config.seed, round))?;
                let (valid, _) = valid_sets(g, &reg, &samples);
                match select_output(valid, &live, OutputMode::Largest, 0.0).pop() {
                    Some(set) => set,
                    None => {
                        fallbacks += 1;
                        vec![remaining[0]]
                    }
                }
            }
        };
        debug_assert!(!class.is_empty() && g.is_independent_set(&class));
        for &u in &class {
            coloring[u] = color_classes.len();
        }
        remaining.retain(|u| coloring[*u] == usize::MAX);
        color_classes.push(class);
    }
    Ok(GreedyColoring {
        colors: color_classes.len(),
        iterations: color_classes.len(),
        coloring,
        color_classes,
        fallbacks,
    })
}
