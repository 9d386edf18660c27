//! Exact maximum weighted independent set by branch-and-bound over
//! bitmasks (n <= 64).
//!
//! Vertices are branched in index order, include-first, and an incumbent is
//! only replaced by a strictly heavier set, so among equal-weight optima the
//! first one in that order wins. For positive weights that is the
//! lexicographically smallest sorted vertex list.

use crate::error::Result;
use crate::graph::Graph;

const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSet {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

/// Maximum weighted independent set. Vertices with non-positive weight are
/// never selected. Returns the empty set (weight 0) when nothing is
/// positive.
pub fn max_weight_independent_set(g: &Graph, weights: &[f64]) -> Result<WeightedSet> {
    assert_eq!(weights.len(), g.n(), "one weight per vertex");
    let masks = g.neighbor_masks()?;
    let candidates = (0..g.n())
        .filter(|&u| weights[u] > 0.0)
        .fold(0u64, |m, u| m | (1u64 << u));
    let mut search = Search {
        masks: &masks,
        weights,
        best_weight: 0.0,
        best_set: 0,
    };
    search.branch(0, 0.0, candidates);
    Ok(WeightedSet {
        vertices: bits(search.best_set),
        weight: search.best_weight,
    })
}

/// Maximum-cardinality independent set (unit weights).
pub fn max_independent_set(g: &Graph) -> Result<Vec<usize>> {
    Ok(max_weight_independent_set(g, &vec![1.0; g.n()])?.vertices)
}

struct Search<'a> {
    masks: &'a [u64],
    weights: &'a [f64],
    best_weight: f64,
    best_set: u64,
}

impl Search<'_> {
    fn branch(&mut self, chosen: u64, weight: f64, candidates: u64) {
        if candidates == 0 {
            let first = self.best_set == 0 && chosen != 0 && weight > self.best_weight;
            if first || weight > self.best_weight + TIE_TOL {
                self.best_weight = weight;
                self.best_set = chosen;
            }
            return;
        }
        let bound: f64 = weight + bits_iter(candidates).map(|u| self.weights[u]).sum::<f64>();
        if bound <= self.best_weight + TIE_TOL {
            return;
        }
        let u = candidates.trailing_zeros() as usize;
        let bit = 1u64 << u;
        self.branch(
            chosen | bit,
            weight + self.weights[u],
            candidates & !bit & !self.masks[u],
        );
        self.branch(chosen, weight, candidates & !bit);
    }
}

fn bits_iter(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let u = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(u)
        }
    })
}

fn bits(mask: u64) -> Vec<usize> {
    bits_iter(mask).collect()
}
