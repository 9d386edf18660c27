//! Brute-force ground truth for small graphs.
//!
//! Exponential by design and guarded by size limits. Used by the test
//! suites and the `oracle` CLI command.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lp::{self, LpProblem};
use crate::mwis::{max_independent_set, WeightedSet};

pub const MAX_ENUMERATE: usize = 20;
pub const MAX_CHROMATIC: usize = 16;
pub const MAX_FULL_LP: usize = 14;

fn guard(what: &'static str, n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge { what, n, limit })
    } else {
        Ok(())
    }
}

fn mask_to_vec(mask: u64) -> Vec<usize> {
    (0..64).filter(|&u| mask >> u & 1 == 1).collect()
}

/// Bitmasks of every independent set, including the empty one.
fn independent_masks(g: &Graph) -> Result<Vec<u64>> {
    let masks = g.neighbor_masks()?;
    let mut sets = vec![0u64];
    for u in 0..g.n() {
        let extended: Vec<u64> = sets
            .iter()
            .filter(|&&s| s & masks[u] == 0)
            .map(|&s| s | 1 << u)
            .collect();
        sets.extend(extended);
    }
    Ok(sets)
}

/// All nonempty independent sets, ordered by size and then
/// lexicographically.
pub fn enumerate_independent_sets(g: &Graph) -> Result<Vec<Vec<usize>>> {
    guard("enumerate_independent_sets", g.n(), MAX_ENUMERATE)?;
    let mut sets: Vec<Vec<usize>> = independent_masks(g)?
        .into_iter()
        .filter(|&m| m != 0)
        .map(mask_to_vec)
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(sets)
}

/// Heaviest independent set by exhaustive search; equal weights (within
/// 1e-9) resolve to the lexicographically smallest vertex list.
pub fn brute_mwis(g: &Graph, weights: &[f64]) -> Result<WeightedSet> {
    guard("brute_mwis", g.n(), MAX_ENUMERATE)?;
    assert_eq!(weights.len(), g.n(), "one weight per vertex");
    let mut best = WeightedSet {
        vertices: Vec::new(),
        weight: 0.0,
    };
    for mask in independent_masks(g)? {
        let set = mask_to_vec(mask);
        let weight: f64 = set.iter().map(|&u| weights[u]).sum();
        let better = weight > best.weight + 1e-9
            || ((weight - best.weight).abs() <= 1e-9 && set < best.vertices);
        if better {
            best = WeightedSet {
                vertices: set,
                weight,
            };
        }
    }
    Ok(best)
}

/// Chromatic number and one optimal coloring (`coloring[u]` in `0..chi`).
pub fn brute_chromatic(g: &Graph) -> Result<(usize, Vec<usize>)> {
    guard("brute_chromatic", g.n(), MAX_CHROMATIC)?;
    let n = g.n();
    if n == 0 {
        return Ok((0, Vec::new()));
    }
    let clique = max_independent_set(&g.complement())?;
    // Color the clique first; the remaining vertices by decreasing degree.
    let mut order = clique.clone();
    let mut rest: Vec<usize> = (0..n).filter(|u| !clique.contains(u)).collect();
    rest.sort_by_key(|&u| (std::cmp::Reverse(g.degree(u)), u));
    order.extend(rest);

    for k in clique.len().max(1)..=n {
        let mut coloring = vec![usize::MAX; n];
        if color_backtrack(g, &order, 0, k, 0, &mut coloring) {
            return Ok((k, coloring));
        }
    }
    unreachable!("n colors always suffice")
}

fn color_backtrack(
    g: &Graph,
    order: &[usize],
    pos: usize,
    k: usize,
    used: usize,
    coloring: &mut [usize],
) -> bool {
    let Some(&u) = order.get(pos) else {
        return true;
    };
    // A fresh color is interchangeable with any other fresh one.
    let limit = (used + 1).min(k);
    for c in 0..limit {
        if g.neighbors(u).iter().all(|&v| coloring[v] != c) {
            coloring[u] = c;
            if color_backtrack(g, order, pos + 1, k, used.max(c + 1), coloring) {
                return true;
            }
        }
    }
    coloring[u] = usize::MAX;
    false
}

/// Fractional chromatic number: the covering LP over every independent set.
pub fn full_lp_value(g: &Graph) -> Result<f64> {
    guard("full_lp_value", g.n(), MAX_FULL_LP)?;
    if g.n() == 0 {
        return Ok(0.0);
    }
    let sets = enumerate_independent_sets(g)?;
    let sol = lp::solve(&LpProblem::partitioning(g.n(), &sets)?)?;
    if !sol.is_optimal() {
        return Err(Error::Infeasible);
    }
    Ok(sol.objective)
}
