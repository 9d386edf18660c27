//! Restricted master problem solver.
//!
//! A dense two-phase primal simplex for `min c'y  s.t.  B y = 1, y >= 0`
//! where `B` is a 0/1 vertex-by-set incidence matrix, plus a depth-first
//! branch-and-bound for the integer version. Duals are the simplex
//! multipliers of the final basis, so they may be negative.

use serde::Serialize;

use crate::error::{Error, Result};

/// Primal feasibility and reduced-cost tolerance.
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

/// `min sum_s c_s y_s` subject to every row being covered exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    rows: usize,
    costs: Vec<f64>,
    columns: Vec<Vec<usize>>,
}

impl LpProblem {
    pub fn new(rows: usize) -> Self {
        LpProblem {
            rows,
            costs: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Unit-cost set partitioning over the given sets.
    pub fn partitioning(rows: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut p = Self::new(rows);
        for s in sets {
            p.add_column(1.0, s)?;
        }
        Ok(p)
    }

    /// Adds a column covering `members`; returns its index.
    pub fn add_column(&mut self, cost: f64, members: &[usize]) -> Result<usize> {
        let mut rows = members.to_vec();
        rows.sort_unstable();
        rows.dedup();
        if rows.is_empty() {
            return Err(Error::InvalidArgument("empty column".into()));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::InvalidArgument(format!(
                "column row {r} out of range ({} rows)",
                self.rows
            )));
        }
        self.costs.push(cost);
        self.columns.push(rows);
        Ok(self.columns.len() - 1)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    fn infeasible(p: &LpProblem, pivots: usize) -> Self {
        LpSolution {
            status: LpStatus::Infeasible,
            primal: vec![0.0; p.num_columns()],
            duals: vec![0.0; p.rows],
            objective: f64::INFINITY,
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    m: usize,
    structural: usize,
    width: usize,
    a: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    /// `[B | I]` with the artificial identity as the starting basis.
    fn new(p: &LpProblem) -> Self {
        let m = p.rows;
        let structural = p.num_columns();
        let width = structural + m;
        let mut a = vec![0.0; m * width];
        for (j, col) in p.columns.iter().enumerate() {
            for &r in col {
                a[r * width + j] = 1.0;
            }
        }
        for r in 0..m {
            a[r * width + structural + r] = 1.0;
        }
        Tableau {
            m,
            structural,
            width,
            a,
            rhs: vec![1.0; m],
            basis: (structural..width).collect(),
            pivots: 0,
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.width + c]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(r, c);
        for k in 0..w {
            self.a[r * w + k] *= inv;
        }
        self.rhs[r] *= inv;
        self.a[r * w + c] = 1.0;
        let (pivot_row, pivot_rhs) = (self.a[r * w..(r + 1) * w].to_vec(), self.rhs[r]);
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f.abs() < 1e-15 {
                continue;
            }
            for k in 0..w {
                self.a[i * w + k] -= f * pivot_row[k];
            }
            self.a[i * w + c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            if self.rhs[i].abs() < 1e-13 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * self.width..(r + 1) * self.width];
                for (dj, &arj) in d.iter_mut().zip(row) {
                    *dj -= cb * arj;
                }
            }
        }
        d
    }

    /// Primal simplex on the current basis. Dantzig pricing, switching to
    /// Bland's rule after any degenerate pivot until the objective moves.
    fn optimize(&mut self, cost: &[f64], may_enter: impl Fn(usize) -> bool) -> Result<()> {
        let mut bland = false;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
            let d = self.reduced_costs(cost);
            let candidates = (0..self.width).filter(|&j| may_enter(j) && d[j] < -FEAS_TOL);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&x, &y| d[x].total_cmp(&d[y]).then(x.cmp(&y)))
            };
            let Some(c) = entering else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let arc = self.at(r, c);
                if arc <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[r] / arc;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - 1e-12
                            || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((r, step)) = leave else {
                return Err(Error::InvalidArgument("linear program is unbounded".into()));
            };
            bland = step <= 1e-12;
            self.pivot(r, c);
        }
    }
}

/// Solves the LP relaxation of the partitioning problem.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    let mut t = Tableau::new(p);
    let n = t.structural;

    // Phase 1: minimize the sum of artificials.
    let phase1: Vec<f64> = (0..t.width)
        .map(|j| if j < n { 0.0 } else { 1.0 })
        .collect();
    t.optimize(&phase1, |_| true)?;
    let infeasibility: f64 = (0..t.m)
        .filter(|&r| t.basis[r] >= n)
        .map(|r| t.rhs[r])
        .sum();
    if infeasibility > 1e-7 {
        return Ok(LpSolution::infeasible(p, t.pivots));
    }
    // Drive zero-level artificials out of the basis where a structural
    // column can replace them; rows where none can are redundant.
    for r in 0..t.m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&c| t.at(r, c).abs() > PIVOT_TOL) {
                t.pivot(r, c);
            }
        }
    }

    // Phase 2: artificials may stay basic at zero but never re-enter.
    let mut phase2 = vec![0.0; t.width];
    phase2[..n].copy_from_slice(&p.costs);
    t.optimize(&phase2, |j| j < n)?;

    let mut primal = vec![0.0; n];
    for r in 0..t.m {
        if t.basis[r] < n {
            primal[t.basis[r]] = t.rhs[r].max(0.0);
        }
    }
    let duals = (0..t.m)
        .map(|i| {
            (0..t.m)
                .map(|r| phase2[t.basis[r]] * t.at(r, n + i))
                .sum::<f64>()
        })
        .collect();
    let objective = primal.iter().zip(&p.costs).map(|(y, c)| y * c).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        duals,
        objective,
        pivots: t.pivots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    /// Indices of the columns set to 1, ascending.
    pub selected: Vec<usize>,
    pub objective: f64,
    pub nodes: usize,
    /// False when the node budget ran out before the tree was exhausted.
    pub proven_optimal: bool,
}

const MAX_NODES: usize = 200_000;

struct Node {
    ones: Vec<usize>,
    zeros: Vec<bool>,
}

/// Exact 0/1 solve over the given columns: depth-first branch-and-bound,
/// branching on the most fractional variable (lowest index on ties) with
/// the `y = 1` child explored first.
pub fn solve_ilp(p: &LpProblem) -> Result<IlpSolution> {
    let ncols = p.num_columns();
    let integral_costs = p.costs.iter().all(|c| (c - c.round()).abs() < 1e-12);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut nodes = 0;
    let mut stack = vec![Node {
        ones: Vec::new(),
        zeros: vec![false; ncols],
    }];

    while let Some(node) = stack.pop() {
        if nodes >= MAX_NODES {
            stack.push(node);
            break;
        }
        nodes += 1;
        let Some((local, map, fixed_cost)) = restrict(p, &node) else {
            continue;
        };
        let sol = solve(&local)?;
        if !sol.is_optimal() {
            continue;
        }
        if nodes == 1 {
            if let Some(cand) = greedy_round(p, &sol.primal) {
                let cost: f64 = cand.iter().map(|&j| p.costs[j]).sum();
                best = Some((cost, cand));
            }
        }
        let bound = fixed_cost + sol.objective;
        if let Some((inc, _)) = &best {
            let bound = if integral_costs {
                (bound - 1e-6).ceil()
            } else {
                bound
            };
            if bound >= inc - 1e-9 {
                continue;
            }
        }

        let fractional = sol
            .primal
            .iter()
            .enumerate()
            .map(|(k, &y)| (k, y.min(1.0 - y)))
            .filter(|&(_, f)| f > 1e-9)
            .fold(None, |acc: Option<(usize, f64)>, (k, f)| match acc {
                Some((_, bf)) if f <= bf + 1e-12 => acc,
                _ => Some((k, f)),
            });
        match fractional {
            None => {
                let mut chosen = node.ones.clone();
                chosen.extend(
                    sol.primal
                        .iter()
                        .enumerate()
                        .filter(|(_, &y)| y > 0.5)
                        .map(|(k, _)| map[k]),
                );
                chosen.sort_unstable();
                let cost: f64 = chosen.iter().map(|&j| p.costs[j]).sum();
                if best.as_ref().map_or(true, |(inc, _)| cost < inc - 1e-9) {
                    best = Some((cost, chosen));
                }
            }
            Some((k, _)) => {
                let j = map[k];
                let mut zero = Node {
                    ones: node.ones.clone(),
                    zeros: node.zeros.clone(),
                };
                zero.zeros[j] = true;
                let mut one = node;
                one.ones.push(j);
                stack.push(zero);
                stack.push(one);
            }
        }
    }

    match best {
        Some((objective, selected)) => Ok(IlpSolution {
            selected,
            objective,
            nodes,
            proven_optimal: stack.is_empty(),
        }),
        None if stack.is_empty() => Err(Error::Infeasible),
        None => Err(Error::IterationLimit(MAX_NODES)),
    }
}

/// LP over the rows left uncovered by the fixed-to-one columns, using only
/// free columns disjoint from them. Returns `None` when some row can no
/// longer be covered.
fn restrict(p: &LpProblem, node: &Node) -> Option<(LpProblem, Vec<usize>, f64)> {
    let mut covered = vec![false; p.rows];
    let mut fixed_cost = 0.0;
    for &j in &node.ones {
        for &r in &p.columns[j] {
            if covered[r] {
                return None;
            }
            covered[r] = true;
        }
        fixed_cost += p.costs[j];
    }
    let mut row_map = vec![usize::MAX; p.rows];
    let mut next = 0;
    for r in 0..p.rows {
        if !covered[r] {
            row_map[r] = next;
            next += 1;
        }
    }
    let mut local = LpProblem::new(next);
    let mut map = Vec::new();
    let mut reachable = vec![false; next];
    for j in 0..p.num_columns() {
        if node.zeros[j] || node.ones.contains(&j) {
            continue;
        }
        if p.columns[j].iter().any(|&r| covered[r]) {
            continue;
        }
        let rows: Vec<usize> = p.columns[j].iter().map(|&r| row_map[r]).collect();
        for &r in &rows {
            reachable[r] = true;
        }
        local.costs.push(p.costs[j]);
        local.columns.push(rows);
        map.push(j);
    }
    if reachable.iter().any(|&ok| !ok) {
        return None;
    }
    Some((local, map, fixed_cost))
}

/// Takes columns in order of decreasing LP value while they stay disjoint.
fn greedy_round(p: &LpProblem, primal: &[f64]) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..p.num_columns()).collect();
    order.sort_by(|&a, &b| primal[b].total_cmp(&primal[a]).then(a.cmp(&b)));
    let mut covered = vec![false; p.rows];
    let mut chosen = Vec::new();
    for j in order {
        if p.columns[j].iter().all(|&r| !covered[r]) {
            for &r in &p.columns[j] {
                covered[r] = true;
            }
            chosen.push(j);
        }
    }
    if covered.iter().all(|&c| c) {
        chosen.sort_unstable();
        Some(chosen)
    } else {
        None
    }
}
