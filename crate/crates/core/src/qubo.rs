//! QUBO builders for weighted independent set and vertex coloring, the Ising
//! change of variables, and a simulated-annealing sampler.

use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derive_seed, rng_from_seed};

/// Symmetric matrix `Q` with energy `x'Qx + offset` over 0/1 vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    size: usize,
    q: Vec<f64>,
    offset: f64,
}

impl QuboMatrix {
    pub fn new(size: usize) -> Self {
        QuboMatrix {
            size,
            q: vec![0.0; size * size],
            offset: 0.0,
        }
    }

    /// Builds from a square row-major matrix; asymmetric input is replaced
    /// by its symmetric part, which has the same energies.
    pub fn from_dense(size: usize, data: &[f64]) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                size * size,
                data.len()
            )));
        }
        let mut m = Self::new(size);
        for i in 0..size {
            for j in 0..size {
                m.q[i * size + j] = 0.5 * (data[i * size + j] + data[j * size + i]);
            }
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.size + j]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_linear(&mut self, i: usize, v: f64) {
        self.q[i * self.size + i] += v;
    }

    /// Adds `v * x_i * x_j`, split evenly over the two symmetric entries.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.add_linear(i, v);
        } else {
            self.q[i * self.size + j] += 0.5 * v;
            self.q[j * self.size + i] += 0.5 * v;
        }
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn energy(&self, x: &[u8]) -> f64 {
        assert_eq!(x.len(), self.size);
        let mut e = self.offset;
        for i in 0..self.size {
            if x[i] == 0 {
                continue;
            }
            let row = &self.q[i * self.size..(i + 1) * self.size];
            e += row
                .iter()
                .zip(x)
                .filter(|(_, &xj)| xj != 0)
                .map(|(q, _)| q)
                .sum::<f64>();
        }
        e
    }
}

/// `-sum w_u x_u + alpha * sum_{edges} x_u x_v`.
pub fn mwis_qubo(g: &Graph, weights: &[f64], alpha: f64) -> Result<QuboMatrix> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty must be positive, got {alpha}"
        )));
    }
    if weights.len() != g.n() {
        return Err(Error::InvalidArgument("one weight per vertex".into()));
    }
    let mut m = QuboMatrix::new(g.n());
    for (u, &w) in weights.iter().enumerate() {
        m.add_linear(u, -w);
    }
    for &(u, v) in g.edges() {
        m.add_quadratic(u, v, alpha);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoringPenalties {
    pub assignment: f64,
    pub adjacency: f64,
    pub coupling: f64,
    pub objective: f64,
}

/// Index of `x_{u,c}` in the coloring QUBO.
pub fn color_var(colors: usize, u: usize, c: usize) -> usize {
    u * colors + c
}

/// Index of `y_c` in the coloring QUBO on `n` vertices.
pub fn used_var(n: usize, colors: usize, c: usize) -> usize {
    n * colors + c
}

/// Vertex coloring QUBO over `x_{u,c}` (vertex u takes color c) followed
/// by `y_c` (color c is used). Energy is
/// `a*sum_u (1 - sum_c x_uc)^2 + b*sum_{edges,c} x_uc x_vc
///  + p*sum_{u,c} (x_uc - x_uc y_c) + o*sum_c y_c`.
pub fn mvcp_qubo(g: &Graph, colors: usize, alpha: ColoringPenalties) -> Result<QuboMatrix> {
    if colors == 0 {
        return Err(Error::InvalidArgument("need at least one color".into()));
    }
    let n = g.n();
    let mut m = QuboMatrix::new(n * colors + colors);
    for u in 0..n {
        m.add_offset(alpha.assignment);
        for c in 0..colors {
            let x = color_var(colors, u, c);
            m.add_linear(x, -alpha.assignment + alpha.coupling);
            m.add_quadratic(x, used_var(n, colors, c), -alpha.coupling);
            for c2 in c + 1..colors {
                m.add_quadratic(x, color_var(colors, u, c2), 2.0 * alpha.assignment);
            }
        }
    }
    for &(u, v) in g.edges() {
        for c in 0..colors {
            m.add_quadratic(
                color_var(colors, u, c),
                color_var(colors, v, c),
                alpha.adjacency,
            );
        }
    }
    for c in 0..colors {
        m.add_linear(used_var(n, colors, c), alpha.objective);
    }
    Ok(m)
}

/// Spin form `sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset`, s in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Ising {
    pub size: usize,
    /// Row-major, only `i < j` entries are used.
    pub couplings: Vec<f64>,
    pub fields: Vec<f64>,
    pub offset: f64,
}

impl Ising {
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings[a * self.size + b]
    }

    pub fn energy(&self, spins: &[i8]) -> f64 {
        let mut e = self.offset;
        for i in 0..self.size {
            let si = spins[i] as f64;
            e += self.fields[i] * si;
            for j in i + 1..self.size {
                e += self.couplings[i * self.size + j] * si * spins[j] as f64;
            }
        }
        e
    }
}

/// Substitutes `x = (s + 1) / 2`.
pub fn qubo_to_ising(q: &QuboMatrix) -> Ising {
    let n = q.size;
    let mut couplings = vec![0.0; n * n];
    let mut fields = vec![0.0; n];
    let mut offset = q.offset;
    for i in 0..n {
        let d = q.get(i, i);
        fields[i] += d / 2.0;
        offset += d / 2.0;
        for j in i + 1..n {
            let pair = q.get(i, j) + q.get(j, i);
            couplings[i * n + j] = pair / 4.0;
            fields[i] += pair / 4.0;
            fields[j] += pair / 4.0;
            offset += pair / 4.0;
        }
    }
    Ising {
        size: n,
        couplings,
        fields,
        offset,
    }
}

pub fn spins_from_bits(x: &[u8]) -> Vec<i8> {
    x.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuboSample {
    pub bits: Vec<u8>,
    pub energy: f64,
    /// Number of annealing runs that ended in this state.
    pub occurrences: usize,
}

/// Runs `tries` independent single-flip Metropolis anneals with a geometric
/// temperature ladder from `max|Q|` down to a thousandth of it over
/// `100 * size` sweeps. Distinct final states are returned sorted by
/// energy, then bitstring.
pub fn sa_sample(q: &QuboMatrix, tries: usize, seed: u64) -> Result<Vec<QuboSample>> {
    if tries == 0 {
        return Err(Error::InvalidArgument("tries must be at least 1".into()));
    }
    let n = q.size;
    let mut found: Vec<QuboSample> = Vec::new();
    if n == 0 {
        return Ok(vec![QuboSample {
            bits: Vec::new(),
            energy: q.offset,
            occurrences: tries,
        }]);
    }
    let t0 = q.max_abs().max(1e-12);
    let sweeps = 100 * n;
    let ratio = if sweeps > 1 {
        (1e-3f64).powf(1.0 / (sweeps - 1) as f64)
    } else {
        1.0
    };
    // pair[i*n+j] = Q_ij + Q_ji for i != j.
    let pair: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                0.0
            } else {
                q.get(i, j) + q.get(j, i)
            }
        })
        .collect();

    let mut states: Vec<Vec<u8>> = Vec::with_capacity(tries);
    for run in 0..tries {
        let mut rng = rng_from_seed(derive_seed(seed, run as u64));
        let mut x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| x[j] != 0).map(|j| pair[i * n + j]).sum())
            .collect();
        let mut temp = t0;
        for _ in 0..sweeps {
            for i in 0..n {
                let sign = if x[i] == 0 { 1.0 } else { -1.0 };
                let delta = sign * (q.get(i, i) + field[i]);
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                    x[i] ^= 1;
                    let row = &pair[i * n..(i + 1) * n];
                    for (f, p) in field.iter_mut().zip(row) {
                        *f += sign * p;
                    }
                }
            }
            temp *= ratio;
        }
        states.push(x);
    }
    states.sort();
    for x in states {
        match found.last_mut() {
            Some(last) if last.bits == x => last.occurrences += 1,
            _ => {
                let energy = q.energy(&x);
                found.push(QuboSample {
                    bits: x,
                    energy,
                    occurrences: 1,
                });
            }
        }
    }
    found.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then_with(|| a.bits.cmp(&b.bits))
    });
    Ok(found)
}

/// Exhaustive minimum energy and its lowest minimizer (size <= 24).
pub fn brute_force_minimum(q: &QuboMatrix) -> Result<(f64, Vec<u8>)> {
    if q.size > 24 {
        return Err(Error::TooLarge {
            what: "brute_force_minimum",
            n: q.size,
            limit: 24,
        });
    }
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1u32 << q.size) {
        let x: Vec<u8> = (0..q.size).map(|i| (mask >> i & 1) as u8).collect();
        let e = q.energy(&x);
        if e < best.0 - 1e-12 {
            best = (e, x);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::worked_example;
    use crate::oracle::brute_chromatic;
    use proptest::prelude::*;

    #[test]
    fn single_edge_energies() {
        let g = Graph::complete(2);
        let m = mwis_qubo(&g, &[1.0, 1.0], 2.0).unwrap();
        assert_eq!(m.energy(&[1, 0]), -1.0);
        assert_eq!(m.energy(&[1, 1]), 0.0);
        assert!(mwis_qubo(&g, &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn edgeless_minimizer_is_all_ones() {
        let m = mwis_qubo(&Graph::empty(4), &[1.0, 0.5, 2.0, 0.1], 1.0).unwrap();
        assert_eq!(brute_force_minimum(&m).unwrap().1, vec![1; 4]);
    }

    #[test]
    fn worked_example_minimizer_is_maximum_set() {
        let g = worked_example();
        let (e, x) = brute_force_minimum(&mwis_qubo(&g, &[1.0; 5], 5.0).unwrap()).unwrap();
        let set: Vec<usize> = (0..5).filter(|&u| x[u] == 1).collect();
        assert_eq!(e, -3.0);
        assert_eq!(set.len(), 3);
        assert!(g.is_independent_set(&set));
    }

    #[test]
    fn coloring_single_vertex() {
        let ones = ColoringPenalties {
            assignment: 1.0,
            adjacency: 1.0,
            coupling: 1.0,
            objective: 1.0,
        };
        let m = mvcp_qubo(&Graph::empty(1), 1, ones).unwrap();
        assert_eq!(m.size(), 2);
        let (e, _) = brute_force_minimum(&m).unwrap();
        assert_eq!(e, 1.0);
        assert_eq!(m.energy(&[1, 1]), 1.0);
        assert_eq!(m.energy(&[0, 1]), 2.0);
    }

    #[test]
    fn coloring_worked_example_uses_two_colors() {
        let g = worked_example();
        let n = g.n();
        let k = 5;
        let alpha = ColoringPenalties {
            assignment: 10.0,
            adjacency: 10.0,
            coupling: 2.0,
            objective: 1.0,
        };
        let m = mvcp_qubo(&g, k, alpha).unwrap();
        assert_eq!(m.size(), 30);
        // Every proper assignment with y marking exactly the used colors.
        let mut best = (f64::INFINITY, 0);
        let mut colors = vec![0usize; n];
        loop {
            if g.edges().iter().all(|&(u, v)| colors[u] != colors[v]) {
                let mut x = vec![0u8; m.size()];
                for u in 0..n {
                    x[color_var(k, u, colors[u])] = 1;
                    x[used_var(n, k, colors[u])] = 1;
                }
                let used = (0..k).filter(|&c| x[used_var(n, k, c)] == 1).count();
                let e = m.energy(&x);
                assert!((e - used as f64).abs() < 1e-9);
                if e < best.0 {
                    best = (e, used);
                }
            }
            let mut i = 0;
            while i < n && colors[i] == k - 1 {
                colors[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            colors[i] += 1;
        }
        assert_eq!(best.1, brute_chromatic(&g).unwrap().0);
        assert_eq!(best.1, 2);
    }

    #[test]
    fn ising_examples() {
        let z = qubo_to_ising(&QuboMatrix::new(3));
        assert!(z.couplings.iter().chain(&z.fields).all(|&v| v == 0.0));
        assert_eq!(z.offset, 0.0);
        let one = qubo_to_ising(&QuboMatrix::from_dense(1, &[-1.0]).unwrap());
        assert_eq!(one.fields, vec![-0.5]);
        assert_eq!(one.offset, -0.5);
        assert_eq!(one.energy(&[-1]), 0.0);
        assert_eq!(one.energy(&[1]), -1.0);
    }

    #[test]
    fn annealer_examples() {
        let edgeless = mwis_qubo(&Graph::empty(5), &[1.0; 5], 1.0).unwrap();
        let s = sa_sample(&edgeless, 100, 3).unwrap();
        assert_eq!(s[0].bits, vec![1; 5]);
        assert_eq!(s.iter().map(|x| x.occurrences).sum::<usize>(), 100);

        let m = mwis_qubo(&worked_example(), &[1.0; 5], 5.0).unwrap();
        let s = sa_sample(&m, 1000, 11).unwrap();
        assert_eq!(s[0].energy, -3.0);
        assert_eq!(s, sa_sample(&m, 1000, 11).unwrap());

        let one = sa_sample(&m, 1, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].occurrences, 1);
    }

    #[test]
    fn annealer_reaches_ground_state_on_most_seeds() {
        let mut hits = 0;
        let seeds = 20;
        for seed in 0..seeds {
            let g = crate::graph::gen_gnp(8, 0.4, seed).unwrap();
            let w: Vec<f64> = (0..8)
                .map(|u| 0.5 + (u as f64 * 0.37 + seed as f64).sin().abs())
                .collect();
            let m = mwis_qubo(&g, &w, w.iter().sum()).unwrap();
            let (min, _) = brute_force_minimum(&m).unwrap();
            let best = sa_sample(&m, 1000, seed).unwrap()[0].energy;
            assert!(best >= min - 1e-9);
            if (best - min).abs() < 1e-9 {
                hits += 1;
            }
        }
        assert!(hits * 100 >= seeds * 95, "{hits}/{seeds}");
    }

    proptest! {
        #[test]
        fn ising_preserves_energy(data in proptest::collection::vec(-5.0f64..5.0, 36), off in -3.0f64..3.0) {
            let mut m = QuboMatrix::from_dense(6, &data).unwrap();
            m.add_offset(off);
            let ising = qubo_to_ising(&m);
            for mask in 0..64u32 {
                let x: Vec<u8> = (0..6).map(|i| (mask >> i & 1) as u8).collect();
                prop_assert!((m.energy(&x) - ising.energy(&spins_from_bits(&x))).abs() < 1e-9);
            }
        }

        #[test]
        fn dropping_an_endpoint_lowers_energy(n in 2usize..7, seed in 0u64..1000, mask in 0u32..128) {
            let g = crate::graph::gen_gnp(n, 0.5, seed).unwrap();
            let w: Vec<f64> = (0..n).map(|u| 0.1 + ((u as u64 + seed) % 7) as f64 / 3.0).collect();
            let alpha = w.iter().cloned().fold(0.0, f64::max) + 0.01;
            let m = mwis_qubo(&g, &w, alpha).unwrap();
            let x: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
            if let Some(&(_, v)) = g.edges().iter().find(|&&(a, b)| x[a] == 1 && x[b] == 1) {
                let mut y = x.clone();
                y[v] = 0;
                prop_assert!(m.energy(&x) > m.energy(&y));
            }
        }

        #[test]
        fn minimizer_weight_matches_brute_force(n in 1usize..=8, seed in 0u64..500) {
            let g = crate::graph::gen_gnp(n, 0.5, seed).unwrap();
            let w: Vec<f64> = (0..n).map(|u| 0.2 + ((u as u64 * 3 + seed) % 5) as f64 / 2.0).collect();
            let m = mwis_qubo(&g, &w, w.iter().sum::<f64>()).unwrap();
            let (e, _) = brute_force_minimum(&m).unwrap();
            let best = crate::oracle::brute_mwis(&g, &w).unwrap();
            prop_assert!((e + best.weight).abs() < 1e-9);
        }
    }
}
