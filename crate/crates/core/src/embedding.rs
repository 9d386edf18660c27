//! Atom registers: force-directed layout, device scaling, vertex-to-atom
//! remapping, Rabi frequency bounds and the register redesign strategies.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng_from_seed;

const DIST_TOL: f64 = 1e-9;

/// Hardware limits and conversion constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    /// Interaction coefficient, rad/µs·µm⁶.
    pub c6: f64,
    pub min_atom_distance_um: f64,
    pub max_radius_um: f64,
    /// Layout units to micrometres.
    pub layout_scale: f64,
    /// Rabi frequency used when a register has no atom pairs, rad/µs.
    pub default_omega: f64,
}

impl Default for DeviceSpec {
    fn default() -> Self {
        DeviceSpec {
            c6: 5.42e6,
            min_atom_distance_um: 4.0,
            max_radius_um: 50.0,
            layout_scale: 40.0,
            default_omega: 2.0 * std::f64::consts::PI,
        }
    }
}

/// Atom positions in µm and the graph vertex each atom stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    positions: Vec<[f64; 2]>,
    atom_to_vertex: Vec<usize>,
    c6: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterDump {
    pub positions_um: Vec<[f64; 2]>,
    /// 1-based vertex ids, matching the graph file format.
    pub atom_to_vertex: Vec<usize>,
}

impl Register {
    pub fn new(positions: Vec<[f64; 2]>, atom_to_vertex: Vec<usize>, c6: f64) -> Result<Self> {
        if positions.len() != atom_to_vertex.len() {
            return Err(Error::InvalidArgument(format!(
                "{} positions but {} vertex labels",
                positions.len(),
                atom_to_vertex.len()
            )));
        }
        let mut seen = atom_to_vertex.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "atom_to_vertex is not injective".into(),
            ));
        }
        Ok(Register {
            positions,
            atom_to_vertex,
            c6,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn atom_to_vertex(&self) -> &[usize] {
        &self.atom_to_vertex
    }

    pub fn c6(&self) -> f64 {
        self.c6
    }

    pub fn atom_of_vertex(&self, v: usize) -> Option<usize> {
        self.atom_to_vertex.iter().position(|&x| x == v)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        dist(self.positions[a], self.positions[b])
    }

    /// Van der Waals interaction `C6 / d^6` between two atoms.
    pub fn interaction(&self, a: usize, b: usize) -> f64 {
        self.c6 / self.distance(a, b).powi(6)
    }

    /// Distance below which two atoms cannot both be excited at drive `omega`.
    pub fn blockade_radius(&self, omega: f64) -> f64 {
        (self.c6 / omega).powf(1.0 / 6.0)
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid(&self.positions)
    }

    pub fn min_distance(&self) -> f64 {
        min_pair_distance(&self.positions)
    }

    pub fn max_radius(&self) -> f64 {
        let c = self.centroid();
        self.positions
            .iter()
            .map(|&p| dist(p, c))
            .fold(0.0, f64::max)
    }

    /// Keeps the listed atoms, in the given order.
    pub fn subset(&self, atoms: &[usize]) -> Register {
        Register {
            positions: atoms.iter().map(|&a| self.positions[a]).collect(),
            atom_to_vertex: atoms.iter().map(|&a| self.atom_to_vertex[a]).collect(),
            c6: self.c6,
        }
    }

    pub fn dump(&self) -> RegisterDump {
        RegisterDump {
            positions_um: self.positions.clone(),
            atom_to_vertex: self.atom_to_vertex.iter().map(|v| v + 1).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("register serializes")
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    if points.is_empty() {
        return [0.0, 0.0];
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    [sx / n, sy / n]
}

fn min_pair_distance(points: &[[f64; 2]]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            m = m.min(dist(points[i], points[j]));
        }
    }
    m
}

/// Fruchterman-Reingold layout centred on the origin.
pub fn fr_layout(g: &Graph, iterations: usize, area: f64, seed: u64) -> Vec<[f64; 2]> {
    fr_layout_traced(g, iterations, area, seed).0
}

/// As [`fr_layout`], also returning the total force magnitude seen at each
/// iteration.
pub fn fr_layout_traced(
    g: &Graph,
    iterations: usize,
    area: f64,
    seed: u64,
) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = g.n();
    if n <= 1 {
        return (vec![[0.0, 0.0]; n], vec![0.0; iterations]);
    }
    let mut rng = rng_from_seed(seed);
    let side = area.sqrt();
    let k = (area / n as f64).sqrt();
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen::<f64>() * side, rng.gen::<f64>() * side])
        .collect();
    let t0 = side / 10.0;
    let mut residuals = Vec::with_capacity(iterations);

    for it in 0..iterations {
        let mut disp = vec![[0.0f64; 2]; n];
        for u in 0..n {
            for v in u + 1..n {
                let (dir, d) = direction(pos[u], pos[v], &mut rng);
                let f = k * k / d;
                disp[u][0] += dir[0] * f;
                disp[u][1] += dir[1] * f;
                disp[v][0] -= dir[0] * f;
                disp[v][1] -= dir[1] * f;
            }
        }
        for &(u, v) in g.edges() {
            let (dir, d) = direction(pos[u], pos[v], &mut rng);
            let f = d * d / k;
            disp[u][0] -= dir[0] * f;
            disp[u][1] -= dir[1] * f;
            disp[v][0] += dir[0] * f;
            disp[v][1] += dir[1] * f;
        }
        residuals.push(disp.iter().map(|d| d[0].hypot(d[1])).sum());
        let temp = t0 * (1.0 - it as f64 / iterations as f64);
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temp) / len;
                p[0] += d[0] * step;
                p[1] += d[1] * step;
            }
        }
    }
    let c = centroid(&pos);
    for p in &mut pos {
        p[0] -= c[0];
        p[1] -= c[1];
    }
    (pos, residuals)
}

/// Unit vector from `b` to `a` and the distance; coincident points get a
/// random direction and a tiny distance.
fn direction(a: [f64; 2], b: [f64; 2], rng: &mut crate::rng::Rng) -> ([f64; 2], f64) {
    let d = dist(a, b);
    if d > 1e-12 {
        ([(a[0] - b[0]) / d, (a[1] - b[1]) / d], d)
    } else {
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        ([angle.cos(), angle.sin()], 1e-6)
    }
}

/// Converts layout coordinates to µm (identity vertex labels) and applies
/// one global rescale if the result breaks the spacing or radius limits.
pub fn scale_to_device(positions: &[[f64; 2]], spec: &DeviceSpec) -> Result<Register> {
    let labels = (0..positions.len()).collect();
    scale_labeled(positions, labels, spec)
}

pub fn scale_labeled(
    positions: &[[f64; 2]],
    atom_to_vertex: Vec<usize>,
    spec: &DeviceSpec,
) -> Result<Register> {
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if dist(positions[i], positions[j]) < 1e-12 {
                return Err(Error::DegenerateLayout(i, j));
            }
        }
    }
    let mut pos: Vec<[f64; 2]> = positions
        .iter()
        .map(|p| [p[0] * spec.layout_scale, p[1] * spec.layout_scale])
        .collect();
    let c = centroid(&pos);
    let radius = pos.iter().map(|&p| dist(p, c)).fold(0.0, f64::max);
    let min_d = min_pair_distance(&pos);
    let factor = if min_d < spec.min_atom_distance_um {
        spec.min_atom_distance_um / min_d
    } else if radius > spec.max_radius_um {
        let shrink = spec.max_radius_um / radius;
        if min_d * shrink < spec.min_atom_distance_um {
            return Err(Error::DeviceConstraint(format!(
                "radius {radius:.2} um cannot be reduced to {} um without breaking the {} um spacing",
                spec.max_radius_um, spec.min_atom_distance_um
            )));
        }
        shrink
    } else {
        1.0
    };
    if factor != 1.0 {
        for p in &mut pos {
            p[0] = c[0] + (p[0] - c[0]) * factor;
            p[1] = c[1] + (p[1] - c[1]) * factor;
        }
        let radius = pos.iter().map(|&p| dist(p, c)).fold(0.0, f64::max);
        if radius > spec.max_radius_um + 1e-9 {
            return Err(Error::DeviceConstraint(format!(
                "spacing forces radius {radius:.2} um above {} um",
                spec.max_radius_um
            )));
        }
    }
    Register::new(pos, atom_to_vertex, spec.c6)
}

/// Places the positive-weight vertices of `weights` onto atoms of `reg`:
/// heaviest first on the atom farthest from the centroid, then each next
/// vertex on the free atom farthest from all atoms already used. Unused
/// atoms are dropped; atoms of the result are ordered by vertex id.
pub fn remap_vertices(reg: &Register, weights: &[f64]) -> Result<Register> {
    let mut order: Vec<usize> = (0..weights.len()).filter(|&u| weights[u] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    if order.len() > reg.len() {
        return Err(Error::NotEnoughAtoms {
            atoms: reg.len(),
            needed: order.len(),
        });
    }
    let c = reg.centroid();
    let mut used = vec![false; reg.len()];
    let mut placed: Vec<(usize, usize)> = Vec::with_capacity(order.len());
    for &v in &order {
        let mut best: Option<(usize, f64)> = None;
        for a in (0..reg.len()).filter(|&a| !used[a]) {
            let score = if placed.is_empty() {
                dist(reg.positions[a], c)
            } else {
                placed
                    .iter()
                    .map(|&(_, b)| reg.distance(a, b))
                    .fold(f64::INFINITY, f64::min)
            };
            if best.map_or(true, |(_, s)| score > s + DIST_TOL) {
                best = Some((a, score));
            }
        }
        let (a, _) = best.expect("enough atoms checked above");
        used[a] = true;
        placed.push((v, a));
    }
    placed.sort_unstable();
    Register::new(
        placed.iter().map(|&(_, a)| reg.positions[a]).collect(),
        placed.iter().map(|&(v, _)| v).collect(),
        reg.c6,
    )
}

/// Interaction scale of a register relative to the graph it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaBounds {
    /// Weakest interaction along an edge.
    pub omega_c: Option<f64>,
    /// Strongest interaction across a non-edge.
    pub omega_d: Option<f64>,
    pub omega_max: f64,
}

/// Edge and non-edge interaction extremes over the register's atom pairs,
/// with `omega_max` the larger of the two (or the device default when the
/// register has no pairs).
pub fn omega_bounds(g: &Graph, reg: &Register, spec: &DeviceSpec) -> OmegaBounds {
    let mut omega_c: Option<f64> = None;
    let mut omega_d: Option<f64> = None;
    for a in 0..reg.len() {
        for b in a + 1..reg.len() {
            let u = reg.interaction(a, b);
            if g.has_edge(reg.atom_to_vertex[a], reg.atom_to_vertex[b]) {
                omega_c = Some(omega_c.map_or(u, |x| x.min(u)));
            } else {
                omega_d = Some(omega_d.map_or(u, |x| x.max(u)));
            }
        }
    }
    let omega_max = match (omega_c, omega_d) {
        (Some(c), Some(d)) => c.max(d),
        (Some(c), None) => c,
        (None, Some(d)) => d,
        (None, None) => spec.default_omega,
    };
    OmegaBounds {
        omega_c,
        omega_d,
        omega_max,
    }
}

/// How the register and pulse are adapted to each pricing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Redesign {
    #[serde(rename = "ar")]
    AtomRemoval,
    #[serde(rename = "aipr")]
    Remap,
    #[serde(rename = "ar-hdr")]
    AtomRemovalRescaled,
    #[serde(rename = "aipr-hdr")]
    RemapRescaled,
}

impl Redesign {
    pub const ALL: [Redesign; 4] = [
        Redesign::AtomRemoval,
        Redesign::Remap,
        Redesign::AtomRemovalRescaled,
        Redesign::RemapRescaled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Redesign::AtomRemoval => "ar",
            Redesign::Remap => "aipr",
            Redesign::AtomRemovalRescaled => "ar-hdr",
            Redesign::RemapRescaled => "aipr-hdr",
        }
    }

    fn remaps(self) -> bool {
        matches!(self, Redesign::Remap | Redesign::RemapRescaled)
    }

    fn rescales(self) -> bool {
        matches!(
            self,
            Redesign::AtomRemovalRescaled | Redesign::RemapRescaled
        )
    }
}

impl fmt::Display for Redesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Redesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Redesign::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown redesign strategy {s:?}")))
    }
}

/// Register and Rabi frequency for one pricing problem. `base` covers all
/// vertices of `g`; `weights` has one entry per vertex of `g`.
pub fn apply_redesign(
    strategy: Redesign,
    base: &Register,
    base_omega_max: f64,
    g: &Graph,
    weights: &[f64],
    spec: &DeviceSpec,
) -> Result<(Register, f64)> {
    let reg = if strategy.remaps() {
        remap_vertices(base, weights)?
    } else {
        let keep: Vec<usize> = (0..base.len())
            .filter(|&a| weights[base.atom_to_vertex[a]] > 0.0)
            .collect();
        base.subset(&keep)
    };
    let omega = if strategy.rescales() {
        omega_bounds(g, &reg, spec).omega_max
    } else {
        base_omega_max
    };
    Ok((reg, omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::worked_example;
    use crate::graph::gen_unit_disk;

    fn spec() -> DeviceSpec {
        DeviceSpec::default()
    }

    #[test]
    fn layout_single_vertex_at_origin() {
        assert_eq!(fr_layout(&Graph::empty(1), 50, 1.0, 3), vec![[0.0, 0.0]]);
    }

    #[test]
    fn layout_triangle_is_equilateral() {
        let p = fr_layout(&Graph::complete(3), 200, 1.0, 5);
        let d = [dist(p[0], p[1]), dist(p[1], p[2]), dist(p[0], p[2])];
        let (lo, hi) = (
            d.iter().cloned().fold(f64::INFINITY, f64::min),
            d.iter().cloned().fold(0.0, f64::max),
        );
        assert!((hi - lo) / hi < 0.05, "{d:?}");
    }

    #[test]
    fn layout_forces_decay() {
        let (mut early, mut late) = (0.0, 0.0);
        for seed in 0..20 {
            let g = crate::graph::gen_gnp(8, 0.4, seed).unwrap();
            let (_, r) = fr_layout_traced(&g, 50, 1.0, seed);
            early += r[4];
            late += r[49];
        }
        assert!(late < early, "{late} vs {early}");
    }

    #[test]
    fn layout_is_deterministic() {
        let g = worked_example();
        assert_eq!(fr_layout(&g, 50, 1.0, 9), fr_layout(&g, 50, 1.0, 9));
    }

    #[test]
    fn scaling_examples() {
        let r = scale_to_device(&[[0.0, 0.0], [1.0, 0.0]], &spec()).unwrap();
        assert!((r.distance(0, 1) - 40.0).abs() < 1e-12);
        let r = scale_to_device(&[[0.0, 0.0], [0.05, 0.0]], &spec()).unwrap();
        assert!((r.distance(0, 1) - 4.0).abs() < 1e-12);
        let r = scale_to_device(&[[0.0, 0.0], [0.3, 0.0], [0.0, 0.3]], &spec()).unwrap();
        assert!((r.distance(0, 1) - 12.0).abs() < 1e-12);
        assert!(matches!(
            scale_to_device(&[[0.1, 0.1], [0.1, 0.1]], &spec()),
            Err(Error::DegenerateLayout(0, 1))
        ));
    }

    #[test]
    fn oversized_layouts_shrink_or_fail() {
        let r = scale_to_device(&[[-2.0, 0.0], [2.0, 0.0]], &spec()).unwrap();
        assert!((r.max_radius() - 50.0).abs() < 1e-9);
        let line: Vec<[f64; 2]> = (0..40).map(|i| [i as f64 * 0.1, 0.0]).collect();
        assert!(matches!(
            scale_to_device(&line, &spec()),
            Err(Error::DeviceConstraint(_))
        ));
    }

    fn grid_register() -> Register {
        let pos: Vec<[f64; 2]> = (0..9)
            .map(|i| [(i % 3) as f64 * 10.0, (i / 3) as f64 * 10.0])
            .collect();
        Register::new(pos, (0..9).collect(), spec().c6).unwrap()
    }

    #[test]
    fn remap_spreads_heavy_vertices() {
        let reg = grid_register();
        let w = [1.0, 2.0, 3.0, 4.0, 5.0];
        let out = remap_vertices(&reg, &w).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out.atom_to_vertex(), &[0, 1, 2, 3, 4]);
        // Vertex 4 (weight 5) sits on a corner, the farthest atoms from the centre.
        let heavy = out.positions()[4];
        assert!((dist(heavy, reg.centroid()) - 200f64.sqrt()).abs() < 1e-9);
        // The next three go to the remaining corners.
        for v in 1..4 {
            assert!((dist(out.positions()[v], reg.centroid()) - 200f64.sqrt()).abs() < 1e-9);
        }
        assert!(out.min_distance() >= 10.0 - 1e-9);
    }

    #[test]
    fn remap_edge_cases() {
        let reg = grid_register();
        let mut w = vec![0.0; 9];
        w[6] = 1.0;
        let one = remap_vertices(&reg, &w).unwrap();
        assert_eq!(one.atom_to_vertex(), &[6]);
        assert_eq!(one.positions()[0], reg.positions()[0]);
        assert!(remap_vertices(&reg, &[-1.0, 0.0]).unwrap().is_empty());
        assert!(matches!(
            remap_vertices(&reg, &[1.0; 10]),
            Err(Error::NotEnoughAtoms {
                atoms: 9,
                needed: 10
            })
        ));
    }

    #[test]
    fn omega_bound_examples() {
        let c6 = spec().c6;
        let pair = Register::new(vec![[0.0, 0.0], [8.0, 0.0]], vec![0, 1], c6).unwrap();
        let b = omega_bounds(&Graph::complete(2), &pair, &spec());
        assert_eq!(b.omega_c, Some(c6 / 8f64.powi(6)));
        assert_eq!(b.omega_d, None);
        assert_eq!(b.omega_max, b.omega_c.unwrap());

        let h = 8.0 * 3f64.sqrt() / 2.0;
        let tri = Register::new(vec![[0.0, 0.0], [8.0, 0.0], [4.0, h]], vec![0, 1, 2], c6).unwrap();
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let b = omega_bounds(&path, &tri, &spec());
        assert!((b.omega_d.unwrap() - c6 / 8f64.powi(6)).abs() < 1e-9);

        let single = Register::new(vec![[0.0, 0.0]], vec![0], c6).unwrap();
        assert_eq!(
            omega_bounds(&Graph::empty(1), &single, &spec()).omega_max,
            spec().default_omega
        );
    }

    #[test]
    fn unit_disk_registers_separate_edges_from_non_edges() {
        for seed in 0..10 {
            let ud = gen_unit_disk(7, 0.5, seed).unwrap();
            let reg = scale_to_device(&ud.positions, &spec()).unwrap();
            let b = omega_bounds(&ud.graph, &reg, &spec());
            if let (Some(c), Some(d)) = (b.omega_c, b.omega_d) {
                assert!(c >= d, "seed {seed}: {c} < {d}");
            }
        }
    }

    #[test]
    fn omega_bounds_scale_as_inverse_sixth_power() {
        let g = worked_example();
        let reg = scale_to_device(&fr_layout(&g, 50, 1.0, 2), &spec()).unwrap();
        let b = omega_bounds(&g, &reg, &spec());
        let scaled: Vec<[f64; 2]> = reg
            .positions()
            .iter()
            .map(|p| [p[0] * 2.0, p[1] * 2.0])
            .collect();
        let reg2 = Register::new(scaled, reg.atom_to_vertex().to_vec(), reg.c6()).unwrap();
        let b2 = omega_bounds(&g, &reg2, &spec());
        assert!(
            (b2.omega_c.unwrap() * 64.0 - b.omega_c.unwrap()).abs() < 1e-9 * b.omega_c.unwrap()
        );
        assert!(
            (b2.omega_d.unwrap() * 64.0 - b.omega_d.unwrap()).abs() < 1e-9 * b.omega_d.unwrap()
        );
    }

    #[test]
    fn redesign_strategies() {
        let g = worked_example();
        let base = scale_to_device(&fr_layout(&g, 50, 1.0, 1), &spec()).unwrap();
        let omega = omega_bounds(&g, &base, &spec()).omega_max;
        let (r, o) =
            apply_redesign(Redesign::AtomRemoval, &base, omega, &g, &[1.0; 5], &spec()).unwrap();
        assert_eq!(r, base);
        assert_eq!(o, omega);

        let w = [1.0, -0.5, 1.0, 0.5, 0.0];
        let (ar, o_ar) =
            apply_redesign(Redesign::AtomRemoval, &base, omega, &g, &w, &spec()).unwrap();
        let (hdr, o_hdr) =
            apply_redesign(Redesign::AtomRemovalRescaled, &base, omega, &g, &w, &spec()).unwrap();
        assert_eq!(ar, hdr);
        assert_eq!(ar.atom_to_vertex(), &[0, 2, 3]);
        assert_eq!(o_ar, omega);
        assert_eq!(o_hdr, omega_bounds(&g, &ar, &spec()).omega_max);

        let (aipr, _) = apply_redesign(Redesign::Remap, &base, omega, &g, &w, &spec()).unwrap();
        assert_eq!(aipr.atom_to_vertex(), &[0, 2, 3]);
        assert_eq!(
            "aipr-hdr".parse::<Redesign>().unwrap(),
            Redesign::RemapRescaled
        );
        assert!("x".parse::<Redesign>().is_err());
    }

    #[test]
    fn remapping_spreads_atoms_at_least_as_well() {
        let (mut wins, mut losses) = (0u32, 0u32);
        for seed in 0..100u64 {
            let g = crate::graph::gen_gnp(8, 0.5, seed).unwrap();
            let base = scale_to_device(&fr_layout(&g, 50, 1.0, seed), &spec()).unwrap();
            let w: Vec<f64> = (0..8)
                .map(|u| ((u as u64 * 7 + seed * 13) % 5) as f64 - 1.0)
                .collect();
            if w.iter().filter(|&&x| x > 0.0).count() < 2 {
                continue;
            }
            let (ar, _) =
                apply_redesign(Redesign::AtomRemoval, &base, 1.0, &g, &w, &spec()).unwrap();
            let (aipr, _) = apply_redesign(Redesign::Remap, &base, 1.0, &g, &w, &spec()).unwrap();
            let (a, b) = (aipr.min_distance(), ar.min_distance());
            if a > b + 1e-9 {
                wins += 1;
            } else if a < b - 1e-9 {
                losses += 1;
            }
        }
        // One-sided sign test at the 5% level.
        let n = wins + losses;
        let p_value: f64 = (wins..=n).map(|k| binomial(n, k)).sum::<f64>() / 2f64.powi(n as i32);
        assert!(p_value < 0.05, "wins {wins} losses {losses}");
    }

    fn binomial(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn dump_is_one_based() {
        let reg = Register::new(vec![[0.0, 0.0], [5.0, 0.0]], vec![0, 3], spec().c6).unwrap();
        let v: serde_json::Value = serde_json::from_str(&reg.to_json()).unwrap();
        assert_eq!(v["atom_to_vertex"], serde_json::json!([1, 4]));
        assert_eq!(v["positions_um"][1], serde_json::json!([5.0, 0.0]));
    }
}
