//! The pricing step: given the master problem's duals, find independent
//! sets whose dual weight exceeds one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::embedding::{
    apply_redesign, fr_layout, omega_bounds, scale_to_device, DeviceSpec, Redesign, Register,
};
use crate::emulator::{
    adiabatic_schedule, apply_spam, evolve, sample, RydbergHamiltonian, SampleSet, SpamParams,
    DEFAULT_DURATION_US, DEFAULT_SHOTS,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mwis::max_weight_independent_set;
use crate::qubo::{mwis_qubo, sa_sample};
use crate::rng::{derive_seed, rng_from_seed};

/// Slack on the "weight strictly above one" rule.
pub const PRICING_TOL: f64 = 1e-9;

/// An independent set of the original graph with its dual weight when it
/// was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

impl Column {
    pub fn incidence(&self, n: usize) -> Vec<u8> {
        let mut x = vec![0; n];
        for &u in &self.vertices {
            x[u] = 1;
        }
        x
    }
}

/// `1 - sum of duals over the set`.
pub fn reduced_cost(set: &[usize], duals: &[f64]) -> f64 {
    1.0 - set_weight(set, duals)
}

pub fn set_weight(set: &[usize], weights: &[f64]) -> f64 {
    set.iter().map(|&u| weights[u]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Greedy,
    Sa,
    Quantum,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::Exact,
        Backend::Greedy,
        Backend::Sa,
        Backend::Quantum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Greedy => "greedy",
            Backend::Sa => "sa",
            Backend::Quantum => "quantum",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown pricer {s:?}")))
    }
}

/// Which of the sampled independent sets are returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    /// The set with the most vertices.
    Largest = 1,
    /// Every distinct set.
    All = 2,
    /// Every set with weight above `w_min`.
    AboveThreshold = 3,
    /// The heaviest set.
    MostWeighted = 4,
}

impl TryFrom<u8> for OutputMode {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(OutputMode::Largest),
            2 => Ok(OutputMode::All),
            3 => Ok(OutputMode::AboveThreshold),
            4 => Ok(OutputMode::MostWeighted),
            _ => Err(Error::InvalidArgument(format!(
                "output mode must be 1-4, got {v}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricerConfig {
    pub backend: Backend,
    /// Attempts for the greedy and annealing backends.
    pub tries: usize,
    pub w_min: f64,
    pub output_mode: OutputMode,
    pub redesign: Redesign,
    pub shots: usize,
    pub duration_us: f64,
    /// Lower bound on `Ω_max · T` in radians; the sweep is lengthened
    /// when the register's drive is too weak to reach it.
    pub min_pulse_area: Option<f64>,
    pub dt: Option<f64>,
    pub noise: Option<SpamParams>,
    pub seed: u64,
    pub device: DeviceSpec,
    pub layout_iterations: usize,
}

impl Default for PricerConfig {
    fn default() -> Self {
        PricerConfig {
            backend: Backend::Exact,
            tries: 1000,
            w_min: 1.0,
            output_mode: OutputMode::AboveThreshold,
            redesign: Redesign::AtomRemovalRescaled,
            shots: DEFAULT_SHOTS,
            duration_us: DEFAULT_DURATION_US,
            min_pulse_area: None,
            dt: None,
            noise: None,
            seed: 0,
            device: DeviceSpec::default(),
            layout_iterations: 50,
        }
    }
}

impl PricerConfig {
    pub fn with_backend(backend: Backend) -> Self {
        PricerConfig {
            backend,
            ..Self::default()
        }
    }
}

/// Result of one pricing call.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PricingOutcome {
    pub columns: Vec<Column>,
    /// Distinct independent sets the backend produced before filtering.
    pub candidates: usize,
    /// Fraction of shots that were independent sets (quantum only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

/// Repeated greedy construction: pick a uniformly random remaining vertex,
/// keep it, delete it and its neighbours, until nothing remains. Returns
/// the distinct sets with weight above `w_min` in the order found.
pub fn random_greedy_is(
    g: &Graph,
    weights: &[f64],
    w_min: f64,
    tries: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let mut rng = rng_from_seed(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..tries {
        let mut alive = vec![true; g.n()];
        let mut remaining: Vec<usize> = (0..g.n()).collect();
        let mut set = Vec::new();
        while let Some(&u) = remaining.choose(&mut rng) {
            set.push(u);
            alive[u] = false;
            for &v in g.neighbors(u) {
                alive[v] = false;
            }
            remaining.retain(|&v| alive[v]);
        }
        set.sort_unstable();
        if set_weight(&set, weights) > w_min && seen.insert(set.clone()) {
            out.push(set);
        }
    }
    out
}

/// Prices columns for one graph; holds the base register so the layout
/// is computed once per run.
#[derive(Debug, Clone)]
pub struct Pricer {
    graph: Graph,
    config: PricerConfig,
    base: Option<(Register, f64)>,
}

impl Pricer {
    pub fn new(graph: &Graph, config: PricerConfig) -> Result<Self> {
        if config.tries == 0 {
            return Err(Error::InvalidArgument("tries must be at least 1".into()));
        }
        let base = if config.backend == Backend::Quantum {
            let reg = device_layout(graph, &config)?;
            let omega = omega_bounds(graph, &reg, &config.device).omega_max;
            Some((reg, omega))
        } else {
            None
        };
        Ok(Pricer {
            graph: graph.clone(),
            config,
            base,
        })
    }

    /// Uses a given register (atom `i` labelled with its vertex) instead of
    /// the force-directed layout.
    pub fn with_register(graph: &Graph, config: PricerConfig, reg: Register) -> Result<Self> {
        if config.tries == 0 {
            return Err(Error::InvalidArgument("tries must be at least 1".into()));
        }
        let omega = omega_bounds(graph, &reg, &config.device).omega_max;
        Ok(Pricer {
            graph: graph.clone(),
            config,
            base: Some((reg, omega)),
        })
    }

    pub fn config(&self) -> &PricerConfig {
        &self.config
    }

    /// Base register and its Rabi frequency (quantum backend only).
    pub fn base(&self) -> Option<(&Register, f64)> {
        self.base.as_ref().map(|(r, o)| (r, *o))
    }

    /// Finds new columns for `duals`. `round` selects the random stream;
    /// sets already in `known` are never returned.
    pub fn price(
        &self,
        duals: &[f64],
        round: u64,
        known: &BTreeSet<Vec<usize>>,
    ) -> Result<PricingOutcome> {
        let g = &self.graph;
        if duals.len() != g.n() {
            return Err(Error::InvalidArgument(format!(
                "{} duals for {} vertices",
                duals.len(),
                g.n()
            )));
        }
        let sub = g.induced_positive_subgraph(duals)?;
        if sub.graph.n() == 0 {
            return Ok(PricingOutcome::default());
        }
        let seed = derive_seed(self.config.seed, round);
        let local_w: Vec<f64> = sub.original.iter().map(|&u| duals[u]).collect();
        let mut outcome = PricingOutcome::default();
        let sets: Vec<Vec<usize>> = match self.config.backend {
            Backend::Exact => {
                let best = max_weight_independent_set(&sub.graph, &local_w)?;
                vec![sub.to_original(&best.vertices)]
            }
            Backend::Greedy => random_greedy_is(
                &sub.graph,
                &local_w,
                self.config.w_min,
                self.config.tries,
                seed,
            )
            .iter()
            .map(|s| sub.to_original(s))
            .collect(),
            Backend::Sa => {
                let alpha: f64 = duals.iter().map(|w| w.abs()).sum();
                let q = mwis_qubo(&sub.graph, &local_w, alpha)?;
                sa_sample(&q, self.config.tries, seed)?
                    .into_iter()
                    .map(|s| {
                        (0..s.bits.len())
                            .filter(|&i| s.bits[i] == 1)
                            .collect::<Vec<_>>()
                    })
                    .filter(|s| !s.is_empty() && sub.graph.is_independent_set(s))
                    .filter(|s| set_weight(s, &local_w) > self.config.w_min)
                    .map(|s| sub.to_original(&s))
                    .collect()
            }
            Backend::Quantum => {
                let (base, base_omega) = self.base.as_ref().expect("quantum pricer has a register");
                let (reg, omega) = apply_redesign(
                    self.config.redesign,
                    base,
                    *base_omega,
                    g,
                    duals,
                    &self.config.device,
                )?;
                outcome.atoms = Some(reg.len());
                outcome.omega_max = Some(omega);
                let samples = sample_register(&reg, omega, &self.config, seed)?;
                let (valid, fraction) = valid_sets(g, &reg, &samples);
                outcome.valid_fraction = Some(fraction);
                select_output(valid, duals, self.config.output_mode, self.config.w_min)
            }
        };
        outcome.candidates = sets.len();
        let mut seen = BTreeSet::new();
        let mut columns: Vec<Column> = sets
            .into_iter()
            .filter(|s| !s.is_empty() && !known.contains(s))
            .filter(|s| reduced_cost(s, duals) < -PRICING_TOL)
            .filter(|s| seen.insert(s.clone()))
            .map(|s| Column {
                weight: set_weight(&s, duals),
                vertices: s,
            })
            .collect();
        debug_assert!(columns.iter().all(|c| g.is_independent_set(&c.vertices)));
        columns.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.vertices.cmp(&b.vertices))
        });
        outcome.columns = columns;
        Ok(outcome)
    }
}

/// Layout attempts before giving up on the device limits.
pub const LAYOUT_ATTEMPTS: u64 = 10;

/// Force-directed register for `g`. Layouts that cannot be scaled onto the
/// device are retried with derived seeds.
pub fn device_layout(g: &Graph, config: &PricerConfig) -> Result<Register> {
    let mut last = None;
    for attempt in 0..LAYOUT_ATTEMPTS {
        let seed = if attempt == 0 {
            config.seed
        } else {
            derive_seed(config.seed, u64::MAX - attempt)
        };
        let layout = fr_layout(g, config.layout_iterations, 1.0, seed);
        match scale_to_device(&layout, &config.device) {
            Ok(reg) => return Ok(reg),
            Err(e @ (Error::DeviceConstraint(_) | Error::DegenerateLayout(..))) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Sweep length for drive `omega`: the configured duration, stretched to
/// reach `min_pulse_area` when one is set.
pub fn sweep_duration(config: &PricerConfig, omega: f64) -> f64 {
    match config.min_pulse_area {
        Some(area) if omega > 0.0 => config.duration_us.max(area / omega),
        _ => config.duration_us,
    }
}

/// Adiabatic sweep of `reg` at drive `omega`, measured `shots` times with
/// optional readout noise.
pub fn sample_register(
    reg: &Register,
    omega: f64,
    config: &PricerConfig,
    seed: u64,
) -> Result<SampleSet> {
    let h = RydbergHamiltonian::new(reg)?;
    let schedule = adiabatic_schedule(omega, sweep_duration(config, omega))?;
    let state = evolve(&h, &schedule, config.dt)?;
    let samples = sample(&state, config.shots, derive_seed(seed, 0))?;
    match &config.noise {
        Some(spam) => apply_spam(&samples, spam, derive_seed(seed, 1)),
        None => Ok(samples),
    }
}

/// Nonempty measured sets that are independent in `g`, with counts, and
/// the fraction of all shots (including empty ones) that were independent.
pub fn valid_sets(
    g: &Graph,
    reg: &Register,
    samples: &SampleSet,
) -> (Vec<(Vec<usize>, usize)>, f64) {
    let mut valid = BTreeMap::new();
    let mut ok_shots = 0;
    for (&s, &count) in &samples.counts {
        let mut set: Vec<usize> = SampleSet::excited_atoms(s)
            .into_iter()
            .map(|a| reg.atom_to_vertex()[a])
            .collect();
        set.sort_unstable();
        if g.is_independent_set(&set) {
            ok_shots += count;
            if !set.is_empty() {
                *valid.entry(set).or_insert(0) += count;
            }
        }
    }
    let fraction = ok_shots as f64 / samples.shots.max(1) as f64;
    (valid.into_iter().collect(), fraction)
}

/// Applies an output mode to counted sets. Ties in the single-set modes go
/// to the more frequent set, then the lexicographically smaller one.
pub fn select_output(
    sets: Vec<(Vec<usize>, usize)>,
    weights: &[f64],
    mode: OutputMode,
    w_min: f64,
) -> Vec<Vec<usize>> {
    let pick_best = |key: &dyn Fn(&Vec<usize>) -> f64| -> Vec<Vec<usize>> {
        sets.iter()
            .max_by(|a, b| {
                key(&a.0)
                    .total_cmp(&key(&b.0))
                    .then(a.1.cmp(&b.1))
                    .then_with(|| b.0.cmp(&a.0))
            })
            .map(|(s, _)| vec![s.clone()])
            .unwrap_or_default()
    };
    match mode {
        OutputMode::Largest => pick_best(&|s| s.len() as f64),
        OutputMode::MostWeighted => pick_best(&|s| set_weight(s, weights)),
        OutputMode::All => sets.iter().map(|(s, _)| s.clone()).collect(),
        OutputMode::AboveThreshold => sets
            .iter()
            .filter(|(s, _)| set_weight(s, weights) > w_min)
            .map(|(s, _)| s.clone())
            .collect(),
    }
}
