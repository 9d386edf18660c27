//! State-vector emulation of a driven Rydberg register.
//!
//! `H(t) = Ω(t) Σ_u σx_u − δ(t) Σ_u n_u + Σ_{u<v} U_uv n_u n_v` with
//! `U_uv = C6 / d_uv^6` and ħ = 1. Basis index bit `u` set means atom `u`
//! is in the Rydberg state.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::embedding::Register;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const MAX_ATOMS: usize = 16;
/// Upper bound on `‖H‖ dt` for the integrator.
pub const STEP_NORM: f64 = 0.05;
const DRIFT_LIMIT: f64 = 1e-4;

/// The time-independent parts of the Hamiltonian for one register.
#[derive(Debug, Clone)]
pub struct RydbergHamiltonian {
    atoms: usize,
    interaction: Vec<f64>,
    excitations: Vec<f64>,
}

impl RydbergHamiltonian {
    pub fn new(reg: &Register) -> Result<Self> {
        let m = reg.len();
        if m > MAX_ATOMS {
            return Err(Error::TooLarge {
                what: "emulated register",
                n: m,
                limit: MAX_ATOMS,
            });
        }
        let dim = 1usize << m;
        let mut interaction = vec![0.0; dim];
        for a in 0..m {
            for b in a + 1..m {
                let u = reg.interaction(a, b);
                let mask = (1usize << a) | (1usize << b);
                for (s, e) in interaction.iter_mut().enumerate() {
                    if s & mask == mask {
                        *e += u;
                    }
                }
            }
        }
        let excitations = (0..dim).map(|s| (s as u32).count_ones() as f64).collect();
        Ok(RydbergHamiltonian {
            atoms: m,
            interaction,
            excitations,
        })
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn dim(&self) -> usize {
        self.interaction.len()
    }

    /// `⟨s|H|s⟩` for basis state `s`.
    pub fn diagonal(&self, s: usize, delta: f64) -> f64 {
        self.interaction[s] - delta * self.excitations[s]
    }

    /// Gershgorin bound on `‖H‖` for drive values up to the given maxima.
    pub fn norm_bound(&self, max_omega: f64, max_abs_delta: f64) -> f64 {
        let diag = self
            .interaction
            .iter()
            .zip(&self.excitations)
            .map(|(u, k)| u.abs() + max_abs_delta * k)
            .fold(0.0, f64::max);
        diag + self.atoms as f64 * max_omega.abs()
    }

    /// Midpoint of the diagonal's range for detunings within
    /// `±max_abs_delta`, and the Gershgorin bound on `‖H - shift·I‖`.
    /// Subtracting the shift only changes the global phase.
    pub fn shifted_norm_bound(&self, max_omega: f64, max_abs_delta: f64) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (u, k) in self.interaction.iter().zip(&self.excitations) {
            lo = lo.min(u - max_abs_delta * k);
            hi = hi.max(u + max_abs_delta * k);
        }
        let shift = 0.5 * (lo + hi);
        (shift, 0.5 * (hi - lo) + self.atoms as f64 * max_omega.abs())
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], omega: f64, delta: f64, out: &mut [Complex64]) {
        self.apply_shifted(psi, omega, delta, 0.0, out);
    }

    fn apply_shifted(
        &self,
        psi: &[Complex64],
        omega: f64,
        delta: f64,
        shift: f64,
        out: &mut [Complex64],
    ) {
        for (((o, p), u), k) in out
            .iter_mut()
            .zip(psi)
            .zip(&self.interaction)
            .zip(&self.excitations)
        {
            *o = p * (u - delta * k - shift);
        }
        if omega != 0.0 {
            for q in 0..self.atoms {
                let bit = 1usize << q;
                for base in (0..psi.len()).step_by(2 * bit) {
                    for s in base..base + bit {
                        let (a, b) = (psi[s], psi[s | bit]);
                        out[s] += b * omega;
                        out[s | bit] += a * omega;
                    }
                }
            }
        }
    }

    /// `⟨psi|H|psi⟩`.
    pub fn expectation(&self, psi: &[Complex64], omega: f64, delta: f64) -> f64 {
        let mut h = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, omega, delta, &mut h);
        psi.iter().zip(&h).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `out = -i H psi`, the right-hand side of the Schrödinger equation.
    fn derivative(
        &self,
        psi: &[Complex64],
        omega: f64,
        delta: f64,
        shift: f64,
        out: &mut [Complex64],
    ) {
        self.apply_shifted(psi, omega, delta, shift, out);
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    }
}

/// Piecewise-linear drive: Rabi frequency and detuning in rad/µs over
/// `[0, duration]` µs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub duration: f64,
    /// `(t, Ω)` breakpoints, first at 0 and last at `duration`.
    pub omega: Vec<(f64, f64)>,
    /// `(t, δ)` breakpoints, first at 0 and last at `duration`.
    pub delta: Vec<(f64, f64)>,
}

impl PulseSchedule {
    pub fn new(duration: f64, omega: Vec<(f64, f64)>, delta: Vec<(f64, f64)>) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {duration}"
            )));
        }
        for (name, pts) in [("omega", &omega), ("delta", &delta)] {
            let ok = pts.len() >= 2
                && pts[0].0 == 0.0
                && (pts[pts.len() - 1].0 - duration).abs() < 1e-12
                && pts.windows(2).all(|w| w[1].0 >= w[0].0)
                && pts.iter().all(|p| p.1.is_finite());
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "{name} breakpoints must be finite, sorted and span [0, {duration}]"
                )));
            }
        }
        if omega.iter().any(|p| p.1 < 0.0) {
            return Err(Error::InvalidArgument(
                "Rabi frequency must be non-negative".into(),
            ));
        }
        Ok(PulseSchedule {
            duration,
            omega,
            delta,
        })
    }

    /// Constant drive for `duration` µs.
    pub fn constant(duration: f64, omega: f64, delta: f64) -> Result<Self> {
        Self::new(
            duration,
            vec![(0.0, omega), (duration, omega)],
            vec![(0.0, delta), (duration, delta)],
        )
    }

    pub fn omega_at(&self, t: f64) -> f64 {
        interpolate(&self.omega, t)
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        interpolate(&self.delta, t)
    }

    pub fn max_omega(&self) -> f64 {
        self.omega.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.delta.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    }

    /// Checks that the drive starts and ends off, and the detuning goes
    /// from negative to positive.
    pub fn is_adiabatic_shape(&self) -> bool {
        let t = self.duration;
        self.omega_at(0.0) == 0.0
            && self.omega_at(t) == 0.0
            && self.delta_at(0.0) < 0.0
            && self.delta_at(t) > 0.0
    }
}

fn interpolate(pts: &[(f64, f64)], t: f64) -> f64 {
    if t <= pts[0].0 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        let ((t0, v0), (t1, v1)) = (w[0], w[1]);
        if t <= t1 {
            if t1 == t0 {
                return v1;
            }
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    pts[pts.len() - 1].1
}

/// Fraction of the pulse spent ramping the Rabi frequency up, and again down.
pub const RAMP_FRACTION: f64 = 0.15;
pub const DEFAULT_DURATION_US: f64 = 4.0;

/// Rabi frequency ramps to `omega_max` over the first 15% of `duration`,
/// holds, and ramps back to zero over the last 15%; detuning rises
/// linearly from `-omega_max` to `omega_max / 2`.
pub fn adiabatic_schedule(omega_max: f64, duration: f64) -> Result<PulseSchedule> {
    if !(omega_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "omega_max must be positive, got {omega_max}"
        )));
    }
    let ramp = RAMP_FRACTION * duration;
    PulseSchedule::new(
        duration,
        vec![
            (0.0, 0.0),
            (ramp, omega_max),
            (duration - ramp, omega_max),
            (duration, 0.0),
        ],
        vec![(0.0, -omega_max), (duration, omega_max / 2.0)],
    )
}

/// Amplitudes over the `2^m` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// All atoms in the ground state.
    pub fn ground(atoms: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << atoms];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes }
    }

    pub fn basis(atoms: usize, s: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << atoms];
        amplitudes[s] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes }
    }

    pub fn atoms(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn normalize(&mut self) -> f64 {
        let n = self.norm();
        for a in &mut self.amplitudes {
            *a /= n;
        }
        n
    }
}

/// Step count and size that keep `‖H - shift·I‖ dt <= STEP_NORM`. A requested `dt`
/// is shrunk to divide the duration evenly and rejected if too large.
pub fn choose_step(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
) -> Result<(usize, f64)> {
    let (_, bound) = h.shifted_norm_bound(schedule.max_omega(), schedule.max_abs_delta());
    let limit = if bound > 0.0 {
        STEP_NORM / bound
    } else {
        schedule.duration
    };
    let dt = match dt {
        Some(dt) if dt > limit * (1.0 + 1e-12) => {
            return Err(Error::InvalidArgument(format!(
                "time step {dt} exceeds the stability limit {limit}"
            )))
        }
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )))
        }
        None => limit,
    };
    let steps = ((schedule.duration / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, schedule.duration / steps as f64))
}

/// One row of an evolution trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub omega: f64,
    pub delta: f64,
    /// Most probable basis states, descending (ties by basis index).
    pub top: Vec<(usize, f64)>,
}

/// Integrates from the ground state with fixed-step RK4.
pub fn evolve(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
) -> Result<QuantumState> {
    Ok(run(h, schedule, dt, None)?.0)
}

/// As [`evolve`], also recording a trace row every `stride` steps and at
/// the final time.
pub fn evolve_traced(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
    stride: usize,
) -> Result<(QuantumState, Vec<TraceRow>)> {
    run(h, schedule, dt, Some(stride.max(1)))
}

/// Like [`evolve`] but from an arbitrary initial state.
pub fn evolve_from(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
    initial: QuantumState,
) -> Result<QuantumState> {
    Ok(integrate(h, schedule, dt, initial, None)?.0)
}

fn run(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
    stride: Option<usize>,
) -> Result<(QuantumState, Vec<TraceRow>)> {
    integrate(h, schedule, dt, QuantumState::ground(h.atoms), stride)
}

fn integrate(
    h: &RydbergHamiltonian,
    schedule: &PulseSchedule,
    dt: Option<f64>,
    mut state: QuantumState,
    stride: Option<usize>,
) -> Result<(QuantumState, Vec<TraceRow>)> {
    if state.amplitudes.len() != h.dim() {
        return Err(Error::InvalidArgument(
            "state and register sizes differ".into(),
        ));
    }
    let (steps, dt) = choose_step(h, schedule, dt)?;
    let (shift, _) = h.shifted_norm_bound(schedule.max_omega(), schedule.max_abs_delta());
    let dim = h.dim();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    );
    let mut trace = Vec::new();
    let record = |t: f64, state: &QuantumState, trace: &mut Vec<TraceRow>| {
        trace.push(TraceRow {
            t,
            omega: schedule.omega_at(t),
            delta: schedule.delta_at(t),
            top: top_states(state, 8),
        });
    };
    if stride.is_some() {
        record(0.0, &state, &mut trace);
    }

    for step in 0..steps {
        let t = step as f64 * dt;
        let mid = t + 0.5 * dt;
        let end = t + dt;
        let psi = &mut state.amplitudes;
        h.derivative(
            psi,
            schedule.omega_at(t),
            schedule.delta_at(t),
            shift,
            &mut k1,
        );
        axpy(psi, &k1, 0.5 * dt, &mut tmp);
        h.derivative(
            &tmp,
            schedule.omega_at(mid),
            schedule.delta_at(mid),
            shift,
            &mut k2,
        );
        axpy(psi, &k2, 0.5 * dt, &mut tmp);
        h.derivative(
            &tmp,
            schedule.omega_at(mid),
            schedule.delta_at(mid),
            shift,
            &mut k3,
        );
        axpy(psi, &k3, dt, &mut tmp);
        h.derivative(
            &tmp,
            schedule.omega_at(end),
            schedule.delta_at(end),
            shift,
            &mut k4,
        );
        let w = dt / 6.0;
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        let norm = state.normalize();
        if (norm - 1.0).abs() > DRIFT_LIMIT {
            return Err(Error::IntegrationFailure {
                time: end,
                drift: norm - 1.0,
            });
        }
        if let Some(s) = stride {
            if (step + 1) % s == 0 || step + 1 == steps {
                record(end, &state, &mut trace);
            }
        }
    }
    let phase = Complex64::from_polar(1.0, -shift * schedule.duration);
    for a in state.amplitudes.iter_mut() {
        *a *= phase;
    }
    Ok((state, trace))
}

fn axpy(x: &[Complex64], y: &[Complex64], a: f64, out: &mut [Complex64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + y * a;
    }
}

fn top_states(state: &QuantumState, k: usize) -> Vec<(usize, f64)> {
    let mut p: Vec<(usize, f64)> = state.probabilities().into_iter().enumerate().collect();
    p.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    p.truncate(k);
    p
}

/// Bitstring with character `i` giving atom `i`.
pub fn bitstring(s: usize, atoms: usize) -> String {
    (0..atoms)
        .map(|i| if s >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// CSV with columns `t_us,omega,delta` followed by state/probability pairs
/// for the most probable basis states.
pub fn trace_csv(rows: &[TraceRow], atoms: usize) -> String {
    let width = rows.iter().map(|r| r.top.len()).max().unwrap_or(0);
    let mut out = String::from("t_us,omega,delta");
    for k in 1..=width {
        out.push_str(&format!(",state{k},prob{k}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{:.6},{:.6},{:.6}", r.t, r.omega, r.delta));
        for &(s, p) in &r.top {
            out.push_str(&format!(",{},{:.6}", bitstring(s, atoms), p));
        }
        out.push('\n');
    }
    out
}

/// Measurement outcomes keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub atoms: usize,
    pub shots: usize,
    pub counts: BTreeMap<usize, usize>,
}

impl SampleSet {
    pub fn from_counts(atoms: usize, counts: BTreeMap<usize, usize>) -> Self {
        let shots = counts.values().sum();
        SampleSet {
            atoms,
            shots,
            counts,
        }
    }

    /// Excited atoms of basis state `s`.
    pub fn excited_atoms(s: usize) -> Vec<usize> {
        (0..usize::BITS as usize)
            .filter(|&i| s >> i & 1 == 1)
            .collect()
    }

    pub fn bitstring_counts(&self) -> Vec<(String, usize)> {
        self.counts
            .iter()
            .map(|(&s, &c)| (bitstring(s, self.atoms), c))
            .collect()
    }
}

pub const DEFAULT_SHOTS: usize = 1000;

/// Independent projective measurements of `state`.
pub fn sample(state: &QuantumState, shots: usize, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = rng_from_seed(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let r = rng.gen::<f64>() * total;
        let s = cumulative
            .partition_point(|&c| c <= r)
            .min(cumulative.len() - 1);
        *counts.entry(s).or_insert(0) += 1;
    }
    Ok(SampleSet {
        atoms: state.atoms(),
        shots,
        counts,
    })
}

/// State preparation and measurement error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamParams {
    /// Probability an atom is not prepared and reads as ground.
    pub eta: f64,
    /// Ground read as excited.
    pub false_positive: f64,
    /// Excited read as ground.
    pub false_negative: f64,
}

impl Default for SpamParams {
    fn default() -> Self {
        SpamParams {
            eta: 0.005,
            false_positive: 0.03,
            false_negative: 0.08,
        }
    }
}

impl SpamParams {
    pub fn none() -> Self {
        SpamParams {
            eta: 0.0,
            false_positive: 0.0,
            false_negative: 0.0,
        }
    }
}

/// Applies preparation failures and readout flips shot by shot.
pub fn apply_spam(samples: &SampleSet, spam: &SpamParams, seed: u64) -> Result<SampleSet> {
    for p in [spam.eta, spam.false_positive, spam.false_negative] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut counts = BTreeMap::new();
    for (&s, &c) in &samples.counts {
        for _ in 0..c {
            let mut out = 0usize;
            for a in 0..samples.atoms {
                let mut bit = s >> a & 1 == 1;
                if spam.eta > 0.0 && rng.gen::<f64>() < spam.eta {
                    bit = false;
                }
                let flip = if bit {
                    spam.false_negative
                } else {
                    spam.false_positive
                };
                if flip > 0.0 && rng.gen::<f64>() < flip {
                    bit = !bit;
                }
                if bit {
                    out |= 1 << a;
                }
            }
            *counts.entry(out).or_insert(0) += 1;
        }
    }
    Ok(SampleSet {
        atoms: samples.atoms,
        shots: samples.shots,
        counts,
    })
}
