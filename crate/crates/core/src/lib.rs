//! Graph coloring by column generation with pluggable maximum weighted
//! independent set pricing, including an emulated neutral-atom sampler.

pub mod colgen;
pub mod embedding;
pub mod emulator;
pub mod error;
pub mod graph;
pub mod greedy;
pub mod lp;
pub mod mwis;
pub mod oracle;
pub mod pricing;
pub mod qubo;
pub mod rng;

pub use colgen::{run, RunConfig, RunTrace, Termination, WarmStart};
pub use embedding::{DeviceSpec, Redesign, Register};
pub use emulator::{PulseSchedule, QuantumState, RydbergHamiltonian, SampleSet, SpamParams};
pub use error::{Error, Result};
pub use graph::{gen_gnp, gen_unit_disk, Graph, GraphFile, Subgraph, UnitDiskGraph};
pub use greedy::{greedy_color, greedy_color_with, GreedyColoring};
pub use lp::{IlpSolution, LpProblem, LpSolution, LpStatus};
pub use mwis::WeightedSet;
pub use pricing::{Backend, Column, OutputMode, Pricer, PricerConfig};
pub use qubo::{Ising, QuboMatrix};
