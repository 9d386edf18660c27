//! Fixed inputs shared by the benchmarks.

use rydcg_core::embedding::fr_layout;
use rydcg_core::embedding::scale_to_device;
use rydcg_core::oracle::enumerate_independent_sets;
use rydcg_core::{gen_gnp, DeviceSpec, Graph, LpProblem, Register};

pub fn random_graph(n: usize, density: f64) -> Graph {
    gen_gnp(n, density, 0xbe7c).expect("valid density")
}

/// Set-partitioning master problem with every independent set as a column.
pub fn full_master(g: &Graph) -> LpProblem {
    let mut lp = LpProblem::new(g.n());
    for set in enumerate_independent_sets(g).expect("small graph") {
        lp.add_column(1.0, &set).expect("rows in range");
    }
    lp
}

/// Device register for `g`, trying layout seeds until one fits.
pub fn register(g: &Graph) -> Register {
    (0..64)
        .find_map(|seed| scale_to_device(&fr_layout(g, 50, 1.0, seed), &DeviceSpec::default()).ok())
        .expect("some layout fits the device")
}
