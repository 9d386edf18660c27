//! Brute-force reference answers for one instance.

use serde::Serialize;

use rydcg_core::mwis::max_weight_independent_set;
use rydcg_core::oracle::{brute_chromatic, full_lp_value};
use rydcg_core::{Graph, Result};

/// Exact answers for small graphs; vertex and color labels are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub edges: usize,
    pub chi: usize,
    pub coloring: Vec<usize>,
    /// Optimum of the relaxed master problem over all independent sets.
    pub lp_value: f64,
    pub max_independent_set: Vec<usize>,
    /// Present when the graph file carries vertex weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_weight_independent_set: Option<WeightedAnswer>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedAnswer {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn oracle(g: &Graph) -> Result<OracleReport> {
    let (chi, coloring) = brute_chromatic(g)?;
    let mis = max_weight_independent_set(g, &vec![1.0; g.n()])?;
    let weighted = match g.weights() {
        Some(w) => {
            let s = max_weight_independent_set(g, w)?;
            Some(WeightedAnswer {
                vertices: s.vertices.iter().map(|u| u + 1).collect(),
                weight: s.weight,
            })
        }
        None => None,
    };
    Ok(OracleReport {
        n: g.n(),
        edges: g.num_edges(),
        chi,
        coloring: coloring.iter().map(|c| c + 1).collect(),
        lp_value: full_lp_value(g)?,
        max_independent_set: mis.vertices.iter().map(|u| u + 1).collect(),
        max_weight_independent_set: weighted,
    })
}
