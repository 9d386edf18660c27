//! Instance corpus generation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use rydcg_core::oracle::brute_chromatic;
use rydcg_core::rng::derive_seed;
use rydcg_core::{gen_gnp, gen_unit_disk, Error, Graph, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Largest order whose chromatic number is stored in the manifest.
pub const CHI_MAX_ORDER: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphClass {
    Ud,
    Nonud,
}

impl GraphClass {
    pub fn name(self) -> &'static str {
        match self {
            GraphClass::Ud => "ud",
            GraphClass::Nonud => "nonud",
        }
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ud" => Ok(GraphClass::Ud),
            "nonud" => Ok(GraphClass::Nonud),
            _ => Err(Error::InvalidArgument(format!("unknown graph class {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub id: String,
    pub file: String,
    pub class: GraphClass,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub edges: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<usize>,
    /// Unit-square points of a unit-disk instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub count: usize,
    pub instances: Vec<InstanceEntry>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// The grid of instances to generate: every class, order and density,
/// `count` instances each.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub classes: Vec<GraphClass>,
    pub orders: Vec<usize>,
    pub densities: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

impl CorpusSpec {
    /// The desk-scale grid: both classes, n = 4..=10, densities 0.2/0.5/0.8.
    pub fn desk(count: usize, seed: u64) -> Self {
        CorpusSpec {
            classes: vec![GraphClass::Ud, GraphClass::Nonud],
            orders: (4..=10).collect(),
            densities: vec![0.2, 0.5, 0.8],
            count,
            seed,
        }
    }
}

fn percent(density: f64) -> u64 {
    (density * 100.0).round() as u64
}

/// Seed of instance `index` in a cell, independent of the other cells.
pub fn instance_seed(seed: u64, class: GraphClass, n: usize, density: f64, index: usize) -> u64 {
    let class_code = match class {
        GraphClass::Ud => 1u64,
        GraphClass::Nonud => 2,
    };
    let cell = class_code << 40 | (n as u64) << 20 | percent(density);
    derive_seed(derive_seed(seed, cell), index as u64)
}

/// Builds one instance without touching the file system.
pub fn build_instance(
    class: GraphClass,
    n: usize,
    density: f64,
    index: usize,
    seed: u64,
) -> Result<(InstanceEntry, Graph)> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density {density} not in (0, 1]"
        )));
    }
    let s = instance_seed(seed, class, n, density, index);
    let (graph, positions) = match class {
        GraphClass::Ud => {
            let ud = gen_unit_disk(n, density, s)?;
            (ud.graph, Some(ud.positions))
        }
        GraphClass::Nonud => (gen_gnp(n, density, s)?, None),
    };
    let chi = if n <= CHI_MAX_ORDER {
        Some(brute_chromatic(&graph)?.0)
    } else {
        None
    };
    let id = format!("{class}_n{n:02}_d{:03}_{index:03}", percent(density));
    let entry = InstanceEntry {
        file: format!("{id}.json"),
        id,
        class,
        n,
        density,
        seed: s,
        edges: graph.num_edges(),
        chi,
        positions,
    };
    Ok((entry, graph))
}

/// Writes every instance of `spec` and the manifest into `out_dir`.
pub fn generate(spec: &CorpusSpec, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir)?;
    let mut instances = Vec::new();
    for &class in &spec.classes {
        for &n in &spec.orders {
            for &density in &spec.densities {
                for index in 0..spec.count {
                    let (entry, graph) = build_instance(class, n, density, index, spec.seed)?;
                    graph.write_file(out_dir.join(&entry.file))?;
                    instances.push(entry);
                }
            }
        }
    }
    let manifest = Manifest {
        seed: spec.seed,
        count: spec.count,
        instances,
    };
    fs::write(out_dir.join(MANIFEST_FILE), manifest.to_json())?;
    Ok(manifest)
}
