//! Corpus generation, solving, benchmarking and oracle reports behind the
//! `rydcg` command.

pub mod bench;
pub mod generate;
pub mod oracle;
pub mod solve;
