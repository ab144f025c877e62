//! Graceful, α-, σ- and ρ-labelings of trees: classic labelers, combinatorial
//! constructions, leaf transfers, basic-path-sequence deciders, advanced labelers
//! and a brute-force oracle.

pub mod advanced;
pub mod bps;
pub mod classic;
pub mod constructions;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod transfers;

pub use error::{Error, Result};
pub use graph::{Tree, VertexLabeling};
