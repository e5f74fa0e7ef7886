//! Exact machinery for k-critical graphs: colouring, Ore compositions and
//! their recognition, clique-weighted potentials, reducible configurations,
//! critical extensions and a discharging ledger.

pub mod canon;
pub mod cliques;
pub mod coloring;
pub mod discharge;
pub mod extension;
pub mod graph;
pub mod ore;
pub mod potential;
pub mod rational;
pub mod structure;

pub use graph::{Graph, GraphError, LoopPolicy, VertexSet};
pub use rational::Rational;
