pub mod error;
pub mod rng;
pub mod tree_core;
pub mod path_codes;
pub mod linebreak;
pub mod graph_core;
pub mod samplers;
pub mod continuum_graph;
pub mod stats;
