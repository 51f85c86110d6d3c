//! Undirected-graph machinery: measurement graphs, chordality, chordal
//! embedding, maximal cliques and clique trees.
//!
//! Vertex ids are 0-based here; human-readable messages print them 1-based.

mod chordal;
mod graph;
mod tree;

pub use chordal::{chordal_embed, is_chordal, is_perfect_elimination_ordering, maximum_cardinality_search, ChordalEmbedding};
pub use graph::{build_measurement_graph, Graph};
pub(crate) use graph::distance;
pub use tree::{
    build_clique_tree, build_clique_tree_rooted, default_root, enumerate_cliques, verify_cip, Clique, CliqueTree,
};
