//! Directed configuration multigraphs and the coupled thorny branching tree.

mod coupling;
mod graph;
mod tree;

pub use coupling::{
    build_coupled, graph_ball_signature, grow_tree, tree_ball_signature, CouplingOptions, CouplingResult, CouplingTime,
};
pub use graph::{build_graph, read_edges_csv, write_edges_csv, DirectedMultigraph};
pub use tree::{read_tree_csv, tree_generation_sizes, write_tree_csv, ThornyTree, TreeNode, TreeRow, NO_PARENT};
