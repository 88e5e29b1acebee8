use std::io::{BufWriter, Read, Write};

use crate::error::{Error, Result};
use crate::fmt_f64;

pub const NO_PARENT: u32 = u32::MAX;
const NO_CHILD: u32 = u32::MAX;

/// One node of a thorny branching tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    /// `N̂`: inbound stubs, i.e. number of offspring.
    pub offspring: u64,
    /// `D̂`: unpaired outbound stubs (thorns).
    pub thorns: u64,
    pub weight: f64,
    pub personalization: f64,
    /// `Π̂`: product of weights on the path from the root.
    pub pi: f64,
    pub parent: u32,
    pub generation: u32,
    first_child: u32,
}

/// A thorny branching tree stored breadth-first, truncated at `depth`
/// generations. Children of a node are contiguous; nodes in generation
/// `depth` keep their offspring count but have no materialized children.
#[derive(Debug, Clone, PartialEq)]
pub struct ThornyTree {
    depth: usize,
    nodes: Vec<TreeNode>,
    generation_starts: Vec<usize>,
}

impl ThornyTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    /// Nodes of generation `r` (empty beyond the depth or after extinction).
    pub fn generation(&self, r: usize) -> &[TreeNode] {
        if r > self.depth {
            return &[];
        }
        &self.nodes[self.generation_starts[r]..self.generation_starts[r + 1]]
    }

    /// Index range of the generation-`r` nodes.
    pub fn generation_range(&self, r: usize) -> std::ops::Range<usize> {
        if r > self.depth {
            return self.nodes.len()..self.nodes.len();
        }
        self.generation_starts[r]..self.generation_starts[r + 1]
    }

    /// Indices of the materialized children of node `idx`.
    pub fn children(&self, idx: usize) -> std::ops::Range<usize> {
        let node = &self.nodes[idx];
        if node.first_child == NO_CHILD {
            return 0..0;
        }
        let start = node.first_child as usize;
        start..start + node.offspring as usize
    }

    /// Dot-separated 1-based sibling indices from the root; empty for the root.
    pub fn node_path(&self, mut idx: usize) -> String {
        let mut parts = Vec::new();
        while self.nodes[idx].parent != NO_PARENT {
            let parent = self.nodes[idx].parent as usize;
            parts.push(idx - self.nodes[parent].first_child as usize + 1);
            idx = parent;
        }
        parts.iter().rev().map(|p| p.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// Breadth-first tree assembly with contiguity and population checks.
#[derive(Debug)]
pub(crate) struct TreeBuilder {
    nodes: Vec<TreeNode>,
    depth: usize,
    cap: usize,
}

impl TreeBuilder {
    pub fn new(depth: usize, cap: usize, offspring: u64, thorns: u64, weight: f64, personalization: f64) -> Self {
        let root = TreeNode {
            offspring,
            thorns,
            weight,
            personalization,
            pi: 1.0,
            parent: NO_PARENT,
            generation: 0,
            first_child: NO_CHILD,
        };
        Self { nodes: vec![root], depth, cap }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn child_count(&self, idx: usize) -> u64 {
        let first = self.nodes[idx].first_child;
        if first == NO_CHILD {
            return 0;
        }
        self.nodes[first as usize..].iter().take_while(|c| c.parent == idx as u32).count() as u64
    }

    pub fn push_child(
        &mut self,
        parent: usize,
        offspring: u64,
        thorns: u64,
        weight: f64,
        personalization: f64,
    ) -> Result<usize> {
        if self.nodes.len() >= self.cap {
            return Err(Error::PopulationCap { cap: self.cap as u64 });
        }
        let idx = self.nodes.len();
        let p = self.nodes[parent];
        debug_assert!((p.generation as usize) < self.depth);
        if p.first_child == NO_CHILD {
            self.nodes[parent].first_child = idx as u32;
        } else {
            debug_assert_eq!(self.nodes[idx - 1].parent, parent as u32, "children must be contiguous");
        }
        self.nodes.push(TreeNode {
            offspring,
            thorns,
            weight,
            personalization,
            pi: p.pi * weight,
            parent: parent as u32,
            generation: p.generation + 1,
            first_child: NO_CHILD,
        });
        Ok(idx)
    }

    pub fn finish(self) -> ThornyTree {
        let mut starts = vec![0usize; self.depth + 2];
        let mut counts = vec![0usize; self.depth + 1];
        for n in &self.nodes {
            counts[n.generation as usize] += 1;
        }
        for r in 0..=self.depth {
            starts[r + 1] = starts[r] + counts[r];
        }
        ThornyTree { depth: self.depth, nodes: self.nodes, generation_starts: starts }
    }
}

/// `(Ẑ_0..Ẑ_k, V̂_0..V̂_k)`: inbound and outbound stub totals per generation.
pub fn tree_generation_sizes(tree: &ThornyTree) -> (Vec<u64>, Vec<u64>) {
    (0..=tree.depth())
        .map(|r| {
            let g = tree.generation(r);
            (g.iter().map(|n| n.offspring).sum::<u64>(), g.iter().map(|n| n.thorns).sum::<u64>())
        })
        .unzip()
}

/// Writes `node_path,N,D,C,Q,Pi` in breadth-first order.
pub fn write_tree_csv<W: Write>(tree: &ThornyTree, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "node_path,N,D,C,Q,Pi")?;
    for (i, n) in tree.nodes().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            tree.node_path(i),
            n.offspring,
            n.thorns,
            fmt_f64(n.weight),
            fmt_f64(n.personalization),
            fmt_f64(n.pi)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed line of a tree export.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeRow {
    pub path: Vec<u32>,
    pub offspring: u64,
    pub thorns: u64,
    pub weight: f64,
    pub personalization: f64,
    pub pi: f64,
}

/// Rebuilds a tree of the given depth from its export, verifying that the
/// stored paths and `Π̂` values agree with the reconstruction.
pub fn read_tree_csv<R: Read>(input: R, depth: usize) -> Result<ThornyTree> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["node_path", "N", "D", "C", "Q", "Pi"] {
        return Err(Error::Parse("tree header must be node_path,N,D,C,Q,Pi".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("missing column".into()));
        let perr = |e: &dyn std::fmt::Display| Error::Parse(e.to_string());
        let path_str = get(0)?;
        let path = if path_str.is_empty() {
            Vec::new()
        } else {
            path_str.split('.').map(|p| p.parse::<u32>().map_err(|e| perr(&e))).collect::<Result<Vec<_>>>()?
        };
        rows.push(TreeRow {
            path,
            offspring: get(1)?.parse().map_err(|e| perr(&e))?,
            thorns: get(2)?.parse().map_err(|e| perr(&e))?,
            weight: get(3)?.parse().map_err(|e| perr(&e))?,
            personalization: get(4)?.parse().map_err(|e| perr(&e))?,
            pi: get(5)?.parse().map_err(|e| perr(&e))?,
        });
    }
    let root = rows.first().ok_or_else(|| Error::Parse("empty tree".into()))?;
    if !root.path.is_empty() {
        return Err(Error::Parse("first row must be the root".into()));
    }
    let mut builder =
        TreeBuilder::new(depth, usize::MAX, root.offspring, root.thorns, root.weight, root.personalization);
    // Parents appear in breadth-first order, so walk them with a cursor.
    let mut parent = 0usize;
    for row in &rows[1..] {
        while parent < builder.len()
            && (builder.child_count(parent) >= builder.node(parent).offspring
                || builder.node(parent).generation as usize >= depth)
        {
            parent += 1;
        }
        if parent >= builder.len() {
            return Err(Error::Parse("tree rows exceed the declared offspring counts".into()));
        }
        builder.push_child(parent, row.offspring, row.thorns, row.weight, row.personalization)?;
    }
    let tree = builder.finish();
    for (i, row) in rows.iter().enumerate() {
        let path = tree.node_path(i);
        let expected = row.path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(".");
        if path != expected || tree.nodes()[i].pi.to_bits() != row.pi.to_bits() {
            return Err(Error::Parse(format!("row {i}: path or Pi inconsistent with tree structure")));
        }
    }
    for i in 0..tree.len() {
        let n = &tree.nodes()[i];
        if (n.generation as usize) < depth && tree.children(i).len() as u64 != n.offspring {
            return Err(Error::Parse(format!("node {i} is missing children")));
        }
    }
    Ok(tree)
}
