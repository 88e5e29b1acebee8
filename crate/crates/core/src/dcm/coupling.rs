use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use super::graph::{prefix_offsets, stub_owners, DirectedMultigraph};
use super::tree::{ThornyTree, TreeBuilder};
use crate::error::{invalid, Result};
use crate::fmt_f64;
use crate::rng::SimRng;
use crate::seqgen::ExtendedBiDegreeSequence;

const UNPAIRED: u32 = u32::MAX;

/// Limits for a coupled construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOptions {
    /// Tree depth `k`.
    pub max_generations: usize,
    /// Maximum number of tree nodes before giving up.
    pub tree_node_cap: usize,
}

impl CouplingOptions {
    pub fn new(max_generations: usize) -> Self {
        Self { max_generations, tree_node_cap: 20_000_000 }
    }
}

/// When the graph exploration first drew a stub with label 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingTime {
    /// Broken while pairing the inbound stubs of a generation-`g` node.
    Broken(u32),
    /// The exploration finished without a break after `explored`
    /// generations had been processed.
    Intact { explored: u32 },
}

impl CouplingTime {
    /// Numeric `τ`; an intact coupling reports `explored + 1`.
    pub fn value(&self) -> u32 {
        match *self {
            CouplingTime::Broken(g) => g,
            CouplingTime::Intact { explored } => explored + 1,
        }
    }

    pub fn is_broken(&self) -> bool {
        matches!(self, CouplingTime::Broken(_))
    }

    /// Whether `τ > r`. An intact coupling exceeds every `r`, since the
    /// whole component was explored without a break.
    pub fn exceeds(&self, r: u32) -> bool {
        match *self {
            CouplingTime::Broken(g) => g > r,
            CouplingTime::Intact { .. } => true,
        }
    }
}

/// A graph and a thorny tree built from the same random draws.
#[derive(Debug, Clone)]
pub struct CouplingResult {
    pub graph: DirectedMultigraph,
    pub tree: ThornyTree,
    pub tau: CouplingTime,
    /// The first explored node, whose neighbourhood the tree mirrors.
    pub root: usize,
}

/// Pairing bookkeeping: the unpaired outbound stubs as a swap-remove pool.
struct StubPool {
    pool: Vec<u32>,
    pos: Vec<u32>,
}

impl StubPool {
    fn new(total: usize) -> Self {
        Self { pool: (0..total as u32).collect(), pos: (0..total as u32).collect() }
    }

    fn is_unpaired(&self, s: u32) -> bool {
        self.pos[s as usize] != UNPAIRED
    }

    fn take(&mut self, s: u32) {
        let p = self.pos[s as usize] as usize;
        let last = *self.pool.last().expect("pool is nonempty");
        self.pool[p] = last;
        self.pos[last as usize] = p as u32;
        self.pool.pop();
        self.pos[s as usize] = UNPAIRED;
    }

    fn draw(&self, rng: &mut SimRng) -> u32 {
        self.pool[rng.random_range(0..self.pool.len())]
    }
}

fn push_owner(builder: &mut TreeBuilder, seq: &ExtendedBiDegreeSequence, parent: usize, owner: usize) -> Result<usize> {
    builder.push_child(
        parent,
        seq.in_degrees()[owner],
        seq.out_degrees()[owner] - 1,
        seq.weights()[owner],
        seq.personalization()[owner],
    )
}

fn root_builder(seq: &ExtendedBiDegreeSequence, root: usize, opts: &CouplingOptions) -> TreeBuilder {
    TreeBuilder::new(
        opts.max_generations,
        opts.tree_node_cap,
        seq.in_degrees()[root],
        seq.out_degrees()[root],
        seq.weights()[root],
        seq.personalization()[root],
    )
}

/// Completes every tree node from index `start` on with independent
/// size-biased draws (uniform over all outbound stubs).
fn complete_tree(
    builder: &mut TreeBuilder,
    seq: &ExtendedBiDegreeSequence,
    owners: &[u32],
    start: usize,
    rng: &mut SimRng,
) -> Result<()> {
    let mut idx = start;
    while idx < builder.len() {
        let node = *builder.node(idx);
        if (node.generation as usize) < builder.depth() {
            for _ in builder.child_count(idx)..node.offspring {
                let s = rng.random_range(0..owners.len());
                push_owner(builder, seq, idx, owners[s] as usize)?;
            }
        }
        idx += 1;
    }
    Ok(())
}

/// Builds a thorny tree alone, rooted at `root`, to the configured depth.
pub fn grow_tree(
    seq: &ExtendedBiDegreeSequence,
    root: usize,
    opts: &CouplingOptions,
    rng: &mut SimRng,
) -> Result<ThornyTree> {
    if root >= seq.len() {
        return Err(invalid(format!("root {root} out of range for {} nodes", seq.len())));
    }
    let owners = stub_owners(seq.out_degrees());
    let mut builder = root_builder(seq, root, opts);
    complete_tree(&mut builder, seq, &owners, 0, rng)?;
    Ok(builder.finish())
}

/// Explores the configuration model breadth-first from a uniformly chosen
/// node while growing the thorny tree from the same stub draws.
///
/// Each inbound stub of an explored node draws an outbound stub uniformly
/// among all `L` stubs. If that stub is unpaired and its owner has not been
/// reached (label 1), the pairing is accepted in both objects. The first
/// draw of a paired stub (label 3) or of an unpaired stub of a reached node
/// (label 2) fixes `τ`. From then on the two objects are completed
/// independently: the graph by uniform pairing of the remaining stubs, the
/// tree by independent size-biased draws.
#[allow(clippy::needless_range_loop)]
pub fn build_coupled(
    seq: Arc<ExtendedBiDegreeSequence>,
    opts: &CouplingOptions,
    rng: &mut SimRng,
) -> Result<CouplingResult> {
    let n = seq.len();
    if n == 0 {
        return Err(invalid("cannot couple an empty sequence"));
    }
    let total = seq.total_stubs() as usize;
    let owners = stub_owners(seq.out_degrees());
    let in_offsets = prefix_offsets(seq.in_degrees());
    let mut sources = vec![UNPAIRED; total];
    let mut pool = StubPool::new(total);
    let mut reached = vec![false; n];

    let root = rng.random_range(0..n);
    reached[root] = true;
    let mut builder = root_builder(&seq, root, opts);
    let mut queue = VecDeque::from([(root as u32, 0u32)]);
    let mut processed = 0usize;
    let mut last_generation = 0u32;
    let mut broken: Option<(u32, usize)> = None;

    'explore: while let Some((v, g)) = queue.pop_front() {
        let tree_idx = processed;
        processed += 1;
        last_generation = g;
        let grows_tree = tree_idx < builder.len() && (g as usize) < opts.max_generations;
        let v = v as usize;
        for e in in_offsets[v]..in_offsets[v + 1] {
            let s = rng.random_range(0..total) as u32;
            let owner = owners[s as usize] as usize;
            if grows_tree {
                push_owner(&mut builder, &seq, tree_idx, owner)?;
            }
            if pool.is_unpaired(s) && !reached[owner] {
                pool.take(s);
                sources[e] = owner as u32;
                reached[owner] = true;
                queue.push_back((owner as u32, g + 1));
            } else {
                let accepted = if pool.is_unpaired(s) { s } else { pool.draw(rng) };
                pool.take(accepted);
                sources[e] = owners[accepted as usize];
                broken = Some((g, tree_idx));
                break 'explore;
            }
        }
    }

    let tau = match broken {
        Some((g, tree_idx)) => {
            let start = tree_idx.min(builder.len());
            complete_tree(&mut builder, &seq, &owners, start, rng)?;
            CouplingTime::Broken(g)
        }
        None => CouplingTime::Intact { explored: last_generation },
    };
    for src in sources.iter_mut() {
        if *src == UNPAIRED {
            let s = pool.draw(rng);
            pool.take(s);
            *src = owners[s as usize];
        }
    }
    let graph = DirectedMultigraph::from_stub_sources(seq, sources)?;
    Ok(CouplingResult { graph, tree: builder.finish(), tau, root })
}

fn attrs(n: u64, d: u64, c: f64, q: f64) -> String {
    format!("{n},{d},{},{}", fmt_f64(c), fmt_f64(q))
}

/// Canonical serialization of the in-neighbourhood of `root` to depth `r`,
/// unfolded as a tree with children sorted. Graph nodes report `(N, D, C, Q)`.
pub fn graph_ball_signature(graph: &DirectedMultigraph, root: usize, r: usize) -> String {
    fn walk(graph: &DirectedMultigraph, v: usize, depth: usize, r: usize) -> String {
        let seq = graph.sequence();
        let mut s = format!(
            "({}",
            attrs(seq.in_degrees()[v], seq.out_degrees()[v], seq.weights()[v], seq.personalization()[v])
        );
        if depth < r {
            let mut children: Vec<String> =
                graph.in_neighbors(v).iter().map(|&u| walk(graph, u as usize, depth + 1, r)).collect();
            children.sort();
            s.extend(children);
        }
        s.push(')');
        s
    }
    walk(graph, root, 0, r)
}

/// Same serialization for the first `r` generations of a tree, reporting the
/// full out-degree `D̂ + 1` for non-root nodes so it matches the graph side.
pub fn tree_ball_signature(tree: &ThornyTree, r: usize) -> String {
    fn walk(tree: &ThornyTree, idx: usize, depth: usize, r: usize) -> String {
        let node = &tree.nodes()[idx];
        let d = if node.parent == super::tree::NO_PARENT { node.thorns } else { node.thorns + 1 };
        let mut s = format!("({}", attrs(node.offspring, d, node.weight, node.personalization));
        if depth < r {
            let mut children: Vec<String> = tree.children(idx).map(|c| walk(tree, c, depth + 1, r)).collect();
            children.sort();
            s.extend(children);
        }
        s.push(')');
        s
    }
    walk(tree, 0, 0, r.min(tree.depth()))
}
