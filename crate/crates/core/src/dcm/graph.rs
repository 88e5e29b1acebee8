use std::io::{BufWriter, Read, Write};
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::seqgen::ExtendedBiDegreeSequence;

/// A stub-paired directed multigraph.
///
/// Edges are stored grouped by target: the in-edges of node `v` are
/// `sources[in_offsets[v]..in_offsets[v + 1]]`, one entry per inbound stub,
/// so self-loops and parallel edges are kept as they were paired.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedMultigraph {
    sequence: Arc<ExtendedBiDegreeSequence>,
    in_offsets: Vec<usize>,
    sources: Vec<u32>,
}

pub(crate) fn prefix_offsets(degrees: &[u64]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(degrees.len() + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for &d in degrees {
        acc += d as usize;
        offsets.push(acc);
    }
    offsets
}

/// Owner node of every outbound stub, stubs numbered node by node.
pub(crate) fn stub_owners(out_degrees: &[u64]) -> Vec<u32> {
    let mut owners = Vec::with_capacity(out_degrees.iter().sum::<u64>() as usize);
    for (v, &d) in out_degrees.iter().enumerate() {
        owners.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    owners
}

impl DirectedMultigraph {
    /// Assembles a graph from per-inbound-stub sources; checks degrees.
    pub(crate) fn from_stub_sources(sequence: Arc<ExtendedBiDegreeSequence>, sources: Vec<u32>) -> Result<Self> {
        let in_offsets = prefix_offsets(sequence.in_degrees());
        let graph = Self { sequence, in_offsets, sources };
        graph.check_degrees()?;
        Ok(graph)
    }

    /// Builds a graph from an explicit `(source, target)` edge list; the
    /// in-edges of each target keep their listed order.
    pub fn from_edges(sequence: Arc<ExtendedBiDegreeSequence>, edges: &[(u32, u32)]) -> Result<Self> {
        let n = sequence.len();
        let in_offsets = prefix_offsets(sequence.in_degrees());
        let total = *in_offsets.last().unwrap_or(&0);
        if edges.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: edges.len() });
        }
        let mut cursor = in_offsets.clone();
        let mut sources = vec![u32::MAX; total];
        for &(s, t) in edges {
            let (s_us, t_us) = (s as usize, t as usize);
            if s_us >= n || t_us >= n {
                return Err(Error::Parse(format!("edge ({s},{t}) out of range for n = {n}")));
            }
            if cursor[t_us] >= in_offsets[t_us + 1] {
                return Err(Error::Parse(format!(
                    "node {t} has more in-edges than N = {}",
                    sequence.in_degrees()[t_us]
                )));
            }
            sources[cursor[t_us]] = s;
            cursor[t_us] += 1;
        }
        Self::from_stub_sources(sequence, sources)
    }

    fn check_degrees(&self) -> Result<()> {
        let n = self.sequence.len();
        if self.sources.len() as u64 != self.sequence.total_stubs() {
            return Err(Error::DimensionMismatch {
                expected: self.sequence.total_stubs() as usize,
                got: self.sources.len(),
            });
        }
        let mut out = vec![0u64; n];
        for &s in &self.sources {
            let s = s as usize;
            if s >= n {
                return Err(Error::Parse(format!("unpaired or out-of-range source {s}")));
            }
            out[s] += 1;
        }
        if out != self.sequence.out_degrees() {
            return Err(Error::Parse("realized out-degrees differ from the sequence".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.sequence.len()
    }

    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }

    pub fn sequence(&self) -> &ExtendedBiDegreeSequence {
        &self.sequence
    }

    pub fn shared_sequence(&self) -> Arc<ExtendedBiDegreeSequence> {
        Arc::clone(&self.sequence)
    }

    /// In-neighbors of `v` with multiplicity, in stub order.
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_offsets(&self) -> &[usize] {
        &self.in_offsets
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    /// `(source, target)` pairs ordered by target, then stub.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |v| self.in_neighbors(v).iter().map(move |&s| (s, v as u32)))
    }

    /// Realized `(in, out)` degree of every node, counted from the edges.
    pub fn realized_degrees(&self) -> (Vec<u64>, Vec<u64>) {
        let n = self.node_count();
        let mut ins = vec![0u64; n];
        let mut outs = vec![0u64; n];
        for (s, t) in self.edges() {
            outs[s as usize] += 1;
            ins[t as usize] += 1;
        }
        (ins, outs)
    }

    /// Applies a relabeling: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut inverse = vec![0u32; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new as u32;
        }
        let seq = Arc::new(self.sequence.permuted(perm)?);
        let mut sources = Vec::with_capacity(self.sources.len());
        for &old in perm {
            sources.extend(self.in_neighbors(old).iter().map(|&s| inverse[s as usize]));
        }
        Self::from_stub_sources(seq, sources)
    }
}

/// Uniform stub pairing: a Fisher–Yates shuffle of the outbound stubs is
/// matched against the inbound stubs in order.
pub fn build_graph(sequence: Arc<ExtendedBiDegreeSequence>, rng: &mut SimRng) -> Result<DirectedMultigraph> {
    let mut owners = stub_owners(sequence.out_degrees());
    owners.shuffle(rng);
    DirectedMultigraph::from_stub_sources(sequence, owners)
}

pub fn write_edges_csv<W: Write>(graph: &DirectedMultigraph, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "source,target")?;
    for (s, t) in graph.edges() {
        writeln!(w, "{s},{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edges_csv<R: Read>(input: R) -> Result<Vec<(u32, u32)>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["source", "target"] {
        return Err(Error::Parse("edge list header must be source,target".into()));
    }
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<u32> {
            rec.get(i)
                .ok_or_else(|| Error::Parse("missing column".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("{e}")))
        };
        edges.push((parse(0)?, parse(1)?));
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn seq(ins: Vec<u64>, outs: Vec<u64>) -> Arc<ExtendedBiDegreeSequence> {
        Arc::new(ExtendedBiDegreeSequence::pagerank(ins, outs, 0.3).unwrap())
    }

    #[test]
    fn no_stubs_no_edges() {
        let g = build_graph(seq(vec![0; 5], vec![0; 5]), &mut stream(1, 2, 0)).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn single_node_gets_self_loops() {
        let g = build_graph(seq(vec![3], vec![3]), &mut stream(1, 2, 0)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0); 3]);
    }

    #[test]
    fn two_node_pairings_are_equiprobable() {
        // Two bijections of two stubs: both self-loops, or the 2-cycle.
        let s = seq(vec![1, 1], vec![1, 1]);
        let reps = 100_000u64;
        let loops = (0..reps)
            .filter(|&i| {
                let g = build_graph(Arc::clone(&s), &mut stream(i, 2, 0)).unwrap();
                g.in_neighbors(0) == [0]
            })
            .count();
        let f = loops as f64 / reps as f64;
        let se = (0.25 / reps as f64).sqrt();
        assert!((f - 0.5).abs() < 3.0 * se, "{f}");
    }

    #[test]
    fn degrees_are_conserved() {
        let s = seq(vec![3, 0, 2, 1], vec![1, 2, 2, 1]);
        for i in 0..50 {
            let g = build_graph(Arc::clone(&s), &mut stream(i, 2, 1)).unwrap();
            let (ins, outs) = g.realized_degrees();
            assert_eq!(ins, s.in_degrees());
            assert_eq!(outs, s.out_degrees());
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let s = seq(vec![3, 0, 2, 1], vec![1, 2, 2, 1]);
        let g = build_graph(Arc::clone(&s), &mut stream(3, 2, 1)).unwrap();
        let mut buf = Vec::new();
        write_edges_csv(&g, &mut buf).unwrap();
        let edges = read_edges_csv(buf.as_slice()).unwrap();
        let back = DirectedMultigraph::from_edges(s, &edges).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn mismatched_edge_list_rejected() {
        let s = seq(vec![1, 1], vec![1, 1]);
        assert!(DirectedMultigraph::from_edges(Arc::clone(&s), &[(0, 0)]).is_err());
        assert!(DirectedMultigraph::from_edges(s, &[(0, 0), (0, 1)]).is_err());
    }
}
