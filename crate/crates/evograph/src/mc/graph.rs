//! Regular-graph generators for the agent-based simulator. The default is
//! the stub-pairing construction for random regular graphs, which are
//! locally tree-like; a ring lattice is provided for contrast, but its
//! dense triangle structure violates the closure's no-triangles assumption,
//! so its triangle count should be inspected before trusting results on it.

use crate::error::{EvoError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Full restarts of the pairing construction before giving up.
const MAX_ATTEMPTS: u32 = 10_000;

/// Pairing rounds within one attempt before it is declared stuck.
const MAX_ROUNDS: u32 = 200;

/// Simple undirected graph where every node has exactly `degree` neighbors.
/// Neighbor lists are sorted, so identical constructions are bytewise
/// identical regardless of pairing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    nodes: usize,
    degree: u32,
    // Flat neighbor array with stride `degree`.
    adjacency: Vec<u32>,
    triangle_count: u64,
}

impl RegularGraph {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Undirected edge count, nodes * degree / 2.
    pub fn edge_count(&self) -> usize {
        self.nodes * self.degree as usize / 2
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        let k = self.degree as usize;
        &self.adjacency[node * k..(node + 1) * k]
    }

    /// Number of triangles in the whole graph. Random regular graphs keep
    /// this O(1) in the node count; lattices do not.
    pub fn triangle_count(&self) -> u64 {
        self.triangle_count
    }

    fn from_lists(nodes: usize, degree: u32, mut lists: Vec<Vec<u32>>) -> Self {
        for list in &mut lists {
            list.sort_unstable();
        }
        let triangle_count = count_triangles(&lists);
        let adjacency = lists.into_iter().flatten().collect();
        RegularGraph {
            nodes,
            degree,
            adjacency,
            triangle_count,
        }
    }
}

fn check_regular_inputs(nodes: usize, degree: u32) -> Result<()> {
    if degree == 0 {
        return Err(EvoError::InvalidArgument(
            "graph degree must be positive".into(),
        ));
    }
    if nodes <= degree as usize {
        return Err(EvoError::InvalidArgument(format!(
            "need more than {degree} nodes for a degree-{degree} graph, got {nodes}"
        )));
    }
    if !nodes.is_multiple_of(2) && !degree.is_multiple_of(2) {
        return Err(EvoError::InvalidArgument(format!(
            "no regular graph exists: {nodes} * {degree} stubs is odd"
        )));
    }
    Ok(())
}

/// Uniform-ish random regular graph by the pairing model: every node gets
/// `degree` stubs, stubs are matched at random, and pairs that would create
/// a self-loop or repeated edge are thrown back into the pool for the next
/// round. An attempt that gets stuck with only illegal pairs left restarts
/// from scratch; construction fails after a bounded number of restarts.
pub fn random_regular_graph(nodes: usize, degree: u32, seed: u64) -> Result<RegularGraph> {
    check_regular_inputs(nodes, degree)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(lists) = try_pairing(nodes, degree as usize, &mut rng) {
            return Ok(RegularGraph::from_lists(nodes, degree, lists));
        }
    }
    Err(EvoError::GraphConstruction {
        nodes,
        k: degree,
        seed,
        attempts: MAX_ATTEMPTS,
    })
}

fn try_pairing(nodes: usize, k: usize, rng: &mut ChaCha12Rng) -> Option<Vec<Vec<u32>>> {
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(k); nodes];
    let mut stubs: Vec<u32> = (0..nodes as u32)
        .flat_map(|v| std::iter::repeat_n(v, k))
        .collect();
    let mut rounds = 0;
    while !stubs.is_empty() {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return None;
        }
        stubs.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || lists[a as usize].contains(&b) {
                leftover.push(a);
                leftover.push(b);
            } else {
                lists[a as usize].push(b);
                lists[b as usize].push(a);
            }
        }
        if leftover.len() == stubs.len() && !has_legal_pair(&leftover, &lists) {
            return None;
        }
        stubs = leftover;
    }
    Some(lists)
}

/// Whether any two remaining stubs could still form a new simple edge.
fn has_legal_pair(stubs: &[u32], lists: &[Vec<u32>]) -> bool {
    let mut distinct: Vec<u32> = stubs.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for (i, &a) in distinct.iter().enumerate() {
        for &b in &distinct[i + 1..] {
            if !lists[a as usize].contains(&b) {
                return true;
            }
        }
    }
    false
}

/// Ring lattice: node i is adjacent to its degree/2 nearest nodes on each
/// side; odd degrees add the antipodal node and need an even node count.
/// Heavily clustered, so the triangle count grows linearly with size.
pub fn ring_lattice(nodes: usize, degree: u32) -> Result<RegularGraph> {
    check_regular_inputs(nodes, degree)?;
    let half = degree as usize / 2;
    if nodes <= 2 * half {
        return Err(EvoError::InvalidArgument(format!(
            "ring lattice of degree {degree} needs more than {} nodes",
            2 * half
        )));
    }
    let mut lists: Vec<Vec<u32>> = vec![Vec::with_capacity(degree as usize); nodes];
    for (v, list) in lists.iter_mut().enumerate() {
        for d in 1..=half {
            list.push(((v + d) % nodes) as u32);
            list.push(((v + nodes - d) % nodes) as u32);
        }
        if degree % 2 == 1 {
            list.push(((v + nodes / 2) % nodes) as u32);
        }
    }
    Ok(RegularGraph::from_lists(nodes, degree, lists))
}

fn count_triangles(lists: &[Vec<u32>]) -> u64 {
    // Each triangle is seen from all three corners.
    let mut corners = 0u64;
    for neighbors in lists {
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if lists[a as usize].binary_search(&b).is_ok() {
                    corners += 1;
                }
            }
        }
    }
    corners / 3
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn assert_simple_regular(graph: &RegularGraph) {
        let k = graph.degree() as usize;
        for v in 0..graph.nodes() {
            let neighbors = graph.neighbors(v);
            assert_eq!(neighbors.len(), k);
            let distinct: HashSet<u32> = neighbors.iter().copied().collect();
            assert_eq!(distinct.len(), k, "node {v} has repeated neighbors");
            assert!(!distinct.contains(&(v as u32)), "node {v} has a self-loop");
            for &w in neighbors {
                assert!(
                    graph.neighbors(w as usize).contains(&(v as u32)),
                    "edge {v}-{w} is not symmetric"
                );
            }
        }
    }

    #[test]
    fn pairing_gives_a_simple_regular_graph() {
        let graph = random_regular_graph(8, 3, 11).unwrap();
        assert_eq!(graph.nodes(), 8);
        assert_eq!(graph.edge_count(), 12);
        assert_simple_regular(&graph);
    }

    #[test]
    fn same_seed_reproduces_the_adjacency() {
        let a = random_regular_graph(100, 4, 7).unwrap();
        let b = random_regular_graph(100, 4, 7).unwrap();
        assert_eq!(a, b);
        let c = random_regular_graph(100, 4, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn large_random_graphs_are_nearly_triangle_free() {
        let graph = random_regular_graph(10_000, 4, 3).unwrap();
        assert_simple_regular(&graph);
        // The triangle count stays O(1) as the graph grows; its expectation
        // here is 4.5, so triple digits would signal a broken generator.
        assert!(
            graph.triangle_count() < 100,
            "unexpected clustering: {} triangles",
            graph.triangle_count()
        );
    }

    #[test]
    fn dense_degrees_construct_without_exhausting_restarts() {
        let graph = random_regular_graph(500, 8, 5).unwrap();
        assert_simple_regular(&graph);
    }

    #[test]
    fn impossible_requests_are_rejected() {
        assert!(random_regular_graph(5, 3, 0).is_err());
        assert!(random_regular_graph(4, 4, 0).is_err());
        assert!(random_regular_graph(10, 0, 0).is_err());
        assert!(ring_lattice(9, 3).is_err());
    }

    #[test]
    fn ring_lattice_matches_the_hand_construction() {
        let graph = ring_lattice(10, 4).unwrap();
        assert_simple_regular(&graph);
        assert_eq!(graph.neighbors(0), &[1, 2, 8, 9]);
        assert_eq!(graph.neighbors(5), &[3, 4, 6, 7]);
        // Exactly the consecutive triples (i, i+1, i+2).
        assert_eq!(graph.triangle_count(), 10);
    }

    #[test]
    fn odd_degree_ring_uses_the_antipode() {
        let graph = ring_lattice(10, 3).unwrap();
        assert_simple_regular(&graph);
        assert_eq!(graph.neighbors(0), &[1, 5, 9]);
        assert_eq!(graph.triangle_count(), 0);
    }
}
