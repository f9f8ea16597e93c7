//! Growing graphs with incrementally maintained edge and triangle counts.
//!
//! Node ids are dense and assigned in insertion order. Triangles are always
//! counted on the undirected projection, also for directed graphs.

mod io;

pub use io::{read_edge_list, write_edge_list, EdgeList, EdgeRecord};

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};

pub type NodeId = usize;

const ER_MAX_RETRIES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    directed: bool,
    /// Undirected projection.
    nbrs: Vec<FxHashSet<NodeId>>,
    /// Directed only: out- and in-neighbours.
    succ: Vec<FxHashSet<NodeId>>,
    pred: Vec<FxHashSet<NodeId>>,
    edge_count: usize,
    triangle_count: u64,
}

/// Distinct node ids drawn without replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSample {
    node_ids: Vec<NodeId>,
}

impl NodeSample {
    pub fn ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn size(&self) -> usize {
        self.node_ids.len()
    }
}

impl Graph {
    pub fn new_undirected(nodes: usize) -> Self {
        Self::with_nodes(false, nodes)
    }

    pub fn new_directed(nodes: usize) -> Self {
        Self::with_nodes(true, nodes)
    }

    fn with_nodes(directed: bool, nodes: usize) -> Self {
        let side = if directed { nodes } else { 0 };
        Graph {
            directed,
            nbrs: vec![FxHashSet::default(); nodes],
            succ: vec![FxHashSet::default(); side],
            pred: vec![FxHashSet::default(); side],
            edge_count: 0,
            triangle_count: 0,
        }
    }

    /// Complete undirected graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new_undirected(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).expect("fresh complete graph edge");
            }
        }
        g
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_count(&self) -> usize {
        self.nbrs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn triangle_count(&self) -> u64 {
        self.triangle_count
    }

    /// Neighbours in the undirected projection.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nbrs[v].iter().copied()
    }

    /// Neighbours of `v` in ascending id order.
    pub fn sorted_neighbors(&self, v: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.nbrs[v].iter().copied().collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.nbrs[v].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        if self.directed {
            self.pred[v].len()
        } else {
            self.nbrs[v].len()
        }
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        if self.directed {
            self.succ[v].len()
        } else {
            self.nbrs[v].len()
        }
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|v| self.in_degree(v)).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.nbrs[u].contains(&v)
    }

    /// Directed edge `u -> v` (or the undirected edge for undirected graphs).
    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        if self.directed {
            u < self.node_count() && self.succ[u].contains(&v)
        } else {
            self.has_edge(u, v)
        }
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    fn common_neighbors(&self, u: NodeId, v: NodeId) -> u64 {
        let (small, large) = if self.nbrs[u].len() <= self.nbrs[v].len() {
            (&self.nbrs[u], &self.nbrs[v])
        } else {
            (&self.nbrs[v], &self.nbrs[u])
        };
        small.iter().filter(|w| large.contains(w)).count() as u64
    }

    /// Adds an isolated node and returns its id.
    pub fn add_node(&mut self) -> NodeId {
        self.nbrs.push(FxHashSet::default());
        if self.directed {
            self.succ.push(FxHashSet::default());
            self.pred.push(FxHashSet::default());
        }
        self.nbrs.len() - 1
    }

    /// Adds `u -> v` (directed) or `{u, v}`. Self-loops and edges already
    /// present in the undirected projection are rejected.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v || self.nbrs[u].contains(&v) {
            return Err(Error::InvalidEdge(u, v));
        }
        self.triangle_count += self.common_neighbors(u, v);
        self.nbrs[u].insert(v);
        self.nbrs[v].insert(u);
        if self.directed {
            self.succ[u].insert(v);
            self.pred[v].insert(u);
        }
        self.edge_count += 1;
        Ok(())
    }

    /// Adds a node joined to every id in `neighbors` (as out-edges for
    /// directed graphs). The triangle count grows by the number of edges
    /// among `neighbors`.
    pub fn add_node_with_edges(&mut self, neighbors: &[NodeId]) -> Result<NodeId> {
        for &w in neighbors {
            self.check_node(w)?;
        }
        let mut seen = FxHashSet::default();
        for &w in neighbors {
            if !seen.insert(w) {
                return Err(Error::InvalidInput(format!("duplicate neighbour {w}")));
            }
        }
        let u = self.add_node();
        for &w in neighbors {
            self.add_edge(u, w)?;
        }
        Ok(u)
    }

    /// Removes the edge between `u` and `v` (either orientation for directed
    /// graphs).
    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        self.nbrs[u].remove(&v);
        self.nbrs[v].remove(&u);
        self.triangle_count -= self.common_neighbors(u, v);
        if self.directed {
            if !self.succ[u].remove(&v) {
                self.succ[v].remove(&u);
                self.pred[u].remove(&v);
            } else {
                self.pred[v].remove(&u);
            }
        }
        self.edge_count -= 1;
        Ok(())
    }

    /// Undirected edges `(u, v)` with `u < v`, or arcs `u -> v` for directed
    /// graphs, in ascending order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.node_count() {
            if self.directed {
                let mut targets: Vec<NodeId> = self.succ[u].iter().copied().collect();
                targets.sort_unstable();
                out.extend(targets.into_iter().map(|v| (u, v)));
            } else {
                out.extend(self.sorted_neighbors(u).into_iter().filter(|&v| v > u).map(|v| (u, v)));
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == n
    }

    pub fn average_degree(&self) -> Result<f64> {
        if self.node_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(2.0 * self.edge_count as f64 / self.node_count() as f64)
    }

    /// Uniform sample of `n_star` distinct nodes.
    pub fn sample_nodes<R: Rng + ?Sized>(&self, n_star: usize, rng: &mut R) -> Result<NodeSample> {
        if n_star == 0 || n_star > self.node_count() {
            return Err(Error::SampleTooLarge { requested: n_star, available: self.node_count() });
        }
        Ok(NodeSample { node_ids: index::sample(rng, self.node_count(), n_star).into_vec() })
    }

    /// Wraps explicit ids as a sample after validating them.
    pub fn node_sample(&self, ids: Vec<NodeId>) -> Result<NodeSample> {
        let mut seen = FxHashSet::default();
        for &v in &ids {
            self.check_node(v)?;
            if !seen.insert(v) {
                return Err(Error::InvalidInput(format!("node {v} sampled twice")));
            }
        }
        Ok(NodeSample { node_ids: ids })
    }

    /// Triangles in the undirected subgraph induced by `sample`, in
    /// O(sum of sampled degrees).
    pub fn induced_triangles(&self, sample: &NodeSample) -> u64 {
        let members: FxHashSet<NodeId> = sample.node_ids.iter().copied().collect();
        let induced: Vec<(NodeId, FxHashSet<NodeId>)> = sample
            .node_ids
            .iter()
            .map(|&v| (v, self.nbrs[v].iter().copied().filter(|w| members.contains(w)).collect()))
            .collect();
        let lookup: rustc_hash::FxHashMap<NodeId, usize> =
            induced.iter().enumerate().map(|(i, (v, _))| (*v, i)).collect();
        let mut count = 0;
        for (v, nv) in &induced {
            for &w in nv.iter().filter(|&&w| w > *v) {
                let nw = &induced[lookup[&w]].1;
                count += nv.iter().filter(|&&x| x > w && nw.contains(&x)).count() as u64;
            }
        }
        count
    }

    /// Full recount of triangles from the adjacency sets, independent of the
    /// maintained counter (node-iterator over ordered wedges).
    pub fn count_triangles(&self) -> u64 {
        let mut count = 0;
        for v in 0..self.node_count() {
            for &w in self.nbrs[v].iter().filter(|&&w| w > v) {
                let nw = &self.nbrs[w];
                count += self.nbrs[v].iter().filter(|&&x| x > w && nw.contains(&x)).count() as u64;
            }
        }
        count
    }

    /// Induced subgraph on `keep` (ids relabelled densely in the given order).
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Result<Graph> {
        let mut relabel = rustc_hash::FxHashMap::default();
        for (i, &v) in keep.iter().enumerate() {
            self.check_node(v)?;
            relabel.insert(v, i);
        }
        let mut sub = Graph::with_nodes(self.directed, keep.len());
        for (u, v) in self.edges() {
            if let (Some(&a), Some(&b)) = (relabel.get(&u), relabel.get(&v)) {
                sub.add_edge(a, b)?;
            }
        }
        Ok(sub)
    }
}

/// Connected Erdős–Rényi `G(n_seed, p)` graph. Attempt `i` draws from ChaCha
/// stream `i` of `rng_seed`; the first connected draw is returned.
pub fn er_seed(n_seed: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    er_seed_with(n_seed, p, rng_seed, false)
}

/// Directed variant: each pair `i < j` is joined by the arc `j -> i` with
/// probability `p`, so later nodes point at earlier ones. Connectivity is
/// required on the undirected projection.
pub fn er_seed_directed(n_seed: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    er_seed_with(n_seed, p, rng_seed, true)
}

fn er_seed_with(n_seed: usize, p: f64, rng_seed: u64, directed: bool) -> Result<Graph> {
    if n_seed == 0 {
        return Err(Error::InvalidInput("seed graph needs at least one node".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!("edge probability {p} outside [0, 1]")));
    }
    if n_seed > 1 && p == 0.0 {
        return Err(Error::ConnectivityUnreachable(format!("p = 0 with {n_seed} nodes")));
    }
    for attempt in 0..ER_MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rng.set_stream(attempt);
        let mut g = Graph::with_nodes(directed, n_seed);
        for i in 0..n_seed {
            for j in i + 1..n_seed {
                if rng.random_bool(p) {
                    if directed {
                        g.add_edge(j, i)?;
                    } else {
                        g.add_edge(i, j)?;
                    }
                }
            }
        }
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ConnectivityUnreachable(format!(
        "no connected draw of G({n_seed}, {p}) in {ER_MAX_RETRIES} attempts"
    )))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::entry_rng;

    /// O(n^3) enumeration of 3-cliques in the undirected projection.
    pub(crate) fn brute_triangles(g: &Graph) -> u64 {
        let n = g.node_count();
        let mut count = 0;
        for a in 0..n {
            for b in a + 1..n {
                if !g.has_edge(a, b) {
                    continue;
                }
                for c in b + 1..n {
                    if g.has_edge(a, c) && g.has_edge(b, c) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = entry_rng(seed);
        let mut g = Graph::new_undirected(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        g
    }

    #[test]
    fn er_complete_when_p_is_one() {
        let g = er_seed(3, 1.0, 17).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.triangle_count(), 1);
    }

    #[test]
    fn er_rejects_p_zero() {
        assert!(matches!(er_seed(2, 0.0, 1), Err(Error::ConnectivityUnreachable(_))));
        assert_eq!(er_seed(1, 0.0, 1).unwrap().node_count(), 1);
    }

    #[test]
    fn er_thirty_nodes_connected_and_edge_count_in_band() {
        use statrs::distribution::{Binomial, DiscreteCDF};
        // Central 0.9999 interval of Binomial(435, 0.2).
        let binom = Binomial::new(0.2, 435).unwrap();
        let lo = binom.inverse_cdf(0.00005) as usize;
        let hi = binom.inverse_cdf(0.99995) as usize;
        assert!(lo > 40 && hi < 130, "[{lo}, {hi}]");
        for seed in [1u64, 7, 2020] {
            let g = er_seed(30, 0.2, seed).unwrap();
            assert!(g.is_connected());
            assert_eq!(g.node_count(), 30);
            assert!((lo..=hi).contains(&g.edge_count()), "edges {}", g.edge_count());
            assert_eq!(g.triangle_count(), brute_triangles(&g));
        }
        assert_eq!(er_seed(30, 0.2, 5).unwrap(), er_seed(30, 0.2, 5).unwrap());
    }

    #[test]
    fn add_node_completes_k4() {
        let mut g = Graph::complete(3);
        assert_eq!(g.triangle_count(), 1);
        g.add_node_with_edges(&[0, 1, 2]).unwrap();
        assert_eq!(g.triangle_count(), 4);
        let before = g.triangle_count();
        g.add_node_with_edges(&[]).unwrap();
        assert_eq!(g.triangle_count(), before);
    }

    #[test]
    fn add_node_rejects_unknown_and_duplicate() {
        let mut g = Graph::complete(3);
        assert!(matches!(g.add_node_with_edges(&[0, 7]), Err(Error::UnknownNode(7))));
        assert!(g.add_node_with_edges(&[1, 1]).is_err());
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn add_node_matches_brute_force() {
        let mut rng = entry_rng(99);
        let mut g = random_graph(20, 0.3, 4);
        let nbrs: Vec<NodeId> = index::sample(&mut rng, 20, 5).into_vec();
        g.add_node_with_edges(&nbrs).unwrap();
        assert_eq!(g.triangle_count(), brute_triangles(&g));
    }

    #[test]
    fn remove_edge_updates_triangles() {
        let mut g = Graph::complete(4);
        assert_eq!(g.triangle_count(), 4);
        g.remove_edge(2, 0).unwrap();
        assert_eq!(g.triangle_count(), 2);
        assert!(matches!(g.remove_edge(0, 2), Err(Error::MissingEdge(0, 2))));

        let mut path = Graph::new_undirected(3);
        path.add_edge(0, 1).unwrap();
        path.add_edge(1, 2).unwrap();
        path.remove_edge(0, 1).unwrap();
        assert_eq!(path.triangle_count(), 0);
    }

    #[test]
    fn remove_readd_round_trips() {
        let mut g = random_graph(25, 0.35, 8);
        let edges = g.edges();
        let start = g.triangle_count();
        for &(u, v) in &edges {
            g.remove_edge(u, v).unwrap();
            assert_eq!(g.triangle_count(), brute_triangles(&g));
            g.add_edge(u, v).unwrap();
            assert_eq!(g.triangle_count(), start);
        }
    }

    #[test]
    fn sampling_bounds_and_full_sample() {
        let g = Graph::complete(5);
        let mut rng = entry_rng(1);
        assert!(matches!(g.sample_nodes(0, &mut rng), Err(Error::SampleTooLarge { .. })));
        assert!(g.sample_nodes(6, &mut rng).is_err());
        let mut all = g.sample_nodes(5, &mut rng).unwrap().ids().to_vec();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn single_node_samples_are_uniform() {
        let g = Graph::new_undirected(10);
        let mut rng = entry_rng(3);
        let draws = 100_000;
        let mut freq = [0usize; 10];
        for _ in 0..draws {
            freq[g.sample_nodes(1, &mut rng).unwrap().ids()[0]] += 1;
        }
        let expected = draws as f64 / 10.0;
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        for f in freq {
            assert!((f as f64 - expected).abs() < 5.0 * sigma, "{f}");
        }
    }

    #[test]
    fn induced_triangles_cases() {
        let k4 = Graph::complete(4);
        let all = k4.node_sample(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(k4.induced_triangles(&all), 4);
        let pair = k4.node_sample(vec![1, 3]).unwrap();
        assert_eq!(k4.induced_triangles(&pair), 0);

        let g = random_graph(40, 0.3, 12);
        let mut rng = entry_rng(5);
        for _ in 0..20 {
            let s = g.sample_nodes(15, &mut rng).unwrap();
            let mut ids = s.ids().to_vec();
            ids.sort_unstable();
            let sub = g.induced_subgraph(&ids).unwrap();
            assert_eq!(g.induced_triangles(&s), brute_triangles(&sub));
        }
    }

    #[test]
    fn average_degree_cases() {
        assert_eq!(Graph::complete(4).average_degree().unwrap(), 3.0);
        let mut path = Graph::new_undirected(3);
        path.add_edge(0, 1).unwrap();
        path.add_edge(1, 2).unwrap();
        assert!((path.average_degree().unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(Graph::new_undirected(10).average_degree().unwrap(), 0.0);
        assert!(matches!(Graph::new_undirected(0).average_degree(), Err(Error::EmptyGraph)));
    }

    #[test]
    fn directed_graph_counts_projection_triangles() {
        let mut g = Graph::new_directed(3);
        g.add_edge(1, 0).unwrap();
        g.add_edge(2, 0).unwrap();
        g.add_edge(2, 1).unwrap();
        assert_eq!(g.triangle_count(), 1);
        assert!(g.add_edge(0, 1).is_err(), "reciprocal arc is parallel in the projection");
        assert_eq!(g.in_degree(0), 2);
        g.remove_edge(0, 2).unwrap();
        assert_eq!(g.in_degree(0), 1);
        assert_eq!(g.out_degree(2), 1);
        assert_eq!(g.triangle_count(), 0);
    }
}
