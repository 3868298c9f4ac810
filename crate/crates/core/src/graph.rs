//! Graphs, vertex orderings, and exact vertex connectivity.
//!
//! Connectivity is the precondition for every construction downstream:
//! orthogonal representations in `R^{n-d-1}` exist exactly when the graph
//! is `(d+1)`-connected, so we compute connectivity exactly with
//! node-splitting maximum flow rather than estimate it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least one vertex")]
    NoVertices,
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) out of range for n = {2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("order is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("prefix index {index} out of range 1..={n}")]
    PrefixOutOfRange { index: usize, n: usize },
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// Undirected simple graph on vertices `0..n`.
///
/// Edges are kept sorted lexicographically with `i < j`.  That ordering is
/// shared by stress vectors, rigidity-matrix rows, and every edge-keyed
/// serialization in the crate, so indices are comparable across modules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;
    fn try_from(raw: GraphJson) -> Result<Self, GraphError> {
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(raw.n, &edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> GraphJson {
        GraphJson {
            n: g.n,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, normalizing each edge to `i < j` and rejecting
    /// loops, duplicates, and out-of-range endpoints.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(GraphError::EdgeOutOfRange(a, b, n));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        Ok(Graph { n, edges: norm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order, each with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).is_ok()
    }

    /// Position of edge `{a, b}` in the lexicographic edge list.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(i, j)| {
                if i == v {
                    Some(j)
                } else if j == v {
                    Some(i)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(i, j)| i == v || j == v).count()
    }

    /// Non-adjacent unordered pairs, lexicographic, `i < j`.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if !self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.m() == self.n * (self.n - 1) / 2
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::new(n, &edges).expect("complete graph is valid")
    }

    /// Complete bipartite graph with sides `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                edges.push((i, a + j));
            }
        }
        Graph::new(a + b, &edges).expect("complete bipartite graph is valid")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).expect("cycle is valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::new(n, &edges).expect("path is valid")
    }

    /// Wheel: hub `0` joined to a rim cycle `1..=rim`.
    pub fn wheel(rim: usize) -> Self {
        let mut edges: Vec<(usize, usize)> = (1..=rim).map(|i| (0, i)).collect();
        for i in 1..=rim {
            let j = if i == rim { 1 } else { i + 1 };
            edges.push((i, j));
        }
        Graph::new(rim + 1, &edges).expect("wheel is valid")
    }

    /// Octahedron `K_{2,2,2}`: all pairs except {0,1}, {2,3}, {4,5}.
    pub fn octahedron() -> Self {
        let mut edges = Vec::new();
        for i in 0..6usize {
            for j in (i + 1)..6 {
                if !(j == i + 1 && i % 2 == 0) {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(6, &edges).expect("octahedron is valid")
    }

    /// Exact vertex connectivity: the minimum number of vertices whose
    /// removal disconnects the graph, `n - 1` for complete graphs.
    ///
    /// Computed as the minimum over all non-adjacent pairs of the
    /// node-splitting maximum flow between them (Menger).
    pub fn vertex_connectivity(&self) -> usize {
        if self.n <= 1 {
            return 0;
        }
        if self.is_complete() {
            return self.n - 1;
        }
        let mut best = self.n - 1;
        for (s, t) in self.non_edges() {
            best = best.min(self.max_vertex_disjoint_paths(s, t));
        }
        best
    }

    pub fn is_d_plus_1_connected(&self, d: usize) -> bool {
        self.vertex_connectivity() >= d + 1
    }

    /// Maximum number of internally vertex-disjoint s-t paths, via unit
    /// capacity max flow on the split digraph (v_in -> v_out per vertex).
    fn max_vertex_disjoint_paths(&self, s: usize, t: usize) -> usize {
        debug_assert!(!self.has_edge(s, t));
        let n = self.n;
        // Node ids: 2v = v_in, 2v + 1 = v_out.
        let mut net = FlowNetwork::new(2 * n);
        let inf = n as i64;
        for v in 0..n {
            let cap = if v == s || v == t { inf } else { 1 };
            net.add_edge(2 * v, 2 * v + 1, cap);
        }
        for &(a, b) in &self.edges {
            net.add_edge(2 * a + 1, 2 * b, inf);
            net.add_edge(2 * b + 1, 2 * a, inf);
        }
        net.max_flow(2 * s + 1, 2 * t) as usize
    }
}

/// Edmonds-Karp on an adjacency-list residual network. Desk-scale graphs
/// only; no need for anything fancier.
struct FlowNetwork {
    // edge k: (to, cap); edge k^1 is the reverse edge.
    to: Vec<usize>,
    cap: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i64) {
        let k = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.to.push(u);
        self.cap.push(0);
        self.adj[u].push(k);
        self.adj[v].push(k + 1);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            // BFS for a shortest augmenting path.
            let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &k in &self.adj[u] {
                    let v = self.to[k];
                    if !seen[v] && self.cap[k] > 0 {
                        seen[v] = true;
                        pred[v] = Some(k);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while v != s {
                let k = pred[v].unwrap();
                bottleneck = bottleneck.min(self.cap[k]);
                v = self.to[k ^ 1];
            }
            let mut v = t;
            while v != s {
                let k = pred[v].unwrap();
                self.cap[k] -= bottleneck;
                self.cap[k ^ 1] += bottleneck;
                v = self.to[k ^ 1];
            }
            flow += bottleneck;
        }
    }
}

/// A processing order for the vertices of a graph; any permutation works,
/// the incremental construction does not require a special one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexOrder {
    order: Vec<usize>,
}

impl VertexOrder {
    pub fn identity(n: usize) -> Self {
        VertexOrder {
            order: (0..n).collect(),
        }
    }

    pub fn new(order: Vec<usize>) -> Result<Self, GraphError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(GraphError::NotAPermutation(n));
            }
            seen[v] = true;
        }
        Ok(VertexOrder { order })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn vertex_at(&self, position: usize) -> usize {
        self.order[position]
    }

    /// For the `i`-th vertex in the order (1-based), the number `e_i` of its
    /// neighbors among the first `i` vertices and the count
    /// `ebar_i = i - 1 - e_i` of earlier non-neighbors.
    pub fn induced_prefix_counts(
        &self,
        g: &Graph,
        i: usize,
    ) -> Result<(usize, usize), GraphError> {
        if i == 0 || i > self.order.len() {
            return Err(GraphError::PrefixOutOfRange {
                index: i,
                n: self.order.len(),
            });
        }
        let v = self.order[i - 1];
        let e_i = self.order[..i - 1]
            .iter()
            .filter(|&&u| g.has_edge(u, v))
            .count();
        Ok((e_i, i - 1 - e_i))
    }
}
