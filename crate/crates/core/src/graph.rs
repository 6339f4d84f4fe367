//! Simple connected graphs, the families used in the search analysis, and
//! marked vertex sets.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default cap on the number of vertices; projectors are stored densely.
pub const DEFAULT_MAX_VERTICES: usize = 2000;

/// Vertex cap, overridable through the `CTQW_MAX_N` environment variable.
pub fn max_vertices() -> usize {
    std::env::var("CTQW_MAX_N")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_VERTICES)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Johnson { n: usize, k: usize },
    Complete { n: usize },
    CompleteBipartite { a: usize, b: usize },
    Hypercube { d: usize },
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Johnson { n, k } => write!(f, "johnson(n={n},k={k})"),
            Family::Complete { n } => write!(f, "complete(n={n})"),
            Family::CompleteBipartite { a, b } => write!(f, "complete-bipartite(a={a},b={b})"),
            Family::Hypercube { d } => write!(f, "hypercube(d={d})"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

/// A finite, simple, connected, undirected graph.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    neighbors: Vec<Vec<usize>>,
    family: Family,
    /// Vertex labels of a Johnson graph: sorted 0-based k-subsets in
    /// colexicographic order.
    subsets: Option<Vec<Vec<u16>>>,
}

impl Graph {
    /// Builds a graph from an edge list on `num_vertices` vertices. Duplicate
    /// edges are collapsed; self-loops and out-of-range indices are rejected.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges_tagged(num_vertices, edges, Family::Custom, None)
    }

    fn from_edges_tagged(
        num_vertices: usize,
        edges: &[(usize, usize)],
        family: Family,
        subsets: Option<Vec<Vec<u16>>>,
    ) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        let cap = max_vertices();
        if num_vertices > cap {
            return Err(Error::TooLarge { num_vertices, cap });
        }
        let mut sets = vec![BTreeSet::new(); num_vertices];
        for (line, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= num_vertices {
                    return Err(Error::VertexOutOfRange { vertex: x, num_vertices });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line: line + 1, vertex: u });
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        let neighbors: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let mut adjacency = DMatrix::zeros(num_vertices, num_vertices);
        for (u, nb) in neighbors.iter().enumerate() {
            for &v in nb {
                adjacency[(u, v)] = 1.0;
            }
        }
        let g = Graph { adjacency, neighbors, family, subsets };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn build(family: Family) -> Result<Self> {
        match family {
            Family::Johnson { n, k } => Self::johnson(n, k),
            Family::Complete { n } => Self::complete(n),
            Family::CompleteBipartite { a, b } => Self::complete_bipartite(a, b),
            Family::Hypercube { d } => Self::hypercube(d),
            Family::Custom => Err(Error::InvalidParameter(
                "custom graphs are built from an edge list".into(),
            )),
        }
    }

    /// Johnson graph `J(n,k)`: k-subsets of `{0..n-1}`, adjacent when they
    /// share `k-1` elements. Vertices are numbered in colexicographic order,
    /// so `{0,..,k-1}` is vertex 0.
    pub fn johnson(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("johnson needs 1 <= k < n, got n={n}, k={k}")));
        }
        if n > u16::MAX as usize {
            return Err(Error::InvalidParameter(format!("johnson n={n} too large")));
        }
        let count = binomial_u128(n, k);
        let cap = max_vertices();
        if count > cap as u128 {
            return Err(Error::TooLarge { num_vertices: count.min(usize::MAX as u128) as usize, cap });
        }
        if n <= 2 * k {
            log::warn!("johnson(n={n},k={k}): n <= 2k, the two-marked asymptotics assume n > 2k");
        }
        let subsets = colex_subsets(n, k);
        let mut edges = Vec::new();
        for i in 0..subsets.len() {
            for j in (i + 1)..subsets.len() {
                if intersection_size(&subsets[i], &subsets[j]) + 1 == k {
                    edges.push((i, j));
                }
            }
        }
        Self::from_edges_tagged(subsets.len(), &edges, Family::Johnson { n, k }, Some(subsets))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("complete graph needs n >= 1".into()));
        }
        let edges: Vec<_> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        Self::from_edges_tagged(n, &edges, Family::Complete { n }, None)
    }

    /// `K_{a,b}`: vertices `0..a` form the left part, `a..a+b` the right part.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParameter("complete bipartite needs a, b >= 1".into()));
        }
        let edges: Vec<_> = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j))).collect();
        Self::from_edges_tagged(a + b, &edges, Family::CompleteBipartite { a, b }, None)
    }

    pub fn hypercube(d: usize) -> Result<Self> {
        if d > 20 {
            return Err(Error::InvalidParameter(format!("hypercube dimension {d} too large")));
        }
        let n = 1usize << d;
        let edges: Vec<_> = (0..n)
            .flat_map(|v| (0..d).map(move |b| (v, v ^ (1 << b))))
            .filter(|&(u, v)| u < v)
            .collect();
        Self::from_edges_tagged(n, &edges, Family::Hypercube { d }, None)
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        self.neighbors.iter().all(|nb| nb.len() == d).then_some(d)
    }

    /// The k-subset labelling a Johnson vertex.
    pub fn subset(&self, v: usize) -> Option<&[u16]> {
        self.subsets.as_ref().map(|s| s[v].as_slice())
    }

    /// Vertex index of a k-subset of a Johnson graph.
    pub fn johnson_index(&self, subset: &[u16]) -> Option<usize> {
        let Family::Johnson { n, k } = self.family else { return None };
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != k || s.iter().any(|&x| x as usize >= n) {
            return None;
        }
        Some(colex_rank(&s))
    }

    fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(Option::is_some)
    }

    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest-path distance.
    pub fn distance(&self, v1: usize, v2: usize) -> Result<usize> {
        let n = self.num_vertices();
        for v in [v1, v2] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, num_vertices: n });
            }
        }
        Ok(self.bfs(v1)[v2].expect("connected by construction"))
    }
}

/// Parses a whitespace-separated edge list of 0-based vertex pairs. Blank
/// lines and lines starting with `#` are skipped. When `num_vertices` is
/// `None` it is one more than the largest index seen.
pub fn load_edge_list(text: &str, num_vertices: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut max_index = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected two vertex indices, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad vertex index {s:?}: {e}"),
            })
        };
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(Error::SelfLoop { line: i + 1, vertex: u });
        }
        max_index = max_index.max(u).max(v);
        edges.push((u, v));
    }
    if edges.is_empty() && num_vertices.unwrap_or(0) != 1 {
        return Err(Error::Parse { line: 0, message: "edge list is empty".into() });
    }
    let n = num_vertices.unwrap_or(max_index + 1);
    Graph::from_edges(n, &edges)
}

pub fn load_edge_file(path: impl AsRef<std::path::Path>) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    load_edge_list(&text, None)
}

/// The marked set `W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedSet {
    vertices: Vec<usize>,
    /// Distance between the two marked vertices of a Johnson pair.
    johnson_delta: Option<usize>,
}

impl MarkedSet {
    pub fn new(vertices: Vec<usize>, num_vertices: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter("marked set is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            if v >= num_vertices {
                return Err(Error::VertexOutOfRange { vertex: v, num_vertices });
            }
            if !seen.insert(v) {
                return Err(Error::InvalidParameter(format!("vertex {v} marked twice")));
            }
        }
        Ok(MarkedSet { vertices, johnson_delta: None })
    }

    /// The canonical pair at distance `delta` on `J(n,k)`:
    /// `w₁ = {0..k-1}` and `w₂ = {0..k-δ-1} ∪ {k..k+δ-1}`.
    pub fn johnson_pair(graph: &Graph, delta: usize) -> Result<Self> {
        let Family::Johnson { n, k } = graph.family() else {
            return Err(Error::InvalidParameter("canonical pair needs a Johnson graph".into()));
        };
        if delta == 0 || delta > k || k + delta > n {
            return Err(Error::InvalidParameter(format!(
                "distance δ={delta} not realisable on J({n},{k})"
            )));
        }
        let (w1, w2) = canonical_pair_subsets(k, delta);
        let i1 = graph.johnson_index(&w1).expect("valid subset");
        let i2 = graph.johnson_index(&w2).expect("valid subset");
        Ok(MarkedSet { vertices: vec![i1, i2], johnson_delta: Some(delta) })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn johnson_delta(&self) -> Option<usize> {
        self.johnson_delta
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
}

pub(crate) fn canonical_pair_subsets(k: usize, delta: usize) -> (Vec<u16>, Vec<u16>) {
    let w1: Vec<u16> = (0..k as u16).collect();
    let w2: Vec<u16> = (0..(k - delta) as u16).chain(k as u16..(k + delta) as u16).collect();
    (w1, w2)
}

/// All k-subsets of `{0..n-1}` in colexicographic order.
pub fn colex_subsets(n: usize, k: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut s: Vec<u16> = (0..k as u16).collect();
    loop {
        out.push(s.clone());
        // Successor: bump the first element that has room, reset the ones below.
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { s[i + 1] } else { n as u16 };
            if s[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            return out;
        }
        s[i] += 1;
        for (j, x) in s.iter_mut().enumerate().take(i) {
            *x = j as u16;
        }
    }
}

/// Colex rank of a sorted subset: `Σ_i C(s_i, i+1)`.
pub fn colex_rank(sorted: &[u16]) -> usize {
    sorted
        .iter()
        .enumerate()
        .map(|(i, &s)| binomial_u128(s as usize, i + 1) as usize)
        .sum()
}

pub fn intersection_size(a: &[u16], b: &[u16]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

pub(crate) fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
