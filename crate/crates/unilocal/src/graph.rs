//! Immutable simple undirected graphs with unique node identities, the
//! generators used by the experiments, and the derived graphs the reductions
//! need (induced subgraphs, line graphs, clique products, degree layers).

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node index {0} out of range")]
    OutOfRange(usize),
    #[error("identity {0} is not unique")]
    DuplicateId(u64),
    #[error("identities must be positive")]
    ZeroId,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A simple undirected graph. Node `v` is the dense index `v`; `id(v)` is its
/// identity. Adjacency lists are sorted and symmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty() -> Self {
        Graph { ids: Vec::new(), adj: Vec::new() }
    }

    /// Builds a graph from identities and an edge list over node indices.
    /// Duplicate edges are merged; self-loops and repeated identities are rejected.
    pub fn from_edges(ids: Vec<u64>, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let n = ids.len();
        let mut seen = HashSet::with_capacity(n);
        for &id in &ids {
            if id == 0 {
                return Err(GraphError::ZeroId);
            }
            if !seen.insert(id) {
                return Err(GraphError::DuplicateId(id));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::OutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::OutOfRange(v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { ids, adj })
    }

    /// Graph on `n` nodes with identities `1..=n` in index order.
    pub fn with_sequential_ids(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Graph::from_edges((1..=n as u64).collect(), edges)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest identity, 0 for the empty graph.
    pub fn max_id(&self) -> u64 {
        self.ids.iter().copied().max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Position of `v` in the adjacency list of `u`.
    pub fn port_of(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].binary_search(&v).ok()
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// Edges as index pairs `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// BFS distances from `src`; `None` for unreachable nodes.
    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Nodes within distance `r` of `src` (including `src`).
    pub fn ball(&self, src: usize, r: usize) -> Vec<usize> {
        self.distances_from(src)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.filter(|&d| d <= r).map(|_| v))
            .collect()
    }

    /// Same structure with new identities.
    pub fn with_ids(&self, ids: Vec<u64>) -> Result<Self, GraphError> {
        if ids.len() != self.n() {
            return Err(GraphError::Param(format!(
                "expected {} identities, got {}",
                self.n(),
                ids.len()
            )));
        }
        Graph::from_edges(ids, &self.edges())
    }

    /// Edge-list text: header `n m`, one `id_u id_v` line per edge, then one
    /// bare `id` line per isolated node.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", self.ids[u], self.ids[v]);
        }
        for v in 0..self.n() {
            if self.adj[v].is_empty() {
                let _ = writeln!(out, "{}", self.ids[v]);
            }
        }
        out
    }

    /// Parses the edge-list format. Nodes are indexed in increasing identity
    /// order; if the header announces more nodes than appear, the missing
    /// ones receive the smallest unused identities.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing header".into() })?;
        let nums = parse_numbers(hl, header)?;
        if nums.len() != 2 {
            return Err(GraphError::Parse { line: hl, msg: "header must be `n m`".into() });
        }
        let (n, m) = (nums[0] as usize, nums[1] as usize);
        let mut ids: Vec<u64> = Vec::new();
        let mut id_edges = Vec::new();
        for (ln, line) in lines {
            let nums = parse_numbers(ln, line)?;
            match nums.as_slice() {
                [a] => ids.push(*a),
                [a, b] => {
                    ids.push(*a);
                    ids.push(*b);
                    id_edges.push((*a, *b));
                }
                _ => return Err(GraphError::Parse { line: ln, msg: "expected one or two identities".into() }),
            }
        }
        if id_edges.len() != m {
            return Err(GraphError::Parse {
                line: hl,
                msg: format!("header announces {m} edges, found {}", id_edges.len()),
            });
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() > n {
            return Err(GraphError::Parse {
                line: hl,
                msg: format!("header announces {n} nodes, found {}", ids.len()),
            });
        }
        let mut next = 1u64;
        while ids.len() < n {
            if ids.binary_search(&next).is_err() {
                ids.push(next);
            }
            next += 1;
        }
        ids.sort_unstable();
        let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let edges: Vec<(usize, usize)> = id_edges.iter().map(|(a, b)| (index[a], index[b])).collect();
        Graph::from_edges(ids, &edges)
    }
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<u64>, GraphError> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|e| GraphError::Parse { line, msg: format!("`{t}`: {e}") })
        })
        .collect()
}

/// Graph parameters registered as non-decreasing under induced subgraphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GraphParam {
    N,
    MaxDegree,
    MaxId,
    Arboricity,
}

impl GraphParam {
    pub const ALL: [GraphParam; 4] = [GraphParam::N, GraphParam::MaxDegree, GraphParam::MaxId, GraphParam::Arboricity];

    pub fn name(self) -> &'static str {
        match self {
            GraphParam::N => "n",
            GraphParam::MaxDegree => "max_degree",
            GraphParam::MaxId => "max_id",
            GraphParam::Arboricity => "arboricity",
        }
    }

    /// `None` only for arboricity above the oracle limit.
    pub fn eval(self, g: &Graph) -> Option<u64> {
        match self {
            GraphParam::N => Some(g.n() as u64),
            GraphParam::MaxDegree => Some(g.max_degree() as u64),
            GraphParam::MaxId => Some(g.max_id()),
            GraphParam::Arboricity => arboricity(g),
        }
    }
}

pub const ARBORICITY_ORACLE_LIMIT: usize = 20;

/// Exact arboricity by the Nash-Williams formula, maximised over vertex
/// subsets. Refuses (returns `None`) above [`ARBORICITY_ORACLE_LIMIT`] nodes.
pub fn arboricity(g: &Graph) -> Option<u64> {
    let n = g.n();
    if n > ARBORICITY_ORACLE_LIMIT {
        return None;
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let mut best = 0u64;
    for set in 1u32..(1u32 << n) {
        let k = set.count_ones() as u64;
        if k < 2 {
            continue;
        }
        let mut twice_edges = 0u64;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            twice_edges += (masks[v] & set).count_ones() as u64;
        }
        let e = twice_edges / 2;
        best = best.max(e.div_ceil(k - 1));
    }
    Some(best)
}

/// Induced subgraph on `keep` (indices, any order, duplicates ignored). Nodes
/// keep their relative order and identities. Returns the graph and, for each
/// new node, its index in `g`.
pub fn induced_subgraph_with_map(g: &Graph, keep: &[usize]) -> (Graph, Vec<usize>) {
    let mut mark = vec![false; g.n()];
    for &v in keep {
        mark[v] = true;
    }
    let origin: Vec<usize> = (0..g.n()).filter(|&v| mark[v]).collect();
    let mut new_index = vec![usize::MAX; g.n()];
    for (i, &v) in origin.iter().enumerate() {
        new_index[v] = i;
    }
    let ids = origin.iter().map(|&v| g.id(v)).collect();
    let adj = origin
        .iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&w| mark[w]).map(|&w| new_index[w]).collect())
        .collect();
    (Graph { ids, adj }, origin)
}

pub fn induced_subgraph(g: &Graph, keep: &[usize]) -> Graph {
    induced_subgraph_with_map(g, keep).0
}

/// Every labelled graph on `n` nodes with identities `1..=n`.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        Graph::with_sequential_ids(n, &edges).expect("valid edge set")
    })
}

/// Identity of the line-graph node for the edge between identities `a` and `b`.
/// Injective on unordered pairs of distinct positive identities.
pub fn edge_identity(a: u64, b: u64) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    hi * (hi - 1) / 2 + lo
}

/// Line graph: one node per edge of `g` (in [`Graph::edges`] order), adjacent
/// iff the edges share an endpoint. The map gives each line node's endpoints.
pub fn line_graph(g: &Graph) -> (Graph, Vec<(usize, usize)>) {
    let edges = g.edges();
    let ids = edges.iter().map(|&(u, v)| edge_identity(g.id(u), g.id(v))).collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (k, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(k);
        incident[v].push(k);
    }
    let mut line_edges = Vec::new();
    for list in &incident {
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                line_edges.push((a, b));
            }
        }
    }
    let lg = Graph::from_edges(ids, &line_edges).expect("edge identities are unique");
    (lg, edges)
}

/// Identity of clique member `i` (1-based) of the node with identity `id`.
pub fn clique_identity(id: u64, i: u64) -> u64 {
    let s = id + i;
    s * (s + 1) / 2 + i
}

/// Clique product: node `u` becomes a clique `u_1..u_{deg(u)+1}`, and each
/// edge `uv` adds `u_i v_i` for `i` in `1..=1+min(deg u, deg v)`. The map
/// gives `(u, i)` for every product node; members of `u` are contiguous.
pub fn product_graph(g: &Graph) -> (Graph, Vec<(usize, usize)>) {
    let mut start = Vec::with_capacity(g.n());
    let mut map = Vec::new();
    for u in 0..g.n() {
        start.push(map.len());
        for i in 1..=g.degree(u) + 1 {
            map.push((u, i));
        }
    }
    let ids = map.iter().map(|&(u, i)| clique_identity(g.id(u), i as u64)).collect();
    let mut edges = Vec::new();
    for u in 0..g.n() {
        let k = g.degree(u) + 1;
        for a in 0..k {
            for b in a + 1..k {
                edges.push((start[u] + a, start[u] + b));
            }
        }
    }
    for (u, v) in g.edges() {
        let shared = 1 + g.degree(u).min(g.degree(v));
        for i in 0..shared {
            edges.push((start[u] + i, start[v] + i));
        }
    }
    let pg = Graph::from_edges(ids, &edges).expect("clique identities are unique");
    (pg, map)
}

/// Thresholds `D_1 = 1`, `D_{i+1} = min{l : g(l) >= 2 g(D_i)}` until one exceeds `max_degree`.
pub fn layer_thresholds(g: impl Fn(u64) -> u64, max_degree: u64) -> Vec<u64> {
    let mut d = vec![1u64];
    while *d.last().unwrap() <= max_degree {
        let cur = *d.last().unwrap();
        let target = g(cur).saturating_mul(2);
        let mut l = cur + 1;
        while g(l) < target {
            l += 1;
        }
        d.push(l);
    }
    d
}

/// Layer index (0-based) of a node with degree `deg`; degree 0 joins layer 0.
pub fn layer_of(deg: u64, thresholds: &[u64]) -> Option<usize> {
    if deg == 0 {
        return Some(0);
    }
    (0..thresholds.len().saturating_sub(1)).find(|&i| thresholds[i] <= deg && deg < thresholds[i + 1])
}

/// Partition by degree: position `i` holds nodes with degree in
/// `[D_{i+1}, D_{i+2} - 1]` (0-based), truncated after the last non-empty layer.
pub fn degree_layers(g: &Graph, thresholds: &[u64]) -> Result<Vec<Vec<usize>>, GraphError> {
    if thresholds.first() != Some(&1) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GraphError::Param("thresholds must start at 1 and increase strictly".into()));
    }
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for v in 0..g.n() {
        let i = layer_of(g.degree(v) as u64, thresholds).ok_or_else(|| {
            GraphError::Param(format!("degree {} not covered by thresholds", g.degree(v)))
        })?;
        if layers.len() <= i {
            layers.resize(i + 1, Vec::new());
        }
        layers[i].push(v);
    }
    Ok(layers)
}

/// Graph families the generator knows.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    Clique { n: usize },
    Grid { rows: usize, cols: usize },
    Gnp { n: usize, p: f64 },
    /// Random forest with `trees` components.
    Forest { n: usize, trees: usize },
    /// Uniform-ish random `d`-regular graph (configuration model with restarts).
    Regular { n: usize, d: usize },
    /// `G(n, p)` keeping an edge only while both endpoints have degree below `max_degree`.
    Capped { n: usize, p: f64, max_degree: usize },
}

impl Family {
    pub fn node_count(&self) -> usize {
        match *self {
            Family::Path { n }
            | Family::Cycle { n }
            | Family::Clique { n }
            | Family::Gnp { n, .. }
            | Family::Forest { n, .. }
            | Family::Regular { n, .. }
            | Family::Capped { n, .. } => n,
            Family::Grid { rows, cols } => rows * cols,
        }
    }
}

fn check_p(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::Param(format!("edge probability {p} outside [0, 1]")))
    }
}

/// Deterministic generator. Identities are a random permutation of `1..=n`
/// drawn from the seed, independent of the structure.
pub fn generate(family: &Family, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = family.node_count();
    let edges: Vec<(usize, usize)> = match *family {
        Family::Path { n } => (1..n).map(|v| (v - 1, v)).collect(),
        Family::Cycle { n } => {
            if n < 3 {
                return Err(GraphError::Param(format!("cycle needs at least 3 nodes, got {n}")));
            }
            (0..n).map(|v| (v, (v + 1) % n)).collect()
        }
        Family::Clique { n } => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        Family::Grid { rows, cols } => {
            let mut e = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    let v = r * cols + c;
                    if c + 1 < cols {
                        e.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        e.push((v, v + cols));
                    }
                }
            }
            e
        }
        Family::Gnp { n, p } => {
            check_p(p)?;
            let mut e = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        e.push((u, v));
                    }
                }
            }
            e
        }
        Family::Forest { n, trees } => {
            if n > 0 && (trees == 0 || trees > n) {
                return Err(GraphError::Param(format!("forest on {n} nodes cannot have {trees} trees")));
            }
            (trees..n).map(|v| (rng.gen_range(0..v), v)).collect()
        }
        Family::Regular { n, d } => random_regular(n, d, &mut rng)?,
        Family::Capped { n, p, max_degree } => {
            check_p(p)?;
            let mut candidates = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        candidates.push((u, v));
                    }
                }
            }
            candidates.shuffle(&mut rng);
            let mut deg = vec![0usize; n];
            let mut e = Vec::new();
            for (u, v) in candidates {
                if deg[u] < max_degree && deg[v] < max_degree {
                    deg[u] += 1;
                    deg[v] += 1;
                    e.push((u, v));
                }
            }
            e
        }
    };
    let mut ids: Vec<u64> = (1..=n as u64).collect();
    ids.shuffle(&mut rng);
    Graph::from_edges(ids, &edges)
}

fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, GraphError> {
    if (n > 0 && d >= n) || (n * d) % 2 == 1 {
        return Err(GraphError::Param(format!("no {d}-regular graph on {n} nodes")));
    }
    for _ in 0..10_000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(rng);
        let mut seen = HashSet::new();
        let mut ok = true;
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(seen.into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect());
        }
    }
    Err(GraphError::Param(format!("failed to sample a {d}-regular graph on {n} nodes")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::with_sequential_ids(n, &(1..n).map(|v| (v - 1, v)).collect::<Vec<_>>()).unwrap()
    }

    fn triangle() -> Graph {
        Graph::with_sequential_ids(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Graph::from_edges(vec![1, 1], &[]), Err(GraphError::DuplicateId(1)));
        assert_eq!(Graph::from_edges(vec![1, 2], &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(Graph::from_edges(vec![0], &[]), Err(GraphError::ZeroId));
        let g = Graph::with_sequential_ids(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn induced_subgraph_cases() {
        let t = triangle();
        let e = induced_subgraph(&t, &[0, 2]);
        assert_eq!(e.n(), 2);
        assert_eq!(e.edge_count(), 1);
        assert_eq!(e.ids(), &[1, 3]);
        assert_eq!(induced_subgraph(&t, &[0, 1, 2]), t);
        assert!(induced_subgraph(&t, &[]).is_empty());
    }

    #[test]
    fn line_graph_cases() {
        let (lg, map) = line_graph(&path(3));
        assert_eq!((lg.n(), lg.edge_count()), (2, 1));
        assert_eq!(map, vec![(0, 1), (1, 2)]);
        let (lt, _) = line_graph(&triangle());
        assert_eq!((lt.n(), lt.edge_count()), (3, 3));
        let (le, _) = line_graph(&path(2));
        assert_eq!((le.n(), le.edge_count()), (1, 0));
    }

    #[test]
    fn edge_identity_is_injective_on_pairs() {
        let mut seen = HashSet::new();
        for a in 1..60u64 {
            for b in a + 1..60 {
                assert!(seen.insert(edge_identity(a, b)));
                assert_eq!(edge_identity(a, b), edge_identity(b, a));
            }
        }
    }

    #[test]
    fn product_of_single_edge_is_four_cycle() {
        let (pg, map) = product_graph(&path(2));
        assert_eq!(map, vec![(0, 1), (0, 2), (1, 1), (1, 2)]);
        let mut e = pg.edges();
        e.sort();
        assert_eq!(e, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert!(pg.ids().iter().all(|&id| id > 0));
    }

    #[test]
    fn product_of_isolated_node_and_star() {
        let single = Graph::with_sequential_ids(1, &[]).unwrap();
        let (pg, _) = product_graph(&single);
        assert_eq!((pg.n(), pg.edge_count()), (1, 0));

        // centre 0 with leaves 1 and 2
        let star = Graph::with_sequential_ids(3, &[(0, 1), (0, 2)]).unwrap();
        let (pg, map) = product_graph(&star);
        assert_eq!(pg.n(), 3 + 2 + 2);
        let idx = |u: usize, i: usize| map.iter().position(|&p| p == (u, i)).unwrap();
        for leaf in [1, 2] {
            for i in 1..=2 {
                assert!(pg.has_edge(idx(0, i), idx(leaf, i)));
            }
        }
        // 3 + 1 + 1 clique edges, 2 + 2 cross edges
        assert_eq!(pg.edge_count(), 9);
        assert!(!pg.has_edge(idx(0, 3), idx(1, 1)));
    }

    #[test]
    fn degree_layers_cases() {
        let d = layer_thresholds(|x| x * x, 2);
        assert_eq!(d, vec![1, 2, 3]);
        let layers = degree_layers(&path(3), &d).unwrap();
        assert_eq!(layers, vec![vec![0, 2], vec![1]]);
        let k4 = generate(&Family::Clique { n: 4 }, 0).unwrap();
        let d = layer_thresholds(|x| x * x, 3);
        let layers = degree_layers(&k4, &d).unwrap();
        assert_eq!(layers.iter().filter(|l| !l.is_empty()).count(), 1);
        assert!(degree_layers(&Graph::empty(), &[1, 2]).unwrap().is_empty());
        assert!(degree_layers(&path(2), &[2, 3]).is_err());
    }

    #[test]
    fn generator_cases() {
        let p = generate(&Family::Path { n: 3 }, 5).unwrap();
        assert_eq!((p.n(), p.edge_count()), (3, 2));
        let e = generate(&Family::Gnp { n: 8, p: 0.0 }, 1).unwrap();
        assert_eq!((e.n(), e.edge_count()), (8, 0));
        assert_eq!(generate(&Family::Clique { n: 5 }, 0).unwrap().edge_count(), 10);
        assert!(generate(&Family::Gnp { n: 3, p: 1.5 }, 0).is_err());
        assert!(generate(&Family::Cycle { n: 2 }, 0).is_err());
        assert!(generate(&Family::Regular { n: 5, d: 3 }, 0).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_permutes_ids() {
        let f = Family::Gnp { n: 30, p: 0.2 };
        assert_eq!(generate(&f, 9).unwrap(), generate(&f, 9).unwrap());
        let g = generate(&f, 9).unwrap();
        let mut ids = g.ids().to_vec();
        ids.sort_unstable();
        assert_eq!(ids, (1..=30).collect::<Vec<_>>());
        let r = generate(&Family::Regular { n: 16, d: 4 }, 3).unwrap();
        assert!((0..16).all(|v| r.degree(v) == 4));
        let f = generate(&Family::Forest { n: 20, trees: 3 }, 2).unwrap();
        assert_eq!(f.edge_count(), 17);
        let c = generate(&Family::Capped { n: 40, p: 0.5, max_degree: 5 }, 2).unwrap();
        assert!(c.max_degree() <= 5);
        let grid = generate(&Family::Grid { rows: 3, cols: 4 }, 0).unwrap();
        assert_eq!(grid.edge_count(), 3 * 3 + 2 * 4);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate(&Family::Gnp { n: 12, p: 0.2 }, 4).unwrap();
        let text = g.to_edge_list();
        let h = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(h.n(), g.n());
        assert_eq!(h.edge_count(), g.edge_count());
        for (u, v) in g.edges() {
            let (a, b) = (h.index_of(g.id(u)).unwrap(), h.index_of(g.id(v)).unwrap());
            assert!(h.has_edge(a, b));
        }
        assert!(Graph::parse_edge_list("2 1\n1 2\n3 4\n").is_err());
        assert!(Graph::parse_edge_list("2 1\n1 x\n").is_err());
    }

    #[test]
    fn arboricity_small_cases() {
        assert_eq!(arboricity(&path(5)), Some(1));
        assert_eq!(arboricity(&triangle()), Some(2));
        let k5 = generate(&Family::Clique { n: 5 }, 0).unwrap();
        assert_eq!(arboricity(&k5), Some(3));
        assert_eq!(arboricity(&Graph::empty()), Some(0));
        assert_eq!(arboricity(&generate(&Family::Path { n: 25 }, 0).unwrap()), None);
    }
}
