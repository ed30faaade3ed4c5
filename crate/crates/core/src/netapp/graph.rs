use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NetError;

/// Simple undirected graph on nodes `0..n`, no self-loops or parallel edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct GraphSpec {
    nodes: u32,
    edges: Vec<(u32, u32)>,
}

impl TryFrom<GraphSpec> for Graph {
    type Error = String;

    fn try_from(spec: GraphSpec) -> Result<Self, Self::Error> {
        if let Some((u, v)) = spec.edges.iter().find(|(u, v)| *u >= spec.nodes || *v >= spec.nodes) {
            return Err(format!("edge ({u}, {v}) is out of range for {} nodes", spec.nodes));
        }
        Ok(Graph::from_edges(spec.nodes as usize, spec.edges))
    }
}

impl From<Graph> for GraphSpec {
    fn from(g: Graph) -> Self {
        GraphSpec {
            nodes: g.node_count() as u32,
            edges: g.edges().collect(),
        }
    }
}

impl Graph {
    /// Builds the graph, dropping self-loops and duplicate edges.
    ///
    /// Panics if an endpoint is `>= n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Graph {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u != v {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
            nb.dedup();
        }
        Graph { adj }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`, in order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |v| **v > u as u32).map(move |v| (u as u32, *v)))
    }

    /// Nodes within `radius` hops of `center`, ascending.
    pub fn ball(&self, center: u32, radius: usize) -> Vec<u32> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[center as usize] = 0;
        let mut queue = VecDeque::from([center]);
        let mut out = vec![center];
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize];
            if d == radius {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v as usize] == usize::MAX {
                    dist[v as usize] = d + 1;
                    out.push(v);
                    queue.push_back(v);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Connected components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for start in 0..self.node_count() as u32 {
            if seen[start as usize] {
                continue;
            }
            seen[start as usize] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Reads a whitespace-separated edge list. Lines starting with `#` and blank
/// lines are skipped; only the first two tokens of a line are used. Node
/// labels are compacted to `0..n` in order of first appearance.
pub fn parse_edge_list(reader: impl BufRead) -> Result<Graph, NetError> {
    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut endpoint = || -> Result<u32, NetError> {
            let tok = tokens.next().ok_or_else(|| NetError::Parse {
                line: i + 1,
                message: "expected two node ids".into(),
            })?;
            let label: u64 = tok.parse().map_err(|_| NetError::Parse {
                line: i + 1,
                message: format!("bad node id {tok:?}"),
            })?;
            let next = ids.len() as u32;
            Ok(*ids.entry(label).or_insert(next))
        };
        let u = endpoint()?;
        let v = endpoint()?;
        edges.push((u, v));
    }
    Ok(Graph::from_edges(ids.len(), edges))
}

pub fn parse_edge_list_str(text: &str) -> Result<Graph, NetError> {
    parse_edge_list(text.as_bytes())
}

/// Stochastic block model: blocks of the given sizes, each pair of nodes
/// joined with probability `p_in` inside a block and `p_out` across.
pub fn sbm_graph(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph, NetError> {
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(NetError::Parameter(format!("edge probability {p} is outside [0, 1]")));
        }
    }
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &n)| std::iter::repeat_n(b, n)).collect();
    let n = block.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    Ok(Graph::from_edges(n, edges))
}
