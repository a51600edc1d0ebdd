//! Undirected network graphs, generators and the plain-text edge-list format.
//!
//! The text format is one line holding the node count `n`, followed by one
//! `u v` line per undirected edge with 0-indexed endpoints. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{self, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("a network needs at least one node")]
    Empty,
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("edge {0}-{1} references a node outside 0..{2}")]
    OutOfRange(usize, usize, usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown topology spec {0:?}")]
    UnknownSpec(String),
    #[error("invalid generator argument: {0}")]
    BadArgument(String),
}

/// A simple undirected graph on nodes `0..n`. Adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    adj: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut adj = vec![Vec::new(); node_count];
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(TopologyError::OutOfRange(u, v, node_count));
            }
            if u == v {
                return Err(TopologyError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(TopologyError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Topology { adj })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Largest neighborhood size, recomputed from the adjacency.
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(Option::is_some)
    }

    /// Diameter, or `None` when the graph is disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.node_count() {
            for d in self.bfs(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Nodes at distance exactly 1 or 2 from `v`, sorted.
    pub fn within_two_hops(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.adj[v]
            .iter()
            .flat_map(|&u| std::iter::once(u).chain(self.adj[u].iter().copied()))
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The square graph: `u ~ v` iff their distance is 1 or 2.
    pub fn square(&self) -> Topology {
        let adj = (0..self.node_count())
            .map(|v| self.within_two_hops(v))
            .collect();
        Topology { adj }
    }

    pub fn clique(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).expect("valid clique")
    }

    /// The star K_{1,n-1}: node 0 is the center, nodes `1..n` are leaves.
    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (0, v))).expect("valid star")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v))).expect("valid path")
    }

    /// Cycle on `n >= 3` nodes; smaller `n` degrades to a path.
    pub fn cycle(n: usize) -> Self {
        if n < 3 {
            return Self::path(n);
        }
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n))).expect("valid cycle")
    }

    /// Wheel: hub 0 joined to a cycle on nodes `1..n` (needs `n >= 4` for a proper rim).
    pub fn wheel(n: usize) -> Self {
        let rim = n.saturating_sub(1);
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (0, v)).collect();
        if rim >= 3 {
            edges.extend((0..rim).map(|i| (1 + i, 1 + (i + 1) % rim)));
        } else if rim == 2 {
            edges.push((1, 2));
        }
        Self::new(n, edges).expect("valid wheel")
    }

    pub fn edgeless(n: usize) -> Self {
        Self::new(n, std::iter::empty()).expect("valid edgeless graph")
    }

    /// Erdős–Rényi G(n, p) with a deterministic seed.
    pub fn gnp(n: usize, p: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed, Stream::Graph, n as u64);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, edges).expect("valid random graph")
    }

    pub fn parse(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, first) = lines.next().ok_or(TopologyError::Parse {
            line: 1,
            msg: "missing node count".into(),
        })?;
        let n: usize = first.parse().map_err(|_| TopologyError::Parse {
            line,
            msg: format!("bad node count {first:?}"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let mut next = || -> Result<usize, TopologyError> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| TopologyError::Parse {
                        line,
                        msg: format!("expected `u v`, got {l:?}"),
                    })
            };
            let (u, v) = (next()?, next()?);
            edges.push((u, v));
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.node_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// A named topology: a generator with arguments or an edge-list file.
///
/// Textual forms: `clique:16`, `star:9`, `path:8`, `cycle:10`, `wheel:12`,
/// `edgeless:4`, `gnp:32:0.2:7` (n, p, seed), `file:<path>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TopologySpec {
    Clique(usize),
    Star(usize),
    Path(usize),
    Cycle(usize),
    Wheel(usize),
    Edgeless(usize),
    Gnp { n: usize, p: f64, seed: u64 },
    File(String),
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology, TopologyError> {
        Ok(match self {
            TopologySpec::Clique(n) => Topology::clique(*n),
            TopologySpec::Star(n) => Topology::star(*n),
            TopologySpec::Path(n) => Topology::path(*n),
            TopologySpec::Cycle(n) => Topology::cycle(*n),
            TopologySpec::Wheel(n) => Topology::wheel(*n),
            TopologySpec::Edgeless(n) => Topology::edgeless(*n),
            TopologySpec::Gnp { n, p, seed } => Topology::gnp(*n, *p, *seed),
            TopologySpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| TopologyError::BadArgument(format!("{path}: {e}")))?;
                return Topology::parse(&text);
            }
        })
    }
}

impl fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologySpec::Clique(n) => write!(f, "clique:{n}"),
            TopologySpec::Star(n) => write!(f, "star:{n}"),
            TopologySpec::Path(n) => write!(f, "path:{n}"),
            TopologySpec::Cycle(n) => write!(f, "cycle:{n}"),
            TopologySpec::Wheel(n) => write!(f, "wheel:{n}"),
            TopologySpec::Edgeless(n) => write!(f, "edgeless:{n}"),
            TopologySpec::Gnp { n, p, seed } => write!(f, "gnp:{n}:{p}:{seed}"),
            TopologySpec::File(path) => write!(f, "file:{path}"),
        }
    }
}

impl FromStr for TopologySpec {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| TopologyError::UnknownSpec(s.to_string()))?;
        if kind == "file" {
            return Ok(TopologySpec::File(rest.to_string()));
        }
        let args: Vec<&str> = rest.split(':').collect();
        let bad = || TopologyError::BadArgument(s.to_string());
        let size = || -> Result<usize, TopologyError> {
            let n: usize = args[0].parse().map_err(|_| bad())?;
            if n == 0 {
                Err(bad())
            } else {
                Ok(n)
            }
        };
        Ok(match kind {
            "clique" => TopologySpec::Clique(size()?),
            "star" => TopologySpec::Star(size()?),
            "path" => TopologySpec::Path(size()?),
            "cycle" => TopologySpec::Cycle(size()?),
            "wheel" => TopologySpec::Wheel(size()?),
            "edgeless" => TopologySpec::Edgeless(size()?),
            "gnp" => {
                if args.len() != 3 {
                    return Err(bad());
                }
                let p: f64 = args[1].parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                TopologySpec::Gnp {
                    n: size()?,
                    p,
                    seed: args[2].parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(TopologyError::UnknownSpec(s.to_string())),
        })
    }
}

impl TryFrom<String> for TopologySpec {
    type Error = TopologyError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TopologySpec> for String {
    fn from(spec: TopologySpec) -> String {
        spec.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert_eq!(Topology::new(3, [(1, 1)]), Err(TopologyError::SelfLoop(1)));
        assert_eq!(
            Topology::new(3, [(0, 1), (1, 0)]),
            Err(TopologyError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Topology::new(2, [(0, 2)]),
            Err(TopologyError::OutOfRange(0, 2, 2))
        );
        assert_eq!(Topology::new(0, []), Err(TopologyError::Empty));
    }

    #[test]
    fn generator_degrees_and_diameters() {
        assert_eq!(Topology::clique(5).max_degree(), 4);
        assert_eq!(Topology::clique(5).diameter(), Some(1));
        assert_eq!(Topology::star(9).max_degree(), 8);
        assert_eq!(Topology::star(9).diameter(), Some(2));
        assert_eq!(Topology::path(8).diameter(), Some(7));
        assert_eq!(Topology::cycle(10).diameter(), Some(5));
        assert_eq!(Topology::wheel(8).max_degree(), 7);
        assert_eq!(Topology::wheel(8).diameter(), Some(2));
        assert_eq!(Topology::edgeless(3).diameter(), None);
        assert_eq!(Topology::clique(1).diameter(), Some(0));
    }

    #[test]
    fn text_round_trip() {
        let g = Topology::gnp(12, 0.3, 5);
        assert_eq!(Topology::parse(&g.to_text()).unwrap(), g);
        let parsed = Topology::parse("# triangle\n3\n0 1\n1 2\n\n0 2\n").unwrap();
        assert_eq!(parsed, Topology::clique(3));
        assert!(matches!(
            Topology::parse("3\n0\n"),
            Err(TopologyError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn square_of_path_links_two_hop_pairs() {
        let sq = Topology::path(4).square();
        assert!(sq.is_adjacent(0, 2));
        assert!(!sq.is_adjacent(0, 3));
        assert_eq!(Topology::star(5).within_two_hops(1), vec![0, 2, 3, 4]);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "clique:16".parse::<TopologySpec>().unwrap(),
            TopologySpec::Clique(16)
        );
        assert_eq!(
            "gnp:32:0.2:7".parse::<TopologySpec>().unwrap(),
            TopologySpec::Gnp {
                n: 32,
                p: 0.2,
                seed: 7
            }
        );
        assert!("ring:4".parse::<TopologySpec>().is_err());
        assert!("clique:0".parse::<TopologySpec>().is_err());
        let spec = TopologySpec::Gnp {
            n: 5,
            p: 0.5,
            seed: 1,
        };
        assert_eq!(spec.to_string().parse::<TopologySpec>().unwrap(), spec);
    }
}
