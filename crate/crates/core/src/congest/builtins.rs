//! Reference CONGEST protocols with verifiers.

use rand::Rng;

use super::{CongestNode, CongestProtocol};
use crate::apps::log2_ceil;
use crate::bits::BitWord;
use crate::seed::{self, Stream};
use crate::topology::Topology;

/// Every node sends a private `k`-bit string to every neighbor, one bit per
/// round. Output: for each neighbor (ascending id) the string received.
#[derive(Debug, Clone)]
pub struct MessageExchange {
    k: usize,
    seed: u64,
}

impl MessageExchange {
    pub fn new(k: usize, seed: u64) -> Self {
        MessageExchange { k, seed }
    }

    /// The string `from` sends to `to`.
    pub fn input(&self, from: usize, to: usize) -> BitWord {
        let mut rng = seed::rng(self.seed, Stream::Input, ((from as u64) << 32) | to as u64);
        BitWord::from_bits((0..self.k).map(|_| rng.random::<bool>()))
    }

    pub fn expected(&self, topology: &Topology) -> Vec<Vec<(usize, BitWord)>> {
        (0..topology.node_count())
            .map(|v| {
                let mut got: Vec<(usize, BitWord)> = topology
                    .neighbors(v)
                    .iter()
                    .map(|&u| (u, self.input(u, v)))
                    .collect();
                got.sort_by_key(|e| e.0);
                got
            })
            .collect()
    }

    /// Number of nodes whose output differs from [`Self::expected`].
    pub fn wrong_nodes(&self, topology: &Topology, outputs: &[Vec<(usize, BitWord)>]) -> usize {
        self.expected(topology)
            .iter()
            .zip(outputs)
            .filter(|(e, o)| e != o)
            .count()
    }
}

pub struct MessageExchangeNode {
    peers: Vec<usize>,
    outgoing: Vec<BitWord>,
    incoming: Vec<BitWord>,
}

impl CongestNode for MessageExchangeNode {
    type Output = Vec<(usize, BitWord)>;

    fn send(&mut self, round: usize) -> Vec<u64> {
        self.outgoing
            .iter()
            .map(|w| u64::from(w.get(round)))
            .collect()
    }

    fn receive(&mut self, _round: usize, messages: &[u64]) {
        for (w, &b) in self.incoming.iter_mut().zip(messages) {
            w.push(b & 1 == 1);
        }
    }

    fn output(&self) -> Self::Output {
        let mut out: Vec<(usize, BitWord)> = self
            .peers
            .iter()
            .copied()
            .zip(self.incoming.iter().cloned())
            .collect();
        out.sort_by_key(|e| e.0);
        out
    }
}

impl CongestProtocol for MessageExchange {
    type Node = MessageExchangeNode;

    fn message_bits(&self) -> usize {
        1
    }

    fn rounds(&self) -> usize {
        self.k
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> MessageExchangeNode {
        MessageExchangeNode {
            peers: port_peers.to_vec(),
            outgoing: port_peers.iter().map(|&u| self.input(node, u)).collect(),
            incoming: vec![BitWord::zeros(0); port_peers.len()],
        }
    }
}

/// Floods a `value_bits`-bit value from `source` for `rounds` rounds.
/// Messages are a presence flag followed by the value.
#[derive(Debug, Clone)]
pub struct Flooding {
    pub source: usize,
    pub value: u64,
    pub value_bits: usize,
    pub rounds: usize,
}

pub struct FloodingNode {
    value_bits: usize,
    known: Option<u64>,
    degree: usize,
}

impl CongestNode for FloodingNode {
    type Output = Option<u64>;

    fn send(&mut self, _round: usize) -> Vec<u64> {
        let m = self.known.map_or(0, |x| (1 << self.value_bits) | x);
        vec![m; self.degree]
    }

    fn receive(&mut self, _round: usize, messages: &[u64]) {
        if self.known.is_none() {
            let vb = self.value_bits;
            self.known = messages
                .iter()
                .find(|&&m| m >> vb & 1 == 1)
                .map(|&m| m & ((1 << vb) - 1));
        }
    }

    fn output(&self) -> Option<u64> {
        self.known
    }
}

impl CongestProtocol for Flooding {
    type Node = FloodingNode;

    fn message_bits(&self) -> usize {
        self.value_bits + 1
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> FloodingNode {
        FloodingNode {
            value_bits: self.value_bits,
            known: (node == self.source).then_some(self.value & ((1 << self.value_bits) - 1)),
            degree: port_peers.len(),
        }
    }
}

/// Breadth-first layering from `root`. A message carries the sender's
/// distance plus one, zero meaning "not reached yet".
#[derive(Debug, Clone)]
pub struct Bfs {
    root: usize,
    n_bound: usize,
    rounds: usize,
}

impl Bfs {
    pub fn new(root: usize, n_bound: usize, rounds: usize) -> Self {
        Bfs {
            root,
            n_bound,
            rounds,
        }
    }

    pub fn verify(&self, topology: &Topology, outputs: &[Option<usize>]) -> bool {
        let truth = topology.bfs(self.root);
        truth.iter().zip(outputs).all(|(t, o)| match t {
            Some(d) if *d <= self.rounds => o == &Some(*d),
            _ => o.is_none(),
        })
    }
}

pub struct BfsNode {
    dist: Option<usize>,
    degree: usize,
}

impl CongestNode for BfsNode {
    type Output = Option<usize>;

    fn send(&mut self, _round: usize) -> Vec<u64> {
        vec![self.dist.map_or(0, |d| d as u64 + 1); self.degree]
    }

    fn receive(&mut self, _round: usize, messages: &[u64]) {
        if self.dist.is_none() {
            self.dist = messages
                .iter()
                .filter(|&&m| m > 0)
                .min()
                .map(|&m| m as usize);
        }
    }

    fn output(&self) -> Option<usize> {
        self.dist
    }
}

impl CongestProtocol for Bfs {
    type Node = BfsNode;

    fn message_bits(&self) -> usize {
        log2_ceil(self.n_bound + 1)
    }

    fn rounds(&self) -> usize {
        self.rounds
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> BfsNode {
        BfsNode {
            dist: (node == self.root).then_some(0),
            degree: port_peers.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::{run_congest, Ports};

    #[test]
    fn exchange_delivers_every_string() {
        let g = Topology::cycle(5);
        let colors = [0, 1, 2, 3, 4];
        let p = MessageExchange::new(9, 4);
        let out = run_congest(&p, &g, &Ports::by_color(&g, &colors));
        assert_eq!(p.wrong_nodes(&g, &out), 0);
    }

    #[test]
    fn flooding_reaches_radius() {
        let g = Topology::path(5);
        let p = Flooding {
            source: 0,
            value: 5,
            value_bits: 3,
            rounds: 2,
        };
        let out = run_congest(&p, &g, &Ports::by_color(&g, &[0, 1, 2, 3, 4]));
        assert_eq!(out, vec![Some(5), Some(5), Some(5), None, None]);
    }

    #[test]
    fn bfs_matches_topology() {
        let g = Topology::wheel(7);
        let p = Bfs::new(3, 7, 3);
        let out = run_congest(&p, &g, &Ports::by_color(&g, &(0..7).collect::<Vec<_>>()));
        assert!(p.verify(&g, &out));
        assert_eq!(out[3], Some(0));
    }
}
