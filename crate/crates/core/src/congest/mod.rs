//! CONGEST(B) message passing and its simulation over the noisy beeping
//! channel by TDMA on a 2-hop coloring.
//!
//! Nodes address neighbors only through ports. Port `p` of a node is the
//! neighbor with the `p`-th smallest color, so the direct execution and the
//! beeping simulation agree on what a port means.

pub mod bitexpand;
pub mod builtins;
pub mod colorset;
pub mod registry;
pub mod robust;
pub mod tdma;

pub use bitexpand::BitExpand;
pub use builtins::{Bfs, Flooding, MessageExchange};
pub use colorset::{preprocess_colorsets, Colorset};
pub use registry::{run_builtin, two_hop_colors, CongestKind, CongestRun};
pub use robust::{Robust, RobustLayer};
pub use tdma::{tdma_simulate, TdmaConfig, TdmaReport};

use thiserror::Error;

use crate::topology::Topology;

/// A fully utilized protocol: every round each node sends one `B`-bit message
/// on every port.
pub trait CongestProtocol {
    type Node: CongestNode;

    /// `B`, between 1 and 64.
    fn message_bits(&self) -> usize;

    fn rounds(&self) -> usize;

    /// Program of `node`; `port_peers[p]` is the neighbor behind port `p`.
    /// Protocols may only use it to look up their inputs.
    fn spawn(&self, node: usize, port_peers: &[usize]) -> Self::Node;
}

pub trait CongestNode {
    type Output: Clone + PartialEq + std::fmt::Debug;

    /// One message per port; only the low `B` bits are transmitted.
    fn send(&mut self, round: usize) -> Vec<u64>;

    /// Messages received this round, indexed by port.
    fn receive(&mut self, round: usize, messages: &[u64]);

    fn output(&self) -> Self::Output;
}

impl<P: CongestProtocol + ?Sized> CongestProtocol for &P {
    type Node = P::Node;

    fn message_bits(&self) -> usize {
        (**self).message_bits()
    }

    fn rounds(&self) -> usize {
        (**self).rounds()
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> Self::Node {
        (**self).spawn(node, port_peers)
    }
}

pub type CongestOutput<P> = <<P as CongestProtocol>::Node as CongestNode>::Output;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CongestError {
    #[error("coloring has {got} entries, topology has {expected} nodes")]
    ColoringLength { expected: usize, got: usize },
    #[error("nodes {0} and {1} are within two hops and share a color")]
    NotTwoHop(usize, usize),
    #[error("message width {0} outside 1..=64")]
    MessageBits(usize),
    #[error("the topology has no edges")]
    NoEdges,
    #[error("no neighborhood code with k={k} and length {n}")]
    NoCode { k: usize, n: usize },
    #[error(transparent)]
    Sim(#[from] crate::beepsim::SimError),
    #[error(transparent)]
    Run(#[from] crate::runner::RunError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
}

/// Port maps of every node and their inverses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ports {
    peers: Vec<Vec<usize>>,
    back: Vec<Vec<usize>>,
}

impl Ports {
    /// Ports sorted by ascending neighbor color (ties by node id).
    pub fn by_color(topology: &Topology, colors: &[usize]) -> Self {
        let peers: Vec<Vec<usize>> = (0..topology.node_count())
            .map(|v| {
                let mut p = topology.neighbors(v).to_vec();
                p.sort_by_key(|&u| (colors[u], u));
                p
            })
            .collect();
        let back = (0..peers.len())
            .map(|v| {
                peers[v]
                    .iter()
                    .map(|&u| {
                        peers[u]
                            .iter()
                            .position(|&w| w == v)
                            .expect("symmetric adjacency")
                    })
                    .collect()
            })
            .collect();
        Ports { peers, back }
    }

    pub fn peers(&self, v: usize) -> &[usize] {
        &self.peers[v]
    }

    /// Port index at `peers(v)[p]` that leads back to `v`.
    pub fn back(&self, v: usize, p: usize) -> usize {
        self.back[v][p]
    }
}

/// Checks that nodes within distance two have distinct colors.
pub fn check_two_hop(topology: &Topology, colors: &[usize]) -> Result<(), CongestError> {
    let n = topology.node_count();
    if colors.len() != n {
        return Err(CongestError::ColoringLength {
            expected: n,
            got: colors.len(),
        });
    }
    for v in 0..n {
        for u in topology.within_two_hops(v) {
            if u != v && colors[u] == colors[v] {
                return Err(CongestError::NotTwoHop(v.min(u), v.max(u)));
            }
        }
    }
    Ok(())
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Noiseless message passing.
pub fn run_congest<P: CongestProtocol>(
    protocol: &P,
    topology: &Topology,
    ports: &Ports,
) -> Vec<CongestOutput<P>> {
    let n = topology.node_count();
    let m = mask(protocol.message_bits());
    let mut nodes: Vec<P::Node> = (0..n).map(|v| protocol.spawn(v, ports.peers(v))).collect();
    let mut inbox: Vec<Vec<u64>> = (0..n).map(|v| vec![0; ports.peers(v).len()]).collect();
    for t in 0..protocol.rounds() {
        let sent: Vec<Vec<u64>> = nodes.iter_mut().map(|x| x.send(t)).collect();
        for v in 0..n {
            for (p, &u) in ports.peers(v).iter().enumerate() {
                inbox[v][p] = sent[u][ports.back(v, p)] & m;
            }
        }
        for v in 0..n {
            nodes[v].receive(t, &inbox[v]);
        }
    }
    nodes.iter().map(CongestNode::output).collect()
}

/// The identity 2-hop coloring `0..n` (valid on every graph).
pub fn identity_coloring(n: usize) -> Vec<usize> {
    (0..n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ports_follow_colors() {
        let g = Topology::path(3);
        let ports = Ports::by_color(&g, &[2, 0, 1]);
        assert_eq!(ports.peers(1), &[2, 0]);
        assert_eq!(ports.back(1, 0), 0);
        assert_eq!(ports.back(0, 0), 1);
    }

    #[test]
    fn two_hop_check() {
        let g = Topology::path(3);
        assert!(check_two_hop(&g, &[0, 1, 2]).is_ok());
        assert_eq!(
            check_two_hop(&g, &[0, 1, 0]),
            Err(CongestError::NotTwoHop(0, 2))
        );
        assert!(check_two_hop(&g, &[0, 1]).is_err());
    }
}
