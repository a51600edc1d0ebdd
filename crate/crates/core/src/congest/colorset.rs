//! Learning neighbor colors and neighbors' colorsets by beeping.
//!
//! Phase 1 has one round per color: nodes beep in their own color's round.
//! Phase 2 has one round per (color `i`, color `j`) pair: nodes of color `i`
//! beep if `j` is among their neighbors' colors. The 2-hop property makes the
//! color-`i` neighbor of a listener unique, so what it hears is that
//! neighbor's answer.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_two_hop, CongestError};
use crate::beepsim::simulate_noisy;
use crate::channel::{ModelVariant, Observation};
use crate::runner::{run_direct, BeepProtocol, NodeProgram, Step};
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Colorset {
    pub color: usize,
    /// Colors of the neighbors, ascending.
    pub neighbor_colors: Vec<usize>,
    /// `neighbor_sets[q]` is the colorset of the neighbor colored `neighbor_colors[q]`.
    pub neighbor_sets: Vec<Vec<usize>>,
}

impl Colorset {
    /// Port of the neighbor colored `color`.
    pub fn port_of(&self, color: usize) -> Option<usize> {
        self.neighbor_colors.binary_search(&color).ok()
    }
}

#[derive(Debug, Clone)]
pub struct ColorsetProtocol {
    colors: Vec<usize>,
    c: usize,
}

impl ColorsetProtocol {
    pub fn new(colors: Vec<usize>) -> Self {
        let c = colors.iter().max().map_or(0, |m| m + 1);
        ColorsetProtocol { colors, c }
    }

    pub fn palette(&self) -> usize {
        self.c
    }
}

pub struct ColorsetNode {
    c: usize,
    set: Colorset,
}

impl NodeProgram for ColorsetNode {
    type Output = Colorset;

    fn next_action(&mut self, round: usize) -> Step {
        let c = self.c;
        let beep = if round < c {
            round == self.set.color
        } else if round < c + c * c {
            let (i, j) = ((round - c) / c, (round - c) % c);
            i == self.set.color && self.set.neighbor_colors.binary_search(&j).is_ok()
        } else {
            return Step::Terminate;
        };
        if beep {
            Step::Beep
        } else {
            Step::Listen
        }
    }

    fn absorb(&mut self, round: usize, observation: Observation) {
        if observation.heard_beep() != Some(true) {
            return;
        }
        let c = self.c;
        if round < c {
            self.set.neighbor_colors.push(round);
            self.set.neighbor_sets.push(Vec::new());
        } else {
            let (i, j) = ((round - c) / c, (round - c) % c);
            if let Some(q) = self.set.port_of(i) {
                self.set.neighbor_sets[q].push(j);
            }
        }
    }

    fn output(&self) -> Colorset {
        self.set.clone()
    }
}

impl BeepProtocol for ColorsetProtocol {
    type Program = ColorsetNode;

    fn model(&self) -> ModelVariant {
        ModelVariant::BL
    }

    fn round_bound(&self) -> Option<usize> {
        Some(self.c + self.c * self.c)
    }

    fn spawn(&self, node: usize, _rng: ChaCha8Rng) -> ColorsetNode {
        ColorsetNode {
            c: self.c,
            set: Colorset {
                color: self.colors[node],
                ..Colorset::default()
            },
        }
    }
}

/// Colorsets of every node. With `epsilon > 0` both phases run through the
/// noisy simulation with failure budget `target_failure`.
pub fn preprocess_colorsets(
    topology: &Topology,
    colors: &[usize],
    epsilon: f64,
    target_failure: f64,
    seed: u64,
) -> Result<Vec<Colorset>, CongestError> {
    check_two_hop(topology, colors)?;
    let protocol = ColorsetProtocol::new(colors.to_vec());
    let rounds = protocol.round_bound().unwrap_or(0);
    if epsilon == 0.0 {
        Ok(run_direct(topology, &protocol, seed, rounds.max(1))?.outputs)
    } else {
        Ok(simulate_noisy(&protocol, topology, epsilon, target_failure, seed, None)?.outputs)
    }
}

/// Colorsets computed from the topology directly.
pub fn true_colorsets(topology: &Topology, colors: &[usize]) -> Vec<Colorset> {
    let sorted = |v: usize| {
        let mut s: Vec<usize> = topology.neighbors(v).iter().map(|&u| colors[u]).collect();
        s.sort_unstable();
        s
    };
    (0..topology.node_count())
        .map(|v| {
            let mut nbrs: Vec<usize> = topology.neighbors(v).to_vec();
            nbrs.sort_by_key(|&u| colors[u]);
            Colorset {
                color: colors[v],
                neighbor_colors: sorted(v),
                neighbor_sets: nbrs.iter().map(|&u| sorted(u)).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_example() {
        let g = Topology::path(3);
        let sets = preprocess_colorsets(&g, &[1, 2, 3], 0.0, 0.01, 1).unwrap();
        assert_eq!(sets[1].neighbor_colors, vec![1, 3]);
        assert_eq!(sets[0].neighbor_sets, vec![vec![1, 3]]);
        assert_eq!(sets[2].neighbor_sets, vec![vec![1, 3]]);
        assert_eq!(sets, true_colorsets(&g, &[1, 2, 3]));
    }

    #[test]
    fn clique_example() {
        let g = Topology::clique(4);
        let colors = [1, 2, 3, 4];
        let sets = preprocess_colorsets(&g, &colors, 0.0, 0.01, 1).unwrap();
        for (v, s) in sets.iter().enumerate() {
            let others: Vec<usize> = colors.iter().copied().filter(|&c| c != colors[v]).collect();
            assert_eq!(s.neighbor_colors, others);
        }
    }

    #[test]
    fn invalid_coloring_rejected() {
        let g = Topology::path(3);
        assert!(matches!(
            preprocess_colorsets(&g, &[0, 1, 0], 0.0, 0.01, 1),
            Err(CongestError::NotTwoHop(0, 2))
        ));
    }

    #[test]
    fn noisy_matches_noiseless() {
        let g = Topology::cycle(6);
        let colors = [0, 1, 2, 0, 1, 2];
        let clean = preprocess_colorsets(&g, &colors, 0.0, 0.01, 3).unwrap();
        let noisy = preprocess_colorsets(&g, &colors, 0.05, 0.01, 3).unwrap();
        assert_eq!(clean, noisy);
    }
}
