//! Leader election by bitwise maximum over beep waves.
//!
//! Every node draws a `w`-bit identifier, `w = 3⌈log2 n⌉ + 20`, and starts as
//! a candidate. Bits are processed most significant first, each in a window
//! of `D` rounds: in the
//! first round candidates whose bit is one beep, and a node that hears a beep
//! repeats it in the next round, once per window. After the window every node
//! knows whether some candidate holds a one; candidates holding a zero then
//! drop out. The bits learned this way spell out the largest identifier.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{log2_ceil, AppError};
use crate::channel::{ModelVariant, Observation};
use crate::runner::{BeepProtocol, NodeProgram, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LeaderOutput {
    pub leader_id: u64,
    pub own_id: u64,
}

/// Extra identifier bits; a tie at the maximum has probability below `n·2^-w`.
const ID_SLACK_BITS: usize = 20;

#[derive(Debug, Clone)]
pub struct LeaderElection {
    bits: usize,
    window: usize,
}

impl LeaderElection {
    pub fn new(n_bound: usize, diameter_bound: usize) -> Result<Self, AppError> {
        if n_bound == 0 {
            return Err(AppError::ZeroBound);
        }
        Ok(LeaderElection {
            bits: (3 * log2_ceil(n_bound) + ID_SLACK_BITS).min(64),
            window: diameter_bound.max(1),
        })
    }

    pub fn id_bits(&self) -> usize {
        self.bits
    }

    pub fn window(&self) -> usize {
        self.window
    }
}

pub struct LeaderNode {
    bits: usize,
    window: usize,
    own_id: u64,
    leader: u64,
    candidate: bool,
    /// Round of the window in which this node first learned of a one.
    informed_at: Option<usize>,
    is_source: bool,
}

impl LeaderNode {
    fn bit(&self, b: usize) -> bool {
        (self.own_id >> (self.bits - 1 - b)) & 1 == 1
    }

    fn close_window(&mut self, b: usize) {
        let one = self.informed_at.is_some();
        self.leader = (self.leader << 1) | u64::from(one);
        if one && self.candidate && !self.bit(b) {
            self.candidate = false;
        }
        self.informed_at = None;
    }
}

impl NodeProgram for LeaderNode {
    type Output = LeaderOutput;

    fn next_action(&mut self, round: usize) -> Step {
        let (b, s) = (round / self.window, round % self.window);
        if b == self.bits {
            return Step::Terminate;
        }
        if s == 0 {
            self.is_source = self.candidate && self.bit(b);
            if self.is_source {
                self.informed_at = Some(0);
            }
        }
        let beep = if s == 0 {
            self.is_source
        } else {
            !self.is_source && self.informed_at == Some(s - 1)
        };
        if beep {
            Step::Beep
        } else {
            Step::Listen
        }
    }

    fn absorb(&mut self, round: usize, observation: Observation) {
        let (b, s) = (round / self.window, round % self.window);
        if self.informed_at.is_none() && observation.heard_beep() == Some(true) {
            self.informed_at = Some(s);
        }
        if s + 1 == self.window {
            self.close_window(b);
        }
    }

    fn output(&self) -> LeaderOutput {
        LeaderOutput {
            leader_id: self.leader,
            own_id: self.own_id,
        }
    }
}

impl BeepProtocol for LeaderElection {
    type Program = LeaderNode;

    fn model(&self) -> ModelVariant {
        ModelVariant::BL
    }

    fn round_bound(&self) -> Option<usize> {
        Some(self.bits * self.window)
    }

    fn spawn(&self, _node: usize, mut rng: ChaCha8Rng) -> LeaderNode {
        let own_id = if self.bits == 64 {
            rng.random()
        } else {
            rng.random_range(0..1u64 << self.bits)
        };
        LeaderNode {
            bits: self.bits,
            window: self.window,
            own_id,
            leader: 0,
            candidate: true,
            informed_at: None,
            is_source: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::verify_leader;
    use crate::runner::run_direct;
    use crate::topology::Topology;

    fn run(g: &Topology, seed: u64) -> Vec<LeaderOutput> {
        let p = LeaderElection::new(g.node_count(), g.diameter().unwrap()).unwrap();
        let r = run_direct(g, &p, seed, p.round_bound().unwrap()).unwrap();
        assert_eq!(r.slots, p.round_bound().unwrap());
        r.outputs
    }

    #[test]
    fn single_node_elects_itself() {
        let out = run(&Topology::edgeless(1), 4);
        assert_eq!(out[0].leader_id, out[0].own_id);
    }

    #[test]
    fn path_agrees_on_the_maximum() {
        for seed in 0..200 {
            let out = run(&Topology::path(8), seed);
            let max = out.iter().map(|o| o.own_id).max().unwrap();
            assert!(out.iter().all(|o| o.leader_id == max));
            assert!(verify_leader(&out) || out.iter().filter(|o| o.own_id == max).count() > 1);
        }
    }

    #[test]
    fn random_graph_agrees() {
        for seed in 0..50 {
            let g = Topology::gnp(20, 0.3, seed);
            if let Some(_) = g.diameter() {
                let out = run(&g, seed);
                let max = out.iter().map(|o| o.own_id).max().unwrap();
                assert!(out.iter().all(|o| o.leader_id == max));
            }
        }
    }
}
