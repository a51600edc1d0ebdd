//! Maximal independent set by bitwise comparison of random numbers.
//!
//! A phase has `w + 2` rounds. Undecided nodes draw a `w`-bit number and
//! announce it most significant bit first, beeping on ones; a candidate that
//! hears a beep while holding a zero drops out. Survivors beep once more and
//! join if no neighbor beeped with them, then new members beep so their
//! neighbors retire. Decided nodes terminate at the next phase boundary.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{log2_ceil, AppError};
use crate::channel::{ModelVariant, Observation};
use crate::runner::{BeepProtocol, NodeProgram, Step};

#[derive(Debug, Clone)]
pub struct MisProtocol {
    bits: usize,
    phases: usize,
}

impl MisProtocol {
    pub fn new(n_bound: usize) -> Result<Self, AppError> {
        if n_bound == 0 {
            return Err(AppError::ZeroBound);
        }
        let l = log2_ceil(n_bound);
        Ok(MisProtocol {
            bits: 3 * l,
            phases: 4 * l + 4,
        })
    }

    pub fn phase_len(&self) -> usize {
        self.bits + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Undecided,
    Joined,
    Dominated,
}

pub struct MisNode {
    bits: usize,
    limit: usize,
    phase_len: usize,
    rng: ChaCha8Rng,
    status: Status,
    number: u64,
    candidate: bool,
}

impl MisNode {
    fn bit(&self, r: usize) -> bool {
        (self.number >> (self.bits - 1 - r)) & 1 == 1
    }
}

impl NodeProgram for MisNode {
    type Output = bool;

    fn next_action(&mut self, round: usize) -> Step {
        let r = round % self.phase_len;
        if r == 0 {
            if self.status != Status::Undecided || round >= self.limit {
                return Step::Terminate;
            }
            self.number = self.rng.random::<u64>() >> (64 - self.bits);
            self.candidate = true;
        }
        let beep = match r {
            _ if r < self.bits => self.candidate && self.bit(r),
            _ if r == self.bits => self.candidate,
            _ => self.status == Status::Joined,
        };
        if beep {
            Step::Beep
        } else {
            Step::Listen
        }
    }

    fn absorb(&mut self, round: usize, observation: Observation) {
        let r = round % self.phase_len;
        let heard = matches!(observation, Observation::Counted(m) if m != crate::channel::Multiplicity::Zero);
        if r < self.bits {
            if self.candidate && !self.bit(r) && heard {
                self.candidate = false;
            }
        } else if r == self.bits {
            if self.candidate
                && observation
                    == (Observation::Feedback {
                        other_beeper: false,
                    })
            {
                self.status = Status::Joined;
            }
        } else if self.status == Status::Undecided && heard {
            self.status = Status::Dominated;
        }
    }

    fn output(&self) -> bool {
        self.status == Status::Joined
    }
}

impl BeepProtocol for MisProtocol {
    type Program = MisNode;

    fn model(&self) -> ModelVariant {
        ModelVariant::BcdLcd
    }

    fn round_bound(&self) -> Option<usize> {
        Some(self.phases * self.phase_len())
    }

    fn spawn(&self, _node: usize, rng: ChaCha8Rng) -> MisNode {
        MisNode {
            bits: self.bits,
            limit: self.phases * self.phase_len(),
            phase_len: self.phase_len(),
            rng,
            status: Status::Undecided,
            number: 0,
            candidate: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::verify_mis;
    use crate::runner::run_direct;
    use crate::topology::Topology;

    fn run(g: &Topology, seed: u64) -> Vec<bool> {
        let p = MisProtocol::new(g.node_count()).unwrap();
        run_direct(g, &p, seed, p.round_bound().unwrap())
            .unwrap()
            .outputs
    }

    #[test]
    fn k2_has_one_member() {
        for seed in 0..50 {
            assert_eq!(
                run(&Topology::clique(2), seed)
                    .iter()
                    .filter(|&&b| b)
                    .count(),
                1
            );
        }
    }

    #[test]
    fn edgeless_all_join() {
        assert!(run(&Topology::edgeless(7), 3).iter().all(|&b| b));
    }

    #[test]
    fn random_graphs_verify() {
        for seed in 0..100 {
            let g = Topology::gnp(32, 0.2, seed);
            assert!(verify_mis(&g, &run(&g, seed)));
        }
    }
}
