//! Proper coloring by random proposals with beeper-side collision detection.
//!
//! A phase has `K + 1` rounds. In round `j < K` every node holding color `j`
//! and every undecided node proposing `j` beeps; a proposer that beeped alone
//! in its neighborhood keeps the color. Proposals are drawn from the colors
//! not heard during the previous phase. In round `K` undecided nodes beep; a
//! colored node hearing silence there terminates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{log2_ceil, AppError};
use crate::channel::{Heard, ModelVariant, Observation};
use crate::runner::{BeepProtocol, NodeProgram, Step};

#[derive(Debug, Clone)]
pub struct ColoringProtocol {
    palette: usize,
    phases: usize,
}

impl ColoringProtocol {
    /// Rejects palettes smaller than `max_degree + 1`.
    pub fn new(palette: usize, n_bound: usize, max_degree: usize) -> Result<Self, AppError> {
        if n_bound == 0 {
            return Err(AppError::ZeroBound);
        }
        if palette < max_degree + 1 {
            return Err(AppError::PaletteTooSmall {
                palette,
                max_degree,
            });
        }
        Ok(ColoringProtocol {
            palette,
            phases: 6 * log2_ceil(n_bound) + 6,
        })
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn phase_len(&self) -> usize {
        self.palette + 1
    }
}

pub struct ColoringNode {
    palette: usize,
    limit: usize,
    rng: ChaCha8Rng,
    color: Option<usize>,
    proposal: Option<usize>,
    heard: Vec<bool>,
    neighbors_done: bool,
}

impl ColoringNode {
    fn propose(&mut self) {
        let free: Vec<usize> = (0..self.palette).filter(|&c| !self.heard[c]).collect();
        self.proposal = Some(if free.is_empty() {
            self.rng.random_range(0..self.palette)
        } else {
            free[self.rng.random_range(0..free.len())]
        });
        self.heard.iter_mut().for_each(|h| *h = false);
    }
}

impl NodeProgram for ColoringNode {
    type Output = Option<usize>;

    fn next_action(&mut self, round: usize) -> Step {
        let r = round % (self.palette + 1);
        if r == 0 {
            if self.neighbors_done || round >= self.limit {
                return Step::Terminate;
            }
            if self.color.is_none() {
                self.propose();
            } else {
                self.heard.iter_mut().for_each(|h| *h = false);
            }
        }
        let beep = if r == self.palette {
            self.color.is_none()
        } else {
            self.color == Some(r) || (self.color.is_none() && self.proposal == Some(r))
        };
        if beep {
            Step::Beep
        } else {
            Step::Listen
        }
    }

    fn absorb(&mut self, round: usize, observation: Observation) {
        let r = round % (self.palette + 1);
        match observation {
            Observation::Feedback {
                other_beeper: false,
            } if r < self.palette && self.color.is_none() => {
                self.color = Some(r);
            }
            Observation::Heard(h) if r < self.palette => self.heard[r] = h == Heard::Beep,
            Observation::Heard(Heard::Silence) if self.color.is_some() => {
                self.neighbors_done = true
            }
            _ => {}
        }
    }

    fn output(&self) -> Option<usize> {
        self.color
    }
}

impl BeepProtocol for ColoringProtocol {
    type Program = ColoringNode;

    fn model(&self) -> ModelVariant {
        ModelVariant::BcdL
    }

    fn round_bound(&self) -> Option<usize> {
        Some(self.phases * self.phase_len())
    }

    fn spawn(&self, _node: usize, rng: ChaCha8Rng) -> ColoringNode {
        ColoringNode {
            palette: self.palette,
            limit: self.phases * self.phase_len(),
            rng,
            color: None,
            proposal: None,
            heard: vec![false; self.palette],
            neighbors_done: false,
        }
    }
}
