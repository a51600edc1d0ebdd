//! Coloring of the square graph: nodes within distance two get distinct
//! colors. Conflicts two hops away are relayed by the middle node.
//!
//! Every color `j` gets three rounds: (a) holders and proposers of `j` beep;
//! (b) listeners that counted several beepers in (a) beep, telling proposers
//! two hops away that they collided; (c) listeners that heard anyone in (a)
//! beep, so nodes learn which colors are busy within two hops. Two more rounds
//! per phase let colored nodes find out whether anyone within two hops is
//! still undecided, and terminate if not.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{log2_ceil, AppError};
use crate::channel::{ModelVariant, Multiplicity, Observation};
use crate::runner::{BeepProtocol, NodeProgram, Step};

#[derive(Debug, Clone)]
pub struct TwoHopColoring {
    palette: usize,
    phases: usize,
}

impl TwoHopColoring {
    /// Palette `min(n_bound, Δ² + ⌈log₂ n_bound⌉)`.
    pub fn new(n_bound: usize, max_degree: usize) -> Result<Self, AppError> {
        if n_bound == 0 {
            return Err(AppError::ZeroBound);
        }
        let palette = n_bound.min(max_degree * max_degree + log2_ceil(n_bound));
        Self::with_palette(palette, n_bound, max_degree)
    }

    pub fn with_palette(
        palette: usize,
        n_bound: usize,
        max_degree: usize,
    ) -> Result<Self, AppError> {
        let needed = (max_degree * max_degree + 1).min(n_bound);
        if n_bound == 0 {
            return Err(AppError::ZeroBound);
        }
        if palette < needed {
            return Err(AppError::PaletteTooSmall {
                palette,
                max_degree,
            });
        }
        Ok(TwoHopColoring {
            palette,
            phases: 6 * log2_ceil(n_bound) + 6,
        })
    }

    pub fn palette(&self) -> usize {
        self.palette
    }

    pub fn phase_len(&self) -> usize {
        3 * self.palette + 2
    }
}

pub struct TwoHopNode {
    palette: usize,
    limit: usize,
    rng: ChaCha8Rng,
    color: Option<usize>,
    proposal: Option<usize>,
    busy: Vec<bool>,
    heard_a: Multiplicity,
    conflict: bool,
    pending: bool,
    done: bool,
}

fn heard(obs: Observation) -> bool {
    matches!(
        obs,
        Observation::Counted(Multiplicity::One | Multiplicity::Many)
    )
}

impl TwoHopNode {
    fn proposing(&self, j: usize) -> bool {
        self.color.is_none() && self.proposal == Some(j)
    }
}

impl NodeProgram for TwoHopNode {
    type Output = Option<usize>;

    fn next_action(&mut self, round: usize) -> Step {
        let phase_len = 3 * self.palette + 2;
        let r = round % phase_len;
        if r == 0 {
            if self.done || round >= self.limit {
                return Step::Terminate;
            }
            if self.color.is_none() {
                let free: Vec<usize> = (0..self.palette).filter(|&c| !self.busy[c]).collect();
                let pick = if free.is_empty() {
                    self.rng.random_range(0..self.palette)
                } else {
                    free[self.rng.random_range(0..free.len())]
                };
                self.proposal = Some(pick);
            }
            self.busy.iter_mut().for_each(|b| *b = false);
            self.pending = true;
        }
        let beep = if r < 3 * self.palette {
            let j = r / 3;
            match r % 3 {
                0 => self.color == Some(j) || self.proposing(j),
                1 => self.heard_a == Multiplicity::Many,
                _ => self.heard_a != Multiplicity::Zero,
            }
        } else if r == 3 * self.palette {
            self.color.is_none()
        } else {
            self.heard_a != Multiplicity::Zero
        };
        if beep {
            Step::Beep
        } else {
            Step::Listen
        }
    }

    fn absorb(&mut self, round: usize, obs: Observation) {
        let r = round % (3 * self.palette + 2);
        if r >= 3 * self.palette {
            if r == 3 * self.palette {
                self.heard_a = match obs {
                    Observation::Counted(m) => m,
                    _ => Multiplicity::Zero,
                };
                self.pending = self.color.is_none() || self.heard_a != Multiplicity::Zero;
            } else {
                self.pending |= heard(obs);
                self.done = self.color.is_some() && !self.pending;
                self.heard_a = Multiplicity::Zero;
            }
            return;
        }
        let j = r / 3;
        match r % 3 {
            0 => {
                self.conflict = false;
                self.heard_a = Multiplicity::Zero;
                match obs {
                    Observation::Feedback { other_beeper } => self.conflict = other_beeper,
                    Observation::Counted(m) => {
                        self.heard_a = m;
                        self.busy[j] |= m != Multiplicity::Zero;
                    }
                    _ => {}
                }
            }
            1 => {
                if self.proposing(j) {
                    self.conflict |= heard(obs);
                    if !self.conflict {
                        self.color = Some(j);
                    }
                }
            }
            _ => {
                if self.proposal != Some(j) && self.color != Some(j) {
                    self.busy[j] |= heard(obs);
                }
                self.heard_a = Multiplicity::Zero;
            }
        }
    }

    fn output(&self) -> Option<usize> {
        self.color
    }
}

impl BeepProtocol for TwoHopColoring {
    type Program = TwoHopNode;

    fn model(&self) -> ModelVariant {
        ModelVariant::BcdLcd
    }

    fn round_bound(&self) -> Option<usize> {
        Some(self.phases * self.phase_len())
    }

    fn spawn(&self, _node: usize, rng: ChaCha8Rng) -> TwoHopNode {
        TwoHopNode {
            palette: self.palette,
            limit: self.phases * self.phase_len(),
            rng,
            color: None,
            proposal: None,
            busy: vec![false; self.palette],
            heard_a: Multiplicity::Zero,
            conflict: false,
            pending: true,
            done: false,
        }
    }
}
