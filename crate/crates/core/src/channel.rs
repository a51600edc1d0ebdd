//! The physical beeping channel.
//!
//! A [`Channel`] advances one synchronous slot at a time. Listeners perceive
//! the OR of their neighbors' beeps; what else a node learns depends on the
//! [`ModelVariant`]. In the noisy variant every listener's perceived bit is
//! flipped independently with probability `epsilon`, one draw per
//! (listener, slot) taken in ascending node order, so a seed fixes the whole
//! trace.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{self, Stream};
use crate::topology::Topology;

/// Beeping model variants. `cd` on `B` means beepers learn whether another
/// neighbor beeped too; `cd` on `L` means listeners distinguish one beeper
/// from several. `BLeps` is the plain model with receiver noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    BL,
    BcdL,
    BLcd,
    BcdLcd,
    BLeps,
}

impl ModelVariant {
    pub fn beeper_detects_collisions(self) -> bool {
        matches!(self, ModelVariant::BcdL | ModelVariant::BcdLcd)
    }

    pub fn listener_counts_beepers(self) -> bool {
        matches!(self, ModelVariant::BLcd | ModelVariant::BcdLcd)
    }

    pub fn is_noisy(self) -> bool {
        self == ModelVariant::BLeps
    }
}

/// Receiver-noise parameters and the master seed of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn noiseless(seed: u64) -> Self {
        NoiseConfig { epsilon: 0.0, seed }
    }

    pub fn new(epsilon: f64, seed: u64) -> Self {
        NoiseConfig { epsilon, seed }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("noise probability {0} outside [0, 1/2)")]
    EpsilonOutOfRange(f64),
    #[error("model {0:?} is noiseless but epsilon = {1}")]
    NoiseOnNoiselessModel(ModelVariant, f64),
    #[error("the noisy model needs epsilon > 0")]
    NoisyModelWithoutNoise,
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Beep,
    Listen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Heard {
    Silence,
    Beep,
}

/// How many neighbors beeped, as seen by a collision-detecting listener.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicity {
    Zero,
    One,
    Many,
}

/// What one node perceives in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observation {
    /// Listener in BL, BcdL or BLeps.
    Heard(Heard),
    /// Listener in BLcd or BcdLcd.
    Counted(Multiplicity),
    /// Beeper in BcdL or BcdLcd.
    Feedback { other_beeper: bool },
    /// Beeper in BL, BLcd or BLeps.
    Nothing,
}

impl Observation {
    /// For listeners: whether at least one beep was perceived.
    pub fn heard_beep(self) -> Option<bool> {
        match self {
            Observation::Heard(h) => Some(h == Heard::Beep),
            Observation::Counted(m) => Some(m != Multiplicity::Zero),
            _ => None,
        }
    }
}

/// Maps `epsilon` to a threshold on uniform `u32` draws.
fn flip_threshold(epsilon: f64) -> u64 {
    (epsilon * 4_294_967_296.0).round() as u64
}

/// A beeping channel over a fixed topology.
pub struct Channel<'a> {
    topology: &'a Topology,
    variant: ModelVariant,
    epsilon: f64,
    threshold: u64,
    noise: ChaCha8Rng,
    counts: Vec<u32>,
    slots: u64,
}

impl<'a> Channel<'a> {
    /// Noise draws come from the `Noise` stream of `noise.seed`. A positive
    /// epsilon is only accepted together with [`ModelVariant::BLeps`].
    pub fn new(
        topology: &'a Topology,
        variant: ModelVariant,
        noise: NoiseConfig,
    ) -> Result<Self, ChannelError> {
        let eps = noise.epsilon;
        if !(0.0..0.5).contains(&eps) {
            return Err(ChannelError::EpsilonOutOfRange(eps));
        }
        match (variant.is_noisy(), eps > 0.0) {
            (false, true) => return Err(ChannelError::NoiseOnNoiselessModel(variant, eps)),
            (true, false) => return Err(ChannelError::NoisyModelWithoutNoise),
            _ => {}
        }
        Ok(Channel {
            topology,
            variant,
            epsilon: eps,
            threshold: flip_threshold(eps),
            noise: seed::rng(noise.seed, Stream::Noise, 0),
            counts: vec![0; topology.node_count()],
            slots: 0,
        })
    }

    /// `BLeps` when `epsilon > 0`, else the noiseless `BL` channel.
    pub fn or_channel(
        topology: &'a Topology,
        epsilon: f64,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        let variant = if epsilon > 0.0 {
            ModelVariant::BLeps
        } else {
            ModelVariant::BL
        };
        Self::new(topology, variant, NoiseConfig::new(epsilon, seed))
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn topology(&self) -> &'a Topology {
        self.topology
    }

    /// Slots elapsed so far.
    pub fn slots(&self) -> u64 {
        self.slots
    }

    /// Number of beeping neighbors of each node in the last slot.
    pub fn beeping_neighbors(&self) -> &[u32] {
        &self.counts
    }

    fn tally(&mut self, beeps: impl Fn(usize) -> bool) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        for u in 0..self.topology.node_count() {
            if beeps(u) {
                for &w in self.topology.neighbors(u) {
                    self.counts[w] += 1;
                }
            }
        }
        self.slots += 1;
    }

    #[inline]
    fn noisy(&mut self, truth: bool) -> bool {
        if self.threshold == 0 {
            truth
        } else {
            truth ^ ((self.noise.next_u32() as u64) < self.threshold)
        }
    }

    /// Advances one slot and writes one observation per node into `out`.
    pub fn step(
        &mut self,
        actions: &[Action],
        out: &mut Vec<Observation>,
    ) -> Result<(), ChannelError> {
        let n = self.topology.node_count();
        if actions.len() != n {
            return Err(ChannelError::ActionCount {
                expected: n,
                got: actions.len(),
            });
        }
        self.tally(|u| actions[u] == Action::Beep);
        out.clear();
        for v in 0..n {
            let count = self.counts[v];
            let obs = match actions[v] {
                Action::Beep if self.variant.beeper_detects_collisions() => Observation::Feedback {
                    other_beeper: count > 0,
                },
                Action::Beep => Observation::Nothing,
                Action::Listen if self.variant.listener_counts_beepers() => {
                    Observation::Counted(match count {
                        0 => Multiplicity::Zero,
                        1 => Multiplicity::One,
                        _ => Multiplicity::Many,
                    })
                }
                Action::Listen => {
                    let heard = self.noisy(count > 0);
                    Observation::Heard(if heard { Heard::Beep } else { Heard::Silence })
                }
            };
            out.push(obs);
        }
        Ok(())
    }

    /// Fast path for the OR channels (`BL`, `BLeps`): `beeping[v]` says who
    /// beeps; on return `heard[v]` is the perceived bit of every listener and
    /// `false` for beepers. Draws noise exactly like [`Channel::step`].
    pub fn step_or(&mut self, beeping: &[bool], heard: &mut [bool]) {
        debug_assert!(matches!(
            self.variant,
            ModelVariant::BL | ModelVariant::BLeps
        ));
        let n = self.topology.node_count();
        assert_eq!(beeping.len(), n);
        assert_eq!(heard.len(), n);
        self.tally(|u| beeping[u]);
        for v in 0..n {
            heard[v] = if beeping[v] {
                false
            } else {
                self.noisy(self.counts[v] > 0)
            };
        }
    }
}

/// One slot on a fresh channel; convenience wrapper over [`Channel::step`].
pub fn physical_step(
    topology: &Topology,
    actions: &[Action],
    variant: ModelVariant,
    noise: NoiseConfig,
) -> Result<Vec<Observation>, ChannelError> {
    let mut channel = Channel::new(topology, variant, noise)?;
    let mut out = Vec::with_capacity(actions.len());
    channel.step(actions, &mut out)?;
    Ok(out)
}
