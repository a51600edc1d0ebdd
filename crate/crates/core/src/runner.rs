//! Slot-by-slot execution of per-node beeping programs.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Action, Channel, ChannelError, ModelVariant, NoiseConfig, Observation};
use crate::seed::{self, Stream};
use crate::topology::Topology;

/// A node's decision for the next slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    Beep,
    Listen,
    /// Stop participating. Terminated nodes stay silent and observe nothing.
    Terminate,
}

/// One node's protocol state machine.
pub trait NodeProgram {
    type Output: Clone + PartialEq + std::fmt::Debug;

    /// Action for `round` (0-based), given everything absorbed so far.
    fn next_action(&mut self, round: usize) -> Step;

    /// Observation of `round`; only called when the node did not terminate.
    fn absorb(&mut self, round: usize, observation: Observation);

    fn output(&self) -> Self::Output;
}

/// A protocol written for one of the beeping model variants.
pub trait BeepProtocol {
    type Program: NodeProgram;

    /// The model whose observations the programs expect.
    fn model(&self) -> ModelVariant;

    /// Declared number of rounds, if the protocol has a fixed length.
    fn round_bound(&self) -> Option<usize>;

    /// Program for `node`, fed with its private random stream.
    fn spawn(&self, node: usize, rng: ChaCha8Rng) -> Self::Program;
}

pub type ProtocolOutput<P> = <<P as BeepProtocol>::Program as NodeProgram>::Output;

/// Private coins of `node` for a run with master seed `seed`. Every execution
/// path (direct or simulated) spawns programs from this stream.
pub fn node_rng(seed: u64, node: usize) -> ChaCha8Rng {
    seed::rng(seed, Stream::Node, node as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub action: Action,
    pub observation: Observation,
}

/// Per-node action/observation history up to termination.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<SlotRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport<O> {
    pub outputs: Vec<O>,
    pub transcripts: Vec<Transcript>,
    /// Slots executed.
    pub slots: usize,
    /// Slot index at which each node terminated.
    pub terminated_at: Vec<usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("max_slots must be at least 1")]
    NoSlots,
    #[error("{} node(s) still running after {slots} slots: {nodes:?}", nodes.len())]
    Unterminated { nodes: Vec<usize>, slots: usize },
}

/// Runs `protocol` on `topology` over a channel of the given variant until
/// every node terminates, failing if `max_slots` pass first.
pub fn run_rounds<P: BeepProtocol>(
    topology: &Topology,
    protocol: &P,
    variant: ModelVariant,
    noise: NoiseConfig,
    max_slots: usize,
) -> Result<RunReport<ProtocolOutput<P>>, RunError> {
    if max_slots == 0 {
        return Err(RunError::NoSlots);
    }
    let n = topology.node_count();
    let mut channel = Channel::new(topology, variant, noise)?;
    let mut programs: Vec<P::Program> = (0..n)
        .map(|v| protocol.spawn(v, node_rng(noise.seed, v)))
        .collect();
    let mut live = vec![true; n];
    let mut terminated_at = vec![0; n];
    let mut transcripts = vec![Transcript::default(); n];
    let mut actions = vec![Action::Listen; n];
    let mut observations = Vec::with_capacity(n);
    let mut slot = 0;
    loop {
        for v in 0..n {
            actions[v] = Action::Listen;
            if live[v] {
                match programs[v].next_action(slot) {
                    Step::Beep => actions[v] = Action::Beep,
                    Step::Listen => {}
                    Step::Terminate => {
                        live[v] = false;
                        terminated_at[v] = slot;
                    }
                }
            }
        }
        if !live.iter().any(|&l| l) {
            break;
        }
        if slot == max_slots {
            let nodes = (0..n).filter(|&v| live[v]).collect();
            return Err(RunError::Unterminated { nodes, slots: slot });
        }
        channel.step(&actions, &mut observations)?;
        for v in 0..n {
            if live[v] {
                programs[v].absorb(slot, observations[v]);
                transcripts[v].entries.push(SlotRecord {
                    action: actions[v],
                    observation: observations[v],
                });
            }
        }
        slot += 1;
    }
    Ok(RunReport {
        outputs: programs.iter().map(NodeProgram::output).collect(),
        transcripts,
        slots: slot,
        terminated_at,
    })
}

/// Noiseless run on the protocol's declared model.
pub fn run_direct<P: BeepProtocol>(
    topology: &Topology,
    protocol: &P,
    seed: u64,
    max_slots: usize,
) -> Result<RunReport<ProtocolOutput<P>>, RunError> {
    run_rounds(
        topology,
        protocol,
        protocol.model(),
        NoiseConfig::noiseless(seed),
        max_slots,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Heard;

    /// Beeps in the listed rounds, terminates after `len` rounds.
    struct Scripted {
        beeps: Vec<(usize, usize)>,
        len: usize,
    }

    struct ScriptedNode {
        me: usize,
        beeps: Vec<(usize, usize)>,
        len: usize,
        heard: usize,
    }

    impl NodeProgram for ScriptedNode {
        type Output = usize;
        fn next_action(&mut self, round: usize) -> Step {
            if round >= self.len {
                Step::Terminate
            } else if self.beeps.contains(&(self.me, round)) {
                Step::Beep
            } else {
                Step::Listen
            }
        }
        fn absorb(&mut self, _round: usize, observation: Observation) {
            if observation.heard_beep() == Some(true) {
                self.heard += 1;
            }
        }
        fn output(&self) -> usize {
            self.heard
        }
    }

    impl BeepProtocol for Scripted {
        type Program = ScriptedNode;
        fn model(&self) -> ModelVariant {
            ModelVariant::BL
        }
        fn round_bound(&self) -> Option<usize> {
            Some(self.len)
        }
        fn spawn(&self, node: usize, _rng: ChaCha8Rng) -> ScriptedNode {
            ScriptedNode {
                me: node,
                beeps: self.beeps.clone(),
                len: self.len,
                heard: 0,
            }
        }
    }

    #[test]
    fn all_listen_gives_silence_transcripts() {
        let g = Topology::clique(4);
        let p = Scripted {
            beeps: vec![],
            len: 5,
        };
        let r = run_direct(&g, &p, 1, 100).unwrap();
        assert_eq!(r.slots, 5);
        for t in &r.transcripts {
            assert_eq!(t.entries.len(), 5);
            assert!(t
                .entries
                .iter()
                .all(|e| e.observation == Observation::Heard(Heard::Silence)));
        }
    }

    #[test]
    fn single_beep_then_terminate() {
        let g = Topology::clique(5);
        // node 0 beeps in slot 0 and stops after one slot; others run for 3
        struct Mixed;
        impl BeepProtocol for Mixed {
            type Program = ScriptedNode;
            fn model(&self) -> ModelVariant {
                ModelVariant::BL
            }
            fn round_bound(&self) -> Option<usize> {
                Some(3)
            }
            fn spawn(&self, node: usize, _rng: ChaCha8Rng) -> ScriptedNode {
                let len = if node == 0 { 1 } else { 3 };
                ScriptedNode {
                    me: node,
                    beeps: vec![(0, 0)],
                    len,
                    heard: 0,
                }
            }
        }
        let r = run_direct(&g, &Mixed, 3, 10).unwrap();
        assert_eq!(r.transcripts[0].entries.len(), 1);
        assert_eq!(r.terminated_at[0], 1);
        for v in 1..5 {
            assert_eq!(
                r.transcripts[v].entries[0].observation,
                Observation::Heard(Heard::Beep)
            );
            assert_eq!(
                r.transcripts[v].entries[1].observation,
                Observation::Heard(Heard::Silence)
            );
        }
    }

    #[test]
    fn exhausting_max_slots_names_running_nodes() {
        let g = Topology::path(3);
        let p = Scripted {
            beeps: vec![],
            len: 50,
        };
        assert_eq!(
            run_direct(&g, &p, 0, 10),
            Err(RunError::Unterminated {
                nodes: vec![0, 1, 2],
                slots: 10
            })
        );
        assert_eq!(run_direct(&g, &p, 0, 0), Err(RunError::NoSlots));
    }

    #[test]
    fn same_seed_same_transcripts_under_noise() {
        let g = Topology::gnp(10, 0.4, 2);
        let p = Scripted {
            beeps: vec![(1, 0), (4, 2), (7, 5)],
            len: 40,
        };
        let noise = NoiseConfig::new(0.1, 77);
        let a = run_rounds(&g, &p, ModelVariant::BLeps, noise, 100).unwrap();
        let b = run_rounds(&g, &p, ModelVariant::BLeps, noise, 100).unwrap();
        assert_eq!(a, b);
        let c = run_rounds(&g, &p, ModelVariant::BLeps, NoiseConfig::new(0.1, 78), 100).unwrap();
        assert_ne!(a.transcripts, c.transcripts);
    }
}
