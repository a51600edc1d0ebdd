//! Running protocols written for the collision-detecting beeping models over
//! the noisy channel: every protocol round becomes one collision-detection
//! instance whose outcome is translated back into the protocol's model.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;
use crate::channel::{Action, Channel, Heard, ModelVariant, Multiplicity, Observation};
use crate::collision::{self, choose_cd_params, CdEngine, CdError, CdOutcome, CdParams};
use crate::runner::{node_rng, BeepProtocol, NodeProgram, ProtocolOutput, Step};
use crate::topology::Topology;

/// A beeper whose detection instance decoded as silence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimFault {
    pub round: usize,
    pub node: usize,
}

/// Translation of a detection outcome into an observation of `model`.
/// `Err` carries the substitute observation for the impossible case of a
/// beeper decoding silence.
pub fn map_outcome(
    cd: CdOutcome,
    was_active: bool,
    model: ModelVariant,
) -> Result<Observation, Observation> {
    let feedback = model.beeper_detects_collisions();
    if was_active {
        let fallback = if feedback {
            Observation::Feedback {
                other_beeper: false,
            }
        } else {
            Observation::Nothing
        };
        return match cd {
            CdOutcome::Silence => Err(fallback),
            _ if feedback => Ok(Observation::Feedback {
                other_beeper: cd == CdOutcome::Collision,
            }),
            _ => Ok(Observation::Nothing),
        };
    }
    Ok(if model.listener_counts_beepers() {
        Observation::Counted(match cd {
            CdOutcome::Silence => Multiplicity::Zero,
            CdOutcome::SingleSender => Multiplicity::One,
            CdOutcome::Collision => Multiplicity::Many,
        })
    } else {
        Observation::Heard(if cd == CdOutcome::Silence {
            Heard::Silence
        } else {
            Heard::Beep
        })
    })
}

/// One line of the transcript dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub node: usize,
    pub round: usize,
    pub action: Action,
    pub cd_outcome: CdOutcome,
    pub mapped_observation: Observation,
}

#[derive(Debug, Clone)]
pub struct SimReport<O> {
    pub outputs: Vec<O>,
    /// Per node, one record per simulated round before termination.
    pub transcripts: Vec<Vec<SimRecord>>,
    /// Protocol rounds executed.
    pub rounds: usize,
    /// Channel slots used, `rounds · n_c`.
    pub slots: usize,
    pub n_c: usize,
    pub faults: Vec<SimFault>,
    /// Rounds in which two interfering beepers drew the same codeword.
    pub codeword_clashes: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("protocol declares no round bound and none was supplied")]
    NoRoundBound,
    #[error(transparent)]
    Cd(#[from] CdError),
    #[error("{} node(s) still running after {rounds} rounds", nodes.len())]
    Unterminated { nodes: Vec<usize>, rounds: usize },
}

/// Picks detection parameters for `R` rounds (declared, or `round_bound`)
/// and runs the simulation.
pub fn simulate_noisy<P: BeepProtocol>(
    protocol: &P,
    topology: &Topology,
    epsilon: f64,
    target_failure: f64,
    seed: u64,
    round_bound: Option<usize>,
) -> Result<SimReport<ProtocolOutput<P>>, SimError> {
    let rounds = protocol
        .round_bound()
        .or(round_bound)
        .ok_or(SimError::NoRoundBound)?;
    let params = choose_cd_params(
        topology.node_count(),
        rounds.max(1),
        epsilon,
        target_failure,
    )?;
    simulate_with_params(protocol, topology, &params, seed, rounds)
}

/// Simulation with explicit detection parameters; fails if some node is still
/// running after `max_rounds` rounds.
pub fn simulate_with_params<P: BeepProtocol>(
    protocol: &P,
    topology: &Topology,
    params: &CdParams,
    seed: u64,
    max_rounds: usize,
) -> Result<SimReport<ProtocolOutput<P>>, SimError> {
    let n = topology.node_count();
    let model = protocol.model();
    let n_c = params.n_c();
    let mut channel =
        Channel::or_channel(topology, params.epsilon(), seed).map_err(CdError::from)?;
    let mut programs: Vec<P::Program> = (0..n)
        .map(|v| protocol.spawn(v, node_rng(seed, v)))
        .collect();
    let mut cw_rngs: Vec<_> = (0..n).map(|v| collision::codeword_rng(seed, v)).collect();
    let mut live = vec![true; n];
    let mut codewords: Vec<Option<BitWord>> = vec![None; n];
    let mut transcripts = vec![Vec::new(); n];
    let mut faults = Vec::new();
    let mut clashes = 0;
    let mut engine = CdEngine::new();
    let mut round = 0;
    loop {
        for v in 0..n {
            codewords[v] = None;
            if live[v] {
                match programs[v].next_action(round) {
                    Step::Beep => {
                        codewords[v] = Some(params.code().sample_codeword(&mut cw_rngs[v]))
                    }
                    Step::Listen => {}
                    Step::Terminate => live[v] = false,
                }
            }
        }
        if !live.iter().any(|&l| l) {
            break;
        }
        if round == max_rounds {
            let nodes = (0..n).filter(|&v| live[v]).collect();
            return Err(SimError::Unterminated {
                nodes,
                rounds: round,
            });
        }
        if codewords.iter().filter(|c| c.is_some()).count() > 1
            && collision::codeword_clash(topology, &codewords)
        {
            clashes += 1;
        }
        let chi = engine.run(&mut channel, &codewords, n_c);
        for v in 0..n {
            if !live[v] {
                continue;
            }
            let active = codewords[v].is_some();
            let cd = collision::classify(chi[v], n_c, params.delta());
            let obs = map_outcome(cd, active, model).unwrap_or_else(|fallback| {
                faults.push(SimFault { round, node: v });
                fallback
            });
            programs[v].absorb(round, obs);
            let action = if active { Action::Beep } else { Action::Listen };
            transcripts[v].push(SimRecord {
                node: v,
                round,
                action,
                cd_outcome: cd,
                mapped_observation: obs,
            });
        }
        round += 1;
    }
    Ok(SimReport {
        outputs: programs.iter().map(NodeProgram::output).collect(),
        transcripts,
        rounds: round,
        slots: round * n_c,
        n_c,
        faults,
        codeword_clashes: clashes,
    })
}

/// Writes the transcripts as JSON lines, node-major.
pub fn write_transcript_jsonl<W: Write>(
    transcripts: &[Vec<SimRecord>],
    mut out: W,
) -> io::Result<()> {
    for rec in transcripts.iter().flatten() {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
