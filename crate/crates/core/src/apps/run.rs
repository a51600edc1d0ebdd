//! Named applications with a single entry point for direct and simulated runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    verify_coloring, verify_leader, verify_mis, AppError, ColoringProtocol, LeaderElection,
    LeaderOutput, MisProtocol, TwoHopColoring,
};
use crate::beepsim::{simulate_noisy, SimError};
use crate::runner::{run_direct, BeepProtocol, ProtocolOutput, RunError};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AppKind {
    Mis,
    Coloring,
    TwoHopColoring,
    LeaderElection,
}

impl AppKind {
    pub const ALL: [AppKind; 4] = [
        AppKind::Mis,
        AppKind::Coloring,
        AppKind::TwoHopColoring,
        AppKind::LeaderElection,
    ];
}

impl fmt::Display for AppKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AppKind::Mis => "mis",
            AppKind::Coloring => "coloring",
            AppKind::TwoHopColoring => "two-hop-coloring",
            AppKind::LeaderElection => "leader-election",
        })
    }
}

impl FromStr for AppKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "mis" => AppKind::Mis,
            "coloring" => AppKind::Coloring,
            "two-hop-coloring" | "two-hop" => AppKind::TwoHopColoring,
            "leader-election" | "leader" => AppKind::LeaderElection,
            _ => {
                return Err(format!(
                    "unknown application '{s}' (mis, coloring, two-hop-coloring, leader-election)"
                ))
            }
        })
    }
}

impl TryFrom<String> for AppKind {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<AppKind> for String {
    fn from(k: AppKind) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AppOutputs {
    Mis(Vec<bool>),
    Coloring(Vec<Option<usize>>),
    TwoHopColoring(Vec<Option<usize>>),
    LeaderElection(Vec<LeaderOutput>),
}

impl AppOutputs {
    pub fn verify(&self, topology: &Topology) -> bool {
        match self {
            AppOutputs::Mis(x) => verify_mis(topology, x),
            AppOutputs::Coloring(c) => verify_coloring(topology, c, 1),
            AppOutputs::TwoHopColoring(c) => verify_coloring(topology, c, 2),
            AppOutputs::LeaderElection(l) => verify_leader(l),
        }
    }
}

/// Noiseless on the declared model, or through collision detection over
/// the noisy channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Execution {
    Direct,
    Noisy { epsilon: f64, target_failure: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppRun {
    pub outputs: AppOutputs,
    pub verified: bool,
    /// Protocol rounds until every node terminated.
    pub rounds: usize,
    /// Channel slots; equal to `rounds` for direct runs.
    pub slots: usize,
    /// Detection code length, 1 for direct runs.
    pub n_c: usize,
    pub faults: usize,
    pub codeword_clashes: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppRunError {
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Runs `kind` with bounds taken from `topology` (n, Δ and diameter).
pub fn run_app(
    kind: AppKind,
    topology: &Topology,
    seed: u64,
    exec: Execution,
) -> Result<AppRun, AppRunError> {
    let n = topology.node_count();
    let delta = topology.max_degree();
    match kind {
        AppKind::Mis => execute(&MisProtocol::new(n)?, topology, seed, exec, AppOutputs::Mis),
        AppKind::Coloring => execute(
            &ColoringProtocol::new(delta + 1, n, delta)?,
            topology,
            seed,
            exec,
            AppOutputs::Coloring,
        ),
        AppKind::TwoHopColoring => execute(
            &TwoHopColoring::new(n, delta)?,
            topology,
            seed,
            exec,
            AppOutputs::TwoHopColoring,
        ),
        AppKind::LeaderElection => {
            let d = topology.diameter().unwrap_or(n);
            execute(
                &LeaderElection::new(n, d)?,
                topology,
                seed,
                exec,
                AppOutputs::LeaderElection,
            )
        }
    }
}

fn execute<P: BeepProtocol>(
    protocol: &P,
    topology: &Topology,
    seed: u64,
    exec: Execution,
    wrap: impl Fn(Vec<ProtocolOutput<P>>) -> AppOutputs,
) -> Result<AppRun, AppRunError> {
    let bound = protocol.round_bound().unwrap_or(1).max(1);
    let (outputs, rounds, slots, n_c, faults, clashes) = match exec {
        Execution::Direct => {
            let r = run_direct(topology, protocol, seed, bound)?;
            (r.outputs, r.slots, r.slots, 1, 0, 0)
        }
        Execution::Noisy {
            epsilon,
            target_failure,
        } => {
            let r = simulate_noisy(protocol, topology, epsilon, target_failure, seed, None)?;
            (
                r.outputs,
                r.rounds,
                r.slots,
                r.n_c,
                r.faults.len(),
                r.codeword_clashes,
            )
        }
    };
    let outputs = wrap(outputs);
    Ok(AppRun {
        verified: outputs.verify(topology),
        outputs,
        rounds,
        slots,
        n_c,
        faults,
        codeword_clashes: clashes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in AppKind::ALL {
            assert_eq!(k.to_string().parse::<AppKind>(), Ok(k));
        }
        assert!("bogus".parse::<AppKind>().is_err());
    }

    #[test]
    fn direct_runs_verify() {
        let g = Topology::wheel(9);
        for k in AppKind::ALL {
            let run = run_app(k, &g, 5, Execution::Direct).unwrap();
            assert!(run.verified, "{k}");
            assert_eq!(run.rounds, run.slots);
        }
    }
}
