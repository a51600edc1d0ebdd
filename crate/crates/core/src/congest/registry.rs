//! Named built-in protocols and the colorings used to run them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    identity_coloring, run_congest, tdma_simulate, Bfs, CongestError, Flooding, MessageExchange,
    Ports, TdmaConfig, TdmaReport,
};
use crate::apps::{run_app, AppKind, AppOutputs, Execution};
use crate::seed::{self, Stream};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CongestKind {
    MessageExchange,
    Flooding,
    Bfs,
}

impl CongestKind {
    pub const ALL: [CongestKind; 3] = [
        CongestKind::MessageExchange,
        CongestKind::Flooding,
        CongestKind::Bfs,
    ];
}

impl fmt::Display for CongestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CongestKind::MessageExchange => "message-exchange",
            CongestKind::Flooding => "flooding",
            CongestKind::Bfs => "bfs",
        })
    }
}

impl FromStr for CongestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "message-exchange" => CongestKind::MessageExchange,
            "flooding" => CongestKind::Flooding,
            "bfs" | "bfs-layering" => CongestKind::Bfs,
            _ => {
                return Err(format!(
                    "unknown CONGEST protocol '{s}' (message-exchange, flooding, bfs)"
                ))
            }
        })
    }
}

impl TryFrom<String> for CongestKind {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<CongestKind> for String {
    fn from(k: CongestKind) -> String {
        k.to_string()
    }
}

/// Outcome of one simulated run of a built-in.
#[derive(Debug, Clone)]
pub struct CongestRun {
    pub report: TdmaReport<()>,
    /// Outputs equal those of the direct execution.
    pub equals_direct: bool,
    /// Outputs pass the protocol's own check.
    pub verified: bool,
}

/// Runs built-in `kind` through the TDMA simulation. `k` is the string
/// length of message exchange; inputs derive from `config.seed`.
pub fn run_builtin(
    kind: CongestKind,
    topology: &Topology,
    colors: &[usize],
    k: usize,
    config: &TdmaConfig,
) -> Result<CongestRun, CongestError> {
    let n = topology.node_count();
    let rounds = topology.diameter().unwrap_or(n).max(1);
    let ports = Ports::by_color(topology, colors);
    let input_seed = seed::split(config.seed, Stream::Input, 0);
    match kind {
        CongestKind::MessageExchange => {
            let p = MessageExchange::new(k, input_seed);
            let report = tdma_simulate(&p, topology, colors, config)?;
            let direct = run_congest(&p, topology, &ports);
            Ok(CongestRun {
                equals_direct: report.outputs == direct,
                verified: p.wrong_nodes(topology, &report.outputs) == 0,
                report: report.map_outputs(drop),
            })
        }
        CongestKind::Flooding => {
            let p = Flooding {
                source: 0,
                value: input_seed & 0xff,
                value_bits: 8,
                rounds,
            };
            let report = tdma_simulate(&p, topology, colors, config)?;
            let direct = run_congest(&p, topology, &ports);
            let truth = topology.bfs(0);
            let verified = truth.iter().zip(&report.outputs).all(|(d, o)| match d {
                Some(d) if *d <= rounds => *o == Some(p.value),
                _ => o.is_none(),
            });
            Ok(CongestRun {
                equals_direct: report.outputs == direct,
                verified,
                report: report.map_outputs(drop),
            })
        }
        CongestKind::Bfs => {
            let p = Bfs::new(0, n, rounds);
            let report = tdma_simulate(&p, topology, colors, config)?;
            let direct = run_congest(&p, topology, &ports);
            Ok(CongestRun {
                equals_direct: report.outputs == direct,
                verified: p.verify(topology, &report.outputs),
                report: report.map_outputs(drop),
            })
        }
    }
}

/// A 2-hop coloring for `topology`: the identity on cliques, otherwise the
/// output of the noiseless 2-hop coloring protocol (retried on a few seeds,
/// identity as the last resort).
pub fn two_hop_colors(topology: &Topology, seed: u64) -> Vec<usize> {
    let n = topology.node_count();
    if topology.edge_count() == n * (n - 1) / 2 {
        return identity_coloring(n);
    }
    for attempt in 0..8 {
        let s = seed::split(seed, Stream::Graph, attempt);
        if let Ok(run) = run_app(AppKind::TwoHopColoring, topology, s, Execution::Direct) {
            if let (true, AppOutputs::TwoHopColoring(c)) = (run.verified, run.outputs) {
                return compact(c.into_iter().flatten().collect());
            }
        }
    }
    identity_coloring(n)
}

/// Renumbers colors to `0..c` keeping their order.
fn compact(colors: Vec<usize>) -> Vec<usize> {
    let mut used = colors.clone();
    used.sort_unstable();
    used.dedup();
    colors
        .iter()
        .map(|c| used.binary_search(c).unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congest::check_two_hop;

    #[test]
    fn builtins_pass_noiselessly() {
        let g = Topology::gnp(12, 0.3, 2);
        let colors = two_hop_colors(&g, 1);
        assert!(check_two_hop(&g, &colors).is_ok());
        for kind in CongestKind::ALL {
            let run = run_builtin(kind, &g, &colors, 3, &TdmaConfig::noiseless(4)).unwrap();
            assert!(run.equals_direct && run.verified, "{kind}");
            assert_eq!(run.report.collision_violations, 0);
        }
    }

    #[test]
    fn clique_uses_identity() {
        assert_eq!(two_hop_colors(&Topology::clique(5), 0), vec![0, 1, 2, 3, 4]);
    }
}
