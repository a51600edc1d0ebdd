//! TDMA simulation of one-bit CONGEST protocols over the noisy channel.
//!
//! Each round of the robust bit protocol takes `c` epochs, one per color. In
//! epoch `i` every node colored `i` packs its per-port bits in ascending
//! receiver color, pads to `Δ` bits, encodes with the neighborhood code and
//! beeps the codeword. A listener decodes the word of its color-`i` neighbor
//! and reads the bit at its own color's position in that neighbor's colorset.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::colorset::{preprocess_colorsets, Colorset};
use super::{
    check_two_hop, BitExpand, CongestError, CongestNode, CongestOutput, CongestProtocol, Ports,
    Robust, RobustLayer,
};
use crate::bits::BitWord;
use crate::channel::Channel;
use crate::codes::BlockCode;
use crate::seed::{self, Stream};
use crate::topology::Topology;

/// Neighborhood code length used when none is configured: `4(Δ+1)`.
pub fn default_code_len(max_degree: usize) -> usize {
    4 * (max_degree + 1)
}

/// The `[n, k]` code used for packed neighborhood messages, cached.
pub fn neighborhood_code(k: usize, n: usize) -> Result<Arc<BlockCode>, CongestError> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BlockCode>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().unwrap().get(&(k, n)) {
        return Ok(c.clone());
    }
    let code = Arc::new(BlockCode::best_for_length(k, n).ok_or(CongestError::NoCode { k, n })?);
    Ok(cache.lock().unwrap().entry((k, n)).or_insert(code).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdmaConfig {
    pub robust: RobustLayer,
    pub epsilon: f64,
    pub seed: u64,
    /// End-to-end budget; a tenth of it goes to colorset preprocessing.
    pub target_failure: f64,
    /// Neighborhood code length; `None` selects [`default_code_len`].
    pub code_len: Option<usize>,
}

impl TdmaConfig {
    pub fn noiseless(seed: u64) -> Self {
        TdmaConfig {
            robust: RobustLayer::Identity,
            epsilon: 0.0,
            seed,
            target_failure: 0.01,
            code_len: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TdmaReport<O> {
    pub outputs: Vec<O>,
    /// Slots of the main loop, `big_pi_rounds · c · n_c`.
    pub slots: usize,
    pub preprocessing_slots: usize,
    /// Rounds of the simulated CONGEST(B) protocol.
    pub pi_rounds: usize,
    /// Rounds of the robust bit protocol.
    pub big_pi_rounds: usize,
    pub message_bits: usize,
    pub colors: usize,
    pub max_degree: usize,
    pub k_c: usize,
    pub n_c: usize,
    /// Packed neighborhood messages delivered (listener, epoch) pairs.
    pub messages: usize,
    /// Of those, messages decoded to something other than what was sent.
    pub message_errors: usize,
    /// Slots in which some closed neighborhood held two beepers.
    pub collision_violations: usize,
}

impl<O> TdmaReport<O> {
    pub fn overhead_ratio(&self) -> f64 {
        self.slots as f64 / self.pi_rounds.max(1) as f64
    }

    pub fn map_outputs<U>(self, f: impl FnMut(O) -> U) -> TdmaReport<U> {
        TdmaReport {
            outputs: self.outputs.into_iter().map(f).collect(),
            slots: self.slots,
            preprocessing_slots: self.preprocessing_slots,
            pi_rounds: self.pi_rounds,
            big_pi_rounds: self.big_pi_rounds,
            message_bits: self.message_bits,
            colors: self.colors,
            max_degree: self.max_degree,
            k_c: self.k_c,
            n_c: self.n_c,
            messages: self.messages,
            message_errors: self.message_errors,
            collision_violations: self.collision_violations,
        }
    }
}

/// Runs `pi` over the beeping channel under the 2-hop coloring `colors`.
pub fn tdma_simulate<P: CongestProtocol>(
    pi: &P,
    topology: &Topology,
    colors: &[usize],
    config: &TdmaConfig,
) -> Result<TdmaReport<CongestOutput<P>>, CongestError> {
    check_two_hop(topology, colors)?;
    let b = pi.message_bits();
    if !(1..=64).contains(&b) {
        return Err(CongestError::MessageBits(b));
    }
    let delta = topology.max_degree();
    if delta == 0 {
        return Err(CongestError::NoEdges);
    }
    let n = topology.node_count();
    let c = colors.iter().max().map_or(0, |m| m + 1);
    let k_c = delta;
    let n_c = config.code_len.unwrap_or_else(|| default_code_len(delta));
    let code = neighborhood_code(k_c, n_c)?;

    let pre_seed = seed::split(config.seed, Stream::Noise, 1);
    let colorsets: Vec<Colorset> = preprocess_colorsets(
        topology,
        colors,
        config.epsilon,
        config.target_failure / 10.0,
        pre_seed,
    )?;
    let preprocessing_slots = if config.epsilon == 0.0 {
        c + c * c
    } else {
        let params = crate::collision::choose_cd_params(
            n,
            c + c * c,
            config.epsilon,
            config.target_failure / 10.0,
        )
        .map_err(crate::beepsim::SimError::from)?;
        (c + c * c) * params.n_c()
    };

    let ports = Ports::by_color(topology, colors);
    let big = Robust::new(BitExpand::new(pi), config.robust);
    let mut nodes: Vec<_> = (0..n).map(|v| big.spawn(v, ports.peers(v))).collect();
    let mut by_color: Vec<Vec<usize>> = vec![Vec::new(); c];
    for v in 0..n {
        by_color[colors[v]].push(v);
    }
    let mut channel = Channel::or_channel(topology, config.epsilon, config.seed)?;
    let mut inbox: Vec<Vec<u64>> = (0..n).map(|v| vec![0; topology.degree(v)]).collect();
    let mut packed: Vec<Option<BitWord>> = vec![None; n];
    let mut codewords: Vec<Option<BitWord>> = vec![None; n];
    let mut beeping = vec![false; n];
    let mut heard = vec![false; n];
    let mut received: Vec<BitWord> = vec![BitWord::zeros(n_c); n];
    let (mut messages, mut message_errors, mut violations) = (0, 0, 0);

    for t in 0..big.rounds() {
        let sent: Vec<Vec<u64>> = nodes.iter_mut().map(|x| x.send(t)).collect();
        for i in 0..c {
            for v in 0..n {
                packed[v] = None;
                codewords[v] = None;
            }
            for &u in &by_color[i] {
                let mut m = BitWord::zeros(k_c);
                for (p, &bit) in sent[u].iter().enumerate().take(k_c) {
                    m.set(p, bit & 1 == 1);
                }
                codewords[u] = Some(code.encode(&m));
                packed[u] = Some(m);
            }
            for j in 0..n_c {
                for v in 0..n {
                    beeping[v] = codewords[v].as_ref().is_some_and(|w| w.get(j));
                }
                channel.step_or(&beeping, &mut heard);
                let counts = channel.beeping_neighbors();
                if (0..n).any(|v| counts[v] as usize + usize::from(beeping[v]) > 1) {
                    violations += 1;
                }
                for v in 0..n {
                    received[v].set(j, heard[v]);
                }
            }
            for v in 0..n {
                if colors[v] == i {
                    continue;
                }
                let truth = topology
                    .neighbors(v)
                    .iter()
                    .find(|&&u| colors[u] == i)
                    .and_then(|&u| packed[u].as_ref());
                let port = colorsets[v].port_of(i);
                if truth.is_none() && port.is_none() {
                    continue;
                }
                let decoded = code.decode(&received[v]);
                if let Some(sent_word) = truth {
                    messages += 1;
                    if decoded.as_ref() != Some(sent_word) {
                        message_errors += 1;
                    }
                }
                let Some(q) = port else { continue };
                let own = colorsets[v].color;
                let bit = colorsets[v].neighbor_sets[q]
                    .binary_search(&own)
                    .ok()
                    .filter(|&pos| pos < k_c)
                    .and_then(|pos| decoded.as_ref().map(|d| u64::from(d.get(pos))))
                    .unwrap_or(0);
                if q < inbox[v].len() {
                    inbox[v][q] = bit;
                }
            }
        }
        for v in 0..n {
            nodes[v].receive(t, &inbox[v]);
        }
    }

    Ok(TdmaReport {
        outputs: nodes.iter().map(CongestNode::output).collect(),
        slots: big.rounds() * c * n_c,
        preprocessing_slots,
        pi_rounds: pi.rounds(),
        big_pi_rounds: big.rounds(),
        message_bits: b,
        colors: c,
        max_degree: delta,
        k_c,
        n_c,
        messages,
        message_errors,
        collision_violations: violations,
    })
}

/// Decode failures of the neighborhood code over a single noisy edge:
/// how many of `trials` uniformly random `k`-bit messages decode wrongly.
pub fn measure_decode_failures(
    k: usize,
    n_c: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<usize, CongestError> {
    let code = neighborhood_code(k, n_c)?;
    let edge = Topology::path(2);
    let mut channel = Channel::or_channel(&edge, epsilon, seed)?;
    let mut rng = seed::rng(seed, Stream::Input, 0);
    let mut beeping = [false; 2];
    let mut heard = [false; 2];
    let mut failures = 0;
    for _ in 0..trials {
        let m = BitWord::from_bits((0..k).map(|_| rng.random::<bool>()));
        let w = code.encode(&m);
        let mut rx = BitWord::zeros(n_c);
        for j in 0..n_c {
            beeping[0] = w.get(j);
            channel.step_or(&beeping, &mut heard);
            rx.set(j, heard[1]);
        }
        if code.decode(&rx).as_ref() != Some(&m) {
            failures += 1;
        }
    }
    Ok(failures)
}
