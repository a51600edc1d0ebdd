//! Collision detection over the noisy beeping channel.
//!
//! Active nodes beep the 1-positions of a random balanced codeword, passive
//! nodes listen throughout. Every node counts beeps sent plus beeps heard and
//! thresholds the count at `n_c/4` and `α·n_c`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitWord;
use crate::channel::{Channel, ChannelError};
use crate::codes::{BalancedCode, BlockCode, LinearCode};
use crate::seed::{self, Stream};
use crate::topology::Topology;

/// Smallest admissible code length.
pub const MIN_CODE_LEN: usize = 8;

/// Default relative distance for small noise rates.
pub const DEFAULT_DELTA: Ratio<u64> = Ratio::new_raw(3, 10);

/// Noise rates up to this value use [`DEFAULT_DELTA`].
pub const DEFAULT_DELTA_MAX_EPSILON: f64 = 0.07;

const DELTA_GRID: u64 = 1000;
const MAX_BASE_LEN: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CdOutcome {
    Silence,
    SingleSender,
    Collision,
}

impl fmt::Display for CdOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CdOutcome::Silence => "silence",
            CdOutcome::SingleSender => "single",
            CdOutcome::Collision => "collision",
        })
    }
}

impl CdOutcome {
    /// Correct outcome for a closed neighborhood holding `active` active nodes.
    pub fn for_active_count(active: usize) -> Self {
        match active {
            0 => CdOutcome::Silence,
            1 => CdOutcome::SingleSender,
            _ => CdOutcome::Collision,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CdError {
    #[error("probabilities must lie in (0, 1), got x={0}, y={1}")]
    Domain(f64, f64),
    #[error("epsilon {0} must lie in [0, 1/2)")]
    Epsilon(f64),
    #[error("target failure {0} must be positive")]
    Target(f64),
    #[error("network size and round count must be positive")]
    Size,
    #[error("no relative distance delta with delta > 4*epsilon is available for epsilon {0}")]
    Infeasible(f64),
    #[error("delta {delta} must exceed 4*epsilon = {}", 4.0 * epsilon)]
    DeltaTooSmall { delta: f64, epsilon: f64 },
    #[error("code relative distance {actual} is below the declared delta {declared}")]
    CodeTooWeak { declared: f64, actual: f64 },
    #[error("code length {0} below the minimum of {MIN_CODE_LEN}")]
    TooShort(usize),
    #[error("count {chi} outside 0..={n_c}")]
    CountOutOfRange { chi: usize, n_c: usize },
    #[error("no base code of length {len} with dimension {k}")]
    NoCode { k: usize, len: usize },
    #[error("active set has {got} entries, topology has {expected} nodes")]
    ActiveSet { expected: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Collision-detection parameters: a balanced code of length `n_c`, the
/// relative distance `delta` it guarantees, and the channel noise.
#[derive(Debug, Clone)]
pub struct CdParams {
    code: Arc<BalancedCode>,
    delta: Ratio<u64>,
    epsilon: f64,
}

impl CdParams {
    /// Checks `delta > 4 epsilon`, the code's distance against `delta`, and the
    /// length floor.
    pub fn new(code: Arc<BalancedCode>, delta: Ratio<u64>, epsilon: f64) -> Result<Self, CdError> {
        if code.len() < MIN_CODE_LEN {
            return Err(CdError::TooShort(code.len()));
        }
        Self::experimental(code, delta, epsilon)
    }

    /// Like [`CdParams::new`] without the length floor, for probing very short codes.
    pub fn experimental(
        code: Arc<BalancedCode>,
        delta: Ratio<u64>,
        epsilon: f64,
    ) -> Result<Self, CdError> {
        if !(0.0..0.5).contains(&epsilon) {
            return Err(CdError::Epsilon(epsilon));
        }
        let d = ratio_f64(delta);
        if d > 1.0 || d <= 4.0 * epsilon || *delta.numer() == 0 {
            return Err(CdError::DeltaTooSmall { delta: d, epsilon });
        }
        // base distance / base length >= delta, compared exactly
        let base = code.base();
        if (base.min_distance() as u64) * delta.denom() < delta.numer() * base.len() as u64 {
            return Err(CdError::CodeTooWeak {
                declared: d,
                actual: base.relative_distance(),
            });
        }
        Ok(CdParams {
            code,
            delta,
            epsilon,
        })
    }

    /// Builds a `k`-dimensional code of length `n_c` meeting `delta`.
    pub fn for_length(
        n_c: usize,
        k: usize,
        delta: Ratio<u64>,
        epsilon: f64,
    ) -> Result<Self, CdError> {
        let m = n_c / 2;
        let base = base_code(k, m, delta).ok_or(CdError::NoCode { k, len: m })?;
        Self::new(Arc::new(BalancedCode::new(base)), delta, epsilon)
    }

    pub fn code(&self) -> &Arc<BalancedCode> {
        &self.code
    }

    pub fn n_c(&self) -> usize {
        self.code.len()
    }

    pub fn delta(&self) -> Ratio<u64> {
        self.delta
    }

    pub fn delta_f64(&self) -> f64 {
        ratio_f64(self.delta)
    }

    /// `α = (1 + δ/2)/2`.
    pub fn alpha(&self) -> Ratio<u64> {
        (Ratio::from_integer(2) + self.delta) / 4
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

fn min_distance_for(delta: Ratio<u64>, m: usize) -> usize {
    let num = delta.numer() * m as u64;
    num.div_ceil(*delta.denom()).max(1) as usize
}

fn base_code(k: usize, m: usize, delta: Ratio<u64>) -> Option<BlockCode> {
    if k == 1 {
        return (m >= 1).then(|| BlockCode::Linear(LinearCode::repetition(m)));
    }
    BlockCode::with_length(k, m, min_distance_for(delta, m))
}

/// Three-way threshold classification with exact comparisons against `n_c/4`
/// and `α·n_c`.
pub fn classify(chi: usize, n_c: usize, delta: Ratio<u64>) -> CdOutcome {
    let chi = chi as u128;
    let n_c = n_c as u128;
    let (num, den) = (*delta.numer() as u128, *delta.denom() as u128);
    if 4 * chi < n_c {
        CdOutcome::Silence
    } else if 4 * chi * den < n_c * (2 * den + num) {
        CdOutcome::SingleSender
    } else {
        CdOutcome::Collision
    }
}

pub fn classify_count(chi: usize, params: &CdParams) -> Result<CdOutcome, CdError> {
    let n_c = params.n_c();
    if chi > n_c {
        return Err(CdError::CountOutOfRange { chi, n_c });
    }
    Ok(classify(chi, n_c, params.delta))
}

/// `D(x‖y) = x ln(x/y) + (1-x) ln((1-x)/(1-y))`.
pub fn kl_divergence(x: f64, y: f64) -> Result<f64, CdError> {
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return Err(CdError::Domain(x, y));
    }
    Ok((x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln()).max(0.0))
}

/// Exponents of the three concentration terms for `(δ, ε)`; zero noise makes
/// the noise-driven terms vanish, reported as infinite exponents.
pub fn chernoff_exponents(delta: f64, epsilon: f64) -> [f64; 3] {
    let hoeffding = 2.0 * (delta / 4.0).powi(2);
    if epsilon == 0.0 {
        return [f64::INFINITY, f64::INFINITY, f64::INFINITY];
    }
    [
        kl_divergence(delta / 4.0, epsilon).unwrap_or(0.0),
        kl_divergence(0.5, epsilon).unwrap_or(0.0),
        hoeffding,
    ]
}

/// Union bound `R·n·max(e^{-D(δ/4‖ε)n_c}, e^{-D(1/2‖ε)n_c}, e^{-2(δ/4)²n_c}, 2^{-k})`.
pub fn failure_bound(
    n: usize,
    rounds: usize,
    epsilon: f64,
    delta: f64,
    n_c: usize,
    k: usize,
) -> f64 {
    let e = chernoff_exponents(delta, epsilon);
    let worst = e
        .iter()
        .map(|&x| {
            if x.is_infinite() {
                0.0
            } else {
                (-x * n_c as f64).exp()
            }
        })
        .fold((-(k as f64) * std::f64::consts::LN_2).exp(), f64::max);
    (rounds as f64) * (n as f64) * worst
}

/// `δ` used by [`choose_cd_params`]: 3/10 for small noise, otherwise the
/// grid point in `(4ε, 1/2)` with the smallest Chernoff length.
pub fn choose_delta(epsilon: f64) -> Result<Ratio<u64>, CdError> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(CdError::Epsilon(epsilon));
    }
    if epsilon <= DEFAULT_DELTA_MAX_EPSILON {
        return Ok(DEFAULT_DELTA);
    }
    let mut best: Option<(f64, Ratio<u64>)> = None;
    for j in 1..DELTA_GRID / 2 {
        let d = j as f64 / DELTA_GRID as f64;
        if d <= 4.0 * epsilon {
            continue;
        }
        let rate = chernoff_exponents(d, epsilon)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(r, _)| rate > r) {
            best = Some((rate, Ratio::new(j, DELTA_GRID)));
        }
    }
    best.map(|(_, d)| d).ok_or(CdError::Infeasible(epsilon))
}

type CacheKey = (usize, usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, CdParams>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, CdParams>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Smallest even `n_c ≥ 8` whose union bound over `n` nodes and `rounds`
/// detection instances is at most `target_failure`, with a built code.
/// Results are memoized.
pub fn choose_cd_params(
    n: usize,
    rounds: usize,
    epsilon: f64,
    target_failure: f64,
) -> Result<CdParams, CdError> {
    if n == 0 || rounds == 0 {
        return Err(CdError::Size);
    }
    if !(target_failure > 0.0) {
        return Err(CdError::Target(target_failure));
    }
    let key = (n, rounds, epsilon.to_bits(), target_failure.to_bits());
    if let Some(p) = cache().lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let delta = choose_delta(epsilon)?;
    let params = if target_failure >= 1.0 {
        let base = BlockCode::Linear(LinearCode::repetition(MIN_CODE_LEN / 2));
        CdParams::new(Arc::new(BalancedCode::new(base)), delta, epsilon)?
    } else {
        let d = ratio_f64(delta);
        let budget = (rounds as f64) * (n as f64) / target_failure;
        let k = (budget.log2().ceil().max(1.0)) as usize;
        let rate = chernoff_exponents(d, epsilon)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let mut n_c = if rate.is_infinite() {
            MIN_CODE_LEN
        } else {
            (budget.ln() / rate).ceil() as usize
        };
        n_c = n_c.max(MIN_CODE_LEN).max(2 * k);
        n_c += n_c % 2;
        while failure_bound(n, rounds, epsilon, d, n_c, k) > target_failure {
            n_c += 2;
        }
        loop {
            if n_c / 2 > MAX_BASE_LEN {
                return Err(CdError::NoCode { k, len: n_c / 2 });
            }
            if let Some(base) = base_code(k, n_c / 2, delta) {
                break CdParams::new(Arc::new(BalancedCode::new(base)), delta, epsilon)?;
            }
            n_c += 2;
        }
    };
    cache().lock().unwrap().insert(key, params.clone());
    Ok(params)
}

/// Per-node counts and outcomes of one detection instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CdReport {
    pub outcomes: Vec<CdOutcome>,
    pub chi: Vec<usize>,
    /// Two active nodes sharing a closed neighborhood drew the same codeword.
    pub codeword_clash: bool,
}

/// Reusable buffers for running detection instances on one channel.
#[derive(Debug, Default)]
pub struct CdEngine {
    beeping: Vec<bool>,
    heard: Vec<bool>,
    chi: Vec<usize>,
}

impl CdEngine {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `n_c` slots on `channel`; `codewords[v]` is `Some` for active
    /// nodes. Returns the counts `χ`.
    pub fn run(
        &mut self,
        channel: &mut Channel<'_>,
        codewords: &[Option<BitWord>],
        n_c: usize,
    ) -> &[usize] {
        let n = codewords.len();
        self.beeping.resize(n, false);
        self.heard.resize(n, false);
        self.chi.clear();
        self.chi.resize(n, 0);
        for j in 0..n_c {
            for v in 0..n {
                self.beeping[v] = codewords[v].as_ref().is_some_and(|c| c.get(j));
            }
            channel.step_or(&self.beeping, &mut self.heard);
            for v in 0..n {
                self.chi[v] += usize::from(self.beeping[v]) + usize::from(self.heard[v]);
            }
        }
        &self.chi
    }
}

/// Whether two active nodes in some closed neighborhood chose equal codewords.
pub fn codeword_clash(topology: &Topology, codewords: &[Option<BitWord>]) -> bool {
    let mut seen: Vec<&BitWord> = Vec::new();
    (0..topology.node_count()).any(|v| {
        seen.clear();
        for u in std::iter::once(v).chain(topology.neighbors(v).iter().copied()) {
            if let Some(c) = &codewords[u] {
                if seen.contains(&c) {
                    return true;
                }
                seen.push(c);
            }
        }
        false
    })
}

/// Correct outcome of every node for the given active set.
pub fn expected_outcomes(topology: &Topology, active: &[bool]) -> Vec<CdOutcome> {
    (0..topology.node_count())
        .map(|v| {
            let count = usize::from(active[v])
                + topology.neighbors(v).iter().filter(|&&u| active[u]).count();
            CdOutcome::for_active_count(count)
        })
        .collect()
}

/// Codeword rng of `node` for master seed `seed`.
pub fn codeword_rng(seed: u64, node: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed::split(seed, Stream::Codeword, node as u64))
}

/// One detection instance: active nodes draw uniform codewords, the channel
/// is `BLeps` (or `BL` at zero noise) seeded by `seed`.
pub fn run_collision_detection(
    topology: &Topology,
    active: &[bool],
    params: &CdParams,
    seed: u64,
) -> Result<CdReport, CdError> {
    let n = topology.node_count();
    if active.len() != n {
        return Err(CdError::ActiveSet {
            expected: n,
            got: active.len(),
        });
    }
    let codewords: Vec<Option<BitWord>> = (0..n)
        .map(|v| active[v].then(|| params.code.sample_codeword(&mut codeword_rng(seed, v))))
        .collect();
    let mut channel = Channel::or_channel(topology, params.epsilon, seed)?;
    let mut engine = CdEngine::new();
    let chi = engine.run(&mut channel, &codewords, params.n_c()).to_vec();
    let outcomes = chi
        .iter()
        .map(|&c| classify(c, params.n_c(), params.delta))
        .collect();
    Ok(CdReport {
        outcomes,
        chi,
        codeword_clash: codeword_clash(topology, &codewords),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let d = Ratio::new(1, 4);
        assert_eq!(classify(7, 32, d), CdOutcome::Silence);
        assert_eq!(classify(8, 32, d), CdOutcome::SingleSender);
        assert_eq!(classify(16, 32, d), CdOutcome::SingleSender);
        assert_eq!(classify(17, 32, d), CdOutcome::SingleSender);
        assert_eq!(classify(18, 32, d), CdOutcome::Collision);
    }

    #[test]
    fn alpha_is_exact() {
        let p = CdParams::for_length(32, 3, Ratio::new(1, 4), 0.0).unwrap();
        assert_eq!(p.alpha(), Ratio::new(9, 16));
        assert_eq!(
            classify_count(33, &p),
            Err(CdError::CountOutOfRange { chi: 33, n_c: 32 })
        );
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_divergence(0.3, 0.3).unwrap(), 0.0);
        let direct = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((kl_divergence(0.5, 0.25).unwrap() - direct).abs() < 1e-12);
        assert!((kl_divergence(0.5, 0.25).unwrap() - 0.14384).abs() < 1e-5);
        assert!(kl_divergence(0.0, 0.5).is_err());
    }

    #[test]
    fn params_validation() {
        let code = Arc::new(BalancedCode::new(BlockCode::Linear(
            LinearCode::repetition(4),
        )));
        assert!(CdParams::new(code.clone(), Ratio::new(1, 5), 0.05).is_err());
        assert!(CdParams::new(code.clone(), Ratio::new(3, 10), 0.05).is_ok());
        let short = Arc::new(BalancedCode::new(BlockCode::Linear(
            LinearCode::repetition(2),
        )));
        assert_eq!(
            CdParams::new(short.clone(), Ratio::new(9, 10), 0.2).unwrap_err(),
            CdError::TooShort(4)
        );
        assert!(CdParams::experimental(short, Ratio::new(9, 10), 0.2).is_ok());
    }

    #[test]
    fn delta_choice() {
        assert_eq!(choose_delta(0.05).unwrap(), Ratio::new(3, 10));
        let d = choose_delta(0.1).unwrap();
        assert!(ratio_f64(d) > 0.4 && ratio_f64(d) < 0.5);
        assert_eq!(choose_delta(0.125).unwrap_err(), CdError::Infeasible(0.125));
    }

    #[test]
    fn degenerate_target_gives_floor() {
        let p = choose_cd_params(16, 1, 0.05, 1.0).unwrap();
        assert_eq!(p.n_c(), MIN_CODE_LEN);
    }

    #[test]
    fn noiseless_clique_scenarios() {
        let g = Topology::clique(16);
        let p = choose_cd_params(16, 1, 0.0, 1e-3).unwrap();
        let mut active = vec![false; 16];
        let r = run_collision_detection(&g, &active, &p, 1).unwrap();
        assert!(r.outcomes.iter().all(|&o| o == CdOutcome::Silence));
        active[3] = true;
        let r = run_collision_detection(&g, &active, &p, 1).unwrap();
        assert!(r.outcomes.iter().all(|&o| o == CdOutcome::SingleSender));
        assert!(r.chi.iter().all(|&c| c == p.n_c() / 2));
        active[9] = true;
        let r = run_collision_detection(&g, &active, &p, 1).unwrap();
        assert!(!r.codeword_clash);
        assert!(r.outcomes.iter().all(|&o| o == CdOutcome::Collision));
    }
}
