//! Pluggable error tolerance for one-bit protocols.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CongestNode, CongestProtocol};

/// `Repetition(k)` sends every bit `k` times and takes the majority (ties
/// decode to 0). `Identity` is `Repetition(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RobustLayer {
    Identity,
    Repetition(usize),
}

impl RobustLayer {
    pub fn factor(self) -> usize {
        match self {
            RobustLayer::Identity => 1,
            RobustLayer::Repetition(k) => k.max(1),
        }
    }
}

impl fmt::Display for RobustLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobustLayer::Identity => f.write_str("identity"),
            RobustLayer::Repetition(k) => write!(f, "repetition:{k}"),
        }
    }
}

impl FromStr for RobustLayer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "identity" {
            return Ok(RobustLayer::Identity);
        }
        let k = s
            .strip_prefix("repetition:")
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| {
                format!("unknown robust layer '{s}' (expected identity or repetition:<k>)")
            })?;
        Ok(RobustLayer::Repetition(k))
    }
}

impl TryFrom<String> for RobustLayer {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<RobustLayer> for String {
    fn from(r: RobustLayer) -> String {
        r.to_string()
    }
}

/// A one-bit protocol wrapped by a robust layer.
#[derive(Debug, Clone)]
pub struct Robust<P> {
    inner: P,
    k: usize,
}

impl<P: CongestProtocol> Robust<P> {
    pub fn new(inner: P, layer: RobustLayer) -> Self {
        assert_eq!(
            inner.message_bits(),
            1,
            "robust layers act on one-bit protocols"
        );
        Robust {
            inner,
            k: layer.factor(),
        }
    }
}

pub struct RobustNode<N> {
    inner: N,
    k: usize,
    outgoing: Vec<u64>,
    ones: Vec<usize>,
}

impl<N: CongestNode> CongestNode for RobustNode<N> {
    type Output = N::Output;

    fn send(&mut self, round: usize) -> Vec<u64> {
        if round % self.k == 0 {
            self.outgoing = self.inner.send(round / self.k);
        }
        self.outgoing.clone()
    }

    fn receive(&mut self, round: usize, messages: &[u64]) {
        if round % self.k == 0 {
            self.ones = vec![0; messages.len()];
        }
        for (c, &b) in self.ones.iter_mut().zip(messages) {
            *c += (b & 1) as usize;
        }
        if round % self.k == self.k - 1 {
            let bits: Vec<u64> = self
                .ones
                .iter()
                .map(|&c| u64::from(2 * c > self.k))
                .collect();
            self.inner.receive(round / self.k, &bits);
        }
    }

    fn output(&self) -> N::Output {
        self.inner.output()
    }
}

impl<P: CongestProtocol> CongestProtocol for Robust<P> {
    type Node = RobustNode<P::Node>;

    fn message_bits(&self) -> usize {
        1
    }

    fn rounds(&self) -> usize {
        self.k * self.inner.rounds()
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> Self::Node {
        RobustNode {
            inner: self.inner.spawn(node, port_peers),
            k: self.k,
            outgoing: Vec::new(),
            ones: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("identity".parse::<RobustLayer>(), Ok(RobustLayer::Identity));
        assert_eq!(
            "repetition:5".parse::<RobustLayer>(),
            Ok(RobustLayer::Repetition(5))
        );
        assert!("repetition:0".parse::<RobustLayer>().is_err());
        assert_eq!(RobustLayer::Repetition(3).to_string(), "repetition:3");
        assert_eq!(RobustLayer::Identity.factor(), 1);
    }
}
