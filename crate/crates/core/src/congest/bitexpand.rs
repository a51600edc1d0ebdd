//! Splitting every `B`-bit message into `B` one-bit rounds, most significant
//! bit first.

use super::{CongestNode, CongestProtocol};

#[derive(Debug, Clone)]
pub struct BitExpand<P> {
    inner: P,
}

impl<P: CongestProtocol> BitExpand<P> {
    pub fn new(inner: P) -> Self {
        BitExpand { inner }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

pub struct BitExpandNode<N> {
    inner: N,
    bits: usize,
    outgoing: Vec<u64>,
    incoming: Vec<u64>,
}

impl<N: CongestNode> CongestNode for BitExpandNode<N> {
    type Output = N::Output;

    fn send(&mut self, round: usize) -> Vec<u64> {
        let (t, s) = (round / self.bits, round % self.bits);
        if s == 0 {
            self.outgoing = self.inner.send(t);
            self.incoming = vec![0; self.outgoing.len()];
        }
        let shift = self.bits - 1 - s;
        self.outgoing.iter().map(|m| (m >> shift) & 1).collect()
    }

    fn receive(&mut self, round: usize, messages: &[u64]) {
        let (t, s) = (round / self.bits, round % self.bits);
        if s == 0 {
            self.incoming = vec![0; messages.len()];
        }
        for (acc, &b) in self.incoming.iter_mut().zip(messages) {
            *acc = (*acc << 1) | (b & 1);
        }
        if s + 1 == self.bits {
            self.inner.receive(t, &self.incoming);
        }
    }

    fn output(&self) -> N::Output {
        self.inner.output()
    }
}

impl<P: CongestProtocol> CongestProtocol for BitExpand<P> {
    type Node = BitExpandNode<P::Node>;

    fn message_bits(&self) -> usize {
        1
    }

    fn rounds(&self) -> usize {
        self.inner.message_bits() * self.inner.rounds()
    }

    fn spawn(&self, node: usize, port_peers: &[usize]) -> Self::Node {
        BitExpandNode {
            inner: self.inner.spawn(node, port_peers),
            bits: self.inner.message_bits(),
            outgoing: Vec::new(),
            incoming: Vec::new(),
        }
    }
}
