use std::collections::BinaryHeap;
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::siso::Topology;
use crate::{Error, Result};

/// Rate-1/2 recursive systematic convolutional code.
///
/// Generators are octal with the most significant bit on `D⁰`, so the
/// default `(7, 5)` is feedback `1 + D + D²` and feedforward `1 + D²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvCode {
    pub feedback: u32,
    pub feedforward: u32,
}

impl Default for ConvCode {
    fn default() -> Self {
        ConvCode {
            feedback: 0o7,
            feedforward: 0o5,
        }
    }
}

/// Encoder output, one systematic and one parity bit per section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Encoded {
    pub systematic: Vec<u8>,
    pub parity: Vec<u8>,
}

impl Encoded {
    /// Bits in section order, systematic first.
    pub fn interleaved(&self) -> Vec<u8> {
        self.systematic.iter().zip(&self.parity).flat_map(|(&s, &p)| [s, p]).collect()
    }

    pub fn len(&self) -> usize {
        self.systematic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systematic.is_empty()
    }
}

impl ConvCode {
    pub fn new(feedback: u32, feedforward: u32) -> Result<Self> {
        let code = ConvCode { feedback, feedforward };
        let nu = code.memory();
        if nu == 0 || nu > 8 {
            return Err(Error::InvalidInput(format!("memory {nu} out of range 1..=8")));
        }
        if feedforward >= 1 << (nu + 1) {
            return Err(Error::InvalidInput("feedforward polynomial has higher degree than feedback".into()));
        }
        if feedback & 1 == 0 {
            return Err(Error::InvalidInput("feedback polynomial must have a D^ν term".into()));
        }
        Ok(code)
    }

    /// Encoder memory `ν`.
    pub fn memory(&self) -> usize {
        (32 - self.feedback.leading_zeros()).saturating_sub(1) as usize
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory()
    }

    /// Coefficient of `D^i` in a generator.
    fn tap(&self, g: u32, i: usize) -> u32 {
        (g >> (self.memory() - i)) & 1
    }

    /// Feedback sum over the register; bit `i − 1` of `state` holds `s_i`.
    fn feedback_of(&self, state: usize) -> u32 {
        (1..=self.memory()).fold(0, |acc, i| acc ^ (self.tap(self.feedback, i) & (state >> (i - 1)) as u32 & 1))
    }

    /// `(parity, next state)` for input `u`.
    pub fn step(&self, state: usize, u: u8) -> (u8, usize) {
        let a = (u as u32 & 1) ^ self.feedback_of(state);
        let mut p = self.tap(self.feedforward, 0) & a;
        for i in 1..=self.memory() {
            p ^= self.tap(self.feedforward, i) & (state >> (i - 1)) as u32 & 1;
        }
        let next = ((state << 1) | a as usize) & (self.num_states() - 1);
        (p as u8, next)
    }

    /// Input that drives the register toward zero.
    fn tail_input(&self, state: usize) -> u8 {
        self.feedback_of(state) as u8
    }

    /// Encodes `info`; with `terminate` the `ν` tail inputs returning the
    /// encoder to state zero are appended.
    pub fn encode(&self, info: &[u8], terminate: bool) -> Encoded {
        let n = info.len() + if terminate { self.memory() } else { 0 };
        let mut systematic = Vec::with_capacity(n);
        let mut parity = Vec::with_capacity(n);
        let mut s = 0;
        for &u in info {
            let (p, next) = self.step(s, u);
            systematic.push(u & 1);
            parity.push(p);
            s = next;
        }
        if terminate {
            for _ in 0..self.memory() {
                let u = self.tail_input(s);
                let (p, next) = self.step(s, u);
                systematic.push(u);
                parity.push(p);
                s = next;
            }
            debug_assert_eq!(s, 0);
        }
        Encoded { systematic, parity }
    }

    /// Section topology with 2-bit labels `(systematic, parity)`.
    pub fn topology(&self) -> Topology {
        let ns = self.num_states();
        let mut starts = Vec::with_capacity(2 * ns);
        let mut ends = Vec::with_capacity(2 * ns);
        let mut labels = Vec::with_capacity(2 * ns);
        for s in 0..ns {
            for u in 0..2u8 {
                let (p, next) = self.step(s, u);
                starts.push(s);
                ends.push(next);
                labels.push(((u as u32) << 1) | p as u32);
            }
        }
        Topology {
            num_states: ns,
            starts,
            ends,
            labels,
            bits: 2,
        }
    }

    /// Free distance under a periodic keep pattern over `(systematic, parity)`
    /// pairs. Searches paths that leave state zero at every phase of the
    /// period and return to it.
    pub fn free_distance(&self, keep: &[(bool, bool)]) -> usize {
        let period = keep.len().max(1);
        let keep = if keep.is_empty() { vec![(true, true)] } else { keep.to_vec() };
        let ns = self.num_states();
        let weight = |phase: usize, u: u8, p: u8| -> usize {
            let (ks, kp) = keep[phase % period];
            (ks as usize) * u as usize + (kp as usize) * p as usize
        };
        let mut best = usize::MAX;
        for phase0 in 0..period {
            // diverge with input 1 at state zero
            let (p, s1) = self.step(0, 1);
            let w0 = weight(phase0, 1, p);
            let mut dist = vec![usize::MAX; ns * period];
            let mut heap = BinaryHeap::new();
            let ph1 = (phase0 + 1) % period;
            dist[s1 * period + ph1] = w0;
            heap.push(Reverse((w0, s1, ph1)));
            while let Some(Reverse((w, s, ph))) = heap.pop() {
                if w > dist[s * period + ph] || w >= best {
                    continue;
                }
                if s == 0 {
                    best = best.min(w);
                    continue;
                }
                for u in 0..2u8 {
                    let (p, next) = self.step(s, u);
                    let nw = w + weight(ph, u, p);
                    let nph = (ph + 1) % period;
                    let k = next * period + nph;
                    if nw < dist[k] {
                        dist[k] = nw;
                        heap.push(Reverse((nw, next, nph)));
                    }
                }
            }
        }
        best
    }
}
