//! Base-2 max* arithmetic, CPM branch metrics and the forward/backward kernel.
//!
//! The kernel works on any time-invariant trellis described by a [`Topology`]:
//! the CPE trellis of a CPM scheme as well as the convolutional codes of the
//! [`codec`](crate::codec) module. Path metrics are base-2 log-likelihoods.
//! Bit LLRs are `log₂ P(b = 1)/P(b = 0)`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::trellis::Trellis;
use crate::{Error, Result};

/// Exact `log₂(2^a + 2^b)`.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ((lo - hi) * LN_2).exp().ln_1p() / LN_2
}

/// max* over a sequence, `−∞` for an empty one.
pub fn max_star_all<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, max_star)
}

/// Combining rule for path metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxStarMode {
    /// Exact base-2 log-sum.
    #[default]
    Exact,
    /// Plain maximum (max-log approximation).
    MaxLog,
}

impl MaxStarMode {
    #[inline]
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            MaxStarMode::Exact => max_star(a, b),
            MaxStarMode::MaxLog => a.max(b),
        }
    }
}

/// Connectivity and labels of one trellis section.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub num_states: usize,
    pub starts: Vec<usize>,
    pub ends: Vec<usize>,
    /// Edge labels, `bits` wide; bit `i` of the label is label bit `i` counted
    /// from the most significant.
    pub labels: Vec<u32>,
    pub bits: usize,
}

impl Topology {
    pub fn num_edges(&self) -> usize {
        self.starts.len()
    }

    /// Value of label bit `i` (0 is the most significant) on edge `e`.
    #[inline]
    pub fn bit(&self, e: usize, i: usize) -> bool {
        (self.labels[e] >> (self.bits - 1 - i)) & 1 == 1
    }

    fn check(&self) -> Result<()> {
        let n = self.starts.len();
        if self.ends.len() != n || self.labels.len() != n {
            return Err(Error::InvalidInput("topology arrays differ in length".into()));
        }
        if self.starts.iter().chain(&self.ends).any(|&s| s >= self.num_states) {
            return Err(Error::InvalidInput("edge refers to a state out of range".into()));
        }
        Ok(())
    }
}

/// Per-section, per-edge branch metrics in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricMatrix {
    pub num_sections: usize,
    pub num_edges: usize,
    pub values: Vec<f64>,
}

impl MetricMatrix {
    pub fn zeros(num_sections: usize, num_edges: usize) -> Self {
        MetricMatrix {
            num_sections,
            num_edges,
            values: vec![0.0; num_sections * num_edges],
        }
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.num_edges..(n + 1) * self.num_edges]
    }

    pub fn row_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.num_edges..(n + 1) * self.num_edges]
    }
}

/// Branch metrics `λ(e, n) = log₂ p(y_n | s_e) − log₂ p(y_n | s_ref)` for the
/// received samples, with complex noise variance `n0` per sample.
///
/// The reference is edge 0 (state 0, input 0). Correlations are computed once
/// per correlative vector and rotated to each phase state.
pub fn branch_metrics(trellis: &Trellis, received: &[Complex64], n0: f64) -> Result<MetricMatrix> {
    let ns = trellis.samples_per_symbol();
    if received.len() % ns != 0 {
        return Err(Error::LengthMismatch {
            expected: (received.len() / ns + 1) * ns,
            actual: received.len(),
        });
    }
    if !(n0 > 0.0) {
        return Err(Error::InvalidInput(format!("noise variance {n0} must be positive")));
    }
    let sections = received.len() / ns;
    let ne = trellis.num_edges();
    let s = trellis.scheme();
    let patterns = ne / s.p as usize;
    let rot: Vec<Complex64> = (0..s.p)
        .map(|b| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * b as f64 / s.p as f64))
        .collect();
    let scale = 2.0 / (n0 * LN_2);
    let mut out = MetricMatrix::zeros(sections, ne);
    let mut corr = vec![Complex64::new(0.0, 0.0); patterns];
    for n in 0..sections {
        let y = &received[n * ns..(n + 1) * ns];
        for (a, c) in corr.iter_mut().enumerate() {
            *c = y
                .iter()
                .zip(trellis.segment(a))
                .map(|(y, x)| y * x.conj())
                .sum();
        }
        let reference = corr[0].re;
        let row = out.row_mut(n);
        for (e, r) in row.iter_mut().enumerate() {
            let c = rot[e / patterns] * corr[e % patterns];
            *r = scale * (c.re - reference);
        }
    }
    Ok(out)
}

/// Initial state vector pinned at `state`.
pub fn pinned(num_states: usize, state: usize) -> Vec<f64> {
    let mut v = vec![f64::NEG_INFINITY; num_states];
    v[state] = 0.0;
    v
}

/// Uniform initial state vector (all states equally likely, unnormalized).
pub fn uniform(num_states: usize) -> Vec<f64> {
    vec![0.0; num_states]
}

/// Output of [`forward_recursion`].
#[derive(Clone, Debug)]
pub struct Forward {
    /// Max-normalized forward metrics, `(sections + 1) × states`.
    pub alphas: Vec<f64>,
    /// `log_sums[n] = max*_s α_n(s)` without normalization.
    pub log_sums: Vec<f64>,
}

impl Forward {
    /// `max*_s α_N(s)` at the final section.
    pub fn terminal(&self) -> f64 {
        *self.log_sums.last().expect("at least the initial vector")
    }
}

#[inline]
fn edge_prior(topo: &Topology, e: usize, priors: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &l) in priors.iter().enumerate() {
        if topo.bit(e, i) {
            acc += l;
        }
    }
    acc
}

fn gammas(topo: &Topology, metrics: Option<&MetricMatrix>, priors: Option<&[f64]>, n: usize, out: &mut [f64]) {
    match metrics {
        Some(m) => out.copy_from_slice(m.row(n)),
        None => out.iter_mut().for_each(|x| *x = 0.0),
    }
    if let Some(p) = priors {
        let p = &p[n * topo.bits..(n + 1) * topo.bits];
        for (e, g) in out.iter_mut().enumerate() {
            *g += edge_prior(topo, e, p);
        }
    }
}

fn sections_of(topo: &Topology, metrics: Option<&MetricMatrix>, priors: Option<&[f64]>) -> Result<usize> {
    topo.check()?;
    let from_priors = priors.map(|p| p.len() / topo.bits.max(1));
    if let Some(m) = metrics {
        if m.num_edges != topo.num_edges() {
            return Err(Error::LengthMismatch {
                expected: topo.num_edges(),
                actual: m.num_edges,
            });
        }
        if let Some(k) = from_priors {
            if k != m.num_sections {
                return Err(Error::LengthMismatch {
                    expected: m.num_sections * topo.bits,
                    actual: priors.unwrap().len(),
                });
            }
        }
        return Ok(m.num_sections);
    }
    from_priors.ok_or_else(|| Error::InvalidInput("need branch metrics or priors".into()))
}

/// Forward recursion `α_{n+1}(s') = max*(α_n(s) + λ(e, n) + prior(e, n))`.
///
/// `priors` holds `bits` LLRs per section; the edge prior is the sum of the
/// LLRs of its one-bits.
pub fn forward_recursion(
    topo: &Topology,
    metrics: Option<&MetricMatrix>,
    priors: Option<&[f64]>,
    init: &[f64],
    mode: MaxStarMode,
) -> Result<Forward> {
    let sections = sections_of(topo, metrics, priors)?;
    if init.len() != topo.num_states {
        return Err(Error::LengthMismatch {
            expected: topo.num_states,
            actual: init.len(),
        });
    }
    let s = topo.num_states;
    let ne = topo.num_edges();
    let mut alphas = Vec::with_capacity((sections + 1) * s);
    let mut log_sums = Vec::with_capacity(sections + 1);
    let shift0 = init.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    alphas.extend(init.iter().map(|a| a - shift0));
    let mut offset = shift0;
    log_sums.push(offset + fold(mode, &alphas[0..s]));
    let mut g = vec![0.0; ne];
    let mut next = vec![f64::NEG_INFINITY; s];
    for n in 0..sections {
        gammas(topo, metrics, priors, n, &mut g);
        next.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
        let cur = &alphas[n * s..(n + 1) * s];
        for e in 0..ne {
            let v = cur[topo.starts[e]] + g[e];
            let t = &mut next[topo.ends[e]];
            *t = mode.combine(*t, v);
        }
        let shift = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        offset += shift;
        alphas.extend(next.iter().map(|a| a - shift));
        log_sums.push(offset + fold(mode, &alphas[(n + 1) * s..(n + 2) * s]));
    }
    Ok(Forward { alphas, log_sums })
}

fn fold(mode: MaxStarMode, v: &[f64]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &b| mode.combine(a, b))
}

/// Output of [`bcjr`].
#[derive(Clone, Debug)]
pub struct SisoResult {
    pub num_sections: usize,
    pub bits: usize,
    /// Posterior label-bit LLRs, `sections × bits`.
    pub llr: Vec<f64>,
    /// `llr − prior`.
    pub extrinsic: Vec<f64>,
    /// `max*_s α_N(s)`.
    pub terminal: f64,
    /// Normalized forward metrics.
    pub alphas: Vec<f64>,
    /// Normalized backward metrics.
    pub betas: Vec<f64>,
}

/// Full forward/backward pass returning posterior and extrinsic bit LLRs.
pub fn bcjr(
    topo: &Topology,
    metrics: Option<&MetricMatrix>,
    priors: Option<&[f64]>,
    init_forward: &[f64],
    init_backward: &[f64],
    mode: MaxStarMode,
) -> Result<SisoResult> {
    let fwd = forward_recursion(topo, metrics, priors, init_forward, mode)?;
    let sections = fwd.log_sums.len() - 1;
    if init_backward.len() != topo.num_states {
        return Err(Error::LengthMismatch {
            expected: topo.num_states,
            actual: init_backward.len(),
        });
    }
    let s = topo.num_states;
    let ne = topo.num_edges();
    let bits = topo.bits;
    let mut betas = vec![f64::NEG_INFINITY; (sections + 1) * s];
    let shift0 = init_backward.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (b, &v) in betas[sections * s..].iter_mut().zip(init_backward) {
        *b = v - shift0;
    }
    let mut g = vec![0.0; ne];
    let mut llr = vec![0.0; sections * bits];
    let mut ones = vec![f64::NEG_INFINITY; bits];
    let mut zeros = vec![f64::NEG_INFINITY; bits];
    for n in (0..sections).rev() {
        gammas(topo, metrics, priors, n, &mut g);
        let (head, tail) = betas.split_at_mut((n + 1) * s);
        let nb = &tail[..s];
        let cur = &mut head[n * s..];
        let alpha = &fwd.alphas[n * s..(n + 1) * s];
        ones.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
        zeros.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
        for e in 0..ne {
            let through = g[e] + nb[topo.ends[e]];
            let st = &mut cur[topo.starts[e]];
            *st = mode.combine(*st, through);
            let post = alpha[topo.starts[e]] + through;
            for i in 0..bits {
                if topo.bit(e, i) {
                    ones[i] = mode.combine(ones[i], post);
                } else {
                    zeros[i] = mode.combine(zeros[i], post);
                }
            }
        }
        let shift = cur.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if shift.is_finite() {
            cur.iter_mut().for_each(|x| *x -= shift);
        }
        for i in 0..bits {
            llr[n * bits + i] = ones[i] - zeros[i];
        }
    }
    let extrinsic = match priors {
        Some(p) => llr.iter().zip(p).map(|(l, p)| l - p).collect(),
        None => llr.clone(),
    };
    Ok(SisoResult {
        num_sections: sections,
        bits,
        llr,
        extrinsic,
        terminal: fwd.terminal(),
        alphas: fwd.alphas,
        betas,
    })
}
