//! The time-invariant continuous-phase encoder (CPE) trellis.
//!
//! A CPE state is the pair `(history, β)`: the `L − 1` most recent inputs
//! `U ∈ {0..M−1}` and the phase state `β ∈ {0..P−1}`. An edge appends a new
//! input, so it carries the full correlative vector `α = (a₁, …, a_L)` with
//! `a₁` the newest input and `a_L` the oldest. The phase state advances by the
//! symbol leaving the pulse window: `β' = (β + Q·a_L) mod P`.
//!
//! States are indexed as `β·M^(L−1) + Σ_k s_k·M^(k−1)` where `s_1` is the most
//! recent input. Edges are indexed `start·M + input`.
//!
//! Each edge carries `Ns` samples of its tilted-phase waveform segment,
//! `sqrt(Es/Ns)·exp(jφ(τ))`, so a segment has energy `Es` and additive noise of
//! variance `N0` per complex sample gives the per-symbol SNR `Es/N0`.

mod distance;
mod labeling;

pub use distance::{
    min_distance_search, normalized_sq_distance, segment_distance_table, DistanceReport, WeightDistance,
};
pub use labeling::{gray, gray_inverse, optimized_cpe_labeling, rimoldi_labeling, Labeling, LabelingKind};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::siso::Topology;
use crate::waveform::{phase_pulse, CpmScheme, DEFAULT_SAMPLES_PER_SYMBOL};
use crate::{Error, Result};

/// Default guard on the number of edges per trellis section.
pub const DEFAULT_EDGE_CAP: usize = 1_000_000;

/// One edge of a CPE trellis section.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrellisEdge {
    /// Correlative vector, newest input first.
    pub alpha: Vec<u16>,
    /// Phase state at the start of the edge.
    pub beta: u32,
    pub start: usize,
    pub end: usize,
    /// CPE input `U` (equal to `alpha[0]`).
    pub input: usize,
}

/// A CPE trellis section with per-edge waveform segments.
#[derive(Clone, Debug)]
pub struct Trellis {
    scheme: CpmScheme,
    ns: usize,
    num_states: usize,
    edges: Vec<TrellisEdge>,
    segments: Vec<Complex64>,
}

impl Trellis {
    /// Builds the trellis with `ns` samples per symbol and the default edge cap.
    pub fn build(scheme: &CpmScheme, ns: usize) -> Result<Self> {
        Self::build_capped(scheme, ns, DEFAULT_EDGE_CAP)
    }

    /// Builds the trellis with the default `Ns = 8`.
    pub fn new(scheme: &CpmScheme) -> Result<Self> {
        Self::build(scheme, DEFAULT_SAMPLES_PER_SYMBOL)
    }

    pub fn build_capped(scheme: &CpmScheme, ns: usize, cap: usize) -> Result<Self> {
        scheme.validate()?;
        if ns == 0 {
            return Err(Error::InvalidInput("samples per symbol must be positive".into()));
        }
        let m = scheme.alphabet_size();
        let l = scheme.pulse.length;
        let p = scheme.p as usize;
        let edges_count = (m as u128)
            .checked_pow(l as u32)
            .map(|x| x * p as u128)
            .unwrap_or(u128::MAX);
        if edges_count > cap as u128 {
            return Err(Error::TooLarge {
                edges: edges_count.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        let hist_states = m.pow(l as u32 - 1);
        let num_states = p * hist_states;
        let mut edges = Vec::with_capacity(num_states * m);
        for start in 0..num_states {
            let beta = (start / hist_states) as u32;
            let mut hist = Vec::with_capacity(l - 1);
            let mut r = start % hist_states;
            for _ in 0..l - 1 {
                hist.push((r % m) as u16);
                r /= m;
            }
            for input in 0..m {
                let mut alpha = Vec::with_capacity(l);
                alpha.push(input as u16);
                alpha.extend_from_slice(&hist);
                let oldest = alpha[l - 1] as u64;
                let beta_next = ((beta as u64 + scheme.q as u64 * oldest) % p as u64) as usize;
                let mut hist_next = 0usize;
                for k in (0..l - 1).rev() {
                    hist_next = hist_next * m + alpha[k] as usize;
                }
                edges.push(TrellisEdge {
                    alpha,
                    beta,
                    start,
                    end: beta_next * hist_states + hist_next,
                    input,
                });
            }
        }
        let amp = (scheme.es / ns as f64).sqrt();
        let mut segments = Vec::with_capacity(edges.len() * ns);
        for e in &edges {
            for k in 0..ns {
                let tau = (k as f64 + 0.5) / ns as f64;
                segments.push(Complex64::from_polar(amp, tilted_phase(scheme, &e.alpha, e.beta, tau)));
            }
        }
        Ok(Trellis {
            scheme: *scheme,
            ns,
            num_states,
            edges,
            segments,
        })
    }

    pub fn scheme(&self) -> &CpmScheme {
        &self.scheme
    }

    /// Samples per symbol of the stored segments.
    pub fn samples_per_symbol(&self) -> usize {
        self.ns
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.scheme.alphabet_size()
    }

    pub fn edges(&self) -> &[TrellisEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &TrellisEdge {
        &self.edges[e]
    }

    /// Index of the edge leaving `state` with input `input`.
    pub fn edge_index(&self, state: usize, input: usize) -> usize {
        state * self.alphabet_size() + input
    }

    /// Waveform segment of edge `e`.
    pub fn segment(&self, e: usize) -> &[Complex64] {
        &self.segments[e * self.ns..(e + 1) * self.ns]
    }

    /// Phase state of `state`.
    pub fn beta_of(&self, state: usize) -> u32 {
        (state / self.alphabet_size().pow(self.scheme.pulse.length as u32 - 1)) as u32
    }

    /// Follows `inputs` from `start`, returning the edge sequence.
    pub fn path(&self, start: usize, inputs: &[usize]) -> Vec<usize> {
        let mut s = start;
        inputs
            .iter()
            .map(|&u| {
                let e = self.edge_index(s, u);
                s = self.edges[e].end;
                e
            })
            .collect()
    }

    /// Concatenated waveform of an edge path.
    pub fn path_waveform(&self, path: &[usize]) -> Vec<Complex64> {
        path.iter().flat_map(|&e| self.segment(e).iter().copied()).collect()
    }

    /// Flattened connectivity with the given labels, for the SISO kernel.
    pub fn topology(&self, labeling: &Labeling) -> Topology {
        Topology {
            num_states: self.num_states,
            starts: self.edges.iter().map(|e| e.start).collect(),
            ends: self.edges.iter().map(|e| e.end).collect(),
            labels: labeling.labels().to_vec(),
            bits: self.scheme.m as usize,
        }
    }

    /// Serializable dump of the trellis structure with optional labels.
    pub fn dump(&self, labeling: Option<&Labeling>) -> TrellisDump {
        TrellisDump {
            scheme: self.scheme,
            num_states: self.num_states,
            labeling: labeling.map(|l| l.kind()),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| DumpEdge {
                    start: e.start,
                    input: e.input,
                    end: e.end,
                    label: labeling.map(|l| l.label(i)),
                })
                .collect(),
        }
    }
}

/// Tilted phase `φ(τ)` of the edge `(α, β)` at `τ ∈ [0, T)`.
pub fn tilted_phase(scheme: &CpmScheme, alpha: &[u16], beta: u32, tau: f64) -> f64 {
    let h = scheme.h();
    let t = scheme.t;
    let mm1 = scheme.alphabet_size() as f64 - 1.0;
    let l = alpha.len();
    let mut data = 0.0;
    let mut qsum = 0.0;
    for (i, &a) in alpha.iter().enumerate() {
        let q = phase_pulse(&scheme.pulse, tau + i as f64 * t, t);
        data += a as f64 * q;
        qsum += q;
    }
    2.0 * PI * beta as f64 / scheme.p as f64
        + 4.0 * PI * h * data
        + PI * h * mm1 * tau / t
        - 2.0 * PI * h * mm1 * qsum
        + (l as f64 - 1.0) * mm1 * PI * h
}

/// Exact edge count per CPM input bit, `Y = P·2^(mL)/m`, as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complexity {
    pub num: u64,
    pub den: u64,
}

impl Complexity {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Number of CPE trellis edges per CPM input bit.
pub fn cpm_complexity(scheme: &CpmScheme) -> Complexity {
    let num = scheme.p as u64 * (1u64 << (scheme.m as u64 * scheme.pulse.length as u64));
    let den = scheme.m as u64;
    let g = crate::waveform::gcd(num, den);
    Complexity {
        num: num / g,
        den: den / g,
    }
}

/// JSON dump of a (possibly labeled) trellis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrellisDump {
    pub scheme: CpmScheme,
    pub num_states: usize,
    pub labeling: Option<LabelingKind>,
    pub edges: Vec<DumpEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpEdge {
    pub start: usize,
    pub input: usize,
    pub end: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<u32>,
}
