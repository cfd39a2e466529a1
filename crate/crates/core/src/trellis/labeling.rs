use serde::{Deserialize, Serialize};

use super::Trellis;
use crate::{Error, Result};

/// How a labeling was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelingKind {
    /// Natural binary label of the CPE input.
    RimoldiNatural,
    /// Closed-form cluster construction.
    OptimizedAnalytic,
    /// Pairwise-metric clustering.
    OptimizedClustered,
    /// Best-effort clustering when the exact construction is infeasible.
    ClusteredFallback,
}

/// Per-edge `m`-bit labels, verified right-resolving on construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    labels: Vec<u32>,
    bits: usize,
    kind: LabelingKind,
}

impl Labeling {
    /// Wraps `labels` (indexed by edge) after checking that edges leaving each
    /// state carry distinct labels.
    pub fn new(trellis: &Trellis, labels: Vec<u32>, kind: LabelingKind) -> Result<Self> {
        if labels.len() != trellis.num_edges() {
            return Err(Error::LengthMismatch {
                expected: trellis.num_edges(),
                actual: labels.len(),
            });
        }
        let m = trellis.alphabet_size();
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= m) {
            return Err(Error::InvalidInput(format!("label {bad} does not fit in {} bits", trellis.scheme().m)));
        }
        let mut seen = vec![usize::MAX; trellis.num_states() * m];
        for (e, edge) in trellis.edges().iter().enumerate() {
            let slot = edge.start * m + labels[e] as usize;
            if seen[slot] != usize::MAX {
                return Err(Error::NotRightResolving {
                    state: edge.start,
                    label: labels[e],
                });
            }
            seen[slot] = e;
        }
        Ok(Labeling {
            labels,
            bits: trellis.scheme().m as usize,
            kind,
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, edge: usize) -> u32 {
        self.labels[edge]
    }

    pub fn kind(&self) -> LabelingKind {
        self.kind
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// `table[state·M + label]` is the edge leaving `state` with that label.
    pub fn edge_by_label(&self, trellis: &Trellis) -> Vec<usize> {
        let m = trellis.alphabet_size();
        let mut table = vec![0; self.labels.len()];
        for (e, edge) in trellis.edges().iter().enumerate() {
            table[edge.start * m + self.labels[e] as usize] = e;
        }
        table
    }

    /// Partition of edges by label.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); 1 << self.bits];
        for (e, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(e);
        }
        out
    }
}

/// Binary-reflected Gray code.
pub fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

/// Inverse of [`gray`].
pub fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// Labels every edge with the natural binary value of its CPE input.
pub fn rimoldi_labeling(trellis: &Trellis) -> Labeling {
    let labels = trellis.edges().iter().map(|e| e.input as u32).collect();
    Labeling::new(trellis, labels, LabelingKind::RimoldiNatural).expect("inputs are distinct per state")
}

pub(crate) fn inverse_mod(q: u64, m: u64) -> Option<u64> {
    (1..m.max(2)).find(|&x| (q * x) % m == 1 % m).or(if m == 1 { Some(0) } else { None })
}

/// Cluster index `i = (Σ a_l + β·Q⁻¹) mod M` of an edge.
pub(crate) fn cluster_index(trellis: &Trellis, edge: usize, q_inv: u64) -> u32 {
    let m = trellis.alphabet_size() as u64;
    let e = trellis.edge(edge);
    let s: u64 = e.alpha.iter().map(|&a| a as u64).sum();
    ((s + e.beta as u64 * q_inv) % m) as u32
}

/// The optimized CPE labeling: edge `(α, β)` gets the Gray label of
/// `i = (a₁ + Σ_{l≥2} a_l + β·Q⁻¹) mod M`.
///
/// Requires `P` to be a multiple of `M`.
pub fn optimized_cpe_labeling(trellis: &Trellis) -> Result<Labeling> {
    let s = trellis.scheme();
    let m = s.alphabet_size() as u64;
    if s.p as u64 % m != 0 {
        let cond = if m == 2 { "P is even" } else { "P is a multiple of M" };
        return Err(Error::ConditionsNotMet(format!(
            "{cond} (P = {}, M = {m})",
            s.p
        )));
    }
    let q_inv = inverse_mod(s.q as u64 % m, m).expect("Q coprime to P is odd");
    let labels = (0..trellis.num_edges())
        .map(|e| gray(cluster_index(trellis, e, q_inv)))
        .collect();
    Labeling::new(trellis, labels, LabelingKind::OptimizedAnalytic)
}
