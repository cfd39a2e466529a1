use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::waveform::{phase_pulse, CpmScheme};
use crate::{Error, Result};

/// Simpson sub-intervals per symbol period.
const SUBSTEPS: usize = 128;
/// Relative tolerance for treating two distances as equal.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Input difference sequence `b = U⁽¹⁾ − U⁽²⁾` of a merged error event.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DifferenceSequence(pub Vec<i32>);

impl DifferenceSequence {
    /// Validates `b₁ ≠ 0`, `b_Δ ≠ 0`, `|b_n| ≤ M − 1` and `Σ b ≡ 0 (mod P)`.
    pub fn new(scheme: &CpmScheme, b: Vec<i32>) -> Result<Self> {
        let mm1 = scheme.alphabet_size() as i32 - 1;
        if b.is_empty() || b[0] == 0 || *b.last().unwrap() == 0 {
            return Err(Error::InvalidInput(format!("{b:?}: first and last elements must be nonzero")));
        }
        if b.iter().any(|x| x.abs() > mm1) {
            return Err(Error::InvalidInput(format!("{b:?}: elements must lie in ±{mm1}")));
        }
        let sum: i64 = b.iter().map(|&x| x as i64).sum();
        if sum.rem_euclid(scheme.p as i64) != 0 {
            return Err(Error::InvalidInput(format!(
                "{b:?}: sum {sum} is not a multiple of P = {}, the paths never merge",
                scheme.p
            )));
        }
        Ok(DifferenceSequence(b))
    }

    /// Length `Δ(b)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }
}

/// All valid difference sequences of exactly length `delta`.
pub fn enumerate_sequences(scheme: &CpmScheme, delta: usize) -> Vec<DifferenceSequence> {
    let mm1 = scheme.alphabet_size() as i32 - 1;
    let vals: Vec<i32> = (-mm1..=mm1).collect();
    let mut out = Vec::new();
    let mut cur = vec![0i32; delta];
    fn rec(scheme: &CpmScheme, vals: &[i32], k: usize, cur: &mut Vec<i32>, out: &mut Vec<DifferenceSequence>) {
        if k == cur.len() {
            if let Ok(b) = DifferenceSequence::new(scheme, cur.clone()) {
                out.push(b);
            }
            return;
        }
        for &v in vals {
            cur[k] = v;
            rec(scheme, vals, k + 1, cur, out);
        }
    }
    if delta > 0 {
        rec(scheme, &vals, 0, &mut cur, &mut out);
    }
    out
}

/// Evaluates `(m/T)∫(1 − cos Δψ)` symbol interval by symbol interval.
struct PhaseIntegrator {
    h: f64,
    l: usize,
    m: f64,
    /// `q(τ + lT)` at the Simpson nodes of `[0, T]`, for `l = 0..L`.
    q: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl PhaseIntegrator {
    fn new(scheme: &CpmScheme) -> Self {
        let l = scheme.pulse.length;
        let nodes: Vec<f64> = (0..=SUBSTEPS).map(|k| k as f64 / SUBSTEPS as f64).collect();
        let q = (0..l)
            .map(|off| nodes.iter().map(|&x| phase_pulse(&scheme.pulse, x + off as f64, 1.0)).collect())
            .collect();
        let hstep = 1.0 / SUBSTEPS as f64;
        let weights = (0..=SUBSTEPS)
            .map(|k| {
                let w = if k == 0 || k == SUBSTEPS {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * hstep / 3.0
            })
            .collect();
        PhaseIntegrator {
            h: scheme.h(),
            l,
            m: scheme.m as f64,
            q,
            weights,
        }
    }

    /// Integral over interval `j` (time `[jT, (j+1)T)`) given all `b`,
    /// treating indices past the end as zero.
    fn interval(&self, b: &[i32], j: usize) -> f64 {
        let at = |k: isize| -> f64 {
            if k < 0 || k as usize >= b.len() {
                0.0
            } else {
                b[k as usize] as f64
            }
        };
        // symbols k ≤ j − L have settled at q = 1/2
        let settled: f64 = (0..=(j as isize - self.l as isize)).map(at).sum();
        let base = 2.0 * PI * self.h * settled;
        let mut acc = 0.0;
        for (node, w) in self.weights.iter().enumerate() {
            let mut phase = base;
            for off in 0..self.l {
                let k = j as isize - off as isize;
                let bk = at(k);
                if bk != 0.0 {
                    phase += 4.0 * PI * self.h * bk * self.q[off][node];
                }
            }
            acc += w * (1.0 - phase.cos());
        }
        self.m * acc
    }
}

/// Normalized squared distance `d²/(2Eb)` of the event generated by `b`.
pub fn event_distance(scheme: &CpmScheme, b: &[i32]) -> f64 {
    let integ = PhaseIntegrator::new(scheme);
    (0..b.len() + scheme.pulse.length - 1).map(|j| integ.interval(b, j)).sum()
}

/// Result of [`min_distance_diff_sequences`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffSearchResult {
    /// Minimum `d²/(2Eb)`.
    pub d2_min: f64,
    /// All sequences within the tie tolerance of the minimum, both signs.
    pub sequences: Vec<DifferenceSequence>,
    pub max_len: usize,
}

impl DiffSearchResult {
    /// Whether every minimizing sequence has length two.
    pub fn all_length_two(&self) -> bool {
        self.sequences.iter().all(|b| b.len() == 2)
    }
}

/// Branch-and-bound search for the minimum-distance difference sequences of
/// length at most `max_len`.
pub fn min_distance_diff_sequences(scheme: &CpmScheme, max_len: usize) -> Result<DiffSearchResult> {
    scheme.validate()?;
    if max_len < 2 {
        return Err(Error::InvalidInput("max_len must be at least 2".into()));
    }
    let integ = PhaseIntegrator::new(scheme);
    let mm1 = scheme.alphabet_size() as i32 - 1;
    let p = scheme.p as i64;
    let l = scheme.pulse.length;
    let mut best = f64::INFINITY;
    let mut found: Vec<(f64, Vec<i32>)> = Vec::new();
    let mut b = Vec::with_capacity(max_len);

    struct Ctx<'a> {
        integ: &'a PhaseIntegrator,
        mm1: i32,
        p: i64,
        l: usize,
        max_len: usize,
    }

    fn slack(best: f64) -> f64 {
        if best.is_finite() {
            best * (1.0 + TIE_TOLERANCE) + 1e-12
        } else {
            f64::INFINITY
        }
    }

    fn dfs(ctx: &Ctx, b: &mut Vec<i32>, partial: f64, best: &mut f64, found: &mut Vec<(f64, Vec<i32>)>) {
        let k = b.len();
        // partial covers intervals 0..k−1, which depend only on b₁..b_k
        if k > 0 && *b.last().unwrap() != 0 {
            let sum: i64 = b.iter().map(|&x| x as i64).sum();
            if sum.rem_euclid(ctx.p) == 0 {
                let tail: f64 = (k..k + ctx.l - 1).map(|j| ctx.integ.interval(b, j)).sum();
                let total = partial + tail;
                if total <= slack(*best) {
                    if total < *best {
                        *best = total;
                    }
                    found.push((total, b.clone()));
                }
            }
        }
        if k == ctx.max_len {
            return;
        }
        let range: Vec<i32> = if k == 0 { (1..=ctx.mm1).collect() } else { (-ctx.mm1..=ctx.mm1).collect() };
        for v in range {
            b.push(v);
            let next = partial + ctx.integ.interval(b, k);
            if next <= slack(*best) {
                dfs(ctx, b, next, best, found);
            }
            b.pop();
        }
    }

    let ctx = Ctx {
        integ: &integ,
        mm1,
        p,
        l,
        max_len,
    };
    dfs(&ctx, &mut b, 0.0, &mut best, &mut found);
    if !best.is_finite() {
        return Err(Error::InvalidInput(format!(
            "no merged error event of length ≤ {max_len}"
        )));
    }
    let mut sequences: Vec<DifferenceSequence> = found
        .into_iter()
        .filter(|(d, _)| *d <= slack(best))
        .flat_map(|(_, b)| {
            let neg: Vec<i32> = b.iter().map(|x| -x).collect();
            [DifferenceSequence(b), DifferenceSequence(neg)]
        })
        .collect();
    sequences.sort();
    sequences.dedup();
    Ok(DiffSearchResult {
        d2_min: best,
        sequences,
        max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::Pulse;

    #[test]
    fn msk_minimum_distance_is_two_at_length_two() {
        let s = CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap();
        let r = min_distance_diff_sequences(&s, 6).unwrap();
        assert!((r.d2_min - 2.0).abs() < 1e-9, "{}", r.d2_min);
        assert!(r.all_length_two());
        assert!(r.sequences.contains(&DifferenceSequence(vec![1, -1])));
    }

    #[test]
    fn binary_rec3_half_minimum_has_length_two() {
        let s = CpmScheme::new(1, 1, 2, Pulse::rec(3)).unwrap();
        let r = min_distance_diff_sequences(&s, 8).unwrap();
        assert!(r.all_length_two(), "{:?}", r.sequences);
    }

    #[test]
    fn distance_scales_with_symbol_energy() {
        // normalized distance is energy-free; the absolute one is d²·2Eb
        let mut s = CpmScheme::new(2, 1, 4, Pulse::rc(2)).unwrap();
        let d1 = event_distance(&s, &[1, -1]) * 2.0 * s.es / s.m as f64;
        s.es = 2.0;
        let d2 = event_distance(&s, &[1, -1]) * 2.0 * s.es / s.m as f64;
        assert!((d2 - 2.0 * d1).abs() < 1e-12);
    }

    #[test]
    fn sequence_validation() {
        let s = CpmScheme::new(2, 1, 4, Pulse::rec(2)).unwrap();
        assert!(DifferenceSequence::new(&s, vec![1, 3]).is_ok());
        assert!(DifferenceSequence::new(&s, vec![1, 2]).is_err());
        assert!(DifferenceSequence::new(&s, vec![0, 1, -1]).is_err());
        assert!(DifferenceSequence::new(&s, vec![4, -4]).is_err());
        assert_eq!(enumerate_sequences(&CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap(), 2).len(), 4);
    }
}
