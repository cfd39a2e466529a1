use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Labeling, Trellis};

/// Squared distance between two sample sequences, normalized to `2Eb`.
pub fn normalized_sq_distance(trellis: &Trellis, a: &[usize], b: &[usize]) -> f64 {
    let table = |e1: usize, e2: usize| pair_distance(trellis, e1, e2);
    a.iter().zip(b).map(|(&x, &y)| table(x, y)).sum()
}

fn pair_distance(trellis: &Trellis, e1: usize, e2: usize) -> f64 {
    let s = trellis.scheme();
    let two_eb = 2.0 * s.es / s.m as f64;
    trellis
        .segment(e1)
        .iter()
        .zip(trellis.segment(e2))
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / two_eb
}

/// `E × E` row-major table of per-section squared distances `d²/(2Eb)`
/// between edge waveforms.
pub fn segment_distance_table(trellis: &Trellis) -> Vec<f64> {
    let n = trellis.num_edges();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = pair_distance(trellis, i, j);
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    out
}

/// Minimum distance found for one input Hamming weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDistance {
    pub weight: usize,
    /// Minimum `d²/(2Eb)` over merged events, `None` if none was found.
    pub d2: Option<f64>,
    /// Length in symbols of the minimizing event.
    pub event_length: Option<usize>,
}

/// Result of [`min_distance_search`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub per_weight: Vec<WeightDistance>,
    /// Whether the weight-1 distance is finite.
    pub d_e1_finite: bool,
    /// Minimum weight-1 distance over unmerged path pairs at each depth.
    pub unmerged_weight1: Vec<f64>,
    pub max_depth: usize,
}

impl DistanceReport {
    /// `d²_E1/(2Eb)`, or `None` when classified infinite.
    pub fn d_e1(&self) -> Option<f64> {
        if self.d_e1_finite {
            self.per_weight.iter().find(|w| w.weight == 1).and_then(|w| w.d2)
        } else {
            None
        }
    }
}

/// Minimum squared Euclidean distance per label Hamming weight over error
/// events of at most `max_depth` sections.
///
/// Path pairs split from a common state; a pair that remerges ends its event.
/// The weight-1 distance is classified infinite when no weight-1 event merges
/// within `max_depth` and the minimum accumulated weight-1 distance of the
/// unmerged pairs strictly increases over the last three depths. The depth is
/// raised to at least `2L + P + 3` so that merges can be observed.
pub fn min_distance_search(
    trellis: &Trellis,
    labeling: &Labeling,
    max_hamming: usize,
    max_depth: usize,
) -> DistanceReport {
    let s = trellis.scheme();
    let max_depth = max_depth.max(2 * s.pulse.length + s.p as usize + 3);
    let max_hamming = max_hamming.max(1);
    let m = trellis.alphabet_size();
    let ns = trellis.num_states();
    let dist = segment_distance_table(trellis);
    let ne = trellis.num_edges();
    let labels = labeling.labels();
    let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, 0); max_hamming + 1];
    let key = |s1: usize, s2: usize, w: usize| (s1 * ns + s2) * (max_hamming + 1) + w;
    let mut frontier: HashMap<usize, f64> = HashMap::new();
    let mut unmerged = Vec::new();

    let relax = |frontier: &mut HashMap<usize, f64>, best: &mut Vec<(f64, usize)>, e1: usize, e2: usize, w0: usize, d0: f64, depth: usize| {
        let w = w0 + (labels[e1] ^ labels[e2]).count_ones() as usize;
        if w > max_hamming {
            return;
        }
        let d = d0 + dist[e1 * ne + e2];
        let (t1, t2) = (trellis.edge(e1).end, trellis.edge(e2).end);
        if t1 == t2 {
            if d < best[w].0 {
                best[w] = (d, depth);
            }
        } else {
            let slot = frontier.entry(key(t1, t2, w)).or_insert(f64::INFINITY);
            if d < *slot {
                *slot = d;
            }
        }
    };

    for st in 0..ns {
        for u1 in 0..m {
            for u2 in 0..m {
                if u1 != u2 {
                    relax(&mut frontier, &mut best, st * m + u1, st * m + u2, 0, 0.0, 1);
                }
            }
        }
    }
    for depth in 2..=max_depth + 1 {
        let w1 = frontier
            .iter()
            .filter(|(k, _)| *k % (max_hamming + 1) == 1)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min);
        unmerged.push(w1);
        if depth > max_depth || frontier.is_empty() {
            break;
        }
        let mut next = HashMap::with_capacity(frontier.len());
        let mut entries: Vec<(usize, f64)> = frontier.into_iter().collect();
        entries.sort_by_key(|&(k, _)| k);
        for (k, d0) in entries {
            let w0 = k % (max_hamming + 1);
            let pair = k / (max_hamming + 1);
            let (s1, s2) = (pair / ns, pair % ns);
            for u1 in 0..m {
                for u2 in 0..m {
                    relax(&mut next, &mut best, s1 * m + u1, s2 * m + u2, w0, d0, depth);
                }
            }
        }
        frontier = next;
    }

    let weight1_merged = best[1].0.is_finite();
    let n = unmerged.len();
    let growing = n >= 4 && (n - 3..n).all(|i| unmerged[i] > unmerged[i - 1]);
    let d_e1_finite = weight1_merged || !growing;
    DistanceReport {
        per_weight: (1..=max_hamming)
            .map(|w| WeightDistance {
                weight: w,
                d2: best[w].0.is_finite().then_some(best[w].0),
                event_length: best[w].0.is_finite().then_some(best[w].1),
            })
            .collect(),
        d_e1_finite,
        unmerged_weight1: unmerged,
        max_depth,
    }
}
