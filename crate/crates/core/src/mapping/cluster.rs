use std::f64::consts::LN_2;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diff::{min_distance_diff_sequences, DiffSearchResult, DifferenceSequence};
use super::graph::{vertex_set, UnionFind};
use crate::trellis::{gray, segment_distance_table, Labeling, LabelingKind, Trellis};
use crate::waveform::CpmScheme;
use crate::{Error, Result};

/// Default Es/N0 (dB) at which pair metrics are evaluated.
pub const DEFAULT_TABLE_SNR_DB: f64 = 10.0;
/// Default number of trellis extensions on each side of section zero.
pub const DEFAULT_PROBE_DEPTH: usize = 64;
const CONVERGENCE: f64 = 1e-9;
const TIER_TOLERANCE: f64 = 1e-9;

/// Pairwise edge metrics: for every edge pair at time zero, the minimum
/// squared distance over path pairs passing through it, and the matching
/// pairwise log-likelihood.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairMetricTable {
    pub num_edges: usize,
    pub es_n0_db: f64,
    /// `d²/(2Eb)`, row-major `E × E`.
    pub d2: Vec<f64>,
    /// Whether both boundary recursions reached steady state.
    pub converged: bool,
    /// Extensions used on the left and on the right.
    pub iterations: (usize, usize),
    bits: usize,
}

impl PairMetricTable {
    pub fn distance(&self, e1: usize, e2: usize) -> f64 {
        self.d2[e1 * self.num_edges + e2]
    }

    /// Pairwise likelihood `log₂ exp(−|x − u|²/(4N0))` of the pair.
    pub fn metric(&self, e1: usize, e2: usize) -> f64 {
        self.metric_of(self.distance(e1, e2))
    }

    fn metric_of(&self, d2: f64) -> f64 {
        let snr = 10f64.powf(self.es_n0_db / 10.0);
        // |x − u|² = d²·2Eb = d²·2Es/m
        -d2 * 2.0 * snr / (self.bits as f64 * 4.0 * LN_2)
    }
}

/// Minimum-distance completions on the product state space, iterated until
/// the largest change drops below `1e−9` or `depth` extensions are used.
fn boundary_distances(
    trellis: &Trellis,
    dist: &[f64],
    depth: usize,
    forward: bool,
) -> (Vec<f64>, usize, bool) {
    let ns = trellis.num_states();
    let ne = trellis.num_edges();
    // edges grouped by the state they attach to on the relevant side
    let mut attach: Vec<Vec<usize>> = vec![Vec::new(); ns];
    for (e, edge) in trellis.edges().iter().enumerate() {
        attach[if forward { edge.start } else { edge.end }].push(e);
    }
    let far = |e: usize| {
        let edge = trellis.edge(e);
        if forward {
            edge.end
        } else {
            edge.start
        }
    };
    let mut d = vec![f64::INFINITY; ns * ns];
    for s in 0..ns {
        d[s * ns + s] = 0.0;
    }
    for it in 1..=depth {
        let next: Vec<f64> = (0..ns * ns)
            .into_par_iter()
            .map(|k| {
                let (s1, s2) = (k / ns, k % ns);
                if s1 == s2 {
                    return 0.0;
                }
                let mut best = d[k];
                for &e1 in &attach[s1] {
                    for &e2 in &attach[s2] {
                        let v = dist[e1 * ne + e2] + d[far(e1) * ns + far(e2)];
                        if v < best {
                            best = v;
                        }
                    }
                }
                best
            })
            .collect();
        let change = next
            .iter()
            .zip(&d)
            .map(|(a, b)| {
                if a.is_finite() && b.is_finite() {
                    (a - b).abs()
                } else if a.is_finite() != b.is_finite() {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        d = next;
        if change < CONVERGENCE {
            return (d, it, true);
        }
    }
    (d, depth, false)
}

/// Builds the pair metric table by extending the trellis up to `probe_depth`
/// sections on each side of section zero.
pub fn pairwise_edge_metrics(trellis: &Trellis, es_n0_db: f64, probe_depth: usize) -> Result<PairMetricTable> {
    let s = trellis.scheme();
    let min_depth = s.pulse.length + s.p as usize;
    if probe_depth < min_depth {
        return Err(Error::InvalidInput(format!(
            "probe depth {probe_depth} is below L + P = {min_depth}"
        )));
    }
    let ne = trellis.num_edges();
    let ns = trellis.num_states();
    let dist = segment_distance_table(trellis);
    let (left, il, cl) = boundary_distances(trellis, &dist, probe_depth, false);
    let (right, ir, cr) = boundary_distances(trellis, &dist, probe_depth, true);
    if !(cl && cr) {
        warn!("pair metrics did not reach steady state within {probe_depth} extensions");
    }
    let mut d2 = vec![0.0; ne * ne];
    for e1 in 0..ne {
        let a = trellis.edge(e1);
        for e2 in 0..ne {
            if e1 == e2 {
                continue;
            }
            let b = trellis.edge(e2);
            d2[e1 * ne + e2] = left[a.start * ns + b.start] + dist[e1 * ne + e2] + right[a.end * ns + b.end];
        }
    }
    Ok(PairMetricTable {
        num_edges: ne,
        es_n0_db,
        d2,
        converged: cl && cr,
        iterations: (il, ir),
        bits: s.m as usize,
    })
}

/// How to react when the exact clustering cannot be reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMode {
    /// Fail with the violated constraint.
    Strict,
    /// Skip violating merges and complete the partition heuristically.
    BestEffort,
}

/// A partition of the trellis edges into `M` labeled clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Sorted edge lists, ordered by smallest edge.
    pub clusters: Vec<Vec<usize>>,
    /// Label of each cluster.
    pub labels: Vec<u32>,
    /// Minimum inter-cluster distance `d²/(2Eb)`, `M × M` (empty for the
    /// closed-form construction).
    pub cluster_distance: Vec<f64>,
    pub kind: LabelingKind,
    /// Constraints that blocked a minimum-distance merge, if any.
    pub notes: Vec<String>,
}

impl Clustering {
    /// Per-edge labeling, checked right-resolving.
    pub fn labeling(&self, trellis: &Trellis) -> Result<Labeling> {
        let mut labels = vec![u32::MAX; trellis.num_edges()];
        for (c, edges) in self.clusters.iter().enumerate() {
            for &e in edges {
                labels[e] = self.labels[c];
            }
        }
        if labels.contains(&u32::MAX) {
            return Err(Error::InvalidInput("clustering does not cover every edge".into()));
        }
        Labeling::new(trellis, labels, self.kind)
    }

    /// The edge partition as a sorted set of sorted clusters.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut p = self.clusters.clone();
        p.sort();
        p
    }
}

/// Partition of edges induced by a labeling.
pub fn partition_of(labeling: &Labeling) -> Vec<Vec<usize>> {
    let mut p: Vec<Vec<usize>> = labeling.clusters().into_iter().filter(|c| !c.is_empty()).collect();
    p.sort();
    p
}

struct Bins {
    uf: UnionFind,
    /// start-state bitsets per root
    starts: Vec<Vec<u64>>,
}

impl Bins {
    fn new(trellis: &Trellis) -> Self {
        let words = trellis.num_states().div_ceil(64);
        let starts = trellis
            .edges()
            .iter()
            .map(|e| {
                let mut w = vec![0u64; words];
                w[e.start / 64] |= 1 << (e.start % 64);
                w
            })
            .collect();
        Bins {
            uf: UnionFind::new(trellis.num_edges()),
            starts,
        }
    }

    /// Merges the clusters of `a` and `b` unless that breaks a constraint.
    fn try_merge(&mut self, a: usize, b: usize, cap: usize) -> std::result::Result<bool, &'static str> {
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        if ra == rb {
            return Ok(false);
        }
        if self.starts[ra].iter().zip(&self.starts[rb]).any(|(x, y)| x & y != 0) {
            return Err("edges with the same starting state must lie in different clusters");
        }
        if self.uf.size_of(ra) + self.uf.size_of(rb) > cap {
            return Err("clusters must have equal size");
        }
        let root = self.uf.union(ra, rb);
        let other = if root == ra { rb } else { ra };
        let merged: Vec<u64> = self.starts[ra].iter().zip(&self.starts[rb]).map(|(x, y)| x | y).collect();
        self.starts[root] = merged;
        self.starts[other].clear();
        Ok(true)
    }
}

/// Distance-ordered tiers of unordered edge pairs with different start
/// states; within a tier pairs are in lexicographic `(e1, e2)` order.
fn ordered_pairs(trellis: &Trellis, table: &PairMetricTable) -> Vec<Vec<(usize, usize)>> {
    let ne = trellis.num_edges();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for e1 in 0..ne {
        for e2 in e1 + 1..ne {
            if trellis.edge(e1).start != trellis.edge(e2).start {
                pairs.push((table.distance(e1, e2), e1, e2));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut tiers: Vec<Vec<(f64, usize, usize)>> = Vec::new();
    for p in pairs {
        match tiers.last_mut() {
            Some(t) if p.0 - t.last().unwrap().0 <= TIER_TOLERANCE * (1.0 + p.0.abs()) => t.push(p),
            _ => tiers.push(vec![p]),
        }
    }
    tiers
        .into_iter()
        .map(|mut t| {
            t.sort_by_key(|&(_, a, b)| (a, b));
            t.into_iter().map(|(_, a, b)| (a, b)).collect()
        })
        .collect()
}

/// Greedy agglomerative clustering in descending metric order followed by a
/// Gray assignment of labels to clusters.
pub fn cluster_and_label(table: &PairMetricTable, trellis: &Trellis, mode: ClusterMode) -> Result<Clustering> {
    let m = trellis.alphabet_size();
    let ne = trellis.num_edges();
    if table.num_edges != ne {
        return Err(Error::LengthMismatch {
            expected: ne,
            actual: table.num_edges,
        });
    }
    let cap = ne / m;
    let mut bins = Bins::new(trellis);
    let mut notes = Vec::new();
    for (tier, pairs) in ordered_pairs(trellis, table).iter().enumerate() {
        for &(a, b) in pairs {
            if let Err(why) = bins.try_merge(a, b, cap) {
                if tier == 0 {
                    let msg = format!("minimum-distance pair ({a}, {b}) not clustered: {why}");
                    if mode == ClusterMode::Strict {
                        return Err(Error::Infeasible(msg));
                    }
                    if notes.len() < 16 {
                        notes.push(msg);
                    }
                }
            }
        }
    }
    let mut groups = bins.uf.groups();
    let complete = groups.len() == m && groups.iter().all(|g| g.len() == cap);
    let kind = if complete && notes.is_empty() {
        LabelingKind::OptimizedClustered
    } else {
        LabelingKind::ClusteredFallback
    };
    if !complete {
        let msg = format!(
            "greedy merging stopped at {} clusters instead of {m} of size {cap}",
            groups.len()
        );
        if mode == ClusterMode::Strict {
            return Err(Error::Infeasible(msg));
        }
        notes.push(msg);
        groups = complete_partition(trellis, table, groups, m);
    }
    let cluster_distance = inter_cluster_distances(table, &groups);
    let labels = gray_assignment(&cluster_distance, m, table);
    Ok(Clustering {
        clusters: groups,
        labels,
        cluster_distance,
        kind,
        notes,
    })
}

fn min_distance_between(table: &PairMetricTable, a: &[usize], b: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for &x in a {
        for &y in b {
            best = best.min(table.distance(x, y));
        }
    }
    best
}

/// Best-effort completion: seed `M` bins with the largest clusters, place the
/// remaining ones whole where they fit, dissolve the rest and hand out the
/// leftover edges state by state.
fn complete_partition(trellis: &Trellis, table: &PairMetricTable, mut groups: Vec<Vec<usize>>, m: usize) -> Vec<Vec<usize>> {
    let ns = trellis.num_states();
    let start = |e: usize| trellis.edge(e).start;
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut bins: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut has: Vec<Vec<bool>> = Vec::with_capacity(m);
    let mut rest = Vec::new();
    for g in groups {
        if bins.len() < m {
            let mut h = vec![false; ns];
            g.iter().for_each(|&e| h[start(e)] = true);
            bins.push(g);
            has.push(h);
        } else {
            rest.push(g);
        }
    }
    let mut loose = Vec::new();
    for g in rest {
        let fits: Vec<usize> = (0..m)
            .filter(|&b| bins[b].len() + g.len() <= ns && g.iter().all(|&e| !has[b][start(e)]))
            .collect();
        let target = fits
            .into_iter()
            .min_by(|&x, &y| min_distance_between(table, &bins[x], &g).total_cmp(&min_distance_between(table, &bins[y], &g)).then(x.cmp(&y)));
        match target {
            Some(b) => {
                g.iter().for_each(|&e| has[b][start(e)] = true);
                bins[b].extend(g);
            }
            None => loose.extend(g),
        }
    }
    loose.sort_unstable();
    for e in loose {
        let b = (0..m)
            .filter(|&b| !has[b][start(e)])
            .min_by(|&x, &y| min_distance_between(table, &bins[x], &[e]).total_cmp(&min_distance_between(table, &bins[y], &[e])).then(x.cmp(&y)))
            .expect("a bin lacking this start state always exists");
        has[b][start(e)] = true;
        bins[b].push(e);
    }
    for b in &mut bins {
        b.sort_unstable();
    }
    bins.sort_by_key(|b| b[0]);
    bins
}

fn inter_cluster_distances(table: &PairMetricTable, groups: &[Vec<usize>]) -> Vec<f64> {
    let k = groups.len();
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = min_distance_between(table, &groups[i], &groups[j]);
            out[i * k + j] = d;
            out[j * k + i] = d;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..n as u32).collect();
    fn rec(k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

/// Assigns labels to clusters minimizing `Σ Hamming · 2^metric` over cluster
/// pairs, so that the closest clusters differ in one bit.
fn gray_assignment(dist: &[f64], m: usize, table: &PairMetricTable) -> Vec<u32> {
    let mut best: Option<(f64, Vec<u32>)> = None;
    for perm in permutations(m) {
        let mut cost = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                let ham = (perm[i] ^ perm[j]).count_ones() as f64;
                cost += ham * 2f64.powf(table.metric_of(dist[i * m + j]));
            }
        }
        match &best {
            Some((c, _)) if cost >= *c * (1.0 - 1e-12) => {}
            _ => best = Some((cost, perm)),
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Outcome of checking the conditions under which the closed-form clusters
/// are optimal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub scheme: CpmScheme,
    pub min_distance: DiffSearchResult,
    /// `P` even (binary) or a multiple of `M`.
    pub p_condition: bool,
    /// Every minimum-distance sequence has length two.
    pub length_condition: bool,
    /// Every minimum-distance sequence ends in `±1` (checked for `M > 2`).
    pub tail_condition: bool,
    /// Human-readable failures.
    pub failures: Vec<String>,
}

impl ConditionReport {
    pub fn satisfied(&self) -> bool {
        self.p_condition && self.length_condition && self.tail_condition
    }
}

/// Default difference-sequence search depth for an alphabet size.
pub fn default_max_len(m: usize) -> usize {
    match m {
        2 => 8,
        4 => 6,
        _ => 4,
    }
}

/// Checks the conditions for the closed-form clusters.
pub fn check_conditions(scheme: &CpmScheme, max_len: usize) -> Result<ConditionReport> {
    let min_distance = min_distance_diff_sequences(scheme, max_len)?;
    let m = scheme.alphabet_size();
    let mut failures = Vec::new();
    let p_condition = scheme.p as usize % m == 0;
    if !p_condition {
        failures.push(if m == 2 {
            format!("P is even: P = {} is odd", scheme.p)
        } else {
            format!("P is a multiple of M: P = {}, M = {m}", scheme.p)
        });
    }
    let long: Vec<&DifferenceSequence> = min_distance.sequences.iter().filter(|b| b.len() != 2).collect();
    let length_condition = long.is_empty();
    if let Some(b) = long.first() {
        failures.push(format!("minimum-distance sequence {:?} does not have length two", b.0));
    }
    let tail_bad: Vec<&DifferenceSequence> = if m > 2 {
        min_distance
            .sequences
            .iter()
            .filter(|b| b.0.last().map(|x| x.abs()) != Some(1))
            .collect()
    } else {
        Vec::new()
    };
    let tail_condition = tail_bad.is_empty();
    if let Some(b) = tail_bad.first() {
        failures.push(format!("minimum-distance sequence {:?} does not end in ±1", b.0));
    }
    Ok(ConditionReport {
        scheme: *scheme,
        min_distance,
        p_condition,
        length_condition,
        tail_condition,
        failures,
    })
}

/// Closed-form clusters `T̃(i) = ∪_k V_((kM + i)Q mod P)` with Gray labels,
/// or the failed conditions.
pub fn analytic_clusters(trellis: &Trellis) -> Result<Clustering> {
    let scheme = trellis.scheme();
    let m = scheme.alphabet_size();
    let report = check_conditions(scheme, default_max_len(m))?;
    if !report.satisfied() {
        return Err(Error::ConditionsNotMet(report.failures.join("; ")));
    }
    Ok(analytic_partition(trellis))
}

/// The closed-form partition without checking the optimality conditions
/// (requires `P` to be a multiple of `M`).
pub fn analytic_partition(trellis: &Trellis) -> Clustering {
    let s = trellis.scheme();
    let m = s.alphabet_size() as u64;
    let p = s.p as u64;
    let mut clusters = Vec::with_capacity(m as usize);
    let mut labels = Vec::with_capacity(m as usize);
    for i in 0..m {
        let mut edges: Vec<usize> = (0..p / m)
            .flat_map(|k| vertex_set(trellis, (((k * m + i) * s.q as u64) % p) as u32))
            .collect();
        edges.sort_unstable();
        clusters.push(edges);
        labels.push(gray(i as u32));
    }
    Clustering {
        clusters,
        labels,
        cluster_distance: Vec::new(),
        kind: LabelingKind::OptimizedAnalytic,
        notes: Vec::new(),
    }
}
