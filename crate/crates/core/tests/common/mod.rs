//! Brute-force references shared by the integration tests. None of them go
//! through the library's recursions.

#![allow(dead_code)]

use num_complex::Complex64;
use pcpm::siso::Topology;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Index `p` of the vertex set holding an edge, decoded straight from the
/// edge number: edge `e = start·M + input`, state `β·M^(L−1) + Σ s_k M^(k−1)`,
/// and the edge lies in `V_p` with `p = (β + Q·(Σ s_k + input)) mod P`.
pub fn vertex_class(e: usize, m: usize, l: usize, q: u32, p: u32) -> u32 {
    let start = e / m;
    let input = e % m;
    let hist = m.pow(l as u32 - 1);
    let beta = start / hist;
    let mut rest = start % hist;
    let mut sum = input;
    while rest > 0 {
        sum += rest % m;
        rest /= m;
    }
    ((beta as u64 + q as u64 * sum as u64) % p as u64) as u32
}

/// The vertex sets `V_0, …, V_(P−1)` as sorted edge lists.
pub fn vertex_sets(num_edges: usize, m: usize, l: usize, q: u32, p: u32) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); p as usize];
    for e in 0..num_edges {
        sets[vertex_class(e, m, l, q, p) as usize].push(e);
    }
    sets
}

fn log2_sum(values: &[f64]) -> f64 {
    let mx = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + values.iter().map(|v| (v - mx).exp2()).sum::<f64>().log2()
}

/// Posterior label-bit LLRs (base 2, `log P(1)/P(0)`) by listing every path.
/// `metrics[n][e]` and `priors[n][i]` are in bits; `init_*` are log₂ weights
/// of the start and end states.
pub fn exhaustive_posteriors(
    topo: &Topology,
    metrics: &[Vec<f64>],
    priors: &[Vec<f64>],
    init_forward: &[f64],
    init_backward: &[f64],
) -> Vec<f64> {
    let sections = metrics.len();
    let bits = topo.bits;
    let mut ones: Vec<Vec<f64>> = vec![Vec::new(); sections * bits];
    let mut zeros: Vec<Vec<f64>> = vec![Vec::new(); sections * bits];
    let mut out_edges = vec![Vec::new(); topo.num_states];
    for e in 0..topo.num_edges() {
        out_edges[topo.starts[e]].push(e);
    }
    let mut path = Vec::with_capacity(sections);
    fn walk(
        topo: &Topology,
        out_edges: &[Vec<usize>],
        metrics: &[Vec<f64>],
        priors: &[Vec<f64>],
        init_backward: &[f64],
        state: usize,
        acc: f64,
        path: &mut Vec<usize>,
        ones: &mut [Vec<f64>],
        zeros: &mut [Vec<f64>],
    ) {
        let n = path.len();
        if n == metrics.len() {
            let total = acc + init_backward[state];
            if total == f64::NEG_INFINITY {
                return;
            }
            for (k, &e) in path.iter().enumerate() {
                for i in 0..topo.bits {
                    let bit = (topo.labels[e] >> (topo.bits - 1 - i)) & 1 == 1;
                    let slot = k * topo.bits + i;
                    if bit {
                        ones[slot].push(total);
                    } else {
                        zeros[slot].push(total);
                    }
                }
            }
            return;
        }
        for &e in &out_edges[state] {
            let mut g = metrics[n][e];
            for i in 0..topo.bits {
                if (topo.labels[e] >> (topo.bits - 1 - i)) & 1 == 1 {
                    g += priors[n][i];
                }
            }
            path.push(e);
            walk(
                topo,
                out_edges,
                metrics,
                priors,
                init_backward,
                topo.ends[e],
                acc + g,
                path,
                ones,
                zeros,
            );
            path.pop();
        }
    }
    for s in 0..topo.num_states {
        if init_forward[s] == f64::NEG_INFINITY {
            continue;
        }
        walk(
            topo,
            &out_edges,
            metrics,
            priors,
            init_backward,
            s,
            init_forward[s],
            &mut path,
            &mut ones,
            &mut zeros,
        );
    }
    (0..sections * bits).map(|k| log2_sum(&ones[k]) - log2_sum(&zeros[k])).collect()
}

/// Number of complete paths of `sections` sections from the states with
/// finite `init` weight.
pub fn count_paths(topo: &Topology, sections: usize, init: &[f64]) -> usize {
    let mut counts: Vec<usize> = init.iter().map(|&w| usize::from(w > f64::NEG_INFINITY)).collect();
    for _ in 0..sections {
        let mut next = vec![0usize; topo.num_states];
        for e in 0..topo.num_edges() {
            next[topo.ends[e]] += counts[topo.starts[e]];
        }
        counts = next;
    }
    counts.iter().sum()
}

/// Baseband MSK samples (binary, `h = 1/2`, rectangular pulse of one symbol)
/// with unit symbol energy, starting from phase zero.
pub fn msk_waveform(bits: &[u8], ns: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(bits.len() * ns);
    let mut theta = 0.0f64;
    for &b in bits {
        let a = if b == 1 { 1.0 } else { -1.0 };
        for k in 0..ns {
            let tau = (k as f64 + 0.5) / ns as f64;
            out.push(Complex64::from_polar(1.0, theta + std::f64::consts::FRAC_PI_2 * a * tau));
        }
        theta += std::f64::consts::FRAC_PI_2 * a;
    }
    out
}

/// `I(X^n; Y^n)` in bits for MSK blocks of `n` uniform symbols by listing all
/// `2^n` sequences, averaged over `blocks` noise realisations. Returns the
/// mean and its standard error.
pub fn msk_block_information(n: usize, es_n0_db: f64, blocks: usize, seed: u64) -> (f64, f64) {
    let ns = 4;
    let dt = 1.0 / ns as f64;
    let n0 = 10f64.powf(-es_n0_db / 10.0);
    // per complex sample, E|w|² = N0/dt for unit-amplitude samples
    let sigma = (n0 / dt / 2.0).sqrt();
    let all: Vec<Vec<Complex64>> = (0..1usize << n)
        .map(|x| {
            let bits: Vec<u8> = (0..n).map(|k| ((x >> k) & 1) as u8).collect();
            msk_waveform(&bits, ns)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(blocks);
    let mut ll = vec![0.0; all.len()];
    for _ in 0..blocks {
        let tx = rng.gen_range(0..all.len());
        let y: Vec<Complex64> = all[tx]
            .iter()
            .map(|s| {
                let wr: f64 = rng.sample(StandardNormal);
                let wi: f64 = rng.sample(StandardNormal);
                s + Complex64::new(sigma * wr, sigma * wi)
            })
            .collect();
        for (x, w) in all.iter().enumerate() {
            let d: f64 = y.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum();
            ll[x] = -d * dt / n0 * std::f64::consts::LOG2_E;
        }
        let lse = log2_sum(&ll);
        vals.push(n as f64 - (lse - ll[tx]));
    }
    let mean = vals.iter().sum::<f64>() / blocks as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (blocks as f64 - 1.0);
    (mean, (var / blocks as f64).sqrt())
}

/// MSK information rate per symbol from the growth of the block information
/// between `n1` and `n2` symbols, which cancels the edge effects of both ends.
pub fn msk_information_rate(n1: usize, n2: usize, es_n0_db: f64, blocks: usize, seed: u64) -> (f64, f64) {
    let (a, sa) = msk_block_information(n1, es_n0_db, blocks, seed);
    let (b, sb) = msk_block_information(n2, es_n0_db, blocks, seed ^ 0x5eed);
    let k = (n2 - n1) as f64;
    ((b - a) / k, (sa * sa + sb * sb).sqrt() / k)
}
