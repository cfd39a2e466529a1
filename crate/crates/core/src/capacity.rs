//! Monte-Carlo estimators of the joint CPM capacity and of the pragmatic
//! (bit-wise) capacity, and the bits/symbol to bits/s/Hz normalization.
//!
//! The joint estimator runs the forward recursion from the known initial
//! state with a free end. Writing `T_n = max*_s α_n(s)`, the per-symbol term
//! `(T_n − T_{n−1}) − λ(x_n, y_n)` is the log-loss of the joint decoder on
//! symbol `n`, and `C = m − mean` of these terms.
//!
//! The pragmatic estimator runs a full forward/backward pass with uniform
//! priors and averages `1 − Hb(P(b = 1 | y))` over all label bits.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::siso::{bcjr, branch_metrics, forward_recursion, pinned, uniform, MaxStarMode};
use crate::trellis::{Labeling, LabelingKind, Trellis};
use crate::waveform::CpmScheme;
use crate::{Error, Result};

/// Monte-Carlo settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub block_symbols: usize,
    pub trials: usize,
    pub seed: u64,
    /// Boundary sections dropped from each end; `None` uses `L + P`.
    pub trim: Option<usize>,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            block_symbols: 10_000,
            trials: 10,
            seed: 1,
            trim: None,
        }
    }
}

impl CapacityConfig {
    fn trim_for(&self, scheme: &CpmScheme) -> usize {
        self.trim.unwrap_or(scheme.pulse.length + scheme.p as usize)
    }
}

/// Capacity estimate at one SNR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub es_n0_db: f64,
    pub bits_per_symbol: f64,
    pub std_error: f64,
    pub num_symbols: usize,
    pub num_trials: usize,
}

/// A capacity point expressed per unit bandwidth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint {
    pub eb_n0_db: f64,
    pub c_bits_per_s_per_hz: f64,
    pub rs: f64,
}

/// Noise variance per complex sample for unit symbol energy.
pub fn noise_variance(es: f64, es_n0_db: f64) -> f64 {
    es * 10f64.powf(-es_n0_db / 10.0)
}

/// Adds circular complex Gaussian noise of variance `n0` per sample.
pub fn add_noise<R: Rng>(rng: &mut R, samples: &mut [Complex64], n0: f64) {
    let sigma = (n0 / 2.0).sqrt();
    for s in samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(sigma * re, sigma * im);
    }
}

struct Trial {
    edges: Vec<usize>,
    metrics: crate::siso::MetricMatrix,
}

fn simulate(trellis: &Trellis, es_n0_db: f64, symbols: usize, seed: u64, trial: usize) -> Result<Trial> {
    let mut rng = crate::rng::stream(seed, trial as u64);
    let m = trellis.alphabet_size();
    let inputs: Vec<usize> = (0..symbols).map(|_| rng.gen_range(0..m)).collect();
    let edges = trellis.path(0, &inputs);
    let mut rx = trellis.path_waveform(&edges);
    let n0 = noise_variance(trellis.scheme().es, es_n0_db);
    add_noise(&mut rng, &mut rx, n0);
    let metrics = branch_metrics(trellis, &rx, n0)?;
    Ok(Trial { edges, metrics })
}

fn summarize(es_n0_db: f64, estimates: &[f64], symbols: usize) -> CapacityPoint {
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let std_error = if estimates.len() > 1 {
        let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    CapacityPoint {
        es_n0_db,
        bits_per_symbol: mean,
        std_error,
        num_symbols: symbols,
        num_trials: estimates.len(),
    }
}

fn check(cfg: &CapacityConfig, trim: usize, both_ends: bool) -> Result<()> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let used = if both_ends { 2 * trim } else { trim };
    if cfg.block_symbols <= used {
        return Err(Error::InvalidInput(format!(
            "block of {} symbols leaves nothing after trimming {used}",
            cfg.block_symbols
        )));
    }
    Ok(())
}

/// Joint CPM capacity in bits per symbol with uniform inputs.
pub fn cpm_capacity(trellis: &Trellis, es_n0_db: f64, cfg: &CapacityConfig) -> Result<CapacityPoint> {
    let scheme = trellis.scheme();
    let trim = cfg.trim_for(scheme);
    check(cfg, trim, false)?;
    let labeling = crate::trellis::rimoldi_labeling(trellis);
    let topo = trellis.topology(&labeling);
    let m = scheme.m as f64;
    let estimates = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let trial = simulate(trellis, es_n0_db, cfg.block_symbols, cfg.seed, t)?;
            let fwd = forward_recursion(&topo, Some(&trial.metrics), None, &pinned(topo.num_states, 0), MaxStarMode::Exact)?;
            let mut loss = 0.0;
            for n in trim..cfg.block_symbols {
                let lambda = trial.metrics.row(n)[trial.edges[n]];
                loss += fwd.log_sums[n + 1] - fwd.log_sums[n] - lambda;
            }
            Ok(m - loss / (cfg.block_symbols - trim) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(es_n0_db, &estimates, cfg.block_symbols))
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    h(p) + h(1.0 - p)
}

/// `Hb` of the probability implied by a base-2 LLR, evaluated stably.
pub fn entropy_of_llr(llr: f64) -> f64 {
    let a = llr.abs();
    if a > 1000.0 {
        return 0.0;
    }
    // p_small = 1/(1 + 2^a)
    let log_den = crate::siso::max_star(0.0, a);
    let p = (-log_den * std::f64::consts::LN_2).exp();
    p * log_den + (1.0 - p) * (log_den - a)
}

/// Pragmatic capacity `Σ_i I(B_i; Y)` in bits per symbol for a labeling.
pub fn pragmatic_capacity(
    trellis: &Trellis,
    labeling: &Labeling,
    es_n0_db: f64,
    cfg: &CapacityConfig,
) -> Result<CapacityPoint> {
    let scheme = trellis.scheme();
    let trim = cfg.trim_for(scheme);
    check(cfg, trim, true)?;
    let topo = trellis.topology(labeling);
    let bits = topo.bits;
    let estimates = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let trial = simulate(trellis, es_n0_db, cfg.block_symbols, cfg.seed, t)?;
            let r = bcjr(
                &topo,
                Some(&trial.metrics),
                None,
                &pinned(topo.num_states, 0),
                &uniform(topo.num_states),
                MaxStarMode::Exact,
            )?;
            let range = trim..cfg.block_symbols - trim;
            let count = range.len();
            let mut h = 0.0;
            for n in range {
                for i in 0..bits {
                    h += entropy_of_llr(r.llr[n * bits + i]);
                }
            }
            Ok(bits as f64 - h / count as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(es_n0_db, &estimates, cfg.block_symbols))
}

/// Converts bits/symbol to bits/s/Hz with `C = Rs·C_CPM` and
/// `Eb/N0 = (Es/N0)/C_CPM`.
pub fn normalize_point(point: &CapacityPoint, rs: f64) -> Result<NormalizedPoint> {
    if !(rs > 0.0) {
        return Err(Error::InvalidInput(format!("symbol rate {rs} must be positive")));
    }
    if !(point.bits_per_symbol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Eb/N0 undefined for non-positive capacity {}",
            point.bits_per_symbol
        )));
    }
    Ok(NormalizedPoint {
        eb_n0_db: point.es_n0_db - 10.0 * point.bits_per_symbol.log10(),
        c_bits_per_s_per_hz: rs * point.bits_per_symbol,
        rs,
    })
}

/// One grid point of a capacity curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub joint: CapacityPoint,
    pub pragmatic: Option<CapacityPoint>,
    pub normalized: Option<NormalizedPoint>,
}

/// Capacity estimates over an SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityCurve {
    pub scheme: CpmScheme,
    pub labeling: Option<LabelingKind>,
    pub rs: f64,
    pub config: CapacityConfig,
    pub points: Vec<CurvePoint>,
}

/// Evaluates the joint capacity (and the pragmatic one when a labeling is
/// given) at each `Es/N0` of `grid`, sorted by SNR. No smoothing is applied.
pub fn capacity_curve(
    trellis: &Trellis,
    labeling: Option<&Labeling>,
    grid: &[f64],
    rs: f64,
    cfg: &CapacityConfig,
) -> Result<CapacityCurve> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    for &snr in &grid {
        let joint = cpm_capacity(trellis, snr, cfg)?;
        let pragmatic = labeling
            .map(|l| pragmatic_capacity(trellis, l, snr, cfg))
            .transpose()?;
        let normalized = normalize_point(&joint, rs).ok();
        points.push(CurvePoint {
            joint,
            pragmatic,
            normalized,
        });
    }
    Ok(CapacityCurve {
        scheme: *trellis.scheme(),
        labeling: labeling.map(|l| l.kind()),
        rs,
        config: cfg.clone(),
        points,
    })
}

impl CapacityCurve {
    /// Writes `es_n0_db,eb_n0_db,c_bits_symbol,c_bits_s_hz,std_err` rows, with
    /// pragmatic columns appended when present.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let prag = self.points.iter().any(|p| p.pragmatic.is_some());
        write!(w, "es_n0_db,eb_n0_db,c_bits_symbol,c_bits_s_hz,std_err")?;
        if prag {
            write!(w, ",pragmatic_bits_symbol,pragmatic_std_err")?;
        }
        writeln!(w)?;
        for p in &self.points {
            let (eb, c) = match &p.normalized {
                Some(n) => (n.eb_n0_db.to_string(), n.c_bits_per_s_per_hz.to_string()),
                None => (String::new(), String::new()),
            };
            write!(
                w,
                "{},{},{},{},{}",
                p.joint.es_n0_db, eb, p.joint.bits_per_symbol, c, p.joint.std_error
            )?;
            if prag {
                match &p.pragmatic {
                    Some(q) => write!(w, ",{},{}", q.bits_per_symbol, q.std_error)?,
                    None => write!(w, ",,")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Es/N0 (dB) at which a piecewise-linear interpolation of `(snr, value)`
/// first reaches `target`.
pub fn crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if (y0 - target) * (y1 - target) <= 0.0 && y0 != y1 {
            Some(x0 + (target - y0) * (x1 - x0) / (y1 - y0))
        } else if y0 == target {
            Some(x0)
        } else {
            None
        }
    })
}
