use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use super::transceiver::{FrameRecord, Transceiver};
use crate::{Error, Result};

/// Stopping rules for error-rate measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// Stop once this many frame errors have been seen.
    pub target_frame_errors: usize,
    /// Hard cap on simulated frames.
    pub max_frames: usize,
    /// Frames simulated in parallel between stopping checks.
    pub batch: usize,
    pub seed: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            target_frame_errors: 200,
            max_frames: 2000,
            batch: 32,
            seed: 1,
        }
    }
}

/// Error rates at one bit SNR; the interval is the 95% Clopper-Pearson
/// interval on the frame error rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatePoint {
    pub eb_n0_db: f64,
    pub ber: f64,
    pub fer: f64,
    pub frames: usize,
    pub bit_errors: usize,
    pub frame_errors: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Exact binomial confidence interval for `k` successes in `n` trials.
/// Beta quantile by bisection on the cdf; statrs' own inverse is only good
/// to a few parts in 10⁶.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let Ok(dist) = Beta::new(a, b) else {
        return p;
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn clopper_pearson(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        beta_quantile(kf, nf - kf + 1.0, alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        beta_quantile(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Simulates batches of frames until the frame-error target or the frame cap
/// is reached. Batches are fixed-size, so the result does not depend on the
/// number of worker threads.
pub fn measure_point(tx: &Transceiver, eb_n0_db: f64, cfg: &HarnessConfig) -> Result<ErrorRatePoint> {
    if cfg.batch == 0 || cfg.max_frames == 0 {
        return Err(Error::InvalidInput("batch and frame cap must be positive".into()));
    }
    let k = tx.config().info_bits;
    let (mut frames, mut bit_errors, mut frame_errors) = (0, 0, 0);
    while frames < cfg.max_frames && frame_errors < cfg.target_frame_errors {
        let count = cfg.batch.min(cfg.max_frames - frames);
        for f in tx.run_frames(eb_n0_db, cfg.seed, frames, count)? {
            bit_errors += f.bit_errors;
            frame_errors += (f.bit_errors > 0) as usize;
        }
        frames += count;
    }
    let (ci_low, ci_high) = clopper_pearson(frame_errors, frames, 0.95);
    Ok(ErrorRatePoint {
        eb_n0_db,
        ber: bit_errors as f64 / (frames * k) as f64,
        fer: frame_errors as f64 / frames as f64,
        frames,
        bit_errors,
        frame_errors,
        ci_low,
        ci_high,
    })
}

/// Error rates over a grid; point `i` uses seed `derive_seed(seed, i)`.
pub fn measure_curve(tx: &Transceiver, grid: &[f64], cfg: &HarnessConfig) -> Result<Vec<ErrorRatePoint>> {
    grid.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = HarnessConfig {
                seed: crate::rng::derive_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            measure_point(tx, x, &c)
        })
        .collect()
}

/// Writes error-rate points as CSV.
pub fn write_error_csv<W: Write>(points: &[ErrorRatePoint], mut w: W) -> Result<()> {
    writeln!(w, "eb_n0_db,ber,fer,frames,bit_errors,frame_errors,ci_low,ci_high")?;
    for p in points {
        writeln!(
            w,
            "{},{:e},{:e},{},{},{},{:e},{:e}",
            p.eb_n0_db, p.ber, p.fer, p.frames, p.bit_errors, p.frame_errors, p.ci_low, p.ci_high
        )?;
    }
    Ok(())
}

/// Mutual information between information bits and decoder soft outputs,
/// `1 − E[log₂(1 + 2^(−s·λ))]` with `s = ±1` the sign of the true bit,
/// floored at zero.
pub fn info_rate_estimate(llrs: &[f64], bits: &[u8]) -> Result<f64> {
    if llrs.len() != bits.len() {
        return Err(Error::LengthMismatch {
            expected: bits.len(),
            actual: llrs.len(),
        });
    }
    if llrs.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let loss: f64 = llrs
        .iter()
        .zip(bits)
        .map(|(&l, &b)| {
            let x = if b == 1 { l } else { -l };
            // log₂(1 + 2^(−x)) computed stably
            if x > 0.0 {
                (-x * std::f64::consts::LN_2).exp().ln_1p() / std::f64::consts::LN_2
            } else {
                -x + (x * std::f64::consts::LN_2).exp().ln_1p() / std::f64::consts::LN_2
            }
        })
        .sum();
    Ok((1.0 - loss / llrs.len() as f64).clamp(0.0, 1.0))
}

/// Information rate of the decoder output over a set of frames.
pub fn frames_info_rate(frames: &[FrameRecord]) -> Result<f64> {
    let llrs: Vec<f64> = frames.iter().flat_map(|f| f.info_llr.iter().copied()).collect();
    let bits: Vec<u8> = frames.iter().flat_map(|f| f.info.iter().copied()).collect();
    info_rate_estimate(&llrs, &bits)
}
