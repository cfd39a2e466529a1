use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{modulate, tilt, CpmScheme};
use crate::{Error, Result};

/// Averaged-periodogram settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdConfig {
    pub num_symbols: usize,
    /// Samples per symbol.
    pub ns: usize,
    /// Segment length in symbols.
    pub segment_symbols: usize,
    pub seed: u64,
    /// Estimate the spectrum of the tilted-phase signal instead of the physical one.
    pub tilted: bool,
}

impl Default for PsdConfig {
    fn default() -> Self {
        PsdConfig {
            num_symbols: 100_000,
            ns: 16,
            segment_symbols: 256,
            seed: 1,
            tilted: false,
        }
    }
}

/// Two-sided power spectral density on a uniform grid (cycles per symbol).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freq: Vec<f64>,
    pub density: Vec<f64>,
    pub total_power: f64,
}

impl PsdEstimate {
    /// Grid spacing in cycles per symbol.
    pub fn resolution(&self) -> f64 {
        if self.freq.len() < 2 {
            return 0.0;
        }
        self.freq[1] - self.freq[0]
    }

    /// Power-weighted mean frequency.
    pub fn centroid(&self) -> f64 {
        let s: f64 = self.density.iter().sum();
        self.freq.iter().zip(&self.density).map(|(f, d)| f * d).sum::<f64>() / s
    }

    /// Power inside `[lo, hi]`, treating each bin as flat over its width.
    pub fn power_between(&self, lo: f64, hi: f64) -> f64 {
        let df = self.resolution();
        self.freq
            .iter()
            .zip(&self.density)
            .map(|(&f, &d)| {
                let a = (f - 0.5 * df).max(lo);
                let b = (f + 0.5 * df).min(hi);
                if b > a {
                    d * (b - a)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Writes `freq_cycles_per_symbol,density` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "freq_cycles_per_symbol,density")?;
        for (f, d) in self.freq.iter().zip(&self.density) {
            writeln!(w, "{f},{d}")?;
        }
        Ok(())
    }
}

/// Welch estimate (Hann window, 50% overlap) of the PSD for i.i.d. uniform symbols.
///
/// The density is scaled so that `Σ density·df` equals the mean signal power.
pub fn estimate_psd(scheme: &CpmScheme, config: &PsdConfig) -> Result<PsdEstimate> {
    scheme.validate()?;
    if config.ns == 0 || config.segment_symbols == 0 {
        return Err(Error::InvalidInput("samples per symbol and segment length must be positive".into()));
    }
    if config.num_symbols < config.segment_symbols {
        return Err(Error::InvalidInput(format!(
            "need at least {} symbols for one segment, got {}",
            config.segment_symbols, config.num_symbols
        )));
    }
    let mut rng = crate::rng::stream(config.seed, 0);
    let m = scheme.alphabet_size();
    let symbols: Vec<i32> = (0..config.num_symbols)
        .map(|_| scheme.symbol_from_input(rng.gen_range(0..m)))
        .collect();
    let mut signal = modulate(scheme, &symbols, config.ns)?;
    if config.tilted {
        signal = tilt(scheme, &signal);
    }
    let x = &signal.samples;
    let n = config.segment_symbols * config.ns;
    let step = n / 2;
    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut acc = vec![0.0f64; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut segments = 0usize;
    let mut start = 0;
    while start + n <= x.len() {
        for k in 0..n {
            buf[k] = x[start + k] * window[k];
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let fs = config.ns as f64 / scheme.t;
    let df = fs / n as f64;
    let scale = 1.0 / (segments as f64 * fs * w2);
    let half = n / 2;
    let mut freq = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        // fftshift: bin (i + half) mod n sits at (i − half)·df
        let k = (i + half) % n;
        freq.push((i as f64 - half as f64) * df * scheme.t);
        density.push(acc[k] * scale / scheme.t);
    }
    let total_power = density.iter().sum::<f64>() * df * scheme.t;
    Ok(PsdEstimate {
        freq,
        density,
        total_power,
    })
}

/// Width `B·T` of the smallest band centred on the PSD centroid holding at
/// least `fraction` of the total power.
pub fn bandwidth_at_fraction(psd: &PsdEstimate, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!("fraction {fraction} must lie in (0, 1)")));
    }
    if psd.freq.len() < 2 {
        return Err(Error::InvalidInput("PSD grid has fewer than two bins".into()));
    }
    let fc = psd.centroid();
    let total = psd.power_between(f64::NEG_INFINITY, f64::INFINITY);
    let target = fraction * total;
    let df = psd.resolution();
    let first = psd.freq[0] - 0.5 * df;
    let last = psd.freq[psd.freq.len() - 1] + 0.5 * df;
    let (mut lo, mut hi) = (0.0f64, (fc - first).max(last - fc));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if psd.power_between(fc - mid, fc + mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(2.0 * hi)
}

/// Normalized symbol rate `Rs = 1/(B·T)` at the given power fraction.
pub fn normalized_symbol_rate(scheme: &CpmScheme, fraction: f64, config: &PsdConfig) -> Result<f64> {
    let psd = estimate_psd(scheme, config)?;
    Ok(1.0 / bandwidth_at_fraction(&psd, fraction)?)
}
