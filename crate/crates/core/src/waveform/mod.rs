//! Frequency/phase pulses, baseband CPM synthesis, power spectral density and
//! occupied bandwidth.
//!
//! The physical CPM phase is `ψ(t) = 2πh Σ a_n q(t − nT)` with symbols
//! `a_n ∈ {±1, ±3, …, ±(M−1)}`. Sampling instants are the midpoints of `Ns`
//! equal sub-intervals of each symbol period, `t = (n + (k + ½)/Ns)·T`.

mod psd;
mod pulse;

pub use psd::{bandwidth_at_fraction, estimate_psd, normalized_symbol_rate, PsdConfig, PsdEstimate};
pub use pulse::{frequency_pulse, phase_pulse, Pulse, PulseShape};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of samples per symbol used for trellis segments and simulation.
pub const DEFAULT_SAMPLES_PER_SYMBOL: usize = 8;

fn one() -> f64 {
    1.0
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// A CPM modulation: `m` bits per symbol, modulation index `h = Q/P` and a
/// frequency pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpmScheme {
    /// Bits per symbol; the alphabet size is `M = 2^m`.
    pub m: u32,
    /// Numerator of the modulation index.
    pub q: u32,
    /// Denominator of the modulation index (number of phase states).
    pub p: u32,
    pub pulse: Pulse,
    /// Symbol energy `Es`.
    #[serde(default = "one")]
    pub es: f64,
    /// Symbol period `T`.
    #[serde(default = "one")]
    pub t: f64,
}

impl CpmScheme {
    pub fn new(m: u32, q: u32, p: u32, pulse: Pulse) -> Result<Self> {
        let scheme = CpmScheme {
            m,
            q,
            p,
            pulse,
            es: 1.0,
            t: 1.0,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Shorthand for a scheme with `h = 1/P`.
    pub fn with_index_denominator(m: u32, p: u32, shape: PulseShape, length: usize) -> Result<Self> {
        Self::new(m, 1, p, Pulse::new(shape, length))
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > 8 {
            return Err(Error::InvalidScheme(format!("m = {} outside 1..=8", self.m)));
        }
        if self.q == 0 || self.p == 0 {
            return Err(Error::InvalidScheme("Q and P must be positive".into()));
        }
        if gcd(self.q as u64, self.p as u64) != 1 {
            return Err(Error::InvalidScheme(format!(
                "Q = {} and P = {} are not coprime",
                self.q, self.p
            )));
        }
        if self.pulse.length == 0 {
            return Err(Error::InvalidScheme("pulse length L must be at least 1".into()));
        }
        if !(self.es > 0.0 && self.t > 0.0) {
            return Err(Error::InvalidScheme("Es and T must be positive".into()));
        }
        Ok(())
    }

    /// Alphabet size `M = 2^m`.
    pub fn alphabet_size(&self) -> usize {
        1usize << self.m
    }

    /// Modulation index `h = Q/P`.
    pub fn h(&self) -> f64 {
        self.q as f64 / self.p as f64
    }

    pub fn pulse_length(&self) -> usize {
        self.pulse.length
    }

    /// Number of CPE states `P·M^(L−1)`.
    pub fn num_states(&self) -> usize {
        self.p as usize * self.alphabet_size().pow(self.pulse.length as u32 - 1)
    }

    /// Number of CPE trellis edges per section `P·M^L`.
    pub fn num_edges(&self) -> usize {
        self.num_states() * self.alphabet_size()
    }

    /// Symbol amplitude `sqrt(2Es/T)`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.es / self.t).sqrt()
    }

    /// Whether `a` is a valid antipodal symbol `±1, ±3, …, ±(M−1)`.
    pub fn is_symbol(&self, a: i32) -> bool {
        let m = self.alphabet_size() as i32;
        a % 2 != 0 && a.abs() <= m - 1
    }

    /// Maps a CPE input `U ∈ {0..M−1}` to the antipodal symbol `2U − (M−1)`.
    pub fn symbol_from_input(&self, u: usize) -> i32 {
        2 * u as i32 - (self.alphabet_size() as i32 - 1)
    }

    /// Inverse of [`symbol_from_input`](Self::symbol_from_input).
    pub fn input_from_symbol(&self, a: i32) -> usize {
        ((a + self.alphabet_size() as i32 - 1) / 2) as usize
    }

    /// Compact identifier, e.g. `m2-h1/5-L2-rec`.
    pub fn tag(&self) -> String {
        format!("m{}-h{}/{}-L{}-{}", self.m, self.q, self.p, self.pulse.length, self.pulse.shape)
    }
}

impl fmt::Display for CpmScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} h={}/{} L={} {}",
            self.m,
            self.q,
            self.p,
            self.pulse.length,
            self.pulse.shape.to_string().to_uppercase()
        )
    }
}

/// Modulation index parsed from a literal fraction `"Q/P"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModIndex {
    pub q: u32,
    pub p: u32,
}

impl FromStr for ModIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (q, p) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("modulation index {s:?} is not of the form Q/P")))?;
        let q: u32 = q
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let p: u32 = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if q == 0 || p == 0 || gcd(q as u64, p as u64) != 1 {
            return Err(Error::InvalidInput(format!("{s:?} is not a reduced positive fraction")));
        }
        Ok(ModIndex { q, p })
    }
}

/// Sampled complex baseband signal.
#[derive(Clone, Debug)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub samples_per_symbol: usize,
    /// Number of symbol periods covered.
    pub span: usize,
}

impl BasebandSignal {
    /// Time of sample `k` in units of `T`.
    pub fn time_of(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.samples_per_symbol as f64
    }

    /// Per-sample phase (principal value).
    pub fn phases(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.arg()).collect()
    }
}

/// Phase `ψ(t)` of the physical CPM signal for symbols starting at time 0.
pub fn cpm_phase(scheme: &CpmScheme, symbols: &[i32], t: f64) -> f64 {
    let two_pi_h = 2.0 * PI * scheme.h();
    symbols
        .iter()
        .enumerate()
        .map(|(n, &a)| a as f64 * phase_pulse(&scheme.pulse, t - n as f64 * scheme.t, scheme.t))
        .sum::<f64>()
        * two_pi_h
}

/// Synthesizes `sqrt(2Es/T)·exp(jψ(t))` at `ns` samples per symbol.
///
/// The first symbol starts at `t = 0` with zero phase; there is no pre-history.
pub fn modulate(scheme: &CpmScheme, symbols: &[i32], ns: usize) -> Result<BasebandSignal> {
    scheme.validate()?;
    if ns == 0 {
        return Err(Error::InvalidInput("samples per symbol must be positive".into()));
    }
    if let Some(&bad) = symbols.iter().find(|&&a| !scheme.is_symbol(a)) {
        return Err(Error::InvalidInput(format!(
            "symbol {bad} not in the alphabet of M = {}",
            scheme.alphabet_size()
        )));
    }
    let l = scheme.pulse.length;
    let t = scheme.t;
    let two_pi_h = 2.0 * PI * scheme.h();
    let amp = scheme.amplitude();
    // q(τ + iT) for the L pulse slices at each sub-sample instant.
    let q_table: Vec<f64> = (0..l * ns)
        .map(|j| {
            let tau = (j as f64 + 0.5) / ns as f64 * t;
            phase_pulse(&scheme.pulse, tau, t)
        })
        .collect();
    let mut samples = Vec::with_capacity(symbols.len() * ns);
    // accumulated phase of symbols whose pulse has fully elapsed, kept mod 2π
    let mut settled = 0.0f64;
    for n in 0..symbols.len() {
        if n >= l {
            settled = (settled + PI * scheme.h() * symbols[n - l] as f64).rem_euclid(2.0 * PI);
        }
        for k in 0..ns {
            let mut phase = settled;
            for i in 0..l.min(n + 1) {
                phase += two_pi_h * symbols[n - i] as f64 * q_table[i * ns + k];
            }
            samples.push(Complex64::from_polar(amp, phase));
        }
    }
    Ok(BasebandSignal {
        samples,
        samples_per_symbol: ns,
        span: symbols.len(),
    })
}

/// Phase tilt `πh(M−1)t/T` that maps the physical phase onto the
/// time-invariant (tilted) representation.
pub fn tilt_phase(scheme: &CpmScheme, t: f64) -> f64 {
    PI * scheme.h() * (scheme.alphabet_size() as f64 - 1.0) * t / scheme.t
}

/// Rotates a physical signal into the tilted-phase representation.
pub fn tilt(scheme: &CpmScheme, signal: &BasebandSignal) -> BasebandSignal {
    let samples = signal
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| s * Complex64::from_polar(1.0, tilt_phase(scheme, signal.time_of(k) * scheme.t)))
        .collect();
    BasebandSignal {
        samples,
        samples_per_symbol: signal.samples_per_symbol,
        span: signal.span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn msk() -> CpmScheme {
        CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap()
    }

    #[test]
    fn msk_phase_advances_quarter_turn_per_symbol() {
        let s = msk();
        let sig = modulate(&s, &[1; 8], 8).unwrap();
        for n in 0..7 {
            let d = (sig.samples[(n + 1) * 8] / sig.samples[n * 8]).arg();
            assert!((d - PI / 2.0).abs() < 1e-12, "step {n}: {d}");
        }
    }

    #[test]
    fn single_negative_symbol_lowers_phase() {
        let s = msk();
        let d = cpm_phase(&s, &[-1], 1.0) - cpm_phase(&s, &[-1], 0.0);
        assert!((d + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_envelope() {
        let s = CpmScheme::new(2, 1, 5, Pulse::rc(2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let syms: Vec<i32> = (0..1000).map(|_| s.symbol_from_input(rng.gen_range(0..4))).collect();
        let sig = modulate(&s, &syms, 8).unwrap();
        let amp = s.amplitude();
        let worst = sig.samples.iter().map(|x| (x.norm() - amp).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn modulate_matches_phase_formula() {
        let s = CpmScheme::new(2, 1, 4, Pulse::rc(3)).unwrap();
        let syms = [3, -1, 1, -3, -3, 1, 3];
        let sig = modulate(&s, &syms, 4).unwrap();
        for (k, x) in sig.samples.iter().enumerate() {
            let want = Complex64::from_polar(s.amplitude(), cpm_phase(&s, &syms, sig.time_of(k)));
            assert!((x - want).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_symbols_outside_alphabet() {
        let s = msk();
        assert!(modulate(&s, &[1, 3], 8).is_err());
        assert!(modulate(&s, &[0], 8).is_err());
    }

    #[test]
    fn parses_index_fraction() {
        assert_eq!("1/5".parse::<ModIndex>().unwrap(), ModIndex { q: 1, p: 5 });
        assert!("2/4".parse::<ModIndex>().is_err());
        assert!("0.25".parse::<ModIndex>().is_err());
    }

    #[test]
    fn scheme_rejects_non_coprime_index() {
        assert!(CpmScheme::new(1, 2, 4, Pulse::rec(1)).is_err());
        assert_eq!(CpmScheme::new(2, 1, 5, Pulse::rec(2)).unwrap().num_states(), 20);
    }

    use rand::SeedableRng;
}
