use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Frequency pulse family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    /// Rectangular.
    Rec,
    /// Raised cosine.
    Rc,
}

impl fmt::Display for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseShape::Rec => "rec",
            PulseShape::Rc => "rc",
        })
    }
}

impl FromStr for PulseShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "rec" => Ok(PulseShape::Rec),
            "rc" => Ok(PulseShape::Rc),
            _ => Err(Error::InvalidInput(format!("unknown pulse {s:?} (expected rec or rc)"))),
        }
    }
}

/// A frequency pulse of a given family spanning `L` symbol periods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pulse {
    pub shape: PulseShape,
    /// Pulse length `L` in symbols.
    #[serde(rename = "l")]
    pub length: usize,
}

impl Pulse {
    pub fn new(shape: PulseShape, length: usize) -> Self {
        Pulse { shape, length }
    }

    pub fn rec(length: usize) -> Self {
        Pulse::new(PulseShape::Rec, length)
    }

    pub fn rc(length: usize) -> Self {
        Pulse::new(PulseShape::Rc, length)
    }
}

/// Frequency pulse `s(t)` for symbol period `symbol_period`.
///
/// Both shapes are normalized to unit area `1/2`, so the RC pulse is
/// `(1 − cos(2πt/LT))/(2LT)`.
pub fn frequency_pulse(pulse: &Pulse, t: f64, symbol_period: f64) -> f64 {
    let lt = pulse.length as f64 * symbol_period;
    if !(0.0..=lt).contains(&t) {
        return 0.0;
    }
    match pulse.shape {
        PulseShape::Rec => 1.0 / (2.0 * lt),
        PulseShape::Rc => (1.0 - (2.0 * PI * t / lt).cos()) / (2.0 * lt),
    }
}

/// Phase pulse `q(t)`, the running integral of the frequency pulse.
pub fn phase_pulse(pulse: &Pulse, t: f64, symbol_period: f64) -> f64 {
    let lt = pulse.length as f64 * symbol_period;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= lt {
        return 0.5;
    }
    match pulse.shape {
        PulseShape::Rec => t / (2.0 * lt),
        PulseShape::Rc => t / (2.0 * lt) - (2.0 * PI * t / lt).sin() / (4.0 * PI),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_pulse_values() {
        assert_eq!(frequency_pulse(&Pulse::rec(2), 1.0, 1.0), 0.25);
        assert!((frequency_pulse(&Pulse::rc(2), 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(frequency_pulse(&Pulse::rec(2), -0.1, 1.0), 0.0);
        assert_eq!(frequency_pulse(&Pulse::rc(2), -0.1, 1.0), 0.0);
        assert_eq!(frequency_pulse(&Pulse::rc(3), 3.5, 1.0), 0.0);
    }

    #[test]
    fn phase_pulse_endpoints() {
        for p in [Pulse::rec(1), Pulse::rec(3), Pulse::rc(2), Pulse::rc(4)] {
            assert_eq!(phase_pulse(&p, 0.0, 1.0), 0.0);
            assert_eq!(phase_pulse(&p, p.length as f64, 1.0), 0.5);
        }
        assert!((phase_pulse(&Pulse::rec(2), 1.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn phase_pulse_is_integral_of_frequency_pulse() {
        for p in [Pulse::rec(2), Pulse::rc(3)] {
            let n = 20_000;
            let lt = p.length as f64;
            let h = lt / n as f64;
            let mut acc = 0.0;
            for k in 0..n {
                let t = (k as f64 + 0.5) * h;
                acc += frequency_pulse(&p, t, 1.0) * h;
                if k % 997 == 0 {
                    let q = phase_pulse(&p, t + 0.5 * h, 1.0);
                    assert!((acc - q).abs() < 1e-6, "{p:?} {t} {acc} {q}");
                }
            }
            assert!((acc - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn phase_pulse_nondecreasing() {
        for p in [Pulse::rec(1), Pulse::rc(1), Pulse::rc(4)] {
            let mut prev = -1.0;
            for k in 0..=4000 {
                let t = -0.5 + k as f64 * (p.length as f64 + 1.0) / 4000.0;
                let q = phase_pulse(&p, t, 1.0);
                assert!(q >= prev - 1e-15);
                prev = q;
            }
        }
    }
}
