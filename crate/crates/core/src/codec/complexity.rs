use std::fmt;

use serde::{Deserialize, Serialize};

use super::transceiver::{CodedSchemeConfig, Mode};
use crate::waveform::CpmScheme;
use crate::{Error, Result};

/// Decoder sizes entering the complexity count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderSizes {
    /// Decoding iterations `N_it`.
    pub iterations: usize,
    /// States of the outer code `N_so`.
    pub outer_states: usize,
    /// States of the SCCC inner code `N_si`.
    pub inner_states: usize,
}

impl Default for DecoderSizes {
    fn default() -> Self {
        DecoderSizes {
            iterations: 10,
            outer_states: 4,
            inner_states: 4,
        }
    }
}

/// Trellis edges visited per information bit by the two receivers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub y_sccc: f64,
    /// CPE edges per information bit in the P-CPM receiver.
    pub y_cpm_p: f64,
    pub y_p_cpm: f64,
    /// CPE edges per information bit in the SC-CPM receiver.
    pub y_cpm_sc: f64,
    pub y_sc_cpm: f64,
    pub ratio: f64,
    pub sizes: DecoderSizes,
}

/// `Y_CPM = M·N_s·(N_o/K_o)/m` for a code of rate `K_o/N_o`.
pub fn y_cpm(scheme: &CpmScheme, code_rate: f64) -> f64 {
    let m = scheme.alphabet_size() as f64;
    let ns = scheme.num_states() as f64;
    m * ns / (scheme.m as f64 * code_rate)
}

/// `Y_SCCC = 2N_it(N_so + (3/2)N_si)` for the rate-2/3 outer SCCC code.
pub fn y_sccc(sizes: &DecoderSizes) -> f64 {
    2.0 * sizes.iterations as f64 * (sizes.outer_states as f64 + 1.5 * sizes.inner_states as f64)
}

/// `Y_SC-CPM = N_it(2N_so + Y_CPM)`.
pub fn y_sc_cpm(sizes: &DecoderSizes, y_cpm: f64) -> f64 {
    sizes.iterations as f64 * (2.0 * sizes.outer_states as f64 + y_cpm)
}

/// Complexity of a P-CPM / SC-CPM pair designed for the same target.
pub fn complexity_report(p: &CodedSchemeConfig, sc: &CodedSchemeConfig, sizes: &DecoderSizes) -> Result<ComplexityReport> {
    if p.mode != Mode::PCpm || sc.mode != Mode::ScCpm {
        return Err(Error::InvalidInput("expected one P-CPM and one SC-CPM configuration".into()));
    }
    p.validate()?;
    sc.validate()?;
    let y_sccc = y_sccc(sizes);
    let y_cpm_p = y_cpm(&p.scheme, p.code_rate());
    let y_cpm_sc = y_cpm(&sc.scheme, sc.code_rate());
    let y_p_cpm = y_sccc + y_cpm_p;
    let y_sc_cpm = y_sc_cpm(sizes, y_cpm_sc);
    Ok(ComplexityReport {
        y_sccc,
        y_cpm_p,
        y_p_cpm,
        y_cpm_sc,
        y_sc_cpm,
        ratio: y_sc_cpm / y_p_cpm,
        sizes: *sizes,
    })
}

impl ComplexityReport {
    /// `(Y_SCCC, Y_CPM, Y_P-CPM, Y_SC-CPM)` rounded to integers and the ratio
    /// to two decimals.
    pub fn rounded(&self) -> (u64, u64, u64, u64, f64) {
        (
            self.y_sccc.round() as u64,
            self.y_cpm_p.round() as u64,
            self.y_p_cpm.round() as u64,
            self.y_sc_cpm.round() as u64,
            (self.ratio * 100.0).round() / 100.0,
        )
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c, d, r) = self.rounded();
        write!(f, "Y_SCCC={a} Y_CPM={b} Y_P-CPM={c} Y_SC-CPM={d} R_Y={r:.2}")
    }
}
