use std::fmt;

use log::info;
use serde::{Deserialize, Serialize};

use super::{enumerate_schemes, evaluate_candidates, grid, select_best_per_snr, Criterion, EvalConfig, SchemeCandidate, SearchBounds};
use crate::codec::{approximate_ratio, CodedSchemeConfig, Mode};
use crate::trellis::LabelingKind;
use crate::waveform::{CpmScheme, PulseShape};
use crate::{Error, Result};

/// Largest `N_I` tried when approximating the outer puncturing ratio.
pub const DESIGN_MAX_DENOMINATOR: u64 = 128;
/// Selections further than this fraction from the target are rejected.
const MAX_RELATIVE_MISS: f64 = 0.10;

/// Outcome of a coded-scheme design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub mode: Mode,
    /// Target spectral efficiency `C_T` in bits/s/Hz.
    pub target: f64,
    pub scheme: CpmScheme,
    pub complexity: f64,
    /// Rounded to two decimals.
    pub rs: f64,
    /// `R_b = m·Rs`.
    pub r_b: f64,
    /// `C` at the selected power point.
    pub c: f64,
    pub pt_n0_db: f64,
    pub es_n0_db: f64,
    pub eb_n0_db: f64,
    /// Required code rate `C_T/R_b`.
    pub code_rate: f64,
    pub n_o: Option<u64>,
    pub n_i: Option<u64>,
    pub r_sccc: Option<f64>,
    pub labeling: LabelingKind,
}

impl DesignResult {
    /// Transceiver configuration for frames of `info_bits` bits.
    pub fn config(&self, info_bits: usize) -> CodedSchemeConfig {
        match self.mode {
            Mode::ScCpm => CodedSchemeConfig::sc_cpm(
                self.scheme,
                self.n_o.unwrap_or(1) as usize,
                self.n_i.unwrap_or(1) as usize,
                info_bits,
            ),
            Mode::PCpm => CodedSchemeConfig {
                labeling: self.labeling,
                ..CodedSchemeConfig::p_cpm(self.scheme, self.r_sccc.unwrap_or(self.code_rate), info_bits)
            },
        }
    }
}

impl fmt::Display for DesignResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} C_T={}: {} Rs={:.2} R_b={:.2} C={:.2} at P_T/N0={:.2} dB",
            self.mode, self.target, self.scheme, self.rs, self.r_b, self.c, self.pt_n0_db
        )?;
        match (self.n_o, self.n_i, self.r_sccc) {
            (Some(o), Some(i), _) => write!(f, " N_O/N_I={o}/{i}"),
            (_, _, Some(r)) => write!(f, " R_SCCC={r:.3}"),
            _ => Ok(()),
        }
    }
}

fn criterion_for(mode: Mode) -> Criterion {
    match mode {
        Mode::ScCpm => Criterion::Joint,
        Mode::PCpm => Criterion::Pragmatic,
    }
}

/// Design from candidates already evaluated under the mode's criterion.
///
/// The envelope of the best `C` is tabulated on a `P_T/N0` grid of step
/// `pt_step`, and the row whose `C` is closest to `C_T` fixes the scheme.
pub fn design_from_candidates(mode: Mode, target: f64, cands: &[SchemeCandidate], pt_step: f64) -> Result<DesignResult> {
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!("target capacity {target} must be positive")));
    }
    let want = criterion_for(mode);
    if cands.is_empty() {
        return Err(Error::Design("no candidate schemes".into()));
    }
    if let Some(c) = cands.iter().find(|c| c.criterion != Some(want) || c.rs.is_none()) {
        return Err(Error::InvalidInput(format!("{} was not evaluated under the {want} criterion", c.scheme)));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in cands {
        let shift = 10.0 * c.rs_rounded().unwrap().log10();
        if let (Some(a), Some(b)) = (c.curve.first(), c.curve.last()) {
            lo = lo.min(a.es_n0_db + shift);
            hi = hi.max(b.es_n0_db + shift);
        }
    }
    if !lo.is_finite() {
        return Err(Error::Design("no capacity curves".into()));
    }
    let pts = grid((lo / pt_step).floor() * pt_step, (hi / pt_step).ceil() * pt_step, pt_step)?;
    let table = select_best_per_snr(cands, &pts);
    let best = table
        .iter()
        .min_by(|a, b| (a.c - target).abs().total_cmp(&(b.c - target).abs()))
        .ok_or_else(|| Error::Design("empty selection table".into()))?;
    if (best.c - target).abs() > MAX_RELATIVE_MISS * target {
        return Err(Error::Design(format!(
            "closest capacity {:.3} is more than {:.0}% away from the target {target}",
            best.c,
            MAX_RELATIVE_MISS * 100.0
        )));
    }
    let winner = &cands[best.index];
    let rs = best.rs;
    let r_b = winner.scheme.m as f64 * rs;
    let code_rate = target / r_b;
    let (n_o, n_i, r_sccc) = match mode {
        Mode::ScCpm => {
            let (o, i) = approximate_ratio(2.0 * target / r_b, DESIGN_MAX_DENOMINATOR)?;
            if !(i <= o && o <= 2 * i) {
                return Err(Error::Design(format!(
                    "outer rate {code_rate:.3} needs N_O/N_I = {o}/{i} outside [1, 2]"
                )));
            }
            (Some(o), Some(i), None)
        }
        Mode::PCpm => {
            if !(code_rate < 4.0 / 3.0) {
                return Err(Error::Design(format!("R_SCCC = {code_rate:.3} is not achievable")));
            }
            (None, None, Some(code_rate))
        }
    };
    let result = DesignResult {
        mode,
        target,
        scheme: winner.scheme,
        complexity: winner.complexity,
        rs,
        r_b,
        c: best.c,
        pt_n0_db: best.pt_n0_db,
        es_n0_db: best.es_n0_db,
        eb_n0_db: best.eb_n0_db,
        code_rate,
        n_o,
        n_i,
        r_sccc,
        labeling: match mode {
            Mode::ScCpm => LabelingKind::RimoldiNatural,
            Mode::PCpm => winner.labeling.unwrap_or(LabelingKind::OptimizedAnalytic),
        },
    };
    info!("{result}");
    Ok(result)
}

/// Full design: enumerate under `budget`, evaluate under the mode's capacity
/// criterion with the curves refined around `target`, and select.
pub fn design_coded_scheme(
    mode: Mode,
    target: f64,
    shape: PulseShape,
    budget: f64,
    bounds: &SearchBounds,
    eval: &EvalConfig,
) -> Result<DesignResult> {
    let mut cands = enumerate_schemes(budget, shape, bounds);
    if cands.is_empty() {
        return Err(Error::Design(format!("no scheme fits the complexity budget {budget}")));
    }
    let mut cfg = eval.clone();
    if !cfg.refine_targets.contains(&target) {
        cfg.refine_targets.push(target);
    }
    evaluate_candidates(&mut cands, criterion_for(mode), &cfg)?;
    design_from_candidates(mode, target, &cands, cfg.refine_step)
}
