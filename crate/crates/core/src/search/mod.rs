//! Scheme selection under a complexity budget and coded-scheme design.
//!
//! Every CPM scheme with `Y = P·2^(mL)/m ≤ budget` is a candidate. Each gets
//! a normalized symbol rate `Rs` (99% power bandwidth) and a capacity curve in
//! bits/symbol versus `Es/N0`. Schemes are then compared at equal transmitted
//! power: at `P_T/N0` the symbol SNR is `Es/N0 = P_T/N0 − 10·log10(Rs)` dB and
//! the spectral efficiency is `C = Rs·C_CPM(Es/N0)` bits/s/Hz.
//!
//! SC-CPM designs rank schemes by the joint CPM capacity, P-CPM designs by the
//! pragmatic capacity under the optimized labeling.

mod design;
mod presets;
mod tables;

pub use design::{design_coded_scheme, design_from_candidates, DesignResult, DESIGN_MAX_DENOMINATOR};
pub use presets::{table7_row, table7_rows, DesignPreset};
pub use tables::{best_scheme_table, emit_tables, load_candidates, TableFormat, TableRow, COMPLEXITY_BUCKETS};

use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{cpm_capacity, pragmatic_capacity, CapacityConfig};
use crate::codec::labeling_for;
use crate::trellis::{cpm_complexity, optimized_cpe_labeling, Labeling, LabelingKind, Trellis};
use crate::waveform::{normalized_symbol_rate, CpmScheme, PsdConfig, Pulse, PulseShape};
use crate::{Error, Result};

/// Modulation index denominators of the default preset (`h = 1/P`).
pub const PRESET_P: [u32; 5] = [2, 4, 5, 6, 8];
/// Power fraction defining the bandwidth.
pub const POWER_FRACTION: f64 = 0.99;
/// Two schemes whose `C` differ by less than this are tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Which capacity ranks the schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Joint CPM capacity, for SC-CPM.
    Joint,
    /// Pragmatic capacity with the optimized labeling, for P-CPM.
    Pragmatic,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Joint => "joint",
            Criterion::Pragmatic => "pragmatic",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "joint" | "cpm" => Ok(Criterion::Joint),
            "pragmatic" => Ok(Criterion::Pragmatic),
            _ => Err(Error::InvalidInput(format!("unknown criterion {s:?} (expected joint or pragmatic)"))),
        }
    }
}

/// Parameter ranges of the enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_m: u32,
    pub max_l: usize,
    pub max_p: u32,
    /// Enumerate every `Q < P` coprime to `P` instead of the `h = 1/P` preset.
    pub all_q: bool,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_m: 3,
            max_l: 4,
            max_p: 16,
            all_q: false,
        }
    }
}

/// One capacity sample of a candidate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub es_n0_db: f64,
    pub bits_per_symbol: f64,
    pub std_error: f64,
}

/// A scheme under consideration, with its rate and curve once evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeCandidate {
    pub scheme: CpmScheme,
    pub complexity: f64,
    /// Normalized symbol rate `Rs = 1/(B·T)`.
    pub rs: Option<f64>,
    pub criterion: Option<Criterion>,
    /// Labeling behind a pragmatic curve.
    pub labeling: Option<LabelingKind>,
    /// Samples sorted by SNR.
    pub curve: Vec<CurveSample>,
}

impl SchemeCandidate {
    pub fn new(scheme: CpmScheme) -> Self {
        SchemeCandidate {
            complexity: cpm_complexity(&scheme).value(),
            scheme,
            rs: None,
            criterion: None,
            labeling: None,
            curve: Vec::new(),
        }
    }

    /// `Rs` rounded to two decimals, the precision all design arithmetic uses.
    pub fn rs_rounded(&self) -> Option<f64> {
        self.rs.map(round2)
    }

    /// Bits/symbol at `es_n0_db` by linear interpolation; `None` outside the
    /// sampled range.
    pub fn capacity_at(&self, es_n0_db: f64) -> Option<f64> {
        let c = &self.curve;
        if c.is_empty() || es_n0_db < c[0].es_n0_db || es_n0_db > c[c.len() - 1].es_n0_db {
            return None;
        }
        let i = c.partition_point(|s| s.es_n0_db < es_n0_db);
        if c[i].es_n0_db == es_n0_db || i == 0 {
            return Some(c[i].bits_per_symbol);
        }
        let (a, b) = (c[i - 1], c[i]);
        let t = (es_n0_db - a.es_n0_db) / (b.es_n0_db - a.es_n0_db);
        Some(a.bits_per_symbol + t * (b.bits_per_symbol - a.bits_per_symbol))
    }

    /// `Es/N0` in dB at transmitted power `P_T/N0`.
    pub fn es_at_power(&self, pt_n0_db: f64) -> Option<f64> {
        self.rs_rounded().map(|rs| pt_n0_db - 10.0 * rs.log10())
    }

    /// `C = Rs·C_CPM(P_T/(N0·Rs))` in bits/s/Hz.
    pub fn spectral_efficiency(&self, pt_n0_db: f64) -> Option<f64> {
        let rs = self.rs_rounded()?;
        Some(rs * self.capacity_at(self.es_at_power(pt_n0_db)?)?)
    }

    fn insert_samples(&mut self, samples: Vec<CurveSample>) {
        for s in samples {
            if !self.curve.iter().any(|c| (c.es_n0_db - s.es_n0_db).abs() < 1e-9) {
                self.curve.push(s);
            }
        }
        self.curve.sort_by(|a, b| a.es_n0_db.total_cmp(&b.es_n0_db));
    }
}

pub(crate) fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// All schemes with `Y ≤ budget`, ordered by `(Y, m, P, Q, L)`.
pub fn enumerate_schemes(budget: f64, shape: PulseShape, bounds: &SearchBounds) -> Vec<SchemeCandidate> {
    let mut out = Vec::new();
    let ps: Vec<u32> = if bounds.all_q {
        (2..=bounds.max_p).collect()
    } else {
        PRESET_P.iter().copied().filter(|&p| p <= bounds.max_p).collect()
    };
    for m in 1..=bounds.max_m {
        for l in 1..=bounds.max_l {
            for &p in &ps {
                let qs: Vec<u32> = if bounds.all_q {
                    (1..p).filter(|&q| gcd(q, p) == 1).collect()
                } else {
                    vec![1]
                };
                for q in qs {
                    let Ok(scheme) = CpmScheme::new(m, q, p, Pulse::new(shape, l)) else {
                        continue;
                    };
                    if cpm_complexity(&scheme).value() <= budget + 1e-9 {
                        out.push(SchemeCandidate::new(scheme));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.complexity
            .total_cmp(&b.complexity)
            .then(a.scheme.m.cmp(&b.scheme.m))
            .then(a.scheme.p.cmp(&b.scheme.p))
            .then(a.scheme.q.cmp(&b.scheme.q))
            .then(a.scheme.pulse.length.cmp(&b.scheme.pulse.length))
    });
    out.dedup_by(|a, b| a.scheme == b.scheme);
    out
}

/// The labeling a pragmatic search uses: the closed-form optimized CPE when
/// it exists, else strict clustering, else best-effort clustering.
pub fn pragmatic_labeling(trellis: &Trellis) -> Result<Labeling> {
    optimized_cpe_labeling(trellis)
        .or_else(|_| labeling_for(trellis, LabelingKind::OptimizedClustered))
        .or_else(|_| labeling_for(trellis, LabelingKind::ClusteredFallback))
}

/// Settings for [`evaluate_candidates`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub capacity: CapacityConfig,
    pub psd: PsdConfig,
    pub fraction: f64,
    /// Coarse `Es/N0` grid in dB.
    pub es_grid: Vec<f64>,
    /// Spectral efficiencies around whose crossing the curve is refined.
    pub refine_targets: Vec<f64>,
    pub refine_step: f64,
    pub refine_halfwidth: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            capacity: CapacityConfig::default(),
            psd: PsdConfig::default(),
            fraction: POWER_FRACTION,
            es_grid: (-5..=20).map(f64::from).collect(),
            refine_targets: Vec::new(),
            refine_step: 0.25,
            refine_halfwidth: 1.0,
        }
    }
}

fn sample(trellis: &Trellis, labeling: Option<&Labeling>, snr: f64, cfg: &CapacityConfig) -> Result<CurveSample> {
    let p = match labeling {
        Some(l) => pragmatic_capacity(trellis, l, snr, cfg)?,
        None => cpm_capacity(trellis, snr, cfg)?,
    };
    Ok(CurveSample {
        es_n0_db: snr,
        bits_per_symbol: p.bits_per_symbol,
        std_error: p.std_error,
    })
}

fn evaluate_one(cand: &mut SchemeCandidate, criterion: Criterion, cfg: &EvalConfig) -> Result<()> {
    if cand.rs.is_none() {
        cand.rs = Some(normalized_symbol_rate(&cand.scheme, cfg.fraction, &cfg.psd)?);
    }
    if cand.criterion != Some(criterion) {
        cand.curve.clear();
        cand.criterion = Some(criterion);
    }
    let trellis = Trellis::build(&cand.scheme, 1)?;
    let labeling = match criterion {
        Criterion::Joint => None,
        Criterion::Pragmatic => Some(pragmatic_labeling(&trellis)?),
    };
    cand.labeling = labeling.as_ref().map(|l| l.kind());
    let coarse = cfg
        .es_grid
        .iter()
        .filter(|&&s| !cand.curve.iter().any(|c| (c.es_n0_db - s).abs() < 1e-9))
        .map(|&s| sample(&trellis, labeling.as_ref(), s, &cfg.capacity))
        .collect::<Result<Vec<_>>>()?;
    cand.insert_samples(coarse);
    // refine around each target crossing of Rs·C_CPM
    let rs = cand.rs_rounded().unwrap_or(1.0);
    let mut extra = Vec::new();
    for &target in &cfg.refine_targets {
        let pts: Vec<(f64, f64)> = cand.curve.iter().map(|c| (c.es_n0_db, rs * c.bits_per_symbol)).collect();
        if let Some(x) = crate::capacity::crossing(&pts, target) {
            let steps = (cfg.refine_halfwidth / cfg.refine_step).round() as i64;
            let centre = (x / cfg.refine_step).round() * cfg.refine_step;
            for k in -steps..=steps {
                let s = centre + k as f64 * cfg.refine_step;
                let known = cand.curve.iter().chain(&extra).any(|c: &CurveSample| (c.es_n0_db - s).abs() < 1e-9);
                if !known {
                    extra.push(sample(&trellis, labeling.as_ref(), s, &cfg.capacity)?);
                }
            }
        }
    }
    cand.insert_samples(extra);
    debug!("{}: Rs = {:.3}, {} curve points", cand.scheme, rs, cand.curve.len());
    Ok(())
}

/// Attaches `Rs` and the criterion's capacity curve to every candidate.
/// Candidates are independent jobs; results do not depend on scheduling.
pub fn evaluate_candidates(cands: &mut [SchemeCandidate], criterion: Criterion, cfg: &EvalConfig) -> Result<()> {
    info!("evaluating {} candidates ({criterion} capacity)", cands.len());
    cands.par_iter_mut().try_for_each(|c| evaluate_one(c, criterion, cfg))
}

/// Best scheme at one transmitted-power point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub pt_n0_db: f64,
    /// Index into the candidate slice.
    pub index: usize,
    pub scheme: CpmScheme,
    pub complexity: f64,
    pub rs: f64,
    pub es_n0_db: f64,
    /// `Eb/N0 = (P_T/N0)/C`.
    pub eb_n0_db: f64,
    /// Bits/s/Hz.
    pub c: f64,
    pub c_cpm: f64,
}

fn better(a: &SchemeCandidate, ca: f64, b: &SchemeCandidate, cb: f64) -> bool {
    if (ca - cb).abs() > TIE_TOLERANCE {
        return ca > cb;
    }
    let key = |c: &SchemeCandidate| (c.complexity, c.scheme.p, c.scheme.pulse.length);
    let (ka, kb) = (key(a), key(b));
    ka.0.total_cmp(&kb.0)
        .then(ka.1.cmp(&kb.1))
        .then(ka.2.cmp(&kb.2))
        .is_lt()
}

/// Argmax of `C` at each `P_T/N0`; ties go to lower `Y`, then lower `P`, then
/// lower `L`. Points where no candidate has a curve value are skipped.
pub fn select_best_per_snr(cands: &[SchemeCandidate], pt_grid: &[f64]) -> Vec<Selection> {
    let mut out = Vec::new();
    for &pt in pt_grid {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in cands.iter().enumerate() {
            let Some(v) = c.spectral_efficiency(pt) else {
                continue;
            };
            if best.map_or(true, |(j, bv)| better(c, v, &cands[j], bv)) {
                best = Some((i, v));
            }
        }
        if let Some((i, v)) = best {
            let c = &cands[i];
            let es = c.es_at_power(pt).unwrap();
            out.push(Selection {
                pt_n0_db: pt,
                index: i,
                scheme: c.scheme,
                complexity: c.complexity,
                rs: c.rs_rounded().unwrap(),
                es_n0_db: es,
                eb_n0_db: pt - 10.0 * v.log10(),
                c: v,
                c_cpm: c.capacity_at(es).unwrap(),
            });
        }
    }
    out
}

/// `lo, lo + step, …` up to and including `hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("bad grid {lo}:{step}:{hi}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::InvalidInput(format!("grid {lo}:{step}:{hi} has too many points")));
    }
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}
