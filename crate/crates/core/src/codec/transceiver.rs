use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conv::ConvCode;
use super::interleaver::{build_spread_interleaver, default_spread, SpreadInterleaver};
use super::puncture::{rate_matching_mask, PunctureMask, PuncturePattern};
use crate::capacity::{add_noise, noise_variance};
use crate::mapping::{cluster_and_label, pairwise_edge_metrics, ClusterMode, DEFAULT_PROBE_DEPTH, DEFAULT_TABLE_SNR_DB};
use crate::siso::{bcjr, branch_metrics, pinned, uniform, MaxStarMode, Topology};
use crate::trellis::{optimized_cpe_labeling, rimoldi_labeling, Labeling, LabelingKind, Trellis};
use crate::waveform::{CpmScheme, DEFAULT_SAMPLES_PER_SYMBOL};
use crate::{Error, Result};

/// Magnitude cap on exchanged LLRs.
const LLR_CLAMP: f64 = 60.0;
/// Outer code of the SCCC: the mother code punctured to rate 2/3.
const SCCC_OUTER: (usize, usize) = (4, 3);
/// Floor on the noise level used for metrics when the channel is noiseless,
/// relative to `Es`.
const NOISELESS_N0: f64 = 1e-4;

/// Coded transmission mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Outer code, interleaver and CPE decoded iteratively.
    ScCpm,
    /// Binary turbo-like code, bit interleaver and a single CPM demodulation.
    PCpm,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sccpm" => Ok(Mode::ScCpm),
            "pcpm" => Ok(Mode::PCpm),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?} (sccpm or pcpm)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ScCpm => "SC-CPM",
            Mode::PCpm => "P-CPM",
        })
    }
}

fn default_iterations() -> usize {
    10
}

fn default_seed() -> u64 {
    1
}

fn default_sps() -> usize {
    DEFAULT_SAMPLES_PER_SYMBOL
}

/// Full description of a coded CPM link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodedSchemeConfig {
    pub mode: Mode,
    pub scheme: CpmScheme,
    pub labeling: LabelingKind,
    /// Information bits per frame `K`.
    pub info_bits: usize,
    /// Outer puncturing `N_O/N_I` (SC-CPM).
    #[serde(default)]
    pub n_o: Option<usize>,
    #[serde(default)]
    pub n_i: Option<usize>,
    /// Overall code rate (P-CPM).
    #[serde(default)]
    pub r_sccc: Option<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub code: ConvCode,
    /// Interleaver spread; `⌊√(N/2)⌋` when absent.
    #[serde(default)]
    pub spread: Option<usize>,
    #[serde(default = "default_seed")]
    pub interleaver_seed: u64,
    #[serde(default)]
    pub max_star: MaxStarMode,
    #[serde(default = "default_sps")]
    pub samples_per_symbol: usize,
}

impl CodedSchemeConfig {
    /// SC-CPM with the natural (recursive) CPE mapping.
    pub fn sc_cpm(scheme: CpmScheme, n_o: usize, n_i: usize, info_bits: usize) -> Self {
        CodedSchemeConfig {
            mode: Mode::ScCpm,
            scheme,
            labeling: LabelingKind::RimoldiNatural,
            info_bits,
            n_o: Some(n_o),
            n_i: Some(n_i),
            r_sccc: None,
            iterations: default_iterations(),
            code: ConvCode::default(),
            spread: None,
            interleaver_seed: default_seed(),
            max_star: MaxStarMode::Exact,
            samples_per_symbol: DEFAULT_SAMPLES_PER_SYMBOL,
        }
    }

    /// P-CPM with the optimized CPE mapping.
    pub fn p_cpm(scheme: CpmScheme, r_sccc: f64, info_bits: usize) -> Self {
        CodedSchemeConfig {
            mode: Mode::PCpm,
            labeling: LabelingKind::OptimizedAnalytic,
            n_o: None,
            n_i: None,
            r_sccc: Some(r_sccc),
            ..CodedSchemeConfig::sc_cpm(scheme, 1, 1, info_bits)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if self.info_bits == 0 || self.iterations == 0 || self.samples_per_symbol == 0 {
            return Err(Error::InvalidInput("K, iterations and samples per symbol must be positive".into()));
        }
        match self.mode {
            Mode::ScCpm => {
                self.pattern()?;
            }
            Mode::PCpm => {
                let r = self.r_sccc.ok_or_else(|| Error::InvalidInput("P-CPM needs r_sccc".into()))?;
                if !(r > 0.0 && r < 4.0 / 3.0) {
                    return Err(Error::InvalidInput(format!("R_SCCC = {r} is outside (0, 4/3)")));
                }
            }
        }
        Ok(())
    }

    fn pattern(&self) -> Result<PuncturePattern> {
        match (self.n_o, self.n_i) {
            (Some(o), Some(i)) => PuncturePattern::new(o, i),
            _ => Err(Error::InvalidInput("SC-CPM needs n_o and n_i".into())),
        }
    }

    /// Nominal code rate.
    pub fn code_rate(&self) -> f64 {
        match self.mode {
            Mode::ScCpm => self.pattern().map(|p| p.rate()).unwrap_or(f64::NAN),
            Mode::PCpm => self.r_sccc.unwrap_or(f64::NAN),
        }
    }

    /// Information bits per CPM symbol at the nominal rate.
    pub fn nominal_bits_per_symbol(&self) -> f64 {
        self.code_rate() * self.scheme.m as f64
    }
}

/// Builds the labeling named by `kind`.
pub fn labeling_for(trellis: &Trellis, kind: LabelingKind) -> Result<Labeling> {
    match kind {
        LabelingKind::RimoldiNatural => Ok(rimoldi_labeling(trellis)),
        LabelingKind::OptimizedAnalytic => optimized_cpe_labeling(trellis),
        LabelingKind::OptimizedClustered | LabelingKind::ClusteredFallback => {
            let table = pairwise_edge_metrics(trellis, DEFAULT_TABLE_SNR_DB, DEFAULT_PROBE_DEPTH)?;
            let mode = if kind == LabelingKind::OptimizedClustered {
                ClusterMode::Strict
            } else {
                ClusterMode::BestEffort
            };
            cluster_and_label(&table, trellis, mode)?.labeling(trellis)
        }
    }
}

enum Layout {
    Sc {
        outer: PunctureMask,
        interleaver: SpreadInterleaver,
    },
    P {
        outer: PunctureMask,
        inner_interleaver: SpreadInterleaver,
        inner: PunctureMask,
        channel: SpreadInterleaver,
    },
}

/// Per-frame outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub info: Vec<u8>,
    pub decoded: Vec<u8>,
    /// Final a-posteriori LLRs of the information bits.
    pub info_llr: Vec<f64>,
    /// Mean `|LLR|` of the information bits after each iteration.
    pub iteration_llr: Vec<f64>,
    pub bit_errors: usize,
}

/// Encoder, modulator, channel and receiver for one configuration.
pub struct Transceiver {
    config: CodedSchemeConfig,
    trellis: Trellis,
    labeling: Labeling,
    cpm_topo: Topology,
    code_topo: Topology,
    edge_table: Vec<usize>,
    layout: Layout,
    coded_bits: usize,
    channel_bits: usize,
    demod_calls: AtomicUsize,
}

fn clamp(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}

fn spread_for(config: &CodedSchemeConfig, n: usize) -> usize {
    config.spread.unwrap_or_else(|| default_spread(n)).min(default_spread(n))
}

impl Transceiver {
    pub fn new(config: CodedSchemeConfig) -> Result<Self> {
        config.validate()?;
        let trellis = Trellis::build(&config.scheme, config.samples_per_symbol)?;
        let labeling = labeling_for(&trellis, config.labeling)?;
        let cpm_topo = trellis.topology(&labeling);
        let edge_table = labeling.edge_by_label(&trellis);
        let code = ConvCode::new(config.code.feedback, config.code.feedforward)?;
        let nu = code.memory();
        let k = config.info_bits;
        let m = config.scheme.m as usize;
        let seed = config.interleaver_seed;
        let (layout, coded_bits) = match config.mode {
            Mode::ScCpm => {
                let outer = config.pattern()?.mask(k + nu);
                let n = outer.kept();
                let interleaver = build_spread_interleaver(n, spread_for(&config, n), seed)?;
                (Layout::Sc { outer, interleaver }, n)
            }
            Mode::PCpm => {
                let outer = PuncturePattern::new(SCCC_OUTER.0, SCCC_OUTER.1)?.mask(k + nu);
                let n1 = outer.kept();
                let inner_interleaver = build_spread_interleaver(n1, spread_for(&config, n1), seed)?;
                let r = config.r_sccc.unwrap();
                let n_ch = ((k as f64 / r).round() as usize).div_ceil(m) * m;
                // inner input bit i carries outer kept bit perm[i]
                let outer_sys: Vec<bool> = outer
                    .flags()
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(p, _)| p % 2 == 0)
                    .collect();
                let priority: Vec<bool> = inner_interleaver
                    .permutation()
                    .iter()
                    .map(|&j| outer_sys[j])
                    .collect();
                let inner = rate_matching_mask(n1 + nu, n_ch, &priority)?;
                let channel = build_spread_interleaver(n_ch, spread_for(&config, n_ch), seed.wrapping_add(1))?;
                (
                    Layout::P {
                        outer,
                        inner_interleaver,
                        inner,
                        channel,
                    },
                    n_ch,
                )
            }
        };
        let channel_bits = coded_bits.div_ceil(m) * m;
        Ok(Transceiver {
            code_topo: code.topology(),
            config,
            trellis,
            labeling,
            cpm_topo,
            edge_table,
            layout,
            coded_bits,
            channel_bits,
            demod_calls: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &CodedSchemeConfig {
        &self.config
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    /// CPM symbols per frame.
    pub fn channel_symbols(&self) -> usize {
        self.channel_bits / self.config.scheme.m as usize
    }

    /// Bits delivered to the modulator per frame (including padding).
    pub fn channel_bits(&self) -> usize {
        self.channel_bits
    }

    /// Actual information bits per channel bit.
    pub fn effective_rate(&self) -> f64 {
        self.config.info_bits as f64 / self.channel_bits as f64
    }

    /// Symbol SNR for a given bit SNR, using the actual frame rate.
    pub fn es_n0_db(&self, eb_n0_db: f64) -> f64 {
        eb_n0_db + 10.0 * (self.config.info_bits as f64 / self.channel_symbols() as f64).log10()
    }

    /// Number of CPM demodulator passes run so far.
    pub fn demod_calls(&self) -> usize {
        self.demod_calls.load(Ordering::Relaxed)
    }

    fn code(&self) -> ConvCode {
        self.config.code
    }

    /// Channel bits for one information word.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.config.info_bits {
            return Err(Error::LengthMismatch {
                expected: self.config.info_bits,
                actual: info.len(),
            });
        }
        let mut bits = match &self.layout {
            Layout::Sc { outer, interleaver } => {
                let c = outer.puncture(&self.code().encode(info, true).interleaved())?;
                interleaver.interleave(&c)
            }
            Layout::P {
                outer,
                inner_interleaver,
                inner,
                channel,
            } => {
                let c1 = outer.puncture(&self.code().encode(info, true).interleaved())?;
                let u2 = inner_interleaver.interleave(&c1);
                let c2 = inner.puncture(&self.code().encode(&u2, true).interleaved())?;
                channel.interleave(&c2)
            }
        };
        bits.resize(self.channel_bits, 0);
        Ok(bits)
    }

    /// Edge path followed by a channel bit stream, `m` bits per symbol with
    /// the most significant first.
    pub fn edge_path(&self, bits: &[u8]) -> Vec<usize> {
        let m = self.config.scheme.m as usize;
        let big_m = self.trellis.alphabet_size();
        let mut state = 0;
        bits.chunks(m)
            .map(|c| {
                let label = c.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                let e = self.edge_table[state * big_m + label];
                state = self.trellis.edge(e).end;
                e
            })
            .collect()
    }

    /// Noisy received samples for an information word.
    pub fn transmit<R: Rng>(&self, info: &[u8], eb_n0_db: f64, rng: &mut R) -> Result<(Vec<Complex64>, f64)> {
        let bits = self.encode(info)?;
        let mut rx = self.trellis.path_waveform(&self.edge_path(&bits));
        let n0 = if eb_n0_db.is_finite() {
            noise_variance(self.config.scheme.es, self.es_n0_db(eb_n0_db))
        } else {
            0.0
        };
        if n0 > 0.0 {
            add_noise(rng, &mut rx, n0);
        }
        Ok((rx, n0))
    }

    fn decode_outer(&self, outer: &PunctureMask, ext: &[f64]) -> Result<crate::siso::SisoResult> {
        let prior = outer.depuncture(ext)?;
        let ns = self.code_topo.num_states;
        bcjr(&self.code_topo, None, Some(&prior), &pinned(ns, 0), &pinned(ns, 0), self.config.max_star)
    }

    /// Runs the receiver on `rx`.
    pub fn decode(&self, rx: &[Complex64], n0: f64) -> Result<FrameRecord> {
        let n0 = n0.max(NOISELESS_N0 * self.config.scheme.es);
        let metrics = branch_metrics(&self.trellis, rx, n0)?;
        let k = self.config.info_bits;
        let ns = self.cpm_topo.num_states;
        let mode = self.config.max_star;
        let mut trace = Vec::with_capacity(self.config.iterations);
        let mut info_llr = vec![0.0; k];
        match &self.layout {
            Layout::Sc { outer, interleaver } => {
                let mut prior = vec![0.0; self.channel_bits];
                for it in 0..self.config.iterations {
                    self.demod_calls.fetch_add(1, Ordering::Relaxed);
                    let inner = bcjr(&self.cpm_topo, Some(&metrics), Some(&prior), &pinned(ns, 0), &uniform(ns), mode)?;
                    let ext: Vec<f64> = inner.extrinsic[..self.coded_bits].iter().map(|&x| clamp(x)).collect();
                    let r = self.decode_outer(outer, &interleaver.deinterleave(&ext))?;
                    info_llr.iter_mut().enumerate().for_each(|(i, l)| *l = r.llr[2 * i]);
                    trace.push(info_llr.iter().map(|x| x.abs()).sum::<f64>() / k as f64);
                    if it + 1 < self.config.iterations {
                        let back: Vec<f64> = r.extrinsic.iter().map(|&x| clamp(x)).collect();
                        let back = interleaver.interleave(&outer.puncture(&back)?);
                        prior[..self.coded_bits].copy_from_slice(&back);
                    }
                }
            }
            Layout::P {
                outer,
                inner_interleaver,
                inner,
                channel,
            } => {
                self.demod_calls.fetch_add(1, Ordering::Relaxed);
                let demod = bcjr(&self.cpm_topo, Some(&metrics), None, &pinned(ns, 0), &uniform(ns), mode)?;
                let ch: Vec<f64> = demod.llr[..self.coded_bits].iter().map(|&x| clamp(x)).collect();
                let inner_ch = inner.depuncture(&channel.deinterleave(&ch))?;
                let n1 = inner_interleaver.len();
                let cs = self.code_topo.num_states;
                let mut apriori = vec![0.0; n1];
                for it in 0..self.config.iterations {
                    let mut priors = inner_ch.clone();
                    for (i, a) in apriori.iter().enumerate() {
                        priors[2 * i] += a;
                    }
                    let ri = bcjr(&self.code_topo, None, Some(&priors), &pinned(cs, 0), &pinned(cs, 0), mode)?;
                    let ext: Vec<f64> = (0..n1).map(|i| clamp(ri.llr[2 * i] - apriori[i])).collect();
                    let r = self.decode_outer(outer, &inner_interleaver.deinterleave(&ext))?;
                    info_llr.iter_mut().enumerate().for_each(|(i, l)| *l = r.llr[2 * i]);
                    trace.push(info_llr.iter().map(|x| x.abs()).sum::<f64>() / k as f64);
                    if it + 1 < self.config.iterations {
                        let back: Vec<f64> = r.extrinsic.iter().map(|&x| clamp(x)).collect();
                        apriori = inner_interleaver.interleave(&outer.puncture(&back)?);
                    }
                }
            }
        }
        let decoded: Vec<u8> = info_llr.iter().map(|&l| (l > 0.0) as u8).collect();
        Ok(FrameRecord {
            info: Vec::new(),
            decoded,
            info_llr,
            iteration_llr: trace,
            bit_errors: 0,
        })
    }

    /// Transmits and decodes one random frame with generator `rng`.
    pub fn run_frame<R: Rng>(&self, eb_n0_db: f64, rng: &mut R) -> Result<FrameRecord> {
        let info: Vec<u8> = (0..self.config.info_bits).map(|_| rng.gen_range(0..2u8)).collect();
        let (rx, n0) = self.transmit(&info, eb_n0_db, rng)?;
        let mut rec = self.decode(&rx, n0)?;
        rec.bit_errors = rec.decoded.iter().zip(&info).filter(|(a, b)| a != b).count();
        rec.info = info;
        Ok(rec)
    }

    /// Frames `first..first + count` with per-frame seeds derived from `seed`,
    /// run in parallel and returned in frame order.
    pub fn run_frames(&self, eb_n0_db: f64, seed: u64, first: usize, count: usize) -> Result<Vec<FrameRecord>> {
        (first..first + count)
            .into_par_iter()
            .map(|f| self.run_frame(eb_n0_db, &mut crate::rng::stream(seed, f as u64)))
            .collect()
    }
}

fn transceive(config: &CodedSchemeConfig, mode: Mode, eb_n0_db: f64, num_frames: usize, seed: u64) -> Result<Vec<FrameRecord>> {
    if config.mode != mode {
        return Err(Error::InvalidInput(format!("configuration is {}, not {mode}", config.mode)));
    }
    Transceiver::new(config.clone())?.run_frames(eb_n0_db, seed, 0, num_frames)
}

/// Simulates `num_frames` SC-CPM frames.
pub fn sc_cpm_transceive(config: &CodedSchemeConfig, eb_n0_db: f64, num_frames: usize, seed: u64) -> Result<Vec<FrameRecord>> {
    transceive(config, Mode::ScCpm, eb_n0_db, num_frames, seed)
}

/// Simulates `num_frames` P-CPM frames.
pub fn p_cpm_transceive(config: &CodedSchemeConfig, eb_n0_db: f64, num_frames: usize, seed: u64) -> Result<Vec<FrameRecord>> {
    transceive(config, Mode::PCpm, eb_n0_db, num_frames, seed)
}
