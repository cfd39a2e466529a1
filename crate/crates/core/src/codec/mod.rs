//! Coded CPM links.
//!
//! Two receivers are modelled. SC-CPM concatenates a punctured recursive
//! convolutional code with the CPE through a spread interleaver and iterates
//! between the CPE SISO and the code SISO. P-CPM feeds a serially concatenated
//! binary code through a bit interleaver into the CPM modulator with an
//! optimized mapping, demodulates once and iterates only inside the binary
//! decoder.

mod complexity;
mod conv;
mod harness;
mod interleaver;
mod puncture;
mod transceiver;

pub use complexity::{complexity_report, y_cpm, y_sc_cpm, y_sccc, ComplexityReport, DecoderSizes};
pub use conv::{ConvCode, Encoded};
pub use harness::{
    clopper_pearson, frames_info_rate, info_rate_estimate, measure_curve, measure_point, write_error_csv,
    ErrorRatePoint, HarnessConfig,
};
pub use interleaver::{build_spread_interleaver, default_spread, SpreadInterleaver};
pub use puncture::{approximate_ratio, depuncture, puncture, rate_matching_mask, PunctureMask, PuncturePattern};
pub use transceiver::{
    labeling_for, p_cpm_transceive, sc_cpm_transceive, CodedSchemeConfig, FrameRecord, Mode, Transceiver,
};
