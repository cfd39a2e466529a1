//! Continuous-phase modulation (CPM) toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`waveform`]: REC/RC pulses, baseband CPM synthesis, PSD and occupied bandwidth.
//! * [`trellis`]: the time-invariant continuous-phase encoder (CPE) trellis in the
//!   tilted-phase representation, bit labelings, complexity and distance searches.
//! * [`siso`]: base-2 max* arithmetic and the forward/backward (BCJR) kernel.
//! * [`capacity`]: Monte-Carlo estimators of the joint CPM capacity and of the
//!   pragmatic (bit-interleaved) capacity, plus the bits/s/Hz normalization.
//! * [`mapping`]: difference sequences, difference graphs, the pairwise-metric
//!   clustering algorithm and the closed-form optimal clusters.
//! * [`codec`]: outer convolutional codes, puncturing, spread interleavers and the
//!   SC-CPM / P-CPM transceivers with a BER/FER harness.
//! * [`search`]: scheme enumeration under a complexity budget and coded-scheme design.
//! * [`cli`]: the `pcpm` command-line front end.
//!
//! All log-domain quantities are base-2. Symbol energy and symbol period are
//! normalized to one unless a [`waveform::CpmScheme`] says otherwise.

pub mod capacity;
pub mod cli;
pub mod codec;
mod error;
pub mod io;
pub mod mapping;
pub mod rng;
pub mod search;
pub mod siso;
pub mod trellis;
pub mod waveform;

pub use error::{Error, Result};
pub use trellis::{Labeling, LabelingKind, Trellis};
pub use waveform::{CpmScheme, Pulse, PulseShape};
