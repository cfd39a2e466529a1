//! The published design rows for target capacities 1, 1.5 and 2 bits/s/Hz.
//! All rows use `h = 1/P`.

use serde::{Deserialize, Serialize};

use crate::codec::CodedSchemeConfig;
use crate::waveform::{CpmScheme, Pulse, PulseShape};
use crate::{Error, Result};

/// One design row: the SC-CPM and P-CPM schemes for a pulse and target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignPreset {
    pub shape: PulseShape,
    pub target: f64,
    /// SC-CPM outer puncturing and scheme `(m, P, L)`.
    pub sc_n_o: usize,
    pub sc_n_i: usize,
    pub sc_mpl: (u32, u32, usize),
    /// P-CPM overall rate and scheme `(m, P, L)`.
    pub p_rate: f64,
    pub p_mpl: (u32, u32, usize),
}

impl DesignPreset {
    /// Row name such as `rec-1.0` or `rc-1.5`.
    pub fn name(&self) -> String {
        format!("{}-{:.1}", self.shape, self.target)
    }

    fn scheme(&self, (m, p, l): (u32, u32, usize)) -> CpmScheme {
        CpmScheme::new(m, 1, p, Pulse::new(self.shape, l)).expect("preset schemes are valid")
    }

    pub fn sc_scheme(&self) -> CpmScheme {
        self.scheme(self.sc_mpl)
    }

    pub fn p_scheme(&self) -> CpmScheme {
        self.scheme(self.p_mpl)
    }

    pub fn sc_config(&self, info_bits: usize) -> CodedSchemeConfig {
        CodedSchemeConfig::sc_cpm(self.sc_scheme(), self.sc_n_o, self.sc_n_i, info_bits)
    }

    pub fn p_config(&self, info_bits: usize) -> CodedSchemeConfig {
        CodedSchemeConfig::p_cpm(self.p_scheme(), self.p_rate, info_bits)
    }
}

const fn row(
    shape: PulseShape,
    target: f64,
    sc: (usize, usize),
    sc_mpl: (u32, u32, usize),
    p_rate: f64,
    p_mpl: (u32, u32, usize),
) -> DesignPreset {
    DesignPreset {
        shape,
        target,
        sc_n_o: sc.0,
        sc_n_i: sc.1,
        sc_mpl,
        p_rate,
        p_mpl,
    }
}

/// The six design rows, REC first.
pub fn table7_rows() -> [DesignPreset; 6] {
    use PulseShape::{Rc, Rec};
    [
        row(Rec, 1.0, (25, 24), (2, 4, 2), 0.752, (1, 2, 3)),
        row(Rec, 1.5, (75, 59), (2, 5, 2), 0.781, (2, 4, 2)),
        row(Rec, 2.0, (40, 27), (2, 6, 2), 0.735, (1, 4, 4)),
        row(Rc, 1.0, (5, 4), (2, 4, 2), 0.625, (2, 4, 2)),
        row(Rc, 1.5, (150, 91), (2, 5, 2), 0.938, (2, 4, 2)),
        row(Rc, 2.0, (100, 59), (2, 8, 2), 0.847, (2, 8, 2)),
    ]
}

/// Looks up a row by name (`rec-1.0`, `rc-2`, …).
pub fn table7_row(name: &str) -> Result<DesignPreset> {
    let lower = name.to_ascii_lowercase();
    let (shape, target) = lower
        .split_once('-')
        .ok_or_else(|| Error::InvalidInput(format!("row {name:?} should look like rec-1.0")))?;
    let shape: PulseShape = shape.parse()?;
    let target: f64 = target
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad target capacity in {name:?}")))?;
    table7_rows()
        .into_iter()
        .find(|r| r.shape == shape && (r.target - target).abs() < 1e-9)
        .ok_or_else(|| Error::InvalidInput(format!("no design row {name:?}")))
}
