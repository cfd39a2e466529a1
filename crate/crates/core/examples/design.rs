//! Scheme search and design on a small budget with short capacity runs.

use pcpm::capacity::CapacityConfig;
use pcpm::codec::Mode;
use pcpm::search::{design_coded_scheme, EvalConfig, SearchBounds};
use pcpm::waveform::PulseShape;

fn main() -> pcpm::Result<()> {
    let eval = EvalConfig {
        capacity: CapacityConfig {
            block_symbols: 2000,
            trials: 2,
            ..CapacityConfig::default()
        },
        es_grid: (-4..=12).map(f64::from).collect(),
        ..EvalConfig::default()
    };
    let d = design_coded_scheme(Mode::ScCpm, 1.0, PulseShape::Rec, 32.0, &SearchBounds::default(), &eval)?;
    println!("{d}");
    Ok(())
}
