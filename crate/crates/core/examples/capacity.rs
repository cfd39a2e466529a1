//! Joint and pragmatic capacity of binary REC h = 1/2, L = 3 under the
//! natural and the optimized labeling.

use pcpm::capacity::{cpm_capacity, pragmatic_capacity, CapacityConfig};
use pcpm::trellis::{optimized_cpe_labeling, rimoldi_labeling, Trellis};
use pcpm::waveform::{CpmScheme, Pulse};

fn main() -> pcpm::Result<()> {
    let scheme = CpmScheme::new(1, 1, 2, Pulse::rec(3))?;
    let trellis = Trellis::build(&scheme, 8)?;
    let natural = rimoldi_labeling(&trellis);
    let optimized = optimized_cpe_labeling(&trellis)?;
    let cfg = CapacityConfig {
        block_symbols: 5000,
        trials: 4,
        ..CapacityConfig::default()
    };
    println!("Es/N0 dB   joint   natural  optimized  (bits/symbol)");
    for k in -4..=4 {
        let snr = 2.0 * k as f64;
        let j = cpm_capacity(&trellis, snr, &cfg)?;
        let n = pragmatic_capacity(&trellis, &natural, snr, &cfg)?;
        let o = pragmatic_capacity(&trellis, &optimized, snr, &cfg)?;
        println!(
            "{snr:8.1}  {:.4}   {:.4}   {:.4}",
            j.bits_per_symbol, n.bits_per_symbol, o.bits_per_symbol
        );
    }
    Ok(())
}
