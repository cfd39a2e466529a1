//! A short P-CPM and SC-CPM error-rate run for the 1 bit/s/Hz REC designs.

use pcpm::codec::{measure_curve, HarnessConfig, Transceiver};
use pcpm::search::table7_row;

fn main() -> pcpm::Result<()> {
    let row = table7_row("rec-1.0")?;
    let harness = HarnessConfig {
        target_frame_errors: 20,
        max_frames: 40,
        ..HarnessConfig::default()
    };
    for (name, config) in [("P-CPM", row.p_config(500)), ("SC-CPM", row.sc_config(500))] {
        let tx = Transceiver::new(config)?;
        println!("{name} {} rate {:.3}", tx.config().scheme, tx.effective_rate());
        for p in measure_curve(&tx, &[2.0, 3.0, 4.0], &harness)? {
            println!("  Eb/N0 {:.1} dB  BER {:.2e}  FER {:.2e}", p.eb_n0_db, p.ber, p.fer);
        }
    }
    Ok(())
}
