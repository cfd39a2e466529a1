//! Receiver complexity of the published design rows.

use pcpm::codec::{complexity_report, DecoderSizes};
use pcpm::search::table7_rows;

fn main() -> pcpm::Result<()> {
    for row in table7_rows() {
        let r = complexity_report(&row.p_config(1000), &row.sc_config(1000), &DecoderSizes::default())?;
        println!("{:8} P-CPM {} / SC-CPM {}: {r}", row.name(), row.p_scheme(), row.sc_scheme());
    }
    Ok(())
}
