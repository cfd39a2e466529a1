//! Builds the tilted-phase trellis of binary REC h = 1/2, L = 3 and compares
//! the weight-one distance of the natural and the optimized labeling.

use pcpm::trellis::{cpm_complexity, min_distance_search, optimized_cpe_labeling, rimoldi_labeling, Trellis};
use pcpm::waveform::{CpmScheme, Pulse};

fn main() -> pcpm::Result<()> {
    let scheme = CpmScheme::new(1, 1, 2, Pulse::rec(3))?;
    let trellis = Trellis::build(&scheme, 8)?;
    println!(
        "{scheme}: {} states, {} edges, complexity Y = {}",
        trellis.num_states(),
        trellis.num_edges(),
        cpm_complexity(&scheme)
    );
    for labeling in [rimoldi_labeling(&trellis), optimized_cpe_labeling(&trellis)?] {
        let report = min_distance_search(&trellis, &labeling, 3, 24);
        print!("{:?}:", labeling.kind());
        for w in &report.per_weight {
            match w.d2 {
                Some(d) => print!(" w={} d²={d:.3}", w.weight),
                None => print!(" w={} d²=-", w.weight),
            }
        }
        match report.d_e1() {
            Some(d) => println!("  d_E1² = {d:.3}"),
            None => println!("  d_E1 infinite"),
        }
    }
    Ok(())
}
