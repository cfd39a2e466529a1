//! Difference graphs, the optimality conditions and the two ways of building
//! the optimized labeling.

use pcpm::mapping::{
    analytic_clusters, build_difference_graph, check_conditions, cluster_and_label, default_max_len,
    pairwise_edge_metrics, ClusterMode, DifferenceSequence, DEFAULT_PROBE_DEPTH, DEFAULT_TABLE_SNR_DB,
};
use pcpm::trellis::Trellis;
use pcpm::waveform::{CpmScheme, Pulse};

fn main() -> pcpm::Result<()> {
    let scheme = CpmScheme::new(2, 1, 4, Pulse::rc(2))?;
    let trellis = Trellis::build(&scheme, 8)?;
    let g = build_difference_graph(&scheme, &DifferenceSequence::new(&scheme, vec![1, -1])?)?;
    println!("{scheme}: G(1,-1) has {} components of size {}", g.num_components(), g.components[0].len());

    let report = check_conditions(&scheme, default_max_len(4))?;
    println!("closed-form conditions hold: {}", report.satisfied());
    let analytic = analytic_clusters(&trellis)?;
    let table = pairwise_edge_metrics(&trellis, DEFAULT_TABLE_SNR_DB, DEFAULT_PROBE_DEPTH)?;
    let clustered = cluster_and_label(&table, &trellis, ClusterMode::Strict)?;
    println!("clustering matches the closed form: {}", analytic.partition() == clustered.partition());
    for (c, l) in clustered.clusters.iter().zip(&clustered.labels) {
        println!("  label {l:02b}: {} edges", c.len());
    }

    let odd = CpmScheme::new(1, 1, 3, Pulse::rec(2))?;
    for f in check_conditions(&odd, default_max_len(2))?.failures {
        println!("{odd}: {f}");
    }
    Ok(())
}
