//! Bit-to-waveform mapping optimization.
//!
//! Two routes lead to the same labeling when the scheme allows it: the
//! greedy clustering of trellis edges driven by pairwise path metrics, and the
//! closed-form clusters built from the vertex sets
//! `V_p = {(α, (p − QΣa_l) mod P)}`. The difference-graph machinery verifies
//! the structure that makes the closed form optimal.

mod cluster;
mod diff;
mod graph;

pub use cluster::{
    analytic_clusters, analytic_partition, check_conditions, cluster_and_label, default_max_len,
    pairwise_edge_metrics, partition_of, ClusterMode, Clustering, ConditionReport, PairMetricTable,
    DEFAULT_PROBE_DEPTH, DEFAULT_TABLE_SNR_DB,
};
pub use diff::{
    enumerate_sequences, event_distance, min_distance_diff_sequences, DiffSearchResult, DifferenceSequence,
    TIE_TOLERANCE,
};
pub use graph::{build_difference_graph, gamma_rotation_check, vertex_set, vertex_set_index, DifferenceGraph};
