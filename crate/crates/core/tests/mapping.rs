//! Difference-graph structure and the closed-form labeling.

mod common;

use pcpm::mapping::{
    analytic_clusters, build_difference_graph, check_conditions, cluster_and_label, default_max_len,
    pairwise_edge_metrics, partition_of, ClusterMode, DifferenceSequence, DEFAULT_PROBE_DEPTH, DEFAULT_TABLE_SNR_DB,
};
use pcpm::trellis::{optimized_cpe_labeling, Trellis};
use pcpm::waveform::{CpmScheme, Pulse};
use pcpm::Error;

fn sorted(mut v: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    v.sort();
    v
}

#[test]
fn length_two_components_do_not_depend_on_the_pulse_shape() {
    for (q, p, l) in [(1, 4, 2), (3, 4, 3), (1, 6, 2), (5, 8, 1)] {
        let scheme = CpmScheme::new(1, q, p, Pulse::rc(l)).unwrap();
        let want = sorted(common::vertex_sets(scheme.num_edges(), 2, l, q, p));
        for b in [vec![1, -1], vec![-1, 1]] {
            let g = build_difference_graph(&scheme, &DifferenceSequence::new(&scheme, b).unwrap()).unwrap();
            assert_eq!(sorted(g.components), want, "{scheme}");
        }
    }
}

#[test]
fn msk_clustering_matches_closed_form() {
    let msk = CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap();
    let trellis = Trellis::build(&msk, 8).unwrap();
    let table = pairwise_edge_metrics(&trellis, DEFAULT_TABLE_SNR_DB, DEFAULT_PROBE_DEPTH).unwrap();
    let clustered = cluster_and_label(&table, &trellis, ClusterMode::Strict).unwrap();
    let analytic = analytic_clusters(&trellis).unwrap();
    assert_eq!(clustered.partition(), analytic.partition());
    assert_eq!(
        partition_of(&optimized_cpe_labeling(&trellis).unwrap()),
        analytic.partition()
    );
}

#[test]
fn condition_failures_are_named() {
    let odd = CpmScheme::new(1, 1, 3, Pulse::rec(1)).unwrap();
    let r = check_conditions(&odd, default_max_len(2)).unwrap();
    assert!(!r.p_condition);
    assert!(r.failures.iter().any(|f| f.contains("P is even")), "{:?}", r.failures);

    let quaternary = CpmScheme::new(2, 1, 6, Pulse::rec(1)).unwrap();
    let r = check_conditions(&quaternary, default_max_len(4)).unwrap();
    assert!(r.failures.iter().any(|f| f.contains("multiple of M")), "{:?}", r.failures);
    let trellis = Trellis::build(&quaternary, 4).unwrap();
    assert!(matches!(analytic_clusters(&trellis), Err(Error::ConditionsNotMet(_))));
}

#[test]
fn closed_form_clusters_are_unions_of_vertex_sets() {
    let scheme = CpmScheme::new(2, 1, 8, Pulse::rc(2)).unwrap();
    let trellis = Trellis::build(&scheme, 4).unwrap();
    let clusters = analytic_clusters(&trellis).unwrap();
    let sets = common::vertex_sets(scheme.num_edges(), 4, 2, 1, 8);
    // cluster i gathers V_(kM + i) for k = 0, 1 (Q = 1)
    for i in 0..4usize {
        let mut want: Vec<usize> = sets[i].iter().chain(&sets[4 + i]).copied().collect();
        want.sort_unstable();
        assert!(clusters.clusters.contains(&want), "cluster {i}");
    }
}
