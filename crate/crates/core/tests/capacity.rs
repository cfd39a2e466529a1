//! Capacity estimators against a brute-force block oracle, and their
//! reproducibility.

mod common;

use pcpm::capacity::{cpm_capacity, pragmatic_capacity, CapacityConfig};
use pcpm::trellis::{optimized_cpe_labeling, rimoldi_labeling, Trellis};
use pcpm::waveform::{CpmScheme, Pulse};

fn msk() -> Trellis {
    Trellis::build(&CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap(), 8).unwrap()
}

#[test]
fn msk_matches_block_enumeration() {
    let t = msk();
    let cfg = CapacityConfig {
        block_symbols: 5000,
        trials: 6,
        ..CapacityConfig::default()
    };
    let snr = 3.0;
    let (want, se) = common::msk_information_rate(5, 10, snr, 4000, 5);
    let got = cpm_capacity(&t, snr, &cfg).unwrap().bits_per_symbol;
    assert!((got - want).abs() < 0.03 + 3.0 * se, "{got} vs {want}±{se}");
}

#[test]
fn pragmatic_never_beats_joint() {
    let t = Trellis::build(&CpmScheme::new(1, 1, 2, Pulse::rec(3)).unwrap(), 8).unwrap();
    let cfg = CapacityConfig {
        block_symbols: 3000,
        trials: 4,
        ..CapacityConfig::default()
    };
    for labeling in [rimoldi_labeling(&t), optimized_cpe_labeling(&t).unwrap()] {
        for snr in [-6.0, -2.0, 2.0, 6.0] {
            let j = cpm_capacity(&t, snr, &cfg).unwrap();
            let p = pragmatic_capacity(&t, &labeling, snr, &cfg).unwrap();
            let se = (j.std_error.powi(2) + p.std_error.powi(2)).sqrt();
            assert!(p.bits_per_symbol <= j.bits_per_symbol + 3.0 * se + 1e-9, "{snr} dB");
        }
    }
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let t = msk();
    let cfg = CapacityConfig {
        block_symbols: 2000,
        trials: 5,
        seed: 42,
        ..CapacityConfig::default()
    };
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| cpm_capacity(&t, 1.0, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.bits_per_symbol.to_bits(), b.bits_per_symbol.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}
