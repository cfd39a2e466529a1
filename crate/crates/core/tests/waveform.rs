//! Spectral occupancy against an exact CPM spectrum computed independently
//! from the autocorrelation of the signal (closed form, no simulation).

use pcpm::waveform::{normalized_symbol_rate, CpmScheme, PsdConfig, Pulse};

/// `(m, P, L, RC?, Rs)` at 99% in-band power from the exact spectrum.
const EXACT_RS: [(u32, u32, usize, bool, f64); 4] = [
    (1, 2, 1, false, 0.8462),
    (2, 5, 2, false, 1.1727),
    (1, 4, 4, false, 2.7283),
    (2, 8, 2, true, 1.1728),
];

#[test]
fn symbol_rate_matches_exact_spectrum() {
    let cfg = PsdConfig::default();
    for (m, p, l, rc, want) in EXACT_RS {
        let pulse = if rc { Pulse::rc(l) } else { Pulse::rec(l) };
        let scheme = CpmScheme::new(m, 1, p, pulse).unwrap();
        let rs = normalized_symbol_rate(&scheme, 0.99, &cfg).unwrap();
        // the periodogram resolves the band edge to a fraction of a bin
        assert!((rs / want - 1.0).abs() < 5e-3, "{scheme}: Rs {rs:.4}, exact {want}");
    }
}

#[test]
fn msk_bandwidth_is_textbook_value() {
    // 99% power bandwidth of MSK is 1.18/T, i.e. Rs = 1/1.18
    let msk = CpmScheme::new(1, 1, 2, Pulse::rec(1)).unwrap();
    let rs = normalized_symbol_rate(&msk, 0.99, &PsdConfig::default()).unwrap();
    assert!((1.0 / rs - 1.18).abs() < 0.005, "B·T = {}", 1.0 / rs);
}

#[test]
fn symbol_rate_is_seed_reproducible() {
    let s = CpmScheme::new(2, 1, 4, Pulse::rec(2)).unwrap();
    let cfg = PsdConfig {
        num_symbols: 20_000,
        seed: 3,
        ..PsdConfig::default()
    };
    let a = normalized_symbol_rate(&s, 0.99, &cfg).unwrap();
    let b = normalized_symbol_rate(&s, 0.99, &cfg).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}
