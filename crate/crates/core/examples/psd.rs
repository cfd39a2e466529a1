//! Power spectrum of MSK and a quaternary REC scheme, and the normalized
//! symbol rate at 99% in-band power.

use pcpm::waveform::{bandwidth_at_fraction, estimate_psd, CpmScheme, PsdConfig, Pulse};

fn main() -> pcpm::Result<()> {
    let cfg = PsdConfig::default();
    for scheme in [
        CpmScheme::new(1, 1, 2, Pulse::rec(1))?,
        CpmScheme::new(2, 1, 5, Pulse::rec(2))?,
    ] {
        let psd = estimate_psd(&scheme, &cfg)?;
        let b = bandwidth_at_fraction(&psd, 0.99)?;
        let rs = 1.0 / (scheme.m as f64 * b);
        println!("{scheme}: 99% bandwidth B·T = {b:.4}, Rs = {rs:.4}");
        let peak = psd.density.iter().copied().fold(0.0, f64::max);
        for (f, d) in psd.freq.iter().zip(&psd.density).step_by(psd.freq.len() / 16) {
            println!("  f·T = {f:+.3}  {:+.1} dB", 10.0 * (d / peak).max(1e-12).log10());
        }
    }
    Ok(())
}
