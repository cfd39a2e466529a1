//! Soft demodulation of a noisy MSK burst with the forward/backward kernel.

use pcpm::capacity::{add_noise, noise_variance};
use pcpm::siso::{bcjr, branch_metrics, pinned, uniform, MaxStarMode};
use pcpm::trellis::{optimized_cpe_labeling, Trellis};
use pcpm::waveform::{CpmScheme, Pulse};
use rand::Rng;

fn main() -> pcpm::Result<()> {
    let scheme = CpmScheme::new(1, 1, 2, Pulse::rec(1))?;
    let trellis = Trellis::build(&scheme, 8)?;
    let labeling = optimized_cpe_labeling(&trellis)?;
    let mut rng = pcpm::rng::stream(7, 0);
    let inputs: Vec<usize> = (0..2000).map(|_| rng.gen_range(0..2)).collect();
    let edges = trellis.path(0, &inputs);
    let sent: Vec<u32> = edges.iter().map(|&e| labeling.label(e)).collect();
    let topo = trellis.topology(&labeling);
    for es_n0_db in [0.0, 3.0, 6.0] {
        let mut rx = trellis.path_waveform(&edges);
        let n0 = noise_variance(scheme.es, es_n0_db);
        add_noise(&mut rng, &mut rx, n0);
        let metrics = branch_metrics(&trellis, &rx, n0)?;
        let out = bcjr(
            &topo,
            Some(&metrics),
            None,
            &pinned(topo.num_states, 0),
            &uniform(topo.num_states),
            MaxStarMode::Exact,
        )?;
        let errors = out.llr.iter().zip(&sent).filter(|(l, &b)| (**l > 0.0) != (b == 1)).count();
        println!("Es/N0 = {es_n0_db:.1} dB: {errors} bit errors in {}", sent.len());
    }
    Ok(())
}
