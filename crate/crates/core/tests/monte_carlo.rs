use oofsk_core::{
    pe_average_coherent, pe_conditional_coherent, pe_noncoherent, run_monte_carlo, AntennaChannelSpec,
    Correlation, ModulationSpec, Scenario,
};

fn within_three_sigma(p_hat: f64, p: f64, trials: u64) -> bool {
    (p_hat - p).abs() <= 3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[test]
fn fixed_fading_matches_conditional_error() {
    let spec = ModulationSpec::new(4, 0.5, 10.0).unwrap();
    let d = 0.5f64.sqrt();
    let channel = AntennaChannelSpec::with_moments(vec![d, d], 0.0, Correlation::Independent).unwrap();
    let p = pe_conditional_coherent(1.0, &spec, 2).unwrap();
    let n = 400_000;
    let stats = run_monte_carlo(&spec, &channel, Scenario::Coherent, n, 3).unwrap();
    assert!(within_three_sigma(stats.p_hat(), p, n), "{} vs {p}", stats.p_hat());
}

#[test]
fn coherent_average_matches_simulation() {
    let spec = ModulationSpec::new(4, 0.5, 15.0).unwrap();
    let channel = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
    let p = pe_average_coherent(&spec, &channel).unwrap();
    let n = 400_000;
    let stats = run_monte_carlo(&spec, &channel, Scenario::Coherent, n, 4).unwrap();
    assert!(within_three_sigma(stats.p_hat(), p, n), "{} vs {p}", stats.p_hat());
}

#[test]
fn noncoherent_matches_simulation() {
    let spec = ModulationSpec::new(4, 0.2, 15.0).unwrap();
    let channel = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
    let p = pe_noncoherent(&spec, &channel).unwrap();
    let n = 1_000_000;
    let stats = run_monte_carlo(&spec, &channel, Scenario::Noncoherent, n, 5).unwrap();
    assert!(within_three_sigma(stats.p_hat(), p, n), "{} vs {p}", stats.p_hat());
}

#[test]
fn silent_channel_decides_by_priors() {
    let spec = ModulationSpec::new(4, 0.5, f64::NEG_INFINITY).unwrap();
    let channel = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
    let p = pe_average_coherent(&spec, &channel).unwrap();
    // Prior of s0 (0.5) beats each tone (0.125), so every tone is an error.
    assert!((p - 0.5).abs() < 1e-9, "{p}");
    let n = 200_000;
    let stats = run_monte_carlo(&spec, &channel, Scenario::Coherent, n, 6).unwrap();
    assert!(within_three_sigma(stats.p_hat(), p, n));
}

#[test]
fn binary_rayleigh_single_antenna() {
    let spec = ModulationSpec::new(2, 1.0, 5.0).unwrap();
    let channel = AntennaChannelSpec::rician(1, 0.0, Correlation::Independent).unwrap();
    let coherent = pe_average_coherent(&spec, &channel).unwrap();
    let n = 400_000;
    let stats = run_monte_carlo(&spec, &channel, Scenario::Coherent, n, 7).unwrap();
    assert!(within_three_sigma(stats.p_hat(), coherent, n), "{} vs {coherent}", stats.p_hat());
}

#[test]
fn more_antennas_help() {
    for scenario in [Scenario::Coherent, Scenario::Noncoherent] {
        for &duty in &[1.0, 0.8, 0.5, 0.2] {
            for &snr in &[5.0, 10.0, 15.0] {
                let spec = ModulationSpec::new(4, duty, snr).unwrap();
                let pe = |order| {
                    let ch = AntennaChannelSpec::rician(order, 0.125, Correlation::Independent).unwrap();
                    match scenario {
                        Scenario::Coherent => pe_average_coherent(&spec, &ch).unwrap(),
                        Scenario::Noncoherent => pe_noncoherent(&spec, &ch).unwrap(),
                    }
                };
                let (one, two, three) = (pe(1), pe(2), pe(3));
                assert!(one > two && two > three, "{scenario} v={duty} {snr} dB: {one} {two} {three}");
            }
        }
    }
}
