use opfem::bench::{late_energy_ratio, run_wave, WaveParams};

#[test]
fn zero_forcing_keeps_fields_exactly_zero() {
    let run = run_wave(&WaveParams {
        amplitude: 0.0,
        ..WaveParams::new(8, 1e-3, 0.3)
    })
    .unwrap();
    assert!(run.p.values().iter().chain(run.phi.values()).all(|&x| x == 0.0));
    assert!(run.energy.iter().all(|&e| e == 0.0));
    assert!(run.samples.iter().all(|s| s.p_max == 0.0 && s.phi_max == 0.0));
}

#[test]
fn samples_every_hundred_steps() {
    let run = run_wave(&WaveParams::new(8, 1e-3, 0.35)).unwrap();
    let steps: Vec<usize> = run.samples.iter().map(|s| s.step).collect();
    assert_eq!(steps, vec![0, 100, 200, 300, 350]);
    assert_eq!(run.energy.len(), 351);
}

#[test]
fn rejects_bad_time_step() {
    assert!(run_wave(&WaveParams::new(4, 0.0, 1.0)).is_err());
    assert!(run_wave(&WaveParams::new(4, 0.1, 0.05)).is_err());
}

#[test]
fn energy_is_conserved_once_forcing_stops() {
    let mut osc = Vec::new();
    for dt in [1e-3, 5e-4] {
        let run = run_wave(&WaveParams {
            forcing_until: 0.2,
            ..WaveParams::new(32, dt, 1.0)
        })
        .unwrap();
        let ratio = late_energy_ratio(&run.energy);
        assert!(ratio < 1.5, "dt={dt}: {ratio}");
        osc.push(ratio - 1.0);
    }
    // halving dt keeps the oscillation within twice the coarse band
    assert!(osc[1] <= 2.0 * osc[0], "{osc:?}");
}

#[test]
fn persistent_forcing_band_is_stable_under_dt_halving() {
    let coarse = late_energy_ratio(&run_wave(&WaveParams::new(32, 1e-3, 1.0)).unwrap().energy);
    let fine = late_energy_ratio(&run_wave(&WaveParams::new(32, 5e-4, 1.0)).unwrap().energy);
    assert!(fine <= 2.0 * coarse && coarse <= 2.0 * fine, "{coarse} vs {fine}");
}

#[test]
fn large_time_step_is_caught() {
    // far beyond the CFL limit for n = 32
    let err = run_wave(&WaveParams::new(32, 0.05, 2.0)).unwrap_err();
    assert!(matches!(err, opfem::Error::InstabilityDetected { .. }), "{err}");
}
