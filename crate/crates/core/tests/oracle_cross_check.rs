use num_complex::Complex64;
use qreg_dephasing::oracle::{compare_propagators, run_instance, Instance, Oracle, PhaseFactor};
use qreg_dephasing::{BasisLabel, BathSpectrum, DephasingModel, RegisterState};

fn lab(s: &str) -> BasisLabel {
    s.parse().unwrap()
}

#[test]
fn three_qubits_four_modes_zero_temperature() {
    for seed in 0..4 {
        let inst = Instance::random("x", 3, 4, 0.0, 100 + seed).unwrap();
        let r = run_instance(&inst, 1, 0, 1 << 15).unwrap();
        assert!(r.max_deviation < 1e-4, "{r:?}");
    }
}

#[test]
fn thermal_populations_are_time_independent() {
    let inst = Instance::random("x", 2, 3, 0.7, 5).unwrap();
    let labels: Vec<BasisLabel> = inst.state.labels().cloned().collect();
    let oracle = Oracle::new(&inst.bath, &inst.positions, &labels).unwrap();
    for t in [0.0, 1.5, 4.0] {
        let est = oracle.thermal_reduced_density(&inst.state, t, 400, 3, 1 << 12).unwrap();
        for (n, l) in labels.iter().enumerate() {
            assert!((est.density.at(n, n).re - inst.state.amplitude(l).norm_sqr()).abs() < 1e-9);
        }
    }
}

#[test]
fn closed_form_density_matches_trace_of_displaced_bath() {
    // the reduced density of the closed-form propagator reproduces the
    // closed-form damping and phase, including the cross phase
    let bath = BathSpectrum::single_mode([1.1, 0.4, 0.0], 0.04, 1.0, 0.0).unwrap();
    let pos = [[0.0; 3], [0.8, 0.1, 0.0], [1.7, -0.2, 0.3]];
    let labels = [lab("++-"), lab("+-+"), lab("---")];
    let state = RegisterState::normalized(labels.iter().map(|l| (l.clone(), Complex64::new(1.0, 0.3)))).unwrap();
    let oracle = Oracle::new(&bath, &pos, &labels).unwrap();
    let init = oracle.vacuum_joint(&state).unwrap();
    let out = oracle
        .closed_form_unitary_apply(&init, 3.7, PhaseFactor::Include)
        .unwrap();
    let rho = oracle.reduced_density(&out);
    let reference = DephasingModel::new(&bath, &pos).evolve(&state, 3.7).unwrap();
    assert!(rho.max_deviation(&reference) < 1e-10);
}

#[test]
fn ablation_is_harmless_for_symmetric_labels() {
    // |+⟩ and |−⟩ of one qubit share f, so dropping e^{if} is a global phase
    let bath = BathSpectrum::single_mode([1.0, 0.0, 0.0], 0.05, 1.0, 0.0).unwrap();
    let state = RegisterState::normalized([
        (lab("+"), Complex64::new(1.0, 0.0)),
        (lab("-"), Complex64::new(1.0, 0.0)),
    ])
    .unwrap();
    let c = compare_propagators(&bath, &[[0.0; 3]], &state, &[Complex64::default()], 10.0, 1 << 14).unwrap();
    assert!(c.with_phase < 1e-6);
    let oracle = Oracle::new(&bath, &[[0.0; 3]], &[lab("+"), lab("-")]).unwrap();
    let init = oracle.vacuum_joint(&state).unwrap();
    let a = oracle.reduced_density(
        &oracle
            .closed_form_unitary_apply(&init, 10.0, PhaseFactor::Omit)
            .unwrap(),
    );
    let b = oracle.reduced_density(
        &oracle
            .closed_form_unitary_apply(&init, 10.0, PhaseFactor::Include)
            .unwrap(),
    );
    assert!(a.max_deviation(&b) < 1e-12);
}
