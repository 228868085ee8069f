use mfec_core::bitflip::gadget::{
    log_grid, scaling_curve, scaling_curve_direct, BitFlipModel, Fault, LocationKind, MfecGadget,
};
use mfec_core::bitflip::{ft_check, run_gadget, StateVector};
use mfec_core::pauli::Pauli;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_logical(rng: &mut impl Rng) -> StateVector<f64> {
    let (a, b) = (
        Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
    );
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let mut amps = vec![Complex::new(0.0, 0.0); 8];
    amps[0] = a / norm;
    amps[7] = b / norm;
    StateVector::from_amplitudes(amps).unwrap()
}

#[test]
fn logical_states_are_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let psi = random_logical(&mut rng);
        let out = run_gadget(&psi, None).unwrap();
        assert!((out.state.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((out.data_fidelity(&psi) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn single_x_errors_are_corrected_on_superpositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..3 {
        let psi = random_logical(&mut rng);
        let mut bad = psi.clone();
        bad.apply_x(k);
        let out = run_gadget(&bad, None).unwrap();
        assert!((out.data_fidelity(&psi) - 1.0).abs() < 1e-10, "X on data {k}");
    }
}

#[test]
fn two_flips_cause_a_logical_error() {
    let mut psi = StateVector::<f64>::basis(3, 0b000).unwrap();
    psi.apply_x(0);
    psi.apply_x(1);
    let out = run_gadget(&psi, None).unwrap();
    assert!((out.data_probabilities()[0b111] - 1.0).abs() < 1e-10);
}

#[test]
fn ancilla_fault_mid_extraction_leaves_at_most_one_error() {
    let g = MfecGadget::new();
    let locs = g.locations();
    // X on the first ancilla right after the second extraction CNOT
    let i = locs
        .iter()
        .position(|l| l.kind == LocationKind::AfterOp(1))
        .unwrap();
    let f = Fault { location: i, paulis: vec![Pauli::I, Pauli::X] };
    for input in [0b000usize, 0b111] {
        let out = g.run(&StateVector::basis(3, input).unwrap(), Some(&f)).unwrap();
        let probs = out.data_probabilities();
        let good: f64 = (0..8)
            .filter(|&b| ((b ^ input) as u32).count_ones() <= 1)
            .map(|b| probs[b])
            .sum();
        assert!((good - 1.0).abs() < 1e-10);
    }
}

#[test]
fn exhaustive_single_fault_check_passes() {
    let report = ft_check();
    println!(
        "ft_check: {} locations, {} cases, {} violations",
        report.n_locations,
        report.n_cases,
        report.violations.len()
    );
    for v in report.violations.iter().take(10) {
        println!("  {:?} {:?} input {:03b} mass {:.3e}", v.location, v.paulis, v.input, v.bad_mass);
    }
    assert!(report.passed());
}

#[test]
fn classical_single_faults_are_benign() {
    assert_eq!(BitFlipModel::default().f1(), 0.0);
}

#[test]
fn quadratic_scaling() {
    let ps = log_grid(1e-4, 1e-2, 5).unwrap();
    let curve = scaling_curve(&ps, 20_000, 7).unwrap();
    for pt in &curve.points {
        println!("p={:.2e} p_L={:.4e} [{:.4e}, {:.4e}]", pt.p, pt.p_l, pt.ci_low, pt.ci_high);
    }
    println!("slope {:.4} A {:.3}", curve.slope, curve.quadratic_coefficient);
    assert!((curve.slope - 2.0).abs() <= 0.3);
    assert!(curve.slope >= 1.7 && curve.slope <= 2.3);
    // two-fault law: p_L ~ A p^2 (1-p)^(N-2) at small p
    let n = curve.n_locations as i32;
    let a = curve.quadratic_coefficient;
    let law = |p: f64| a * p * p * (1.0 - p).powi(n - 2);
    let ratio = curve.points[2].p_l / curve.points[0].p_l;
    let want = law(1e-3) / law(1e-4);
    println!("N {n} ratio {ratio:.3} two-fault law {want:.3}");
    // three-fault terms lift the ratio above the pure two-fault law
    assert!(ratio > want && ratio < 100.0, "ratio {ratio}");
    assert!((ratio / 100.0 - 1.0).abs() < 0.1);
    assert!((curve.points[0].p_l / law(1e-4) - 1.0).abs() < 0.01);
    assert_eq!(scaling_curve(&[0.0], 10, 1).unwrap().points[0].p_l, 0.0);
}

#[test]
fn stratified_matches_direct_sampling() {
    let ps = [3e-3, 1e-2];
    let strat = scaling_curve(&ps, 50_000, 3).unwrap();
    let direct = scaling_curve_direct(&ps, 400_000, 4);
    for (s, d) in strat.points.iter().zip(&direct) {
        println!("p={:.1e} stratified {:.4e} direct {:.4e} [{:.4e}, {:.4e}]", s.p, s.p_l, d.p_l, d.ci_low, d.ci_high);
        // allow both intervals to overlap
        assert!(s.ci_low <= d.ci_high && d.ci_low <= s.ci_high);
    }
}
