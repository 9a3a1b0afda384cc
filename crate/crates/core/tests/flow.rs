use weyl_core::dirac::build_dirac;
use weyl_core::fixtures::random_frame;
use weyl_core::flow::{integrate_trajectory_with, propagator_principal_symbol, propagator_with, FlowOptions};
use weyl_core::linalg::{norm, r, CMat};
use weyl_core::OperatorSpec;

#[test]
fn energy_is_conserved_on_curved_frames() {
    let sym = build_dirac(&random_frame(5, 1, 0.12), true).unwrap().to_symbol();
    let opts = FlowOptions { phase: false, initial_phase: 0.0 };
    let tr = integrate_trajectory_with(&sym, 1, &[0.1, 0.7, 1.9], &[0.8, -0.3, 0.5], 20.0, 2000, &opts).unwrap();
    assert!(tr.energy_drift() < 1e-8, "{}", tr.energy_drift());
    for w in &tr.transported {
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fourth_order_convergence() {
    let sym = build_dirac(&random_frame(8, 1, 0.15), true).unwrap().to_symbol();
    let opts = FlowOptions { phase: false, initial_phase: 0.0 };
    let end =
        |steps: usize| integrate_trajectory_with(&sym, 1, &[0.3, 0.2, 0.1], &[1.0, 0.4, -0.6], 4.0, steps, &opts).unwrap().last().x.clone();
    let (a, b, c) = (end(20), end(40), end(80));
    let e1: f64 = a.iter().zip(&c).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let e2: f64 = b.iter().zip(&c).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    // Richardson-style estimate of the order from three resolutions
    let rate = ((e1 - e2) / e2).log2();
    assert!(rate > 3.7, "rate {rate}");
}

#[test]
fn constant_coefficient_propagator_is_a_group_on_its_range() {
    let a0 = CMat::from_row_slice(2, 2, &[r(0.3), r(0.1), r(0.1), r(-0.2)]);
    let sym = OperatorSpec::pauli_plus(a0).to_symbol();
    let eta = [0.2, -0.5, 0.9];
    let (t, s) = (0.7, 1.1);
    let ut = propagator_principal_symbol(&sym, 1, t, &[0.0; 3], &eta).unwrap();
    let us = propagator_principal_symbol(&sym, 1, s, &[0.0; 3], &eta).unwrap();
    let uts = propagator_principal_symbol(&sym, 1, t + s, &[0.0; 3], &eta).unwrap();
    assert!(norm(&(&ut * &us - &uts)) < 1e-8);
    let g = propagator_with(&sym, 1, 1.5, &[0.0; 3], &eta, 150, 2.0).unwrap();
    let sv = g.singular_values();
    assert!((sv[0] - 1.0).abs() < 1e-10 && sv[1] < 1e-10);
}
