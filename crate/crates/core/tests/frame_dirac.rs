use std::f64::consts::PI;

use weyl_core::dirac::{
    build_dirac, dirac_subprincipal_closed, is_massless_dirac, subprincipal_closed_form_residual, transform_dirac_su2, DiracCondition,
};
use weyl_core::fixtures::{random_frame, random_point, random_rotation_frame, rng};
use weyl_core::frame::{curvature_torsion_residual, curvature_torsion_sides, su2_to_so3, teleparallel_tensors, FrameBundle};
use weyl_core::linalg::{c, norm, r, CMat};
use weyl_core::spectrum::{galerkin_spectrum, pairing_gap};
use weyl_core::trig::{TrigPoly, TWO_PI_PERIODS};
use weyl_core::CotangentPoint;

#[test]
fn curvature_torsion_on_random_frames() {
    for seed in 0..6 {
        let b = random_frame(seed, 2, 0.12);
        let mut g = rng(seed + 100);
        for _ in 0..8 {
            let pt = random_point(&mut g);
            let res = curvature_torsion_residual(&b, &pt).unwrap();
            assert!(res < 1e-6, "seed {seed}: {res}");
        }
    }
}

#[test]
fn twisted_frame_spot_values() {
    for k in 1..=3 {
        let b = FrameBundle::k3(k);
        let (lhs, rhs) = curvature_torsion_sides(&b, &CotangentPoint::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!((lhs + 0.5 * k as f64).abs() < 1e-8 && (rhs + 0.5 * k as f64).abs() < 1e-12);
        let (lhs, rhs) = curvature_torsion_sides(&b, &CotangentPoint::new(vec![0.0; 3], vec![0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(lhs.abs() < 1e-8 && rhs.abs() < 1e-12);
        assert!((teleparallel_tensors(&b, &[0.3, 0.2, 0.1]).trace_star_t + 2.0 * k as f64).abs() < 1e-12);
        let sub = dirac_subprincipal_closed(&b, &[0.0; 3]);
        assert!(norm(&(sub + CMat::identity(2, 2) * r(0.5 * k as f64))) < 1e-10);
    }
}

#[test]
fn dirac_subprincipal_closed_form_on_random_frames() {
    for seed in 0..20 {
        let b = random_frame(seed, 1, 0.1);
        let res = subprincipal_closed_form_residual(&b, 2).unwrap();
        assert!(res < 1e-8, "seed {seed}: {res}");
    }
}

#[test]
fn characterization_is_stable_under_refinement() {
    for seed in 0..3 {
        let op = build_dirac(&random_frame(seed, 1, 0.1), true).unwrap();
        let coarse = is_massless_dirac(&op, 3).unwrap();
        let fine = is_massless_dirac(&op, 6).unwrap();
        assert!(coarse.is_dirac && fine.is_dirac);
        let c0 = 0.25;
        let bad = op.with_constant_potential(CMat::identity(2, 2) * r(c0));
        for grid in [3, 6] {
            let d = is_massless_dirac(&bad, grid).unwrap();
            assert_eq!(d.failing, Some(DiracCondition::NonzeroB));
        }
    }
    let twisted = build_dirac(&FrameBundle::k3(1), true).unwrap();
    let d = is_massless_dirac(&twisted.with_constant_potential(CMat::identity(2, 2) * r(0.3)), 4).unwrap();
    assert!((d.extreme_b + 0.3 / (2.0 * PI * PI)).abs() < 1e-8);
}

fn constant_su2(theta: f64) -> TrigPoly {
    let m = CMat::from_row_slice(2, 2, &[c(0.0, theta / 2.0).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -theta / 2.0).exp()]);
    TrigPoly::constant(m, TWO_PI_PERIODS)
}

#[test]
fn su2_conjugation_preserves_spectrum() {
    let op = build_dirac(&FrameBundle::k3(1), true).unwrap();
    let rf = constant_su2(0.9);
    let t = transform_dirac_su2(&op, &rf).unwrap();
    let o = su2_to_so3(&rf.coeff(&[0, 0, 0]).unwrap().clone()).unwrap();
    let rebuilt = build_dirac(&FrameBundle::k3(1).rotated(&o).unwrap(), true).unwrap();
    assert!(t.coefficient_distance(&rebuilt, 3) < 1e-10);
    let a = galerkin_spectrum(&op, 8).unwrap();
    let b = galerkin_spectrum(&t, 8).unwrap();
    let (va, vb): (Vec<f64>, Vec<f64>) = (a.trusted().collect(), b.trusted().collect());
    assert_eq!(va.len(), vb.len());
    for (x, y) in va.iter().zip(&vb) {
        assert!((x - y).abs() < 1e-8);
    }
}

#[test]
fn dirac_spectra_pair_up() {
    let rot = build_dirac(&random_rotation_frame(3, 1), true).unwrap();
    let d = galerkin_spectrum(&rot, 3).unwrap();
    assert!(pairing_gap(&d) < 1e-8, "{}", pairing_gap(&d));
    let twisted = galerkin_spectrum(&build_dirac(&FrameBundle::k3(1), true).unwrap(), 8).unwrap();
    assert!(pairing_gap(&twisted) < 1e-8);
    let s = 0.3;
    let broken = weyl_core::OperatorSpec::pauli_plus(CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)]));
    assert!(pairing_gap(&galerkin_spectrum(&broken, 4).unwrap()) > 0.1);
}

#[test]
fn spin_structures_have_different_spectra() {
    let one = galerkin_spectrum(&build_dirac(&FrameBundle::k3(1), true).unwrap(), 6).unwrap();
    let zero = galerkin_spectrum(&build_dirac(&FrameBundle::k3(0), true).unwrap(), 6).unwrap();
    assert!(one.trusted().any(|l| (l - 0.5).abs() < 1e-12));
    assert!(zero.trusted().all(|l| (l - 0.5).abs() > 0.4));
}
