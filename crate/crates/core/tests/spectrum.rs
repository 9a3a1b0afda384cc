use std::f64::consts::PI;

use weyl_core::dirac::build_dirac;
use weyl_core::frame::FrameBundle;
use weyl_core::linalg::{r, CMat};
use weyl_core::spectrum::{asymmetry_report, galerkin_spectrum, lattice_oracle, mollified_counting, Mollifier, OracleFamily};
use weyl_core::OperatorSpec;

fn diag(s: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[r(s), r(0.0), r(0.0), r(0.0)])
}

#[test]
fn galerkin_agrees_with_oracles_inside_window() {
    let cases: Vec<(OperatorSpec, OracleFamily, usize)> = vec![
        (OperatorSpec::pauli_plus(diag(0.2)), OracleFamily::pauli(diag(0.2)), 6),
        (build_dirac(&FrameBundle::k3(2), true).unwrap(), OracleFamily::K3Frame { k: 2, d: [0.0, 0.0] }, 10),
        (
            build_dirac(&FrameBundle::k3(1), true).unwrap().with_constant_potential(diag(0.3)),
            OracleFamily::K3Frame { k: 1, d: [0.3, 0.0] },
            10,
        ),
    ];
    for (op, fam, k) in cases {
        let g = galerkin_spectrum(&op, k).unwrap();
        // stay clear of eigenvalues sitting exactly on the window edge
        let w = g.window - 0.25;
        let o = lattice_oracle(&fam, w).unwrap();
        let gv: Vec<f64> = g.values.iter().cloned().filter(|l| l.abs() < w).collect();
        assert_eq!(gv.len(), o.values.len());
        for (a, b) in gv.iter().zip(&o.values) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn twisted_family_converges_in_truncation() {
    let op = build_dirac(&FrameBundle::k3(1), true).unwrap();
    let a = galerkin_spectrum(&op, 8).unwrap();
    let b = galerkin_spectrum(&op, 12).unwrap();
    let va: Vec<f64> = a.trusted().collect();
    let vb: Vec<f64> = b.values.iter().cloned().filter(|l| l.abs() <= a.window).collect();
    assert_eq!(va.len(), vb.len());
    for (x, y) in va.iter().zip(&vb) {
        assert!((x - y).abs() < 1e-6);
    }
}

#[test]
fn mollified_dirac_count_follows_leading_term() {
    let moll = Mollifier::new(6.0).unwrap();
    let data = lattice_oracle(&OracleFamily::pauli(CMat::zeros(2, 2)), 25.0 + moll.reach() + 1.0).unwrap();
    let lam: f64 = 25.0;
    let v = mollified_counting(&data, &moll, lam).unwrap();
    let a = 4.0 * PI / 3.0;
    assert!((v - a * lam.powi(3)).abs() < 3.0 * lam * lam.ln(), "{v}");
    // below the first positive eigenvalue only the smoothing tail remains
    assert!(mollified_counting(&data, &moll, -moll.reach()).unwrap().abs() < 1e-6);
}

#[test]
fn perturbed_pauli_is_asymmetric() {
    let moll = Mollifier::new(6.0).unwrap();
    let data = lattice_oracle(&OracleFamily::pauli(diag(0.5)), 20.0 + moll.reach() + 1.0).unwrap();
    let rep = asymmetry_report(&data, &moll, 12.0, 20.0, 41).unwrap();
    assert!(rep.fit_plus.b < 0.0 && rep.fit_minus.b > 0.0);
    assert!((rep.fit_plus.b.abs() - rep.fit_minus.b.abs()).abs() < 0.1 * rep.fit_plus.b.abs());
    assert!(rep.a_relative_gap < 0.01);
    let dirac = lattice_oracle(&OracleFamily::K3Frame { k: 1, d: [0.0, 0.0] }, 20.0 + moll.reach() + 1.0).unwrap();
    let rep = asymmetry_report(&dirac, &moll, 12.0, 20.0, 41).unwrap();
    assert_eq!(rep.max_count_gap, 0);
    // both fitted b vanish up to fit noise, so their sum does too
    assert!(rep.b_sum < 0.05, "{}", rep.b_sum);
    assert!(rep.rows.iter().all(|row| (row.mollified_plus - row.mollified_minus).abs() < 1e-9));
}
