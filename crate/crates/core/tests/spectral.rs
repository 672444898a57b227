mod common;

use std::f64::consts::{PI, TAU};

use common::{model, sample};
use proptest::prelude::*;
use topo_core::boundary::half_space;
use topo_core::error::TopoError;
use topo_core::linalg::{self, c64, CMat};
use topo_core::model::{build_hamiltonian, Boundary, DisorderSpec, LatticeSpec, MagneticFieldSpec, ModelDefinition, SymmetrySpec};
use topo_core::spectral::{
    detect_gap, diagonalize, diagonalize_matrix, eval_switch, fermi_projection, lowest_gap, smoothstep, SwitchFunction,
    SwitchKind,
};

fn atomic(sizes: &[usize]) -> ModelDefinition {
    ModelDefinition {
        name: "atomic".into(),
        lattice: LatticeSpec::periodic(sizes, 2),
        field: MagneticFieldSpec::zero(sizes.len()),
        hoppings: Vec::new(),
        onsite: linalg::from_real(&[&[2.0, 0.0], &[0.0, -2.0]]),
        disorder: DisorderSpec::clean(),
        symmetry: SymmetrySpec::none(),
        spin_z: None,
    }
}

fn exp_unitary(f: &SwitchFunction, e: &topo_core::spectral::EigenData) -> CMat {
    e.apply(|x| linalg::cis(-TAU * f.eval(x)))
}

#[test]
fn eigenpairs_have_small_residuals() {
    let h = sample("qwz", &[("disorder", 0.5)], &[8, 8], Boundary::Open, 1);
    let e = diagonalize(&h).unwrap();
    let norm = linalg::op_norm(&h.matrix).unwrap();
    assert!(e.residual(&h.matrix) <= 1e-9 * norm);
    let n = e.dim();
    assert!(linalg::max_diff(&(e.vectors.adjoint() * &e.vectors), &linalg::identity(n)) < 1e-9);
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn atomic_spectrum() {
    let h = build_hamiltonian(&atomic(&[3, 3]), 0).unwrap();
    let e = diagonalize(&h).unwrap();
    assert!(e.values[..9].iter().all(|&x| (x + 2.0).abs() < 1e-12));
    assert!(e.values[9..].iter().all(|&x| (x - 2.0).abs() < 1e-12));
    let (lo, hi) = detect_gap(&e, 0.0).unwrap();
    assert!((hi - lo - 4.0).abs() < 1e-12);
}

#[test]
fn symmetric_spectra() {
    for h in [
        sample("ssh", &[], &[8], Boundary::Periodic, 0),
        sample("kitaev_chain", &[], &[16], Boundary::Periodic, 0),
    ] {
        let v = diagonalize(&h).unwrap().values;
        let n = v.len();
        assert!((0..n).all(|k| (v[k] + v[n - 1 - k]).abs() < 1e-10));
    }
}

#[test]
fn fermi_projection_ranks() {
    let h = sample("ssh", &[], &[32], Boundary::Periodic, 0);
    let e = diagonalize(&h).unwrap();
    let p = fermi_projection(&e, 0.0).unwrap();
    assert_eq!(p.rank, 32);
    assert!(linalg::max_diff(&(&p.projector * &p.projector), &p.projector) < 1e-9);
    assert!(linalg::hermitian_defect(&p.projector) < 1e-9);
    let empty = fermi_projection(&e, -10.0).unwrap();
    assert_eq!(empty.rank, 0);
    assert!(linalg::max_abs(&empty.projector) == 0.0);

    let h = sample("harper", &[], &[12, 12], Boundary::Periodic, 0);
    let e = diagonalize(&h).unwrap();
    let (a, b) = lowest_gap(&e, 0.5).unwrap();
    let p = fermi_projection(&e, 0.5 * (a + b)).unwrap();
    assert_eq!(p.rank, 48);
    assert!(e.values.iter().all(|&x| x <= p.gap.0 || x >= p.gap.1));
}

#[test]
fn gap_detection() {
    let e = diagonalize(&sample("ssh", &[], &[64], Boundary::Periodic, 0)).unwrap();
    let (lo, hi) = detect_gap(&e, 0.0).unwrap();
    assert!((hi - lo - 2.0).abs() < 0.01);
    let e = diagonalize(&sample("ssh", &[("m", 1.0)], &[64], Boundary::Periodic, 0)).unwrap();
    assert!(matches!(detect_gap(&e, 0.0), Err(TopoError::NoGap { .. })));
}

#[test]
fn exp_switch_on_gapped_spectra() {
    let e = diagonalize(&build_hamiltonian(&atomic(&[4]), 0).unwrap()).unwrap();
    let below = SwitchFunction::exp(3.0, 4.0).unwrap();
    assert!(linalg::max_abs(&eval_switch(&below, &e)) < 1e-14);
    assert!(linalg::max_diff(&exp_unitary(&below, &e), &linalg::identity(8)) < 1e-12);

    let e = diagonalize(&sample("harper", &[], &[12, 12], Boundary::Periodic, 0)).unwrap();
    let (a, b) = lowest_gap(&e, 0.5).unwrap();
    let f = SwitchFunction::exp(a, b).unwrap();
    assert!(linalg::max_diff(&exp_unitary(&f, &e), &linalg::identity(144)) < 1e-10);
}

#[test]
fn exp_switch_on_harper_cylinder_is_nontrivial() {
    let m = model("harper", &[], &[24, 24], Boundary::Periodic);
    let torus = diagonalize(&build_hamiltonian(&m, 0).unwrap()).unwrap();
    let (a, b) = lowest_gap(&torus, 0.1).unwrap();
    let half = half_space(&m, 0, 0.5 * (a + b)).unwrap();
    let f = SwitchFunction::exp(half.bulk_gap.0, half.bulk_gap.1).unwrap();
    let u = exp_unitary(&f, &half.diagonalize().unwrap());
    let dev = linalg::op_norm(&(&u - &linalg::identity(u.nrows()))).unwrap();
    assert!(dev >= 0.1, "deviation {dev}");
}

#[test]
fn smoothstep_matches_closed_form() {
    for u in [0.1, 0.37, 0.5, 0.81] {
        let cubic = 3.0 * u * u - 2.0 * u * u * u;
        assert!((smoothstep(1, u) - cubic).abs() < 1e-14);
        let quintic = 6.0 * u.powi(5) - 15.0 * u.powi(4) + 10.0 * u.powi(3);
        assert!((smoothstep(2, u) - quintic).abs() < 1e-14);
    }
}

#[test]
fn invalid_switches_rejected() {
    assert!(SwitchFunction::exp(1.0, 0.0).is_err());
    assert!(SwitchFunction::new(SwitchKind::Exp, 0.0, 1.0, 4).is_err());
    assert!(SwitchFunction::exp(0.0, f64::NAN).is_err());
}

#[test]
fn functional_calculus_of_a_known_matrix() {
    let h = linalg::from_rows(&[&[(0.0, 0.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, 0.0)]]);
    let e = diagonalize_matrix(&h).unwrap();
    let f = e.apply(|x| c64::new((PI * x / 2.0).cos(), 0.0));
    assert!(linalg::max_abs(&f) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_switch_is_monotone_with_fixed_ends(a in -3.0f64..3.0, w in 0.01f64..2.0, order in 0usize..6, x in -5.0f64..5.0, dx in 0.0f64..0.5) {
        let f = SwitchFunction::new(SwitchKind::Exp, a, a + w, 2 * order + 1).unwrap();
        prop_assert!(f.eval(x + dx) >= f.eval(x) - 1e-12);
        prop_assert_eq!(f.eval(a - 1e-9), 0.0);
        prop_assert_eq!(f.eval(a + w + 1e-9), 1.0);
        prop_assert!(f.deriv(x) >= -1e-9);
    }

    #[test]
    fn ind_switch_is_odd_about_the_centre(a in -3.0f64..3.0, w in 0.01f64..2.0, order in 0usize..6, s in 0.0f64..1.5) {
        let f = SwitchFunction::new(SwitchKind::Ind, a, a + w, 2 * order + 1).unwrap();
        let c = a + w / 2.0;
        let d = s * w;
        prop_assert!((f.eval(c + d) + f.eval(c - d)).abs() < 1e-10);
        prop_assert_eq!(f.eval(a - 1.0), -1.0);
        prop_assert_eq!(f.eval(a + w + 1.0), 1.0);
    }
}
