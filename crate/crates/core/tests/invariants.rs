mod common;

use std::f64::consts::TAU;

use common::{det, fiber, local_matrix, model, params, random_antisymmetric, sample};
use proptest::prelude::*;
use topo_core::error::TopoError;
use topo_core::invariants::{
    chern_kspace_oracle, chern_projection, chern_unitary, chern_value, dirac_phase, fermi_unitary, hardy_index,
    index_operator, nc_derivative, pair_index, pairing_range_check, pfaffian, spin_chern, streda_derivative,
    trace_per_volume, veg_invariant, veg_value, z2_kernel_parity, Contour, IndexSet, Region,
};
use topo_core::linalg::{self, c64, pauli, CMat, I};
use topo_core::model::{
    build_hamiltonian, make_named_model, Boundary, DisorderSpec, HamiltonianSample, LatticeSpec, MagneticFieldSpec,
    ModelDefinition, SymmetrySpec,
};
use topo_core::spectral::{diagonalize, diagonalize_matrix, fermi_projection, lowest_gap, FermiProjection};

fn i12() -> IndexSet {
    IndexSet::new(&[1, 2]).unwrap()
}

fn projection(h: &HamiltonianSample, mu: f64) -> FermiProjection {
    fermi_projection(&diagonalize(h).unwrap(), mu).unwrap()
}

fn harper_lowest(n: usize) -> (HamiltonianSample, FermiProjection) {
    let h = sample("harper", &[], &[n, n], Boundary::Periodic, 0);
    let e = diagonalize(&h).unwrap();
    let (a, b) = lowest_gap(&e, 0.5).unwrap();
    let p = fermi_projection(&e, 0.5 * (a + b)).unwrap();
    (h, p)
}

fn atomic(sizes: &[usize], field: MagneticFieldSpec) -> ModelDefinition {
    ModelDefinition {
        name: "atomic".into(),
        lattice: LatticeSpec::periodic(sizes, 2),
        field,
        hoppings: Vec::new(),
        onsite: linalg::from_real(&[&[2.0, 0.0], &[0.0, -2.0]]),
        disorder: DisorderSpec::clean(),
        symmetry: SymmetrySpec::none(),
        spin_z: None,
    }
}

/// Chern number of the lower QWZ band from `(i / 2 pi) int tr(P [d1 P, d2 P]) d^2k` with
/// `P = (1 - d.sigma / |d|) / 2` and central differences on a uniform grid.
fn qwz_chern_continuum(mass: f64, grid: usize) -> f64 {
    let p = |k1: f64, k2: f64| {
        let d = [k1.sin(), -k2.sin(), mass + k1.cos() + k2.cos()];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let dsig = &(&linalg::scale(&pauli(1), c64::new(d[0] / n, 0.0)) + &linalg::scale(&pauli(2), c64::new(d[1] / n, 0.0)))
            + &linalg::scale(&pauli(3), c64::new(d[2] / n, 0.0));
        linalg::scale(&(&pauli(0) - &dsig), c64::new(0.5, 0.0))
    };
    let h = TAU / grid as f64;
    let eps = 1e-5;
    let mut total = c64::new(0.0, 0.0);
    for a in 0..grid {
        for b in 0..grid {
            let (k1, k2) = (a as f64 * h, b as f64 * h);
            let d1 = linalg::scale(&(&p(k1 + eps, k2) - &p(k1 - eps, k2)), c64::new(0.5 / eps, 0.0));
            let d2 = linalg::scale(&(&p(k1, k2 + eps) - &p(k1, k2 - eps)), c64::new(0.5 / eps, 0.0));
            let comm = &(&d1 * &d2) - &(&d2 * &d1);
            total += linalg::trace(&(&p(k1, k2) * &comm)) * (h * h);
        }
    }
    (I * total).re / TAU
}

#[test]
fn continuum_oracle_is_quantized() {
    assert!((qwz_chern_continuum(1.0, 80) - 1.0).abs() < 1e-6);
    assert!(qwz_chern_continuum(3.0, 80).abs() < 1e-6);
}

#[test]
fn trace_per_volume_basics() {
    let l = LatticeSpec::periodic(&[4, 4], 1);
    let id = linalg::identity(16);
    assert_eq!(trace_per_volume(&id, &l, &Region::All), c64::new(1.0, 0.0));
    let (h, p) = harper_lowest(12);
    let ids = trace_per_volume(&p.projector, &h.lattice, &Region::All).re;
    assert!((ids - 1.0 / 3.0).abs() < 1e-10);
    let ch0 = chern_projection(&p, &h.lattice, &IndexSet::empty(), &Region::All).unwrap();
    assert!((ch0.value - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn derivative_of_shift_and_diagonal() {
    let l = LatticeSpec::open(&[6], 1);
    let s = CMat::from_fn(6, 6, |i, j| if i == j + 1 { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let ds = nc_derivative(&s, &l, 1);
    assert!(linalg::max_diff(&ds, &linalg::scale(&s, I)) < 1e-15);
    let d = linalg::diag(&(0..6).map(|k| c64::new(k as f64, 0.3)).collect::<Vec<_>>());
    assert!(linalg::max_abs(&nc_derivative(&d, &l, 1)) == 0.0);
}

#[test]
fn qwz_torus_chern_matches_continuum_oracle() {
    let h = sample("qwz", &[("mass", 1.0)], &[24, 24], Boundary::Periodic, 0);
    let ch = chern_projection(&projection(&h, 0.0), &h.lattice, &i12(), &Region::All).unwrap();
    let oracle = qwz_chern_continuum(1.0, 80);
    assert!((ch.value - oracle).abs() < 1e-3, "{} vs {oracle}", ch.value);
    assert!(ch.diagnostic.abs() < 1e-10);
}

#[test]
fn chern_of_trivial_projections_vanishes() {
    let l = LatticeSpec::periodic(&[4, 4], 2);
    for p in [linalg::zeros(32, 32), linalg::identity(32)] {
        assert_eq!(chern_value(&p, &l, &i12(), &Region::All).unwrap(), c64::new(0.0, 0.0));
    }
}

#[test]
fn ssh_winding() {
    for (m, expected) in [(0.0, 1.0), (0.5, 1.0), (2.0, 0.0)] {
        let mdl = model("ssh", &[("m", m)], &[256], Boundary::Periodic);
        let h = build_hamiltonian(&mdl, 0).unwrap();
        let p = projection(&h, 0.0);
        let (u, sector, _) = fermi_unitary(&p, &h.lattice, &mdl.symmetry).unwrap();
        let w = chern_unitary(&u, &sector, &IndexSet::new(&[1]).unwrap(), &Region::All).unwrap();
        assert!((w.value - expected).abs() < 1e-6, "m = {m}: {}", w.value);
    }
    let l = LatticeSpec::periodic(&[16], 1);
    let id = chern_unitary(&linalg::identity(16), &l, &IndexSet::new(&[1]).unwrap(), &Region::All).unwrap();
    assert_eq!(id.value, 0.0);
}

#[test]
fn fermi_unitary_reconstructs_the_projection() {
    let mdl = model("ssh", &[("m", 0.5)], &[32], Boundary::Periodic);
    let h = build_hamiltonian(&mdl, 0).unwrap();
    let p = projection(&h, 0.0);
    let (u, _, _) = fermi_unitary(&p, &h.lattice, &mdl.symmetry).unwrap();
    let n = 32;
    let rebuilt = CMat::from_fn(2 * n, 2 * n, |r, c| {
        let (sr, or) = (r / 2, r % 2);
        let (sc, oc) = (c / 2, c % 2);
        let half = c64::new(0.5, 0.0);
        match (or, oc) {
            (0, 0) | (1, 1) => if sr == sc { half } else { c64::new(0.0, 0.0) },
            (1, 0) => u[(sr, sc)] * half,
            _ => u[(sc, sr)].conj() * half,
        }
    });
    assert!(linalg::max_diff(&rebuilt, &p.projector) < 1e-8);
}

#[test]
fn winding_survives_small_chiral_breaking() {
    let clean = model("ssh", &[("m", 0.9)], &[128], Boundary::Periodic);
    let mut broken = clean.clone();
    broken.onsite = &broken.onsite + &linalg::scale(&pauli(3), c64::new(0.05, 0.0));
    let i1 = IndexSet::new(&[1]).unwrap();
    let mut values = Vec::new();
    for m in [&clean, &broken] {
        let h = build_hamiltonian(m, 0).unwrap();
        let (u, sector, _) = fermi_unitary(&projection(&h, 0.0), &h.lattice, &clean.symmetry).unwrap();
        values.push(chern_unitary(&u, &sector, &i1, &Region::All).unwrap().value);
    }
    assert!((values[0] - 1.0).abs() < 1e-6);
    assert_eq!(values[1].round(), 1.0);
}

#[test]
fn kspace_oracle_values() {
    let harper = model("harper", &[], &[6, 6], Boundary::Periodic);
    assert_eq!(chern_kspace_oracle(&harper, &[0], &i12(), 24).unwrap().rounded, 1);
    let flat = atomic(&[4, 4], MagneticFieldSpec::zero(2));
    assert_eq!(chern_kspace_oracle(&flat, &[0], &i12(), 8).unwrap().value, 0.0);
    let ssh = model("ssh", &[], &[8], Boundary::Periodic);
    let w = chern_kspace_oracle(&ssh, &[0], &IndexSet::new(&[1]).unwrap(), 64).unwrap();
    assert!((w.value - 1.0).abs() < 1e-8);
    let qwz = model("qwz", &[], &[4, 4], Boundary::Periodic);
    let k = chern_kspace_oracle(&qwz, &[0], &i12(), 64).unwrap();
    assert!((k.value - qwz_chern_continuum(1.0, 80)).abs() < 1e-6);
}

#[test]
fn dirac_phase_entries() {
    let l = LatticeSpec::open(&[6, 5], 2);
    let dp = dirac_phase(&l, None).unwrap();
    let g = dp.g.as_ref().unwrap();
    for idx in 0..l.hilbert_dim() {
        let x = l.coords(idx / 2);
        let z = c64::new(x[0] as f64 - dp.origin[0], x[1] as f64 - dp.origin[1]);
        assert!((g[idx] - z / z.norm()).norm() < 1e-12);
    }
    let gm = dp.g_matrix().unwrap();
    assert!(linalg::max_diff(&(&gm * gm.adjoint()), &linalg::identity(60)) < 1e-12);
    assert_eq!(linalg::to_vec_row_major(&linalg::transpose(&gm)), linalg::to_vec_row_major(&gm));

    let l1 = LatticeSpec::open(&[8], 1);
    let d1 = dirac_phase(&l1, Some(vec![3.5])).unwrap();
    let e = d1.e.unwrap();
    for n in 0..8 {
        let expected = if n as f64 > 3.5 { 1.0 } else { 0.0 };
        assert!((e[(n, n)].re - expected).abs() < 1e-12);
    }
    assert!(matches!(dirac_phase(&l1, Some(vec![3.0])), Err(TopoError::OriginOnLattice)));
}

#[test]
fn pair_index_of_qwz_and_empty_projection() {
    let h = sample("qwz", &[("mass", 1.0)], &[24, 24], Boundary::Open, 0);
    let p = projection(&h, 0.0);
    let dirac = dirac_phase(&h.lattice, None).unwrap();
    let pi = pair_index(&p, &h.lattice, &dirac, 3, None).unwrap();
    assert_eq!(pi.rounded, 1);
    let ch = chern_projection(&p, &h.lattice, &i12(), &Region::Core(0.5)).unwrap();
    assert!((ch.value - pi.value).abs() < 0.05);
    let empty = FermiProjection::from_frame(CMat::zeros(h.dim(), 0), -10.0, (f64::NEG_INFINITY, -9.0));
    assert_eq!(pair_index(&empty, &h.lattice, &dirac, 3, None).unwrap().value, 0.0);
}

#[test]
fn hardy_index_of_ssh() {
    for (m, expected) in [(0.0, 1), (2.0, 0)] {
        let mdl = model("ssh", &[("m", m)], &[256], Boundary::Periodic);
        let h = build_hamiltonian(&mdl, 0).unwrap();
        let p = projection(&h, 0.0);
        let (u, sector, _) = fermi_unitary(&p, &h.lattice, &mdl.symmetry).unwrap();
        let dirac = dirac_phase(&sector, None).unwrap();
        assert_eq!(hardy_index(&u, &sector, &dirac, 1e-3).unwrap().rounded, expected, "m = {m}");
    }
    let l = LatticeSpec::open(&[64], 1);
    let dirac = dirac_phase(&l, None).unwrap();
    assert_eq!(hardy_index(&linalg::identity(64), &l, &dirac, 1e-3).unwrap().value, 0.0);
}

#[test]
fn antisymmetric_unitary_has_even_kernel_parity() {
    let l = LatticeSpec::open(&[3, 3], 2);
    let isy = linalg::from_real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
    let sym = SymmetrySpec::new(Some((isy.clone(), -1)), None, None).unwrap();
    let t = fiber(9, &pauli(0));
    let z = z2_kernel_parity(&t, &sym, &l, &Region::All, None).unwrap();
    assert_eq!((z.parity, z.kernel_dim), (0, 0));
    let bad = fiber(9, &pauli(3));
    assert!(matches!(z2_kernel_parity(&bad, &sym, &l, &Region::All, None), Err(TopoError::NotAntisymmetric(_))));
}

#[test]
fn qsh_spin_chern() {
    let cases = [(1.0, 0.0, 1.0), (1.0, 0.1, 1.0), (3.0, 0.0, 0.0)];
    for (mass, zeeman, expected) in cases {
        let mdl = model("kane_mele_qsh", &[("mass", mass), ("zeeman", zeeman)], &[14, 14], Boundary::Open);
        let h = build_hamiltonian(&mdl, 0).unwrap();
        let p = projection(&h, 0.0);
        let s = spin_chern(&p, mdl.spin_z.as_ref().unwrap(), &h.lattice, &Region::Core(0.5)).unwrap();
        assert!((s.sch.value - expected).abs() < 0.05, "mass {mass} zeeman {zeeman}: {}", s.sch.value);
        assert!(s.gap.0 < 0.0 && s.gap.1 > 0.0);
        assert!(s.sum_rule.abs() < 1e-8);
    }
}

#[test]
fn qsh_index_operator_is_antisymmetric() {
    let mdl = model("kane_mele_qsh", &[("rashba", 0.3)], &[6, 6], Boundary::Open);
    let h = build_hamiltonian(&mdl, 0).unwrap();
    let t = index_operator(&projection(&h, 0.0), &dirac_phase(&h.lattice, None).unwrap()).unwrap();
    let s = fiber(36, &mdl.symmetry.s_tr.as_ref().unwrap().0);
    let ts = &t * &s;
    assert!(linalg::max_abs(&(&ts + &linalg::transpose(&ts))) < 1e-10);
}

#[test]
fn streda_on_harper_and_atomic_insulator() {
    let n = 24;
    let b = TAU * 8.0 / (n * n) as f64;
    let harper = make_named_model("harper", &params(&[("b", b)]), &[n, n], &[Boundary::Periodic; 2]).unwrap();
    let s = streda_derivative(&harper, &IndexSet::empty(), (1, 2), TAU / (n * n) as f64, None).unwrap();
    assert!((s.rhs - 1.0 / TAU).abs() / (1.0 / TAU) < 0.05);
    assert!((s.lhs - s.rhs).abs() / s.rhs.abs() < 0.05, "lhs {} rhs {}", s.lhs, s.rhs);

    let field = MagneticFieldSpec::planar(2, TAU / 16.0);
    let a = streda_derivative(&atomic(&[4, 4], field), &IndexSet::empty(), (1, 2), TAU / 16.0, Some(0.0)).unwrap();
    assert_eq!((a.lhs, a.rhs), (0.0, 0.0));
}

#[test]
fn veg_reproduces_chern_numbers() {
    for (mass, expected) in [(1.0, 1.0), (3.0, 0.0)] {
        let h = sample("qwz", &[("mass", mass)], &[12, 12], Boundary::Periodic, 0);
        let v = veg_invariant(&h, 0.0, 64).unwrap();
        assert!((v.value - expected).abs() < 1e-2, "mass {mass}: {}", v.value);
    }
}

#[test]
fn veg_converges_under_contour_refinement() {
    let h = sample("qwz", &[("mass", 1.0)], &[8, 8], Boundary::Periodic, 0);
    let e = diagonalize_matrix(&h.matrix).unwrap();
    let contour = Contour::through(0.0, e.values[0] - 1.0);
    let at = |n: usize| veg_value(&h.matrix, &e, &h.lattice, &contour, n).unwrap();
    let reference = at(256);
    let (coarse, fine) = ((at(16) - reference).norm(), (at(32) - reference).norm());
    assert!(coarse > 2.0 * fine, "coarse {coarse:e} fine {fine:e}");
}

#[test]
fn pairing_range() {
    let i = i12();
    let same = pairing_range_check(2, TAU / 3.0, &i, &i, 12).unwrap();
    assert!((same.measured - 1.0).abs() < 0.05 && same.predicted == 1.0, "{same:?}");
    let none = pairing_range_check(2, TAU / 3.0, &i, &IndexSet::empty(), 12).unwrap();
    assert_eq!((none.measured, none.predicted), (0.0, 0.0));
    let b = TAU * 8.0 / 576.0;
    let slope = pairing_range_check(2, b, &IndexSet::empty(), &i, 24).unwrap();
    assert!((slope.predicted - b / TAU).abs() < 1e-15);
    assert!(slope.difference < 1e-6, "{slope:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pfaffian_squares_to_determinant(entries in proptest::collection::vec(-1.0f64..1.0, 28)) {
        let a = random_antisymmetric(8, &entries);
        let pf = pfaffian(&a).unwrap();
        let d = det(&a);
        prop_assert!((pf * pf - d).abs() <= 1e-8 * d.abs().max(1e-12));
    }

    #[test]
    fn pfaffian_four_by_four_cofactor(e in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let a = random_antisymmetric(4, &e);
        let expected = e[0] * e[5] - e[1] * e[4] + e[2] * e[3];
        prop_assert!((pfaffian(&a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn leibniz_rule(seed_a in proptest::collection::vec(-1.0f64..1.0, 11), seed_b in proptest::collection::vec(-1.0f64..1.0, 13), axis in 1usize..3) {
        let l = LatticeSpec::periodic(&[12, 12], 1);
        let (a, b) = (local_matrix(&l, &seed_a), local_matrix(&l, &seed_b));
        let lhs = nc_derivative(&(&a * &b), &l, axis);
        let rhs = &(&nc_derivative(&a, &l, axis) * &b) + &(&a * &nc_derivative(&b, &l, axis));
        prop_assert!(linalg::max_diff(&lhs, &rhs) < 1e-9);
    }

    #[test]
    fn derivatives_are_traceless(seed in proptest::collection::vec(-1.0f64..1.0, 9), axis in 1usize..3) {
        let l = LatticeSpec::periodic(&[8, 8], 2);
        let a = local_matrix(&l, &seed);
        prop_assert!(trace_per_volume(&nc_derivative(&a, &l, axis), &l, &Region::All).norm() < 1e-12);
    }

    #[test]
    fn chern_is_additive_over_direct_sums(m1 in prop::sample::select(vec![-1.0, 1.0, 3.0]), m2 in prop::sample::select(vec![-1.0, 1.0, 3.0])) {
        let n = 8;
        let p1 = projection(&sample("qwz", &[("mass", m1)], &[n, n], Boundary::Periodic, 0), 0.0);
        let p2 = projection(&sample("qwz", &[("mass", m2)], &[n, n], Boundary::Periodic, 0), 0.0);
        let l = LatticeSpec::periodic(&[n, n], 2);
        let l4 = LatticeSpec::periodic(&[n, n], 4);
        let sites = n * n;
        let sum = CMat::from_fn(4 * sites, 4 * sites, |r, c| {
            let (sr, or) = (r / 4, r % 4);
            let (sc, oc) = (c / 4, c % 4);
            match (or < 2, oc < 2) {
                (true, true) => p1.projector[(2 * sr + or, 2 * sc + oc)],
                (false, false) => p2.projector[(2 * sr + or - 2, 2 * sc + oc - 2)],
                _ => c64::new(0.0, 0.0),
            }
        });
        let c1 = chern_value(&p1.projector, &l, &i12(), &Region::All).unwrap();
        let c2 = chern_value(&p2.projector, &l, &i12(), &Region::All).unwrap();
        let c = chern_value(&sum, &l4, &i12(), &Region::All).unwrap();
        prop_assert!((c - c1 - c2).norm() < 1e-10);
    }
}
