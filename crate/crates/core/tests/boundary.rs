mod common;

use std::f64::consts::TAU;

use common::{model, params};
use topo_core::boundary::{
    boundary_current, boundary_winding, edge_dispersion, exp_map, gap_coverage, half_space, ind_map, spin_edge_current,
    surface_sectors, HalfSpaceSample,
};
use topo_core::invariants::IndexSet;
use topo_core::model::{make_named_model, Boundary, ModelDefinition, SymmetrySpec};
use topo_core::spectral::{lowest_gap, SwitchFunction, SwitchKind};

fn harper(sizes: &[usize], disorder: f64) -> ModelDefinition {
    model("harper", &[("disorder", disorder)], sizes, Boundary::Periodic)
}

/// Half-space sample at the centre of the lowest sizeable gap of the torus companion.
fn lowest_half(mdl: &ModelDefinition, seed: u64) -> HalfSpaceSample {
    let torus = topo_core::spectral::diagonalize(&topo_core::model::build_hamiltonian(mdl, seed).unwrap()).unwrap();
    let (a, b) = lowest_gap(&torus, 0.5).unwrap();
    half_space(mdl, seed, 0.5 * (a + b)).unwrap()
}

/// Switch over the central part of the certified gap, leaving `margin` of its width on each side.
fn inner_switch(half: &HalfSpaceSample, kind: SwitchKind, margin: f64, degree: usize) -> SwitchFunction {
    let (a, b) = half.bulk_gap;
    let w = b - a;
    SwitchFunction::new(kind, a + margin * w, b - margin * w, degree).unwrap()
}

fn i1() -> IndexSet {
    IndexSet::new(&[1]).unwrap()
}

#[test]
fn exp_map_is_trivial_without_edge_states() {
    let mdl = model("qwz", &[("mass", 3.0)], &[8, 8], Boundary::Periodic);
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let f = inner_switch(&half, SwitchKind::Exp, 0.1, 7);
    let u = exp_map(&half, &f).unwrap();
    assert!(u.unitarity_defect < 1e-9);
    assert!(u.profile.iter().all(|&p| p < 1e-6), "{:?}", u.profile);
}

#[test]
fn harper_edge_unitary_is_localized_at_the_boundary() {
    let half = lowest_half(&harper(&[24, 24], 0.0), 0);
    let f = inner_switch(&half, SwitchKind::Exp, 0.2, 7);
    let u = exp_map(&half, &f).unwrap();
    assert!(u.unitarity_defect < 1e-9);
    assert!(u.profile[0] >= 0.5, "{}", u.profile[0]);
    assert!(u.profile[12] < 1e-4, "{}", u.profile[12]);
    let xi = u.decay_length.expect("decay fit");
    assert!(xi > 0.0 && xi < 4.0, "{xi}");
}

#[test]
fn harper_boundary_winding_matches_bulk() {
    let half = lowest_half(&harper(&[24, 24], 0.0), 0);
    let f = inner_switch(&half, SwitchKind::Exp, 0.2, 7);
    let w = boundary_winding(&half, &f, &i1(), 16).unwrap();
    assert!((w.value - 1.0).abs() < 1e-2, "{}", w.value);
    assert_eq!(w.rounded, 1);
}

#[test]
fn boundary_winding_is_independent_of_circumference() {
    let mut values = Vec::new();
    for n1 in [12, 24] {
        let half = lowest_half(&harper(&[n1, 24], 0.0), 0);
        let f = inner_switch(&half, SwitchKind::Exp, 0.2, 7);
        values.push(boundary_winding(&half, &f, &i1(), 16).unwrap().value);
    }
    assert!((values[0] - values[1]).abs() < 1e-2, "{values:?}");
}

#[test]
fn trivial_boundary_winding_vanishes() {
    let mdl = model("qwz", &[("mass", 3.0)], &[12, 12], Boundary::Periodic);
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let f = inner_switch(&half, SwitchKind::Exp, 0.1, 7);
    let w = boundary_winding(&half, &f, &i1(), 16).unwrap();
    assert!(w.value.abs() < 1e-6, "{}", w.value);
}

#[test]
fn boundary_winding_rejects_the_normal_axis() {
    let half = lowest_half(&harper(&[6, 6], 0.0), 0);
    let f = inner_switch(&half, SwitchKind::Exp, 0.2, 7);
    assert!(boundary_winding(&half, &f, &IndexSet::new(&[2]).unwrap(), 8).is_err());
}

#[test]
fn ssh_index_map_counts_the_edge_zero_mode() {
    for (m, expected) in [(0.0, 1.0), (2.0, 0.0)] {
        let mdl = model("ssh", &[("m", m)], &[64], Boundary::Periodic);
        let half = half_space(&mdl, 0, 0.0).unwrap();
        let g = 0.8 * half.bulk_gap.1.min(-half.bulk_gap.0);
        let f = SwitchFunction::ind(-g, g).unwrap();
        let r = ind_map(&half, &f, &mdl.symmetry).unwrap();
        assert!((r.trace.abs() - expected).abs() < 1e-6, "m = {m}: {}", r.trace);
    }
}

#[test]
fn index_map_needs_a_symmetric_switch() {
    let mdl = model("ssh", &[], &[32], Boundary::Periodic);
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let f = SwitchFunction::ind(-0.5, 0.3).unwrap();
    assert!(ind_map(&half, &f, &mdl.symmetry).is_err());
    let f = SwitchFunction::ind(-0.5, 0.5).unwrap();
    assert!(ind_map(&half, &f, &SymmetrySpec::none()).is_err());
}

#[test]
fn chiral_surface_band_splits_by_chirality() {
    let n = 8;
    let b = TAU * n as f64 / (n * n) as f64;
    let mdl = model("chiral_3d", &[("b", b)], &[n, n, n], Boundary::Periodic);
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let s = surface_sectors(&half, &mdl.symmetry).unwrap();
    assert!(s.band_size > 0);
    assert!(s.band_edge.1 > 5.0 * s.band_edge.0);
    let diff = s.plus_trace - s.minus_trace;
    assert!((diff - diff.round()).abs() < 0.05, "{} {}", s.plus_trace, s.minus_trace);
    assert!(diff.round() != 0.0);
}

#[test]
fn harper_boundary_current_is_quantized_and_antisymmetric() {
    let half = lowest_half(&harper(&[24, 24], 0.0), 0);
    let f = inner_switch(&half, SwitchKind::Exp, 0.0, 7);
    let c = boundary_current(&half, &f).unwrap();
    assert!((c.lower.abs() - 1.0).abs() < 0.02, "{}", c.lower);
    assert!((c.lower + c.upper).abs() < 1e-3, "{} {}", c.lower, c.upper);
}

#[test]
fn trivial_boundary_current_vanishes() {
    let mdl = model("qwz", &[("mass", 3.0)], &[12, 12], Boundary::Periodic);
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let f = inner_switch(&half, SwitchKind::Exp, 0.0, 7);
    let c = boundary_current(&half, &f).unwrap();
    assert!(c.lower.abs() < 1e-6 && c.upper.abs() < 1e-6, "{} {}", c.lower, c.upper);
}

#[test]
fn boundary_current_rejects_a_switch_outside_the_gap() {
    let half = lowest_half(&harper(&[12, 12], 0.0), 0);
    let (a, b) = half.bulk_gap;
    let f = SwitchFunction::exp(a - 0.5, b).unwrap();
    assert!(boundary_current(&half, &f).is_err());
}

fn qsh_current(kv: &[(&str, f64)]) -> (f64, f64, f64) {
    let mdl = make_named_model("kane_mele_qsh", &params(kv), &[16, 16], &[Boundary::Periodic; 2]).unwrap();
    let half = half_space(&mdl, 0, 0.0).unwrap();
    let f = inner_switch(&half, SwitchKind::Exp, 0.05, 13);
    let s = spin_edge_current(&half, &f, mdl.spin_z.as_ref().unwrap()).unwrap();
    (s.current.lower, s.commutator, s.budget)
}

#[test]
fn decoupled_spin_current_equals_spin_chern_number() {
    let (j, comm, _) = qsh_current(&[]);
    assert!(comm < 1e-12);
    assert!((j.abs() - 1.0).abs() < 1e-2, "{j}");
    let (j, _, _) = qsh_current(&[("mass", 3.0)]);
    assert!(j.abs() < 1e-6, "{j}");
}

#[test]
fn coupled_spin_current_stays_within_budget() {
    let (j0, _, _) = qsh_current(&[]);
    let (j, comm, budget) = qsh_current(&[("rashba", 0.1), ("zeeman", 0.1)]);
    assert!(comm > 0.0);
    assert!(j != 0.0);
    assert!((j - j0).abs() <= budget, "{j} vs {j0}, budget {budget}");
}

#[test]
fn harper_half_space_fills_the_bulk_gap() {
    for seed in 0..3 {
        let half = lowest_half(&harper(&[96, 12], 0.3), seed);
        let e = half.diagonalize().unwrap();
        let counts = gap_coverage(&half, &e, 8);
        assert_eq!(counts.len(), 8);
        assert!(counts.iter().all(|&c| c > 0), "seed {seed}: {counts:?}");
    }
}

#[test]
fn harper_edge_dispersion_resolves_both_edges() {
    let half = lowest_half(&harper(&[24, 24], 0.0), 0);
    let rows = edge_dispersion(&half).unwrap();
    let (lo, hi) = half.bulk_gap;
    let in_gap: Vec<_> = rows.iter().filter(|r| r.1 > lo && r.1 < hi).collect();
    assert!(in_gap.iter().any(|r| r.3 > 0.9));
    assert!(in_gap.iter().any(|r| r.3 < 0.1));
    let torus_dim = half.hamiltonian.dim();
    assert_eq!(rows.len(), torus_dim);
}
