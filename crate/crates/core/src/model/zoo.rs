use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::definition::{c, Hopping, ModelDefinition};
use super::disorder::DisorderSpec;
use super::field::MagneticFieldSpec;
use super::lattice::{Boundary, LatticeSpec};
use super::symmetry::SymmetrySpec;
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, from_rows, kron, pauli, CMat, I};

/// Real-valued named parameters.
pub type Params = BTreeMap<String, f64>;

pub const MODEL_NAMES: [&str; 6] = ["ssh", "harper", "qwz", "kane_mele_qsh", "kitaev_chain", "chiral_3d"];

/// One-line description of each named model and its parameters.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "ssh" => "d=1, L=2 chiral chain; m (mass), disorder",
        "harper" => "d=2, L=1 magnetic square lattice; b (flux per plaquette, default 2pi/3), disorder",
        "qwz" => "d=2, L=2 Chern insulator; mass (default 1), b, disorder",
        "kane_mele_qsh" => "d=2, L=4 spin Hall insulator; mass (default 1), rashba, zeeman, disorder",
        "kitaev_chain" => "d=1, L=2 BdG ladder; mu, w (random chemical potential strength)",
        "chiral_3d" => "d=3, L=4 chiral insulator; mass (default 2), b (B_12), disorder",
        _ => return None,
    })
}

pub fn param(p: &Params, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn check_keys(name: &str, p: &Params, allowed: &[&str]) -> Result<()> {
    for k in p.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(TopoError::ParamOutOfRange(format!("{name} has no parameter '{k}'")));
        }
    }
    for (k, v) in p {
        if !v.is_finite() {
            return Err(TopoError::ParamOutOfRange(format!("{k} = {v}")));
        }
    }
    Ok(())
}

fn lattice_for(name: &str, d: usize, sizes: &[usize], boundary: &[Boundary], fiber: usize) -> Result<LatticeSpec> {
    if sizes.len() != d || boundary.len() != d {
        return Err(TopoError::ParamOutOfRange(format!("{name} needs {d} linear sizes and boundary flags")));
    }
    LatticeSpec::new(sizes.to_vec(), boundary.to_vec(), fiber)
}

/// Adds the reverse partner of every hop.
fn symmetric(hops: Vec<Hopping>) -> Vec<Hopping> {
    let mut out = Vec::with_capacity(2 * hops.len());
    for h in hops {
        let rev: Vec<i64> = h.disp.iter().map(|x| -x).collect();
        let adj = linalg::adjoint(&h.matrix);
        out.push(h);
        out.push(Hopping::new(&rev, adj));
    }
    out
}

fn unit(d: usize, axis: usize) -> Vec<i64> {
    let mut v = vec![0; d];
    v[axis] = 1;
    v
}

fn axpy(a: &CMat, s: c64, b: &CMat) -> CMat {
    a + &linalg::scale(b, s)
}

/// QWZ hop along `+e_axis` on the two-band fiber.
fn qwz_hop(axis: usize) -> CMat {
    let half = c(0.5);
    match axis {
        0 => linalg::scale(&axpy(&pauli(3), I, &pauli(1)), half),
        _ => linalg::scale(&axpy(&pauli(3), -I, &pauli(2)), half),
    }
}

/// Builds one of the shipped models.
pub fn make_named_model(name: &str, params: &Params, sizes: &[usize], boundary: &[Boundary]) -> Result<ModelDefinition> {
    let lambda = param(params, "disorder", 0.0);
    if lambda < 0.0 {
        return Err(TopoError::ParamOutOfRange("disorder must be non-negative".into()));
    }
    let model = match name {
        "ssh" => {
            check_keys(name, params, &["m", "disorder"])?;
            let m = param(params, "m", 0.0);
            let lattice = lattice_for(name, 1, sizes, boundary, 2)?;
            let hop = from_rows(&[&[(0.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]]);
            let sym = SymmetrySpec::new(None, None, Some(pauli(3)))?;
            let disorder = DisorderSpec::constrained(pauli(2), lambda, &sym)?;
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::zero(1),
                hoppings: symmetric(vec![Hopping::new(&[1], hop)]),
                onsite: linalg::scale(&pauli(2), c(m)),
                disorder,
                symmetry: sym,
                spin_z: None,
            }
        }
        "harper" => {
            check_keys(name, params, &["b", "disorder"])?;
            let b = param(params, "b", TAU / 3.0);
            let lattice = lattice_for(name, 2, sizes, boundary, 1)?;
            let id = linalg::identity(1);
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::planar(2, b),
                hoppings: symmetric(vec![Hopping::new(&[1, 0], id.clone()), Hopping::new(&[0, 1], id)]),
                onsite: linalg::zeros(1, 1),
                disorder: DisorderSpec::scalar(lambda),
                symmetry: SymmetrySpec::none(),
                spin_z: None,
            }
        }
        "qwz" => {
            check_keys(name, params, &["mass", "b", "disorder"])?;
            let mass = param(params, "mass", 1.0);
            let b = param(params, "b", 0.0);
            let lattice = lattice_for(name, 2, sizes, boundary, 2)?;
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::planar(2, b),
                hoppings: symmetric(vec![Hopping::new(&[1, 0], qwz_hop(0)), Hopping::new(&[0, 1], qwz_hop(1))]),
                onsite: linalg::scale(&pauli(3), c(mass)),
                disorder: DisorderSpec::scalar(lambda),
                symmetry: SymmetrySpec::none(),
                spin_z: None,
            }
        }
        "kane_mele_qsh" => {
            check_keys(name, params, &["mass", "rashba", "zeeman", "disorder"])?;
            let mass = param(params, "mass", 1.0);
            let rashba = param(params, "rashba", 0.0);
            let zeeman = param(params, "zeeman", 0.0);
            let lattice = lattice_for(name, 2, sizes, boundary, 4)?;
            let up = linalg::from_real(&[&[1.0, 0.0], &[0.0, 0.0]]);
            let dn = linalg::from_real(&[&[0.0, 0.0], &[0.0, 1.0]]);
            let id2 = pauli(0);
            let hop = |axis: usize| {
                let m = qwz_hop(axis);
                let spinful = &kron(&up, &m) + &kron(&dn, &linalg::conj(&m));
                axpy(&spinful, c64::new(0.0, rashba / 2.0), &kron(&pauli(1), &id2))
            };
            let onsite = &kron(&id2, &linalg::scale(&pauli(3), c(mass))) + &kron(&linalg::scale(&pauli(3), c(zeeman)), &id2);
            let s_tr = kron(&linalg::from_real(&[&[0.0, 1.0], &[-1.0, 0.0]]), &id2);
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::zero(2),
                hoppings: symmetric(vec![Hopping::new(&[1, 0], hop(0)), Hopping::new(&[0, 1], hop(1))]),
                onsite,
                disorder: DisorderSpec::scalar(lambda),
                symmetry: SymmetrySpec::new(Some((s_tr, -1)), None, None)?,
                spin_z: Some(kron(&pauli(3), &id2)),
            }
        }
        "kitaev_chain" => {
            check_keys(name, params, &["mu", "w"])?;
            let mu = param(params, "mu", 0.0);
            let w = param(params, "w", 0.0);
            if w < 0.0 {
                return Err(TopoError::ParamOutOfRange("w must be non-negative".into()));
            }
            let lattice = lattice_for(name, 1, sizes, boundary, 2)?;
            let hop = from_rows(&[&[(0.5, 0.0), (0.0, 0.5)], &[(0.0, 0.5), (-0.5, 0.0)]]);
            let sym = SymmetrySpec::new(Some((pauli(3), 1)), Some((pauli(1), 1)), Some(pauli(2)))?;
            let disorder = DisorderSpec::constrained(pauli(3), w, &sym)?;
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::zero(1),
                hoppings: symmetric(vec![Hopping::new(&[1], hop)]),
                onsite: linalg::scale(&pauli(3), c(mu)),
                disorder,
                symmetry: sym,
                spin_z: None,
            }
        }
        "chiral_3d" => {
            check_keys(name, params, &["mass", "b", "disorder"])?;
            let mass = param(params, "mass", 2.0);
            let b = param(params, "b", 0.0);
            let lattice = lattice_for(name, 3, sizes, boundary, 4)?;
            let g4 = kron(&pauli(2), &pauli(0));
            let hops = (0..3)
                .map(|axis| {
                    let gi = kron(&pauli(1), &pauli(axis + 1));
                    Hopping::new(&unit(3, axis), linalg::scale(&axpy(&g4, -I, &gi), c(0.5)))
                })
                .collect();
            let sym = SymmetrySpec::new(None, None, Some(kron(&pauli(3), &pauli(0))))?;
            let disorder = DisorderSpec::constrained(g4.clone(), lambda, &sym)?;
            ModelDefinition {
                name: name.into(),
                lattice,
                field: MagneticFieldSpec::planar(3, b),
                hoppings: symmetric(hops),
                onsite: linalg::scale(&g4, c(mass)),
                disorder,
                symmetry: sym,
                spin_z: None,
            }
        }
        _ => return Err(TopoError::UnknownModel(name.into())),
    };
    model.validate()?;
    Ok(model)
}

/// Majorana basis change `C` on the BdG fiber.
pub fn majorana_basis() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_rows(&[&[(s, 0.0), (0.0, -s)], &[(s, 0.0), (0.0, s)]])
}
