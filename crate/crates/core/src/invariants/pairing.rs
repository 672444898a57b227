use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::calculus::Region;
use super::chern::chern_value;
use super::pfaffian::{pfaffian, RMat};
use super::IndexSet;
use crate::error::{Result, TopoError};
use crate::linalg;
use crate::model::{build_hamiltonian, make_named_model, Boundary, LatticeSpec};
use crate::spectral::{diagonalize, fermi_projection, lowest_gap};

/// Measured `Ch_I(G_J)` against the value predicted from `I`, `J` and `B`.
#[derive(Clone, Debug)]
pub struct PairingCheck {
    pub measured: f64,
    pub predicted: f64,
    pub difference: f64,
}

/// Predicted pairing of `Ch_I` with the generator `G_J`.
pub fn predicted_pairing(b: &[Vec<f64>], i: &IndexSet, j: &IndexSet) -> Result<f64> {
    if i.axes().iter().any(|a| !j.axes().contains(a)) {
        return Ok(0.0);
    }
    if i == j {
        return Ok(1.0);
    }
    let rest: Vec<usize> = j.axes().iter().copied().filter(|a| !i.axes().contains(a)).collect();
    let sub = RMat::from_fn(rest.len(), rest.len(), |r, c| b[rest[r] - 1][rest[c] - 1]);
    Ok(pfaffian(&sub)? / TAU.powi(rest.len() as i32 / 2))
}

/// Pairing of `Ch_I` with a generator realized on an `n x n` torus at flux `b12`.
///
/// `G_{} = 1` and `G_{1,2}` is the lowest-gap projection of the Harper model.
pub fn pairing_range_check(d: usize, b12: f64, i: &IndexSet, j: &IndexSet, n: usize) -> Result<PairingCheck> {
    if d != 2 || !i.is_even() || !j.is_even() || j.axes().iter().any(|&a| a > 2) || i.axes().iter().any(|&a| a > 2) {
        return Err(TopoError::UnsupportedGenerator(format!("I = {:?}, J = {:?} in d = {d}", i.axes(), j.axes())));
    }
    let lattice = LatticeSpec::periodic(&[n, n], 1);
    let region = Region::All;
    let g = if j.is_empty() {
        linalg::identity(lattice.hilbert_dim())
    } else {
        let params = BTreeMap::from([("b".to_string(), b12)]);
        let model = make_named_model("harper", &params, &[n, n], &[Boundary::Periodic; 2])?;
        let e = diagonalize(&build_hamiltonian(&model, 0)?)?;
        let (lo, hi) = lowest_gap(&e, 0.5)?;
        fermi_projection(&e, (lo + hi) / 2.0)?.projector
    };
    let measured = chern_value(&g, &lattice, i, &region)?.re;
    let b = vec![vec![0.0, b12], vec![-b12, 0.0]];
    let predicted = predicted_pairing(&b, i, j)?;
    Ok(PairingCheck { measured, predicted, difference: (measured - predicted).abs() })
}
