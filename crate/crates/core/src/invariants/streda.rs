use std::f64::consts::TAU;

use super::calculus::Region;
use super::chern::chern_value;
use super::IndexSet;
use crate::error::{Result, TopoError};
use crate::model::{build_hamiltonian, MagneticFieldSpec, ModelDefinition};
use crate::spectral::{diagonalize, fermi_projection, lowest_gap};

const GAP_FRACTION: f64 = 0.5;

/// Finite-difference field derivative of `Ch_I` against `Ch_{I + {i, j}} / 2 pi`.
#[derive(Clone, Debug)]
pub struct StredaResult {
    pub lhs: f64,
    pub rhs: f64,
    pub difference: f64,
    pub mu: f64,
    /// `Ch_I` at `B - dB`, `B`, `B + dB`.
    pub values: [f64; 3],
}

fn shifted(model: &ModelDefinition, pair: (usize, usize), delta: f64) -> Result<ModelDefinition> {
    let mut b = model.field.b.clone();
    let (i, j) = (pair.0 - 1, pair.1 - 1);
    b[i][j] += delta;
    b[j][i] -= delta;
    let field = MagneticFieldSpec::new(b)?.with_origin(model.field.origin.clone());
    let m = model.clone().with_field(field);
    m.validate()?;
    Ok(m)
}

/// Central difference of `Ch_I(P)` in `B_ij` at fixed Fermi level.
///
/// `mu` defaults to the centre of the lowest sizeable gap at the central field. `pair` is 1-based with
/// `i < j`, and `delta_b` must keep the torus flux-quantized.
pub fn streda_derivative(
    model: &ModelDefinition,
    i: &IndexSet,
    pair: (usize, usize),
    delta_b: f64,
    mu: Option<f64>,
) -> Result<StredaResult> {
    let (a, b) = pair;
    let d = model.lattice.dim();
    if !(1 <= a && a < b && b <= d) || i.axes().contains(&a) || i.axes().contains(&b) {
        return Err(TopoError::InvalidSpec(format!("axes ({a}, {b}) must be distinct from {:?}", i.axes())));
    }
    let mut joint = i.axes().to_vec();
    joint.extend([a, b]);
    let sign = permutation_sign(&joint);
    joint.sort_unstable();
    let joint = IndexSet::new(&joint)?;

    let centre = build_hamiltonian(model, 0)?;
    let e0 = diagonalize(&centre)?;
    let mu = match mu {
        Some(m) => m,
        None => {
            let (lo, hi) = lowest_gap(&e0, GAP_FRACTION)?;
            (lo + hi) / 2.0
        }
    };
    let region = Region::default_for(&model.lattice);
    let p0 = fermi_projection(&e0, mu)?;
    let c0 = chern_value(&p0.projector, &model.lattice, i, &region)?.re;
    let rhs = sign * chern_value(&p0.projector, &model.lattice, &joint, &region)?.re / TAU;

    let mut side = [0.0; 2];
    for (k, s) in [-1.0, 1.0].into_iter().enumerate() {
        let m = shifted(model, pair, s * delta_b)?;
        let h = build_hamiltonian(&m, 0)?;
        let e = diagonalize(&h)?;
        let p = fermi_projection(&e, mu)?;
        side[k] = chern_value(&p.projector, &model.lattice, i, &region)?.re;
    }
    let lhs = (side[1] - side[0]) / (2.0 * delta_b);
    Ok(StredaResult { lhs, rhs, difference: (lhs - rhs).abs(), mu, values: [side[0], c0, side[1]] })
}

fn permutation_sign(v: &[usize]) -> f64 {
    let mut s = 1.0;
    for x in 0..v.len() {
        for y in x + 1..v.len() {
            if v[x] > v[y] {
                s = -s;
            }
        }
    }
    s
}
