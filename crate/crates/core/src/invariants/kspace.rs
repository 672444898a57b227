use std::f64::consts::TAU;

use super::chiral::chiral_frame;
use super::{Estimator, IndexSet, InvariantResult};
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};
use crate::model::{Admissible, LatticeSpec, ModelDefinition};

/// Brute-force oracle output: the raw lattice-gauge sum and its integer.
pub type KspaceResult = InvariantResult;

/// Magnetic unit cell `(1, q, ..., q)` with `q` the common denominator of `B_ij / 2 pi`.
pub fn magnetic_cell(model: &ModelDefinition) -> Result<Vec<usize>> {
    let d = model.lattice.dim();
    let mut q = 1usize;
    for i in 0..d {
        for j in (i + 1)..d {
            let f = model.field.b[i][j] / TAU;
            let den = (1..=4096)
                .find(|&den| {
                    let x = f * den as f64;
                    (x - x.round()).abs() < 1e-9
                })
                .ok_or_else(|| TopoError::InvalidSpec(format!("flux {f} is not a rational with small denominator")))?;
            q = lcm(q, den);
        }
    }
    Ok((0..d).map(|j| if j == 0 { 1 } else { q }).collect())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Bloch matrix of the clean model on the magnetic cell at quasimomentum `k`.
pub fn bloch_hamiltonian(model: &ModelDefinition, cell: &[usize], k: &[f64]) -> CMat {
    let lattice = LatticeSpec::periodic(cell, model.lattice.fiber);
    let l = lattice.fiber;
    let mut h = linalg::zeros(lattice.hilbert_dim(), lattice.hilbert_dim());
    for s in 0..lattice.n_sites() {
        let n = lattice.coords(s);
        for i in 0..l {
            for j in 0..l {
                h[(s * l + i, s * l + j)] += model.onsite[(i, j)];
            }
        }
        for hop in &model.hoppings {
            let target: Vec<i64> = n.iter().zip(&hop.disp).map(|(a, b)| a + b).collect();
            let (w, r) = lattice.wrap(&target).expect("periodic cell");
            let t = lattice.site(&w);
            let kr: f64 = r.iter().zip(k).map(|(&ri, &ki)| ri as f64 * ki).sum();
            let phase = linalg::cis(model.field.peierls(&n, &hop.disp) - model.field.transition(&r, &w) + kr);
            for i in 0..l {
                for j in 0..l {
                    h[(t * l + i, s * l + j)] += hop.matrix[(i, j)] * phase;
                }
            }
        }
    }
    h
}

fn frame(model: &ModelDefinition, cell: &[usize], k: &[f64], bands: &[usize]) -> Result<(CMat, f64)> {
    let h = bloch_hamiltonian(model, cell, k);
    let (vals, vecs) = linalg::eigh(&h)?;
    let top = bands.iter().map(|&b| vals[b]).fold(f64::NEG_INFINITY, f64::max);
    let next = (0..vals.len())
        .filter(|b| !bands.contains(b))
        .map(|b| (vals[b] - top).abs())
        .fold(f64::INFINITY, f64::min);
    Ok((linalg::select_columns(&vecs, bands), next))
}

fn link(a: &CMat, b: &CMat) -> c64 {
    let ov = a.adjoint() * b;
    let d = linalg::determinant(&ov);
    d / d.norm()
}

/// Lattice-gauge discretization of the Chern character over the magnetic Brillouin zone.
///
/// Even `|I| = 2` uses plaquette Berry fluxes of the selected bands; `|I| = 1` winds the
/// determinant of the chiral block of the band projection; `|I| = 0` is the band filling
/// per site.
pub fn chern_kspace_oracle(model: &ModelDefinition, bands: &[usize], i: &IndexSet, grid: usize) -> Result<KspaceResult> {
    if !model.disorder.is_clean() {
        return Err(TopoError::NotClean);
    }
    let d = model.lattice.dim();
    if (0..d).any(|j| !model.lattice.is_periodic(j)) {
        return Err(TopoError::NotPeriodic);
    }
    let cell = magnetic_cell(model)?;
    let sizes = vec![grid; d];
    let kvec = |axes: &[(usize, usize)]| -> Vec<f64> {
        let mut k = vec![0.0; d];
        for &(ax, m) in axes {
            k[ax] = TAU * m as f64 / (cell[ax] * grid) as f64;
        }
        k
    };
    let value = match i.len() {
        0 => bands.len() as f64 / cell.iter().product::<usize>() as f64,
        1 => {
            let ax = i.axes()[0] - 1;
            let s = model.symmetry.s_ch.as_ref().ok_or_else(|| TopoError::NotChiral("no chiral operator".into()))?;
            let fr = chiral_frame(s)?;
            let nc: usize = cell.iter().product();
            let h = fr.half;
            let big = linalg::kron(&linalg::identity(nc), &fr.w);
            let idx_plus: Vec<usize> = (0..nc).flat_map(|site| (0..h).map(move |k| site * 2 * h + k)).collect();
            let idx_minus: Vec<usize> = (0..nc).flat_map(|site| (0..h).map(move |k| site * 2 * h + h + k)).collect();
            let mut dets = Vec::with_capacity(grid);
            for m in 0..grid {
                let (v, _) = frame(model, &cell, &kvec(&[(ax, m)]), bands)?;
                let p = &v * v.adjoint();
                let q = &(big.adjoint() * &p) * &big;
                let block = CMat::from_fn(idx_minus.len(), idx_plus.len(), |r, c| q[(idx_minus[r], idx_plus[c])]);
                dets.push(linalg::determinant(&block));
            }
            let mut total = 0.0;
            for m in 0..grid {
                let ratio = dets[(m + 1) % grid] / dets[m];
                total += ratio.arg();
            }
            // k-derivatives enter with the opposite sign of nabla
            -total / TAU
        }
        2 => {
            let (a, b) = (i.axes()[0] - 1, i.axes()[1] - 1);
            let mut frames = Vec::with_capacity(grid * grid);
            for mb in 0..grid {
                for ma in 0..grid {
                    frames.push(frame(model, &cell, &kvec(&[(a, ma), (b, mb)]), bands)?.0);
                }
            }
            let at = |ma: usize, mb: usize| &frames[(mb % grid) * grid + (ma % grid)];
            let mut total = 0.0;
            for mb in 0..grid {
                for ma in 0..grid {
                    let u1 = link(at(ma, mb), at(ma + 1, mb));
                    let u2 = link(at(ma + 1, mb), at(ma + 1, mb + 1));
                    let u3 = link(at(ma + 1, mb + 1), at(ma, mb + 1));
                    let u4 = link(at(ma, mb + 1), at(ma, mb));
                    total += (u1 * u2 * u3 * u4).arg();
                }
            }
            // link phases accumulate minus the Berry connection
            -total / TAU
        }
        _ => return Err(TopoError::UnsupportedGenerator(format!("|I| = {}", i.len()))),
    };
    Ok(InvariantResult::new(value, i, Estimator::KspaceFhs, &sizes, Admissible::Z))
}
