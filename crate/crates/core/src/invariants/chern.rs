use std::f64::consts::PI;

use super::calculus::{nc_derivative, trace_diag_product, trace_per_volume, Region};
use super::{Estimator, IndexSet, InvariantResult};
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat, I};
use crate::model::{Admissible, LatticeSpec};
use crate::spectral::FermiProjection;

/// Permutations of `0..n` with their signatures.
pub(crate) fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                cur.push(k);
                rec(cur, used, n, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], n, &mut out);
    out.into_iter()
        .map(|p| {
            let mut inv = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            (p, if inv % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Odd double factorial `(2n+1)!! = 3 * 5 * ... * (2n+1)`.
fn double_factorial_odd(m: usize) -> f64 {
    (1..=m).step_by(2).map(|k| k as f64).product()
}

fn check_axes(lattice: &LatticeSpec, i: &IndexSet) -> Result<()> {
    if i.axes().iter().any(|&a| a > lattice.dim()) {
        return Err(TopoError::InvalidSpec(format!("index set {:?} exceeds dimension", i.axes())));
    }
    Ok(())
}

/// Complex value of `Ch_I(P)` for even `|I|`.
pub fn chern_value(p: &CMat, lattice: &LatticeSpec, i: &IndexSet, region: &Region) -> Result<c64> {
    if !i.is_even() {
        return Err(TopoError::OddIndexSet);
    }
    check_axes(lattice, i)?;
    if i.is_empty() {
        return Ok(trace_per_volume(p, lattice, region));
    }
    let m = i.len();
    let n = m / 2;
    let ders: Vec<CMat> = i.axes().iter().map(|&a| nc_derivative(p, lattice, a)).collect();
    let mut sum = linalg::ZERO;
    for (perm, sign) in permutations(m) {
        let mut x = p * &ders[perm[0]];
        for &k in &perm[1..m - 1] {
            x = &x * &ders[k];
        }
        sum += trace_diag_product(&x, &ders[perm[m - 1]], lattice, region) * sign;
    }
    let pref = (c64::new(0.0, 2.0 * PI)).powi(n as i32) / factorial(n);
    Ok(pref * sum)
}

/// `Ch_I(P)` with the imaginary residue as diagnostic.
pub fn chern_projection(p: &FermiProjection, lattice: &LatticeSpec, i: &IndexSet, region: &Region) -> Result<InvariantResult> {
    let v = chern_value(&p.projector, lattice, i, region)?;
    Ok(InvariantResult::new(v.re, i, Estimator::NcRealspace, &lattice.sizes, Admissible::Z).with_diagnostic(v.im))
}

/// `Ch_I(A)` for odd `|I|` and invertible `A`.
pub fn chern_unitary(a: &CMat, lattice: &LatticeSpec, i: &IndexSet, region: &Region) -> Result<InvariantResult> {
    if i.is_even() {
        return Err(TopoError::EvenIndexSet);
    }
    check_axes(lattice, i)?;
    let inv = linalg::inverse(a);
    let defect = linalg::max_diff(&(a * &inv), &linalg::identity(a.nrows()));
    if !defect.is_finite() || defect > 1e-8 {
        return Err(TopoError::SingularInput(format!("inverse defect {defect:e}")));
    }
    let m = i.len();
    let n = (m - 1) / 2;
    let factors: Vec<CMat> = i
        .axes()
        .iter()
        .map(|&ax| &inv * &nc_derivative(a, lattice, ax))
        .collect();
    let mut sum = linalg::ZERO;
    for (perm, sign) in permutations(m) {
        let t = if m == 1 {
            trace_per_volume(&factors[0], lattice, region)
        } else {
            let mut x = factors[perm[0]].clone();
            for &k in &perm[1..m - 1] {
                x = &x * &factors[k];
            }
            trace_diag_product(&x, &factors[perm[m - 1]], lattice, region)
        };
        sum += t * sign;
    }
    let pref = I * (c64::new(0.0, PI)).powi(n as i32) / double_factorial_odd(m);
    let v = pref * sum;
    Ok(InvariantResult::new(v.re, i, Estimator::NcRealspace, &lattice.sizes, Admissible::Z).with_diagnostic(v.im))
}
