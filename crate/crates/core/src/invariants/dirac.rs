use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};
use crate::model::LatticeSpec;

/// Phase of the position Dirac operator.
///
/// Even `d` stores the diagonal unitary `G`; odd `d` stores the flat operator `F` and the
/// Hardy projection `E = (F + 1) / 2` on `H (x) C^k` with `k = 2^{(d-1)/2}`.
#[derive(Clone, Debug)]
pub struct DiracPhase {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub g: Option<Vec<c64>>,
    pub f: Option<CMat>,
    pub e: Option<CMat>,
    /// Size of the Clifford representation attached to odd `d`.
    pub clifford: usize,
}

impl DiracPhase {
    /// `G` as a dense diagonal matrix.
    pub fn g_matrix(&self) -> Option<CMat> {
        self.g.as_ref().map(|g| linalg::diag(g))
    }
}

/// Default origin `floor((N_j - 1) / 2) + 1/2` on every axis.
pub fn default_origin(lattice: &LatticeSpec) -> Vec<f64> {
    lattice.sizes.iter().map(|&n| ((n as f64 - 1.0) / 2.0).floor() + 0.5).collect()
}

/// Clifford generators for `d = 3`: `sigma_1`, `sigma_2`, `sigma_3`, alternately real and imaginary.
fn gammas(d: usize) -> Vec<CMat> {
    match d {
        1 => vec![linalg::identity(1)],
        _ => vec![linalg::pauli(1), linalg::pauli(2), linalg::pauli(3)],
    }
}

pub fn dirac_phase(lattice: &LatticeSpec, origin: Option<Vec<f64>>) -> Result<DiracPhase> {
    let d = lattice.dim();
    let x0 = origin.unwrap_or_else(|| default_origin(lattice));
    if x0.len() != d {
        return Err(TopoError::InvalidSpec("origin has wrong dimension".into()));
    }
    if x0.iter().all(|x| x.fract() == 0.0) {
        return Err(TopoError::OriginOnLattice);
    }
    let l = lattice.fiber;
    let n = lattice.hilbert_dim();
    let rel = |i: usize| -> Vec<f64> {
        lattice.coords(i / l).iter().zip(&x0).map(|(&x, &o)| x as f64 - o).collect()
    };
    if d == 2 {
        let g = (0..n)
            .map(|i| {
                let r = rel(i);
                let z = c64::new(r[0], r[1]);
                z / z.norm()
            })
            .collect();
        return Ok(DiracPhase { dim: d, origin: x0, g: Some(g), f: None, e: None, clifford: 1 });
    }
    let gam = gammas(d);
    let k = gam[0].nrows();
    let mut f = linalg::zeros(n * k, n * k);
    for i in 0..n {
        let r = rel(i);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        for a in 0..k {
            for b in 0..k {
                let v: c64 = (0..d).map(|j| gam[j][(a, b)] * r[j]).sum::<c64>() / norm;
                f[(i * k + a, i * k + b)] = v;
            }
        }
    }
    let e = linalg::scale(&(&f + &linalg::identity(n * k)), c64::new(0.5, 0.0));
    Ok(DiracPhase { dim: d, origin: x0, g: None, f: Some(f), e: Some(e), clifford: k })
}
