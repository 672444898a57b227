use crate::error::{Result, TopoError};
use crate::linalg::{self, CMat};
use crate::model::{LatticeSpec, SymmetrySpec};
use crate::spectral::FermiProjection;

const BLOCK_THRESHOLD: f64 = 1e-3;

/// Fiber basis diagonalizing the chiral operator, `+1` sector first.
#[derive(Clone, Debug)]
pub struct ChiralFrame {
    pub w: CMat,
    pub half: usize,
}

pub fn chiral_frame(s_ch: &CMat) -> Result<ChiralFrame> {
    let (vals, vecs) = linalg::eigh(s_ch)?;
    let l = vals.len();
    let minus: Vec<usize> = (0..l).filter(|&k| vals[k] < 0.0).collect();
    let plus: Vec<usize> = (0..l).filter(|&k| vals[k] > 0.0).collect();
    if plus.len() != minus.len() || plus.len() + minus.len() != l {
        return Err(TopoError::NotChiral("chiral operator is not balanced".into()));
    }
    let order: Vec<usize> = plus.iter().chain(minus.iter()).copied().collect();
    Ok(ChiralFrame { w: linalg::select_columns(&vecs, &order), half: plus.len() })
}

/// Fermi unitary `U` with `P = 1/2 [[1, U*], [U, 1]]` in the chiral frame, the lattice of
/// one chiral sector, and the smallest singular value of the off-diagonal block.
pub fn fermi_unitary(p: &FermiProjection, lattice: &LatticeSpec, sym: &SymmetrySpec) -> Result<(CMat, LatticeSpec, f64)> {
    let s = sym.s_ch.as_ref().ok_or_else(|| TopoError::NotChiral("no chiral operator".into()))?;
    let frame = chiral_frame(s)?;
    let l = lattice.fiber;
    let h = frame.half;
    let ns = lattice.n_sites();
    // columns of the frame, + sector of all sites first, then - sector
    let full = CMat::from_fn(ns * l, ns * l, |r, c| {
        let (sector, rest) = (c / (ns * h), c % (ns * h));
        let (site, k) = (rest / h, rest % h);
        if r / l != site {
            return linalg::ZERO;
        }
        frame.w[(r % l, sector * h + k)]
    });
    let q = &(full.adjoint() * &p.projector) * &full;
    let block = CMat::from_fn(ns * h, ns * h, |r, c| q[(ns * h + r, c)] * 2.0);
    let (u, smin) = linalg::polar_unitary(&block)?;
    if smin < BLOCK_THRESHOLD {
        return Err(TopoError::BlockSingular(smin));
    }
    let sector = LatticeSpec { fiber: h, ..lattice.clone() };
    Ok((u, sector, smin))
}
