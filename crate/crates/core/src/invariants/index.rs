use super::calculus::Region;
use super::dirac::DiracPhase;
use super::{Estimator, IndexSet, InvariantResult};
use crate::error::{Result, TopoError};
use crate::linalg::{self, CMat};
use crate::model::{Admissible, LatticeSpec};
use crate::spectral::FermiProjection;

const NOT_CONVERGED: f64 = 0.1;

/// Window of half-width `N_j / 4` around the Dirac origin.
pub(crate) fn origin_window(lattice: &LatticeSpec, origin: &[f64]) -> Region {
    Region::Window {
        center: origin.to_vec(),
        half_width: lattice.sizes.iter().map(|&n| n as f64 / 4.0).collect(),
    }
}

/// Relative index of `(P, G P G*)` from the odd-power trace of `G P G* - P` over a window
/// around the Dirac origin.
pub fn pair_index(
    p: &FermiProjection,
    lattice: &LatticeSpec,
    dirac: &DiracPhase,
    power: u32,
    region: Option<Region>,
) -> Result<InvariantResult> {
    let g = dirac
        .g
        .as_ref()
        .ok_or_else(|| TopoError::BadDimension { expected: "even d".into(), got: dirac.dim })?;
    if power % 2 == 0 {
        return Err(TopoError::InvalidSpec("pair index power must be odd".into()));
    }
    let pm = &p.projector;
    let d = CMat::from_fn(pm.nrows(), pm.ncols(), |i, j| g[i] * pm[(i, j)] * g[j].conj() - pm[(i, j)]);
    let region = region.unwrap_or_else(|| origin_window(lattice, &dirac.origin));
    let mask = region.mask(lattice);
    let l = lattice.fiber;
    let head = if power == 1 { linalg::identity(d.nrows()) } else { linalg::powi(&d, power - 1) };
    let n = d.nrows();
    let mut raw = 0.0;
    for i in 0..n {
        if mask[i / l] {
            raw += (0..n).map(|k| head[(i, k)] * d[(k, i)]).sum::<linalg::c64>().re;
        }
    }
    let all = IndexSet::new(&(1..=lattice.dim()).collect::<Vec<_>>())?;
    let res = InvariantResult::new(raw, &all, Estimator::PairIndex, &lattice.sizes, Admissible::Z);
    if res.error_proxy > NOT_CONVERGED {
        return Err(TopoError::NotConverged { raw, rounded: res.rounded });
    }
    Ok(res)
}

/// Index of `E U E` on `ran E` by counting near-kernel singular vectors of
/// `E U E + 1 - E` localized at the Dirac origin (kernel) minus those of its adjoint.
pub fn hardy_index(u: &CMat, lattice: &LatticeSpec, dirac: &DiracPhase, threshold: f64) -> Result<InvariantResult> {
    let e = dirac
        .e
        .as_ref()
        .ok_or_else(|| TopoError::BadDimension { expected: "odd d".into(), got: dirac.dim })?;
    let k = dirac.clifford;
    let big_u = linalg::kron(u, &linalg::identity(k));
    if big_u.nrows() != e.nrows() {
        return Err(TopoError::InvalidSpec("unitary and Hardy projection sizes differ".into()));
    }
    let one = linalg::identity(e.nrows());
    let t = &(&(e * &big_u) * e) + &(&one - e);
    let (left, s, right) = linalg::svd(&t)?;
    if s.iter().any(|&x| x > threshold / 10.0 && x < threshold * 10.0) {
        return Err(TopoError::ThresholdAmbiguity);
    }
    let mask = origin_window(lattice, &dirac.origin).mask(lattice);
    let l = lattice.fiber;
    let weight = |m: &CMat, col: usize| -> f64 {
        (0..m.nrows())
            .filter(|&i| mask[i / k / l])
            .map(|i| m[(i, col)].norm_sqr())
            .sum()
    };
    let small: Vec<usize> = (0..s.len()).filter(|&i| s[i] < threshold).collect();
    let ker: f64 = small.iter().map(|&c| weight(&right, c)).sum();
    let coker: f64 = small.iter().map(|&c| weight(&left, c)).sum();
    let value = ker.round() - coker.round();
    let all = IndexSet::new(&(1..=lattice.dim()).collect::<Vec<_>>())?;
    Ok(InvariantResult::new(value, &all, Estimator::HardyIndex, &lattice.sizes, Admissible::Z)
        .with_diagnostic((ker - ker.round()).abs().max((coker - coker.round()).abs())))
}
