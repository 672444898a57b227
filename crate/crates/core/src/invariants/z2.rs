use super::calculus::Region;
use super::chern::chern_value;
use super::dirac::DiracPhase;
use super::{Estimator, IndexSet, InvariantResult};
use crate::error::{Result, TopoError};
use crate::linalg::{self, CMat};
use crate::model::{fiber_op, Admissible, LatticeSpec, SymmetrySpec};
use crate::spectral::FermiProjection;

const ANTISYM_TOL: f64 = 1e-8;
const MIN_MARGIN: f64 = 1e2;
const SPIN_GAP: f64 = 1e-3;

/// Kernel parity of an antisymmetric Fredholm operator.
#[derive(Clone, Debug)]
pub struct Z2Result {
    pub parity: u8,
    /// Ratio of the smallest singular value above the threshold to the largest below it.
    pub margin: f64,
    pub kernel_dim: usize,
    /// Weight of the near-kernel inside the localization window.
    pub window_weight: f64,
    pub result: InvariantResult,
}

/// Parity of the near-kernel of `T` localized in `window`, where `T s_tr` is antisymmetric.
///
/// Singular values below `tau_rel * |T|` (default `1e-4`) form the near-kernel. In finite
/// volume its vectors hybridize between the window and the outer boundary, so the parity is
/// taken of the rounded window weight of the near-kernel projection.
pub fn z2_kernel_parity(
    t: &CMat,
    sym: &SymmetrySpec,
    lattice: &LatticeSpec,
    window: &Region,
    tau_rel: Option<f64>,
) -> Result<Z2Result> {
    let (s_tr, _) = sym
        .s_tr
        .as_ref()
        .ok_or_else(|| TopoError::InvalidSpec("z2 parity needs a time-reversal operator".into()))?;
    let big = fiber_op(lattice, s_tr);
    let ts = t * &big;
    let scale = linalg::max_abs(t).max(1.0);
    let defect = linalg::max_abs(&(&ts + &linalg::transpose(&ts)));
    if defect > ANTISYM_TOL * scale {
        return Err(TopoError::NotAntisymmetric(defect));
    }
    let (_, s, v) = linalg::svd(t)?;
    let norm = s.first().copied().unwrap_or(0.0);
    let tau = tau_rel.unwrap_or(1e-4) * norm;
    let small: Vec<usize> = (0..s.len()).filter(|&k| s[k] < tau).collect();
    let above = s.iter().copied().filter(|&x| x >= tau).fold(f64::INFINITY, f64::min);
    let below = s.iter().copied().filter(|&x| x < tau).fold(0.0f64, f64::max);
    let margin = if small.is_empty() { above / tau } else { above / below.max(f64::MIN_POSITIVE) };
    if margin < MIN_MARGIN {
        return Err(TopoError::MarginTooSmall(margin));
    }
    let mask = window.mask(lattice);
    let l = lattice.fiber;
    let weight: f64 = small
        .iter()
        .map(|&c| (0..v.nrows()).filter(|&i| mask[i / l]).map(|i| v[(i, c)].norm_sqr()).sum::<f64>())
        .sum();
    let parity = (weight.round() as i64).rem_euclid(2) as u8;
    let all = IndexSet::new(&(1..=lattice.dim()).collect::<Vec<_>>())?;
    let result = InvariantResult::new(parity as f64, &all, Estimator::Z2Parity, &lattice.sizes, Admissible::Z2)
        .with_diagnostic((weight - weight.round()).abs());
    Ok(Z2Result { parity, margin, kernel_dim: small.len(), window_weight: weight, result })
}

/// Spin Chern number from the Riesz projections of `P s_z P` on `ran P`.
#[derive(Clone, Debug)]
pub struct SpinChernResult {
    pub sch: InvariantResult,
    /// Largest negative and smallest positive eigenvalue of `P s_z P` on `ran P`.
    pub gap: (f64, f64),
    pub ch_plus: f64,
    pub ch_minus: f64,
    pub ch_total: f64,
    /// `Ch(P+) + Ch(P-) - Ch(P)`.
    pub sum_rule: f64,
}

pub fn spin_chern(p: &FermiProjection, s_z: &CMat, lattice: &LatticeSpec, region: &Region) -> Result<SpinChernResult> {
    let w = &p.basis;
    let big = fiber_op(lattice, s_z);
    let m = &(w.adjoint() * &big) * w;
    let (vals, vecs) = linalg::eigh(&m)?;
    let neg = vals.iter().copied().filter(|&x| x < 0.0).fold(f64::NEG_INFINITY, f64::max);
    let pos = vals.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
    let width = pos.min(1.0) - neg.max(-1.0);
    if !(width >= SPIN_GAP) || vals.iter().any(|x| x.abs() < SPIN_GAP / 2.0) {
        return Err(TopoError::SpinSpectrumGapless(width));
    }
    let plus: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 0.0).collect();
    let minus: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] < 0.0).collect();
    let proj = |idx: &[usize]| {
        let f = w * &linalg::select_columns(&vecs, idx);
        &f * f.adjoint()
    };
    let i12 = IndexSet::new(&[1, 2])?;
    let ch_plus = chern_value(&proj(&plus), lattice, &i12, region)?.re;
    let ch_minus = chern_value(&proj(&minus), lattice, &i12, region)?.re;
    let ch_total = chern_value(&p.projector, lattice, &i12, region)?.re;
    let sum_rule = ch_plus + ch_minus - ch_total;
    let sch = InvariantResult::new(ch_plus, &i12, Estimator::SpinChern, &lattice.sizes, Admissible::Z)
        .with_diagnostic(sum_rule);
    Ok(SpinChernResult { sch, gap: (neg, pos), ch_plus, ch_minus, ch_total, sum_rule })
}

/// `P G P + 1 - P` for the even-dimensional Dirac phase `G`.
pub fn index_operator(p: &FermiProjection, dirac: &DiracPhase) -> Result<CMat> {
    let g = dirac.g_matrix().ok_or_else(|| TopoError::BadDimension { expected: "even d".into(), got: dirac.dim })?;
    let pm = &p.projector;
    let n = pm.nrows();
    Ok(&(&(pm * &g) * pm) + &(linalg::identity(n) - pm))
}
