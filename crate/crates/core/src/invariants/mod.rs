//! Non-commutative calculus and index-theoretic estimators.

mod calculus;
mod chern;
mod chiral;
mod dirac;
mod index;
mod kspace;
mod pairing;
mod pfaffian;
mod streda;
mod veg;
mod z2;

use serde::{Deserialize, Serialize};

pub use calculus::{nc_derivative, trace_diag_product, trace_per_volume, Region};
pub use chern::{chern_projection, chern_unitary, chern_value};
pub use chiral::{chiral_frame, fermi_unitary, ChiralFrame};
pub use dirac::{dirac_phase, DiracPhase};
pub use index::{hardy_index, pair_index};
pub use kspace::{bloch_hamiltonian, chern_kspace_oracle, magnetic_cell, KspaceResult};
pub use pairing::{pairing_range_check, PairingCheck};
pub use pfaffian::{pfaffian, pfaffian_sign_log, RMat};
pub use streda::{streda_derivative, StredaResult};
pub use veg::{veg_invariant, veg_value, Contour};
pub use z2::{index_operator, spin_chern, z2_kernel_parity, SpinChernResult, Z2Result};

use crate::error::{Result, TopoError};
use crate::model::Admissible;

/// Strictly increasing subset of `{1, ..., d}` (1-based axes).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(axes: &[usize]) -> Result<Self> {
        if axes.windows(2).any(|w| w[0] >= w[1]) || axes.iter().any(|&a| a == 0) {
            return Err(TopoError::InvalidSpec(format!("index set {axes:?} not strictly increasing")));
        }
        Ok(Self(axes.to_vec()))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.0.len() % 2 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    NcRealspace,
    KspaceFhs,
    PairIndex,
    HardyIndex,
    Z2Parity,
    SpinChern,
    Veg,
    BoundaryWinding,
    BoundaryCurrent,
    SpectralFlow,
}

/// Raw value of a pairing together with its distance to the admissible lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantResult {
    pub value: f64,
    pub rounded: i64,
    pub index_set: Vec<usize>,
    pub estimator: Estimator,
    pub sizes: Vec<usize>,
    pub error_proxy: f64,
    pub samples: usize,
    /// Imaginary residue or other estimator-specific diagnostic.
    pub diagnostic: f64,
}

impl InvariantResult {
    pub fn new(value: f64, index_set: &IndexSet, estimator: Estimator, sizes: &[usize], admissible: Admissible) -> Self {
        let (rounded, error_proxy) = nearest_admissible(value, admissible);
        Self {
            value,
            rounded,
            index_set: index_set.axes().to_vec(),
            estimator,
            sizes: sizes.to_vec(),
            error_proxy,
            samples: 1,
            diagnostic: 0.0,
        }
    }

    pub fn with_diagnostic(mut self, d: f64) -> Self {
        self.diagnostic = d;
        self
    }

    /// Mean over realizations in fixed order.
    pub fn average(results: &[InvariantResult], admissible: Admissible) -> Option<InvariantResult> {
        let first = results.first()?;
        let n = results.len() as f64;
        let mean = results.iter().map(|r| r.value).sum::<f64>() / n;
        let (rounded, error_proxy) = nearest_admissible(mean, admissible);
        Some(InvariantResult {
            value: mean,
            rounded,
            error_proxy,
            samples: results.iter().map(|r| r.samples).sum(),
            diagnostic: results.iter().map(|r| r.diagnostic.abs()).fold(0.0, f64::max),
            ..first.clone()
        })
    }
}

/// Nearest admissible value and distance to it.
pub fn nearest_admissible(x: f64, adm: Admissible) -> (i64, f64) {
    match adm {
        Admissible::Z => {
            let r = x.round();
            (r as i64, (x - r).abs())
        }
        Admissible::TwoZ => {
            let r = 2.0 * (x / 2.0).round();
            (r as i64, (x - r).abs())
        }
        Admissible::Z2 => {
            let r = x.round();
            ((r as i64).rem_euclid(2), (x - r).abs())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_sets() {
        assert!(IndexSet::new(&[1, 2]).unwrap().is_even());
        assert!(IndexSet::new(&[2, 1]).is_err());
        assert!(IndexSet::new(&[0]).is_err());
        assert!(IndexSet::empty().is_even());
    }

    #[test]
    fn admissible_rounding() {
        assert_eq!(nearest_admissible(0.97, Admissible::Z), (1, 0.030000000000000027));
        assert_eq!(nearest_admissible(1.2, Admissible::TwoZ).0, 2);
        assert_eq!(nearest_admissible(2.9, Admissible::Z2).0, 1);
    }
}
