use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::symmetry::SymmetrySpec;
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};

/// Shape of the on-site random matrices.
#[derive(Clone, Debug)]
pub enum DisorderFamily {
    /// `omega_n = u_n * 1`.
    DiagonalScalar,
    /// `omega_n = diag(u_n1, ..., u_nL)`.
    DiagonalMatrix,
    /// `omega_n = u_n * D` for a fixed Hermitian direction `D` with `|D| = 1`.
    SymmetryConstrained(CMat),
}

/// I.i.d. on-site disorder with `u` uniform on `[-strength, strength]`.
#[derive(Clone, Debug)]
pub struct DisorderSpec {
    pub family: DisorderFamily,
    pub strength: f64,
    /// Base seed of the ensemble; realization `i` uses `seed + i`.
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderKind {
    DiagonalScalar,
    DiagonalMatrix,
    SymmetryConstrained,
}

impl DisorderSpec {
    pub fn clean() -> Self {
        Self { family: DisorderFamily::DiagonalScalar, strength: 0.0, seed: 0 }
    }

    pub fn scalar(strength: f64) -> Self {
        Self { family: DisorderFamily::DiagonalScalar, strength, seed: 0 }
    }

    /// Direction-constrained disorder; the direction is normalized to unit operator norm
    /// and checked against `sym`.
    pub fn constrained(direction: CMat, strength: f64, sym: &SymmetrySpec) -> Result<Self> {
        if linalg::hermitian_defect(&direction) > 1e-12 {
            return Err(TopoError::InvalidSpec("disorder direction not Hermitian".into()));
        }
        let norm = linalg::op_norm(&direction)?;
        if norm == 0.0 {
            return Err(TopoError::InvalidSpec("disorder direction vanishes".into()));
        }
        let d = linalg::scale(&direction, c64::new(1.0 / norm, 0.0));
        if !respects(&d, sym) {
            return Err(TopoError::InvalidSpec("disorder direction breaks the symmetry".into()));
        }
        Ok(Self { family: DisorderFamily::SymmetryConstrained(d), strength, seed: 0 })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn kind(&self) -> DisorderKind {
        match self.family {
            DisorderFamily::DiagonalScalar => DisorderKind::DiagonalScalar,
            DisorderFamily::DiagonalMatrix => DisorderKind::DiagonalMatrix,
            DisorderFamily::SymmetryConstrained(_) => DisorderKind::SymmetryConstrained,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.strength == 0.0
    }

    /// On-site matrix at `site` for the given realization seed.
    pub fn sample(&self, fiber: usize, site: u64, realization_seed: u64) -> CMat {
        if self.is_clean() {
            return linalg::zeros(fiber, fiber);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(realization_seed);
        rng.set_stream(site);
        let lam = self.strength;
        match &self.family {
            DisorderFamily::DiagonalScalar => {
                let u = rng.random_range(-lam..=lam);
                linalg::scale(&linalg::identity(fiber), c64::new(u, 0.0))
            }
            DisorderFamily::DiagonalMatrix => {
                let d: Vec<c64> = (0..fiber).map(|_| c64::new(rng.random_range(-lam..=lam), 0.0)).collect();
                linalg::diag(&d)
            }
            DisorderFamily::SymmetryConstrained(dir) => {
                let u = rng.random_range(-lam..=lam);
                linalg::scale(dir, c64::new(u, 0.0))
            }
        }
    }
}

/// Whether a Hermitian fiber matrix satisfies the relations of `sym`.
pub fn respects(d: &CMat, sym: &SymmetrySpec) -> bool {
    let tol = 1e-10;
    if let Some((s, _)) = &sym.s_tr {
        let t = &(s.adjoint() * linalg::conj(d)) * s;
        if linalg::max_diff(&t, d) > tol {
            return false;
        }
    }
    if let Some((s, _)) = &sym.s_ph {
        let t = &(s.adjoint() * linalg::conj(d)) * s;
        if linalg::max_abs(&(&t + d)) > tol {
            return false;
        }
    }
    if let Some(s) = &sym.s_ch {
        let t = &(s.adjoint() * d) * s;
        if linalg::max_abs(&(&t + d)) > tol {
            return false;
        }
    }
    true
}
