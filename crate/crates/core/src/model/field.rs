use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::lattice::LatticeSpec;
use crate::error::{Result, TopoError};

const QUANT_TOL: f64 = 1e-9;

/// Uniform magnetic field in the Landau gauge `A_i(x) = sum_{j>i} B_ij x_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticFieldSpec {
    /// Antisymmetric flux matrix, radians per plaquette.
    pub b: Vec<Vec<f64>>,
    /// Integer origin of the gauge.
    #[serde(default)]
    pub origin: Vec<i64>,
}

impl MagneticFieldSpec {
    pub fn new(b: Vec<Vec<f64>>) -> Result<Self> {
        let d = b.len();
        for (i, row) in b.iter().enumerate() {
            if row.len() != d {
                return Err(TopoError::InvalidSpec("field matrix not square".into()));
            }
            for j in 0..d {
                if row[j] != -b[j][i] {
                    return Err(TopoError::InvalidSpec(format!(
                        "field matrix not antisymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { b, origin: vec![0; d] })
    }

    pub fn zero(d: usize) -> Self {
        Self { b: vec![vec![0.0; d]; d], origin: vec![0; d] }
    }

    /// Field with the single component `B_12 = -B_21 = b12` in dimension `d`.
    pub fn planar(d: usize, b12: f64) -> Self {
        let mut f = Self::zero(d);
        if d >= 2 {
            f.b[0][1] = b12;
            f.b[1][0] = -b12;
        }
        f
    }

    pub fn with_origin(mut self, origin: Vec<i64>) -> Self {
        self.origin = origin;
        self
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn is_zero(&self) -> bool {
        self.b.iter().flatten().all(|&x| x == 0.0)
    }

    /// Checks flux quantization on periodic pairs and compatibility of the gauge origin.
    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        let d = lattice.dim();
        if self.dim() != d || self.origin.len() != d {
            return Err(TopoError::InvalidSpec(format!(
                "field dimension {} does not match lattice dimension {d}",
                self.dim()
            )));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if lattice.is_periodic(i) && lattice.is_periodic(j) {
                    let flux = self.b[i][j] * (lattice.sizes[i] * lattice.sizes[j]) as f64;
                    if !is_multiple_of_tau(flux) {
                        return Err(TopoError::FluxQuantization(i + 1, j + 1, flux));
                    }
                }
            }
        }
        // a shifted origin adds a constant potential, which must not twist periodic axes
        for i in 0..d {
            if !lattice.is_periodic(i) {
                continue;
            }
            let a_shift: f64 = ((i + 1)..d).map(|j| self.b[i][j] * self.origin[j] as f64).sum();
            let chi_shift: f64 = (0..i).map(|k| self.b[k][i] * self.origin[k] as f64).sum();
            let n = lattice.sizes[i] as f64;
            if !is_multiple_of_tau(a_shift * n) || !is_multiple_of_tau(chi_shift * n) {
                return Err(TopoError::InvalidSpec(format!(
                    "gauge origin {:?} twists periodic axis {}",
                    self.origin,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Vector potential at `x` relative to the gauge origin.
    pub fn potential(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                ((i + 1)..d)
                    .map(|j| self.b[i][j] * (x[j] - self.origin[j] as f64))
                    .sum()
            })
            .collect()
    }

    /// Straight-line Peierls phase for the hop `n -> n + a`.
    pub fn peierls(&self, n: &[i64], a: &[i64]) -> f64 {
        let mid: Vec<f64> = n.iter().zip(a).map(|(&ni, &ai)| ni as f64 + ai as f64 / 2.0).collect();
        let pot = self.potential(&mid);
        pot.iter().zip(a).map(|(p, &ai)| p * ai as f64).sum()
    }

    /// Gauge transition function `chi_R(x)` with `A(x + R) - A(x) = grad chi_R`.
    pub fn transition(&self, r: &[i64], x: &[i64]) -> f64 {
        let d = self.dim();
        if r.iter().all(|&ri| ri == 0) {
            return 0.0;
        }
        let ar: Vec<f64> = (0..d)
            .map(|i| ((i + 1)..d).map(|j| self.b[i][j] * r[j] as f64).sum())
            .collect();
        (0..d).map(|i| ar[i] * (x[i] - self.origin[i]) as f64).sum()
    }
}

fn is_multiple_of_tau(x: f64) -> bool {
    let q = x / TAU;
    (q - q.round()).abs() < QUANT_TOL
}
