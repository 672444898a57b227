use std::f64::consts::PI;

use super::{Estimator, IndexSet, InvariantResult};
use crate::error::{Result, TopoError};
use crate::linalg::{c64, CMat, ZERO};
use crate::model::{Admissible, HamiltonianSample, LatticeSpec};
use crate::spectral::{diagonalize_matrix, EigenData};

const MIN_DISTANCE: f64 = 1e-6;

/// `n! (2 pi)^(n-1) (-1)^n (-i)^(n+1) / (2n+1)!` for the pairing with `|I| = 2n`.
pub fn coefficient(n: u32) -> c64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    c64::new(0.0, -1.0).powi(n as i32 + 1) * (sign * fact(n) * (2.0 * PI).powi(n as i32 - 1) / fact(2 * n + 1))
}

/// Circle through `mu` and `below` enclosing the spectrum below `mu`.
#[derive(Clone, Copy, Debug)]
pub struct Contour {
    pub center: f64,
    pub radius: f64,
}

impl Contour {
    pub fn through(mu: f64, below: f64) -> Self {
        Self { center: (mu + below) / 2.0, radius: (mu - below) / 2.0 }
    }

    pub fn point(&self, t: f64) -> (c64, c64) {
        let e = c64::cis(2.0 * PI * t);
        (self.center + self.radius * e, c64::new(0.0, 2.0 * PI * self.radius) * e)
    }

    /// Smallest distance from the circle to a set of real eigenvalues.
    pub fn distance(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .map(|&x| ((x - self.center).abs() - self.radius).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Resolvent-contour evaluation of `Ch_{1,2}` for a clean gapped Hamiltonian.
///
/// With `G(t) = (H - z(t))^{-1}`, `F_0 = G^{-1} d_t G = z' G` and
/// `F_j = G^{-1} nabla_j G = -nabla_j H G`, the value is
/// `c_1 int_0^1 dt T(sum_sigma sgn(sigma) F_{sigma 0} F_{sigma 1} F_{sigma 2})` with `c_1 = 1/6`
/// evaluated with the `n_t`-point trapezoid rule in the eigenbasis of `H` over the whole torus.
pub fn veg_value(h: &CMat, e: &EigenData, lattice: &LatticeSpec, contour: &Contour, n_t: usize) -> Result<c64> {
    let d = contour.distance(&e.values);
    if d < MIN_DISTANCE {
        return Err(TopoError::ContourHitsSpectrum(d));
    }
    let v = &e.vectors;
    let n = v.nrows();
    let grad = |axis: usize| -> CMat {
        let l = lattice.fiber;
        let x: Vec<i64> = (0..lattice.n_sites()).map(|s| lattice.coords(s)[axis]).collect();
        let dh = CMat::from_fn(n, n, |r, c| {
            let dx = lattice.min_image(x[r / l] - x[c / l], axis) as f64;
            h[(r, c)] * c64::new(0.0, dx)
        });
        v.adjoint() * dh * v
    };
    let a1 = grad(0);
    let a2 = grad(1);
    let count = lattice.n_sites() as f64;
    let mut total = ZERO;
    for k in 0..n_t {
        let (z, dz) = contour.point(k as f64 / n_t as f64);
        let g: Vec<c64> = e.values.iter().map(|&x| (c64::new(x, 0.0) - z).inv()).collect();
        let mut s = ZERO;
        for a in 0..n {
            let f0 = dz * g[a];
            let mut acc = ZERO;
            for b in 0..n {
                let f1ab = -a1[(a, b)] * g[b];
                let f2ab = -a2[(a, b)] * g[b];
                let f1ba = -a1[(b, a)] * g[a];
                let f2ba = -a2[(b, a)] * g[a];
                acc += f1ab * f2ba - f2ab * f1ba;
            }
            s += f0 * acc;
        }
        total += 3.0 * s;
    }
    Ok(coefficient(1) * total / (n_t as f64 * count))
}

/// Resolvent-contour `Ch_{1,2}` of a clean periodic sample below `mu`.
///
/// The diagnostic is the change in value when the contour is sampled at `n_t / 2` points.
pub fn veg_invariant(h: &HamiltonianSample, mu: f64, n_t: usize) -> Result<InvariantResult> {
    let lattice = &h.lattice;
    if lattice.dim() != 2 || !(0..2).all(|j| lattice.is_periodic(j)) {
        return Err(TopoError::NotPeriodic);
    }
    let e = diagonalize_matrix(&h.matrix)?;
    let contour = Contour::through(mu, e.values[0] - 1.0);
    let v = veg_value(&h.matrix, &e, lattice, &contour, n_t)?;
    let coarse = veg_value(&h.matrix, &e, lattice, &contour, (n_t / 2).max(1))?;
    let i12 = IndexSet::new(&[1, 2])?;
    Ok(InvariantResult::new(v.re, &i12, Estimator::Veg, &lattice.sizes, Admissible::Z).with_diagnostic((v - coarse).norm()))
}
