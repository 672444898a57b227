use serde::{Deserialize, Serialize};

use crate::error::{Result, TopoError};

/// Boundary condition along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// Finite box of `Z^d` with `L` orbitals per site.
///
/// Sites are ordered with axis 1 fastest; the Hilbert-space index of
/// orbital `o` at site `s` is `o + L * s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sizes: Vec<usize>,
    pub boundary: Vec<Boundary>,
    pub fiber: usize,
}

impl LatticeSpec {
    pub fn new(sizes: Vec<usize>, boundary: Vec<Boundary>, fiber: usize) -> Result<Self> {
        let d = sizes.len();
        if !(1..=3).contains(&d) {
            return Err(TopoError::InvalidSpec(format!("dimension {d} not in 1..=3")));
        }
        if boundary.len() != d {
            return Err(TopoError::InvalidSpec(format!(
                "{} boundary flags for dimension {d}",
                boundary.len()
            )));
        }
        if sizes.iter().any(|&n| n == 0) {
            return Err(TopoError::InvalidSpec("zero linear size".into()));
        }
        if fiber == 0 {
            return Err(TopoError::InvalidSpec("fiber must be positive".into()));
        }
        Ok(Self { sizes, boundary, fiber })
    }

    pub fn periodic(sizes: &[usize], fiber: usize) -> Self {
        Self::new(sizes.to_vec(), vec![Boundary::Periodic; sizes.len()], fiber)
            .expect("valid lattice")
    }

    pub fn open(sizes: &[usize], fiber: usize) -> Self {
        Self::new(sizes.to_vec(), vec![Boundary::Open; sizes.len()], fiber).expect("valid lattice")
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_sites(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.fiber * self.n_sites()
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.boundary[axis] == Boundary::Periodic
    }

    /// Coordinate tuple of a site index.
    pub fn coords(&self, site: usize) -> Vec<i64> {
        let mut rest = site;
        self.sizes
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c as i64
            })
            .collect()
    }

    /// Site index of an in-box coordinate tuple.
    pub fn site(&self, coords: &[i64]) -> usize {
        let mut idx = 0usize;
        for (axis, &n) in self.sizes.iter().enumerate().rev() {
            idx = idx * n + coords[axis] as usize;
        }
        idx
    }

    /// Wraps a coordinate into the box; `None` when it leaves an open axis.
    /// Returns the wrapped coordinate and the lattice vector `R = x - x_wrapped`.
    pub fn wrap(&self, x: &[i64]) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut w = Vec::with_capacity(x.len());
        let mut r = Vec::with_capacity(x.len());
        for (axis, &xi) in x.iter().enumerate() {
            let n = self.sizes[axis] as i64;
            if self.is_periodic(axis) {
                let wi = xi.rem_euclid(n);
                w.push(wi);
                r.push(xi - wi);
            } else if (0..n).contains(&xi) {
                w.push(xi);
                r.push(0);
            } else {
                return None;
            }
        }
        Some((w, r))
    }

    /// Signed coordinate difference `x_a - x_b` along `axis` for Hilbert indices,
    /// minimal image on periodic axes.
    pub fn displacement(&self, a: usize, b: usize, axis: usize) -> f64 {
        let ca = self.coords(a / self.fiber)[axis];
        let cb = self.coords(b / self.fiber)[axis];
        let mut d = (ca - cb) as f64;
        if self.is_periodic(axis) {
            let n = self.sizes[axis] as f64;
            d = (d + n / 2.0).rem_euclid(n) - n / 2.0;
        }
        d
    }

    /// Minimal-image representative of a coordinate difference along `axis`.
    pub fn min_image(&self, d: i64, axis: usize) -> i64 {
        if self.is_periodic(axis) {
            let n = self.sizes[axis] as i64;
            (d + n / 2).rem_euclid(n) - n / 2
        } else {
            d
        }
    }

    /// Per-Hilbert-index coordinate along `axis`.
    pub fn positions(&self, axis: usize) -> Vec<f64> {
        (0..self.hilbert_dim())
            .map(|i| self.coords(i / self.fiber)[axis] as f64)
            .collect()
    }

    /// Matrix of signed displacements along `axis` (minimal image on periodic axes).
    pub fn displacement_table(&self, axis: usize) -> Vec<f64> {
        let ns = self.n_sites();
        let x: Vec<i64> = (0..ns).map(|s| self.coords(s)[axis]).collect();
        let n = self.sizes[axis] as f64;
        let per = self.is_periodic(axis);
        let mut out = vec![0.0; ns * ns];
        for a in 0..ns {
            for b in 0..ns {
                let mut d = (x[a] - x[b]) as f64;
                if per {
                    d = (d + n / 2.0).rem_euclid(n) - n / 2.0;
                }
                out[a * ns + b] = d;
            }
        }
        out
    }
}
