use crate::linalg::{c64, CMat, ZERO};
use crate::model::LatticeSpec;

/// Set of sites over which a trace per unit volume is taken.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    All,
    /// Central fraction `rho` of every open axis; periodic axes are kept whole.
    Core(f64),
    /// Sites with `|x_j - center_j| < half_width_j` on every axis.
    Window { center: Vec<f64>, half_width: Vec<f64> },
    /// Explicit per-site mask.
    Mask(Vec<bool>),
}

impl Region {
    pub fn mask(&self, lattice: &LatticeSpec) -> Vec<bool> {
        let ns = lattice.n_sites();
        match self {
            Region::All => vec![true; ns],
            Region::Core(rho) => (0..ns)
                .map(|s| {
                    let x = lattice.coords(s);
                    (0..lattice.dim()).all(|j| {
                        if lattice.is_periodic(j) {
                            return true;
                        }
                        let n = lattice.sizes[j] as f64;
                        (x[j] as f64 - (n - 1.0) / 2.0).abs() < rho * n / 2.0
                    })
                })
                .collect(),
            Region::Window { center, half_width } => (0..ns)
                .map(|s| {
                    let x = lattice.coords(s);
                    (0..lattice.dim()).all(|j| {
                        let mut dx = x[j] as f64 - center[j];
                        if lattice.is_periodic(j) {
                            let n = lattice.sizes[j] as f64;
                            dx = (dx + n / 2.0).rem_euclid(n) - n / 2.0;
                        }
                        dx.abs() < half_width[j]
                    })
                })
                .collect(),
            Region::Mask(m) => m.clone(),
        }
    }

    /// Default region: whole torus, core of open samples.
    pub fn default_for(lattice: &LatticeSpec) -> Self {
        if (0..lattice.dim()).all(|j| lattice.is_periodic(j)) {
            Region::All
        } else {
            Region::Core(0.5)
        }
    }
}

/// `(1 / #region) sum_{n in region} tr_L <n|A|n>`.
pub fn trace_per_volume(a: &CMat, lattice: &LatticeSpec, region: &Region) -> c64 {
    let l = lattice.fiber;
    let mask = region.mask(lattice);
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return ZERO;
    }
    let mut s = ZERO;
    for (site, &keep) in mask.iter().enumerate() {
        if keep {
            for o in 0..l {
                s += a[(site * l + o, site * l + o)];
            }
        }
    }
    s / count as f64
}

/// Same as `trace_per_volume(X Y)` without forming the product.
pub fn trace_diag_product(x: &CMat, y: &CMat, lattice: &LatticeSpec, region: &Region) -> c64 {
    let l = lattice.fiber;
    let mask = region.mask(lattice);
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return ZERO;
    }
    let n = x.ncols();
    let mut s = ZERO;
    for (site, &keep) in mask.iter().enumerate() {
        if keep {
            for o in 0..l {
                let i = site * l + o;
                for k in 0..n {
                    s += x[(i, k)] * y[(k, i)];
                }
            }
        }
    }
    s / count as f64
}

/// `nabla_j A = i [X_j, A]`, with minimal-image displacements on periodic axes.
/// `axis` is 1-based.
pub fn nc_derivative(a: &CMat, lattice: &LatticeSpec, axis: usize) -> CMat {
    let l = lattice.fiber;
    let ns = lattice.n_sites();
    let x: Vec<i64> = (0..ns).map(|s| lattice.coords(s)[axis - 1]).collect();
    let disp = |r: usize, c: usize| lattice.min_image(x[r / l] - x[c / l], axis - 1) as f64;
    CMat::from_fn(a.nrows(), a.ncols(), |r, c| {
        let d = disp(r, c);
        if d == 0.0 {
            ZERO
        } else {
            a[(r, c)] * c64::new(0.0, d)
        }
    })
}
