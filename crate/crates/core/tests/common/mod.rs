#![allow(dead_code)]

use topo_core::invariants::RMat;
use topo_core::linalg::{self, c64, CMat};
use topo_core::model::LatticeSpec;
use topo_core::model::{build_hamiltonian, make_named_model, Boundary, HamiltonianSample, ModelDefinition, Params};

pub fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn model(name: &str, kv: &[(&str, f64)], sizes: &[usize], boundary: Boundary) -> ModelDefinition {
    make_named_model(name, &params(kv), sizes, &vec![boundary; sizes.len()]).unwrap()
}

pub fn sample(name: &str, kv: &[(&str, f64)], sizes: &[usize], boundary: Boundary, seed: u64) -> HamiltonianSample {
    build_hamiltonian(&model(name, kv, sizes, boundary), seed).unwrap()
}

/// `1_sites (x) s`.
pub fn fiber(n_sites: usize, s: &CMat) -> CMat {
    linalg::kron(&linalg::identity(n_sites), s)
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix through the library kernel.
pub fn eigenvalues(h: &CMat) -> Vec<f64> {
    linalg::eigvalsh(h).unwrap()
}

pub fn random_antisymmetric(n: usize, entries: &[f64]) -> RMat {
    let mut a = RMat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            a[(i, j)] = entries[k];
            a[(j, i)] = -entries[k];
            k += 1;
        }
    }
    a
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &RMat) -> f64 {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

/// Random finite-range matrix on a torus with hops shorter than `N / 4`.
pub fn local_matrix(l: &LatticeSpec, seed: &[f64]) -> CMat {
    let n = l.hilbert_dim();
    CMat::from_fn(n, n, |i, j| {
        let (a, b) = (l.coords(i), l.coords(j));
        let near = (0..l.dim()).all(|ax| l.min_image(a[ax] - b[ax], ax).abs() < (l.sizes[ax] / 4) as i64);
        if near {
            let k = (i * 7 + j * 13) % seed.len();
            c64::new(seed[k], seed[(k + 1) % seed.len()])
        } else {
            c64::new(0.0, 0.0)
        }
    })
}
