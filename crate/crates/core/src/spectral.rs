//! Eigendecomposition, Fermi projections, gap detection and smooth switch functions.

use std::io::Write;

use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};
use crate::model::HamiltonianSample;

const GAP_FLOOR: f64 = 1e-8;

/// Full spectral decomposition with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenData {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenData {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `g(H) = sum_k g(lambda_k) v_k v_k*`.
    pub fn apply(&self, g: impl Fn(f64) -> c64) -> CMat {
        let w: Vec<c64> = self.values.iter().map(|&x| g(x)).collect();
        linalg::spectral_sum(&self.vectors, &w)
    }

    /// Indices of eigenvalues strictly below `mu`.
    pub fn below(&self, mu: f64) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.values[k] < mu).collect()
    }

    /// Largest residual `|H v - lambda v|` relative to `|H|`.
    pub fn residual(&self, h: &CMat) -> f64 {
        let hv = h * &self.vectors;
        let lv = linalg::diag_right(
            &self.vectors,
            &self.values.iter().map(|&x| c64::new(x, 0.0)).collect::<Vec<_>>(),
        );
        let scale = self.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        linalg::max_abs(&(&hv - &lv)) / scale
    }
}

pub fn diagonalize(h: &HamiltonianSample) -> Result<EigenData> {
    diagonalize_matrix(&h.matrix)
}

pub fn diagonalize_matrix(h: &CMat) -> Result<EigenData> {
    let (values, vectors) = linalg::eigh(h)?;
    Ok(EigenData { values, vectors })
}

/// Spectral projection onto energies below `mu` with its certified gap.
#[derive(Clone, Debug)]
pub struct FermiProjection {
    pub mu: f64,
    pub projector: CMat,
    /// Open interval around `mu` free of eigenvalues.
    pub gap: (f64, f64),
    pub rank: usize,
    /// Orthonormal basis of the range, one column per occupied state.
    pub basis: CMat,
}

impl FermiProjection {
    /// Projection from an explicit orthonormal frame.
    pub fn from_frame(basis: CMat, mu: f64, gap: (f64, f64)) -> Self {
        let projector = &basis * basis.adjoint();
        let rank = basis.ncols();
        Self { mu, projector, gap, rank, basis }
    }
}

/// Maximal open interval around `mu` without eigenvalues.
pub fn detect_gap(e: &EigenData, mu: f64) -> Result<(f64, f64)> {
    let lo = e.values.iter().copied().filter(|&x| x <= mu).fold(f64::NEG_INFINITY, f64::max);
    let hi = e.values.iter().copied().filter(|&x| x > mu).fold(f64::INFINITY, f64::min);
    let width = hi - lo;
    if width < GAP_FLOOR || (mu - lo) < GAP_FLOOR / 2.0 || (hi - mu) < GAP_FLOOR / 2.0 {
        return Err(TopoError::NoGap { mu, width: width.min((mu - lo).min(hi - mu) * 2.0) });
    }
    Ok((lo, hi))
}

pub fn fermi_projection(e: &EigenData, mu: f64) -> Result<FermiProjection> {
    let gap = detect_gap(e, mu)?;
    let occ = e.below(mu);
    let basis = linalg::select_columns(&e.vectors, &occ);
    Ok(FermiProjection::from_frame(basis, mu, gap))
}

/// Centre of the `k`-th gap counted from below, among gaps wider than `min_width`.
pub fn gap_centers(e: &EigenData, min_width: f64) -> Vec<(f64, f64)> {
    e.values
        .windows(2)
        .filter(|w| w[1] - w[0] > min_width)
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Lowest gap at least `rel` times as wide as the widest gap of the spectrum.
pub fn lowest_gap(e: &EigenData, rel: f64) -> Result<(f64, f64)> {
    let widest = e.values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    gap_centers(e, (rel * widest).max(1e-8))
        .first()
        .copied()
        .ok_or(TopoError::NoGap { mu: f64::NAN, width: widest })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchKind {
    Exp,
    Ind,
}

/// Smoothstep switch across the gap `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchFunction {
    pub kind: SwitchKind,
    pub a: f64,
    pub b: f64,
    /// Odd polynomial degree `2N + 1` of the transition.
    pub degree: usize,
}

impl SwitchFunction {
    pub fn new(kind: SwitchKind, a: f64, b: f64, degree: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(TopoError::GapMismatch(format!("invalid interval ({a}, {b})")));
        }
        if degree % 2 == 0 {
            return Err(TopoError::InvalidSpec("switch degree must be odd".into()));
        }
        Ok(Self { kind, a, b, degree })
    }

    pub fn exp(a: f64, b: f64) -> Result<Self> {
        Self::new(SwitchKind::Exp, a, b, 7)
    }

    pub fn ind(a: f64, b: f64) -> Result<Self> {
        Self::new(SwitchKind::Ind, a, b, 7)
    }

    fn order(&self) -> usize {
        (self.degree - 1) / 2
    }

    fn u(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = smoothstep(self.order(), self.u(x));
        match self.kind {
            SwitchKind::Exp => s,
            SwitchKind::Ind => 2.0 * s - 1.0,
        }
    }

    /// Exact derivative of the polynomial transition.
    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.order();
        let u = self.u(x);
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let c = smoothstep_slope(n) * u.powi(n as i32) * (1.0 - u).powi(n as i32) / (self.b - self.a);
        match self.kind {
            SwitchKind::Exp => c,
            SwitchKind::Ind => 2.0 * c,
        }
    }

    /// `max_{j <= k} sup |f^(j)|` over the smooth pieces, sampled on a fine grid.
    pub fn ck_norm(&self, k: usize) -> f64 {
        let n = self.order();
        let amp = match self.kind {
            SwitchKind::Exp => 1.0,
            SwitchKind::Ind => 2.0,
        };
        // u^n (1 - u)^n as coefficients of u^0 .. u^{2n}
        let mut poly = vec![0.0; 2 * n + 1];
        for j in 0..=n {
            poly[n + j] = binom(n, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        }
        let width = self.b - self.a;
        let mut best: f64 = 1.0;
        let mut scale = smoothstep_slope(n) * amp / width;
        for _ in 1..=k {
            let sup = (0..=4000)
                .map(|t| {
                    let u = t as f64 / 4000.0;
                    poly.iter().rev().fold(0.0, |acc, &c| acc * u + c).abs()
                })
                .fold(0.0, f64::max);
            best = best.max(sup * scale);
            poly = poly.iter().enumerate().skip(1).map(|(p, &c)| c * p as f64).collect();
            if poly.is_empty() {
                break;
            }
            scale /= width;
        }
        best
    }

    /// Fails when the reference spectrum has eigenvalues inside the transition interval.
    pub fn check_gap(&self, bulk: &EigenData) -> Result<()> {
        if let Some(x) = bulk.values.iter().find(|&&x| x > self.a && x < self.b) {
            return Err(TopoError::GapMismatch(format!(
                "bulk eigenvalue {x} inside ({}, {})",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S_N(u) = u^{N+1} sum_k C(N+k, k) C(2N+1, N-k) (-u)^k`.
pub fn smoothstep(n: usize, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let sum: f64 = (0..=n).map(|k| binom(n + k, k) * binom(2 * n + 1, n - k) * (-u).powi(k as i32)).sum();
    u.powi(n as i32 + 1) * sum
}

fn smoothstep_slope(n: usize) -> f64 {
    // (2N+1)! / (N!)^2
    (2 * n + 1) as f64 * binom(2 * n, n)
}

/// `f(H)` by exact functional calculus.
pub fn eval_switch(f: &SwitchFunction, e: &EigenData) -> CMat {
    e.apply(|x| c64::new(f.eval(x), 0.0))
}

pub fn write_spectrum_csv<W: Write>(w: W, e: &EigenData) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "eigenvalue"]).map_err(crate::model::io::csv_err)?;
    for (k, x) in e.values.iter().enumerate() {
        out.write_record(&[k.to_string(), format!("{x:.15e}")])
            .map_err(crate::model::io::csv_err)?;
    }
    out.flush()?;
    Ok(())
}
