use faer::Mat;

use crate::error::{Result, TopoError};

/// Dense real matrix.
pub type RMat = Mat<f64>;

const ANTISYM_TOL: f64 = 1e-10;
const UNDERFLOW: f64 = 1e-300;

fn check(a: &RMat) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(TopoError::InvalidSpec("Pfaffian needs a square matrix".into()));
    }
    if n % 2 == 1 {
        return Err(TopoError::OddDimension);
    }
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((a[(i, j)] + a[(j, i)]).abs());
        }
    }
    if defect > ANTISYM_TOL {
        return Err(TopoError::NotAntisymmetric(defect));
    }
    Ok(())
}

/// Sign and `ln |Pf(A)|` by Parlett-Reid skew tridiagonalization with partial pivoting.
/// A vanishing Pfaffian returns sign 0 and `-inf`.
pub fn pfaffian_sign_log(a: &RMat) -> Result<(f64, f64)> {
    check(a)?;
    let n = a.nrows();
    let mut m = a.clone();
    let mut sign = 1.0;
    let mut log = 0.0;
    let mut k = 0;
    while k + 1 < n {
        // pivot the largest entry of column k below the diagonal into row k + 1
        let mut kp = k + 1;
        for r in (k + 2)..n {
            if m[(r, k)].abs() > m[(kp, k)].abs() {
                kp = r;
            }
        }
        if kp != k + 1 {
            for c in 0..n {
                let t = m[(k + 1, c)];
                m[(k + 1, c)] = m[(kp, c)];
                m[(kp, c)] = t;
            }
            for r in 0..n {
                let t = m[(r, k + 1)];
                m[(r, k + 1)] = m[(r, kp)];
                m[(r, kp)] = t;
            }
            sign = -sign;
        }
        let piv = m[(k, k + 1)];
        if piv == 0.0 {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        sign *= piv.signum();
        log += piv.abs().ln();
        if k + 2 < n {
            let tau: Vec<f64> = ((k + 2)..n).map(|c| m[(k, c)] / piv).collect();
            let col: Vec<f64> = ((k + 2)..n).map(|r| m[(r, k + 1)]).collect();
            let w = n - k - 2;
            for r in 0..w {
                for c in 0..w {
                    m[(k + 2 + r, k + 2 + c)] += tau[r] * col[c] - col[r] * tau[c];
                }
            }
        }
        k += 2;
    }
    Ok((sign, log))
}

/// Pfaffian of a real antisymmetric matrix.
pub fn pfaffian(a: &RMat) -> Result<f64> {
    let (sign, log) = pfaffian_sign_log(a)?;
    if sign == 0.0 {
        return Ok(0.0);
    }
    if log < UNDERFLOW.ln() {
        return Err(TopoError::PfaffianUnderflow);
    }
    Ok(sign * log.exp())
}
