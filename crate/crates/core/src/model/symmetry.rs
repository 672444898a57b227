use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};

const PARITY_TOL: f64 = 1e-12;

/// Fiber symmetry operators: time reversal, particle-hole and chiral.
#[derive(Clone, Debug, Default)]
pub struct SymmetrySpec {
    /// Real unitary with its parity `s^2 = eta`.
    pub s_tr: Option<(CMat, i8)>,
    pub s_ph: Option<(CMat, i8)>,
    pub s_ch: Option<CMat>,
}

impl SymmetrySpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(s_tr: Option<(CMat, i8)>, s_ph: Option<(CMat, i8)>, s_ch: Option<CMat>) -> Result<Self> {
        let spec = Self { s_tr, s_ph, s_ch };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fiber(&self) -> Option<usize> {
        self.s_tr
            .as_ref()
            .map(|s| s.0.nrows())
            .or_else(|| self.s_ph.as_ref().map(|s| s.0.nrows()))
            .or_else(|| self.s_ch.as_ref().map(|s| s.nrows()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, op) in [("s_tr", &self.s_tr), ("s_ph", &self.s_ph)] {
            if let Some((s, eta)) = op {
                check_unitary(name, s)?;
                if linalg::max_abs(&CMat::from_fn(s.nrows(), s.ncols(), |i, j| c64::new(s[(i, j)].im, 0.0)))
                    > PARITY_TOL
                {
                    return Err(TopoError::InvalidSpec(format!("{name} must be real")));
                }
                if *eta != 1 && *eta != -1 {
                    return Err(TopoError::InvalidSpec(format!("{name} parity must be +-1")));
                }
                let sq = s * s;
                let target = linalg::scale(&linalg::identity(s.nrows()), c64::new(*eta as f64, 0.0));
                if linalg::max_diff(&sq, &target) > PARITY_TOL {
                    return Err(TopoError::InvalidSpec(format!(
                        "{name} does not square to {eta}"
                    )));
                }
            }
        }
        if let Some(s) = &self.s_ch {
            check_unitary("s_ch", s)?;
            let sq = s * s;
            if linalg::max_diff(&sq, &linalg::identity(s.nrows())) > PARITY_TOL {
                return Err(TopoError::InvalidSpec("s_ch must square to 1".into()));
            }
        }
        if let (Some((t, _)), Some((p, _)), Some(c)) = (&self.s_tr, &self.s_ph, &self.s_ch) {
            if !proportional(&(p * t), c) {
                return Err(TopoError::InconsistentSymmetries(
                    "s_ch is not proportional to s_ph s_tr".into(),
                ));
            }
        }
        Ok(())
    }

    /// Conjugates all operators by a fiber unitary `W`: `s -> W s W^T` for antiunitary
    /// parts and `s -> W s W*` for the chiral operator.
    pub fn conjugated(&self, w: &CMat) -> Self {
        let wt = linalg::transpose(w);
        let wa = linalg::adjoint(w);
        Self {
            s_tr: self.s_tr.as_ref().map(|(s, e)| (&(w * s) * &wt, *e)),
            s_ph: self.s_ph.as_ref().map(|(s, e)| (&(w * s) * &wt, *e)),
            s_ch: self.s_ch.as_ref().map(|s| &(w * s) * &wa),
        }
    }
}

fn check_unitary(name: &str, s: &CMat) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(TopoError::InvalidSpec(format!("{name} not square")));
    }
    let g = s.adjoint() * s;
    if linalg::max_diff(&g, &linalg::identity(s.nrows())) > PARITY_TOL {
        return Err(TopoError::InvalidSpec(format!("{name} not unitary")));
    }
    Ok(())
}

/// `a = e^{i phi} b` for some phase.
pub fn proportional(a: &CMat, b: &CMat) -> bool {
    let ip = linalg::trace(&(b.adjoint() * a));
    let n = a.nrows() as f64;
    if ip.norm() < 1e-12 {
        return false;
    }
    let phase = ip / ip.norm();
    linalg::max_diff(a, &linalg::scale(b, phase)) < 1e-10 * n.max(1.0)
}
