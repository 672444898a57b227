use serde::{Deserialize, Serialize};

use super::definition::{fiber_op, HamiltonianSample};
use super::symmetry::{proportional, SymmetrySpec};
use crate::error::{Result, TopoError};
use crate::linalg::{self, CMat};

const REL_TOL: f64 = 1e-10;

/// The ten Cartan-Altland-Zirnbauer classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CazClass {
    A,
    AIII,
    AI,
    BDI,
    D,
    DIII,
    AII,
    CII,
    C,
    CI,
}

/// Group of admissible values of a strong invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Admissible {
    Z,
    TwoZ,
    Z2,
}

impl CazClass {
    /// Row index `j` of the periodic table.
    pub fn index(self) -> usize {
        use CazClass::*;
        match self {
            A | AI => 0,
            AIII | BDI => 1,
            D => 2,
            DIII => 3,
            AII => 4,
            CII => 5,
            C => 6,
            CI => 7,
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, CazClass::A | CazClass::AIII)
    }

    pub fn is_chiral(self) -> bool {
        use CazClass::*;
        matches!(self, AIII | BDI | DIII | CII | CI)
    }

    /// Class from the presence and parity of TRS and PHS (0 = absent) and CHS.
    pub fn from_signs(tr: i8, ph: i8, ch: bool) -> Self {
        use CazClass::*;
        match (tr, ph, ch) {
            (0, 0, false) => A,
            (0, 0, true) => AIII,
            (1, 0, _) => AI,
            (1, 1, _) => BDI,
            (0, 1, _) => D,
            (-1, 1, _) => DIII,
            (-1, 0, _) => AII,
            (-1, -1, _) => CII,
            (0, -1, _) => C,
            (1, -1, _) => CI,
            _ => A,
        }
    }

    /// Strong invariant group in dimension `d`, if nontrivial.
    pub fn strong_invariant(self, d: usize) -> Option<Admissible> {
        use Admissible::*;
        if d == 0 {
            return None;
        }
        if self.is_complex() {
            let j = self.index();
            return ((d + j) % 2 == 0).then_some(Z);
        }
        // entry (j, d) of the real table sits at position (j - d) mod 8 of the Bott clock
        const CLOCK: [Option<Admissible>; 8] =
            [Some(Z), Some(Z2), Some(Z2), None, Some(TwoZ), None, None, None];
        let j = self.index();
        let k = (j + 8 * 4 - d) % 8;
        CLOCK[k]
    }
}

/// Detects which symmetry relations hold on the assembled matrix and returns the class
/// together with its row index.
pub fn classify_caz(h: &HamiltonianSample, sym: &SymmetrySpec) -> Result<(CazClass, usize)> {
    let m = &h.matrix;
    let scale = linalg::max_abs(m).max(1.0);
    let anti = |s: &CMat, sign: f64| -> bool {
        let big = fiber_op(&h.lattice, s);
        let t = &(big.adjoint() * linalg::conj(m)) * &big;
        let r = if sign > 0.0 { &t - m } else { &t + m };
        linalg::max_abs(&r) < REL_TOL * scale
    };
    let tr = match &sym.s_tr {
        Some((s, e)) if anti(s, 1.0) => *e,
        _ => 0,
    };
    let ph = match &sym.s_ph {
        Some((s, e)) if anti(s, -1.0) => *e,
        _ => 0,
    };
    let ch_holds = |s: &CMat| -> bool {
        let big = fiber_op(&h.lattice, s);
        let t = &(big.adjoint() * m) * &big;
        linalg::max_abs(&(&t + m)) < REL_TOL * scale
    };
    let ch = match &sym.s_ch {
        Some(s) => {
            let holds = ch_holds(s);
            if tr != 0 && ph != 0 {
                let (st, sp) = (&sym.s_tr.as_ref().unwrap().0, &sym.s_ph.as_ref().unwrap().0);
                if !proportional(&(sp * st), s) {
                    return Err(TopoError::InconsistentSymmetries(
                        "declared s_ch differs from s_ph s_tr".into(),
                    ));
                }
                if !holds {
                    return Err(TopoError::InconsistentSymmetries(
                        "TRS and PHS hold but the declared chiral relation fails".into(),
                    ));
                }
            }
            holds
        }
        None => tr != 0 && ph != 0,
    };
    let class = CazClass::from_signs(tr, ph, ch);
    Ok((class, class.index()))
}
