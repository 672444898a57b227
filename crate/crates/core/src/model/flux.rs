use std::f64::consts::PI;

use super::definition::HamiltonianSample;
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64};

// offsets keep the cut clear of lattice points and bond midpoints
const CUT_DX: f64 = 1.234_567e-7;
const CUT_DY: f64 = 2.345_678e-7;

/// Threads flux `2 pi t` through one cell.
///
/// In `d = 2` the cell is the plaquette with lower-left corner `plaquette`; bonds crossing
/// the ray from its centre along `+x_1` pick up `exp(-+ 2 pi i t)` when crossing upward or
/// downward. In `d = 1` with `L = 2` the cell is the ladder square between sites
/// `plaquette[0]` and `plaquette[0] + 1`: bonds leaving leg 0 across it get `exp(i pi t)`,
/// bonds leaving leg 1 get `exp(-i pi t)`.
pub fn insert_flux(h: &HamiltonianSample, t: f64, plaquette: &[i64]) -> Result<HamiltonianSample> {
    let d = h.lattice.dim();
    match d {
        1 if h.lattice.fiber == 2 => {}
        2 => {}
        _ => {
            return Err(TopoError::BadDimension {
                expected: "d = 2, or d = 1 with a two-leg fiber".into(),
                got: d,
            })
        }
    }
    if plaquette.len() != d {
        return Err(TopoError::InvalidSpec("plaquette coordinate has wrong dimension".into()));
    }
    if t == 0.0 {
        return Ok(h.clone());
    }
    let l = h.lattice.fiber;
    let ns = h.lattice.n_sites();
    let mut m = h.matrix.clone();
    let coords: Vec<Vec<i64>> = (0..ns).map(|s| h.lattice.coords(s)).collect();
    for x in 0..ns {
        for y in 0..ns {
            if x == y {
                continue;
            }
            let delta: Vec<i64> = (0..d)
                .map(|a| h.lattice.min_image(coords[y][a] - coords[x][a], a))
                .collect();
            if d == 1 {
                let c = plaquette[0];
                let from = coords[x][0];
                let (lo, hi) = (from.min(from + delta[0]), from.max(from + delta[0]));
                if !(lo <= c && c < hi) {
                    continue;
                }
                let forward = delta[0] > 0;
                for o in 0..l {
                    for p in 0..l {
                        // charge of the leg on the left end of the bond
                        let (left, sign) = if forward { (p, 1.0) } else { (o, -1.0) };
                        let q = if left == 0 { 1.0 } else { -1.0 };
                        m[(y * l + o, x * l + p)] *= linalg::cis(sign * q * PI * t);
                    }
                }
            } else {
                let w = crossing(&coords[x], &delta, plaquette);
                if w == 0 {
                    continue;
                }
                let ph = linalg::cis(-(w as f64) * 2.0 * PI * t);
                for o in 0..l {
                    for p in 0..l {
                        m[(y * l + o, x * l + p)] *= ph;
                    }
                }
            }
        }
    }
    Ok(h.with_matrix(m))
}

/// +1 for an upward crossing of the cut, -1 downward, 0 otherwise.
fn crossing(x: &[i64], delta: &[i64], plaquette: &[i64]) -> i32 {
    let cx = plaquette[0] as f64 + 0.5 + CUT_DX;
    let cy = plaquette[1] as f64 + 0.5 + CUT_DY;
    let (x0, y0) = (x[0] as f64, x[1] as f64);
    let (dx, dy) = (delta[0] as f64, delta[1] as f64);
    if dy == 0.0 {
        return 0;
    }
    let s = (cy - y0) / dy;
    if !(0.0..=1.0).contains(&s) {
        return 0;
    }
    if x0 + s * dx > cx {
        if dy > 0.0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Diagonal gauge transformation relating the full-flux endpoint to the original sample
/// on open geometries: `H(t = 1) = D H D*`.
pub fn full_flux_gauge(h: &HamiltonianSample, plaquette: &[i64]) -> Vec<c64> {
    let l = h.lattice.fiber;
    (0..h.dim())
        .map(|i| {
            let x = h.lattice.coords(i / l);
            match h.lattice.dim() {
                1 => {
                    if x[0] > plaquette[0] {
                        c64::new(-1.0, 0.0)
                    } else {
                        linalg::ONE
                    }
                }
                _ => linalg::ONE,
            }
        })
        .collect()
}
