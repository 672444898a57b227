//! Half-space samples, the exponential and index boundary maps, and edge currents.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use crate::error::{Result, TopoError};
use crate::invariants::{Estimator, IndexSet, InvariantResult};
use crate::linalg::{self, c64, CMat};
use crate::model::{build_hamiltonian, fiber_op, Admissible, Boundary, HamiltonianSample, LatticeSpec, ModelDefinition, SymmetrySpec};
use crate::spectral::{detect_gap, diagonalize_matrix, EigenData, SwitchFunction};

const UNITARITY_TOL: f64 = 1e-9;
const PROFILE_TOL: f64 = 1e-3;
const GAP_SLACK: f64 = 1e-12;

/// Sample with the last axis open and all others periodic, together with the gap of its
/// periodic companion.
#[derive(Clone, Debug)]
pub struct HalfSpaceSample {
    pub hamiltonian: HamiltonianSample,
    pub bulk_gap: (f64, f64),
    pub mu: f64,
    pub bulk: EigenData,
}

impl HalfSpaceSample {
    pub fn lattice(&self) -> &LatticeSpec {
        &self.hamiltonian.lattice
    }

    /// Axis index of the boundary-normal direction (0-based).
    pub fn normal(&self) -> usize {
        self.lattice().dim() - 1
    }

    /// Number of layers along the normal axis.
    pub fn depth(&self) -> usize {
        self.lattice().sizes[self.normal()]
    }

    /// Boundary volume: product of the transverse sizes.
    pub fn boundary_volume(&self) -> usize {
        let l = self.lattice();
        l.sizes[..l.dim() - 1].iter().product()
    }

    /// Layer of every Hilbert index.
    pub fn layers(&self) -> Vec<usize> {
        let l = self.lattice();
        let ax = self.normal();
        (0..l.hilbert_dim()).map(|i| l.coords(i / l.fiber)[ax] as usize).collect()
    }

    /// Hilbert indices in the lower half `n_d < depth / 2`, which carries one edge.
    pub fn lower_half(&self) -> Vec<bool> {
        let half = self.depth() / 2;
        self.layers().into_iter().map(|n| n < half).collect()
    }

    pub fn diagonalize(&self) -> Result<EigenData> {
        diagonalize_matrix(&self.hamiltonian.matrix)
    }

    fn check_switch(&self, f: &SwitchFunction) -> Result<()> {
        let (lo, hi) = self.bulk_gap;
        if f.a < lo - GAP_SLACK || f.b > hi + GAP_SLACK {
            return Err(TopoError::GapMismatch(format!(
                "switch interval ({}, {}) not inside bulk gap ({lo}, {hi})",
                f.a, f.b
            )));
        }
        f.check_gap(&self.bulk)
    }
}

/// Lattice with axes `1..d-1` periodic and axis `d` open or periodic.
fn cylinder_lattice(model: &ModelDefinition, open_last: bool) -> Result<LatticeSpec> {
    let d = model.lattice.dim();
    let mut boundary = vec![Boundary::Periodic; d];
    if open_last {
        boundary[d - 1] = Boundary::Open;
    }
    LatticeSpec::new(model.lattice.sizes.clone(), boundary, model.lattice.fiber)
}

/// Builds the half-space sample and certifies the gap around `mu` on its periodic companion.
pub fn half_space(model: &ModelDefinition, realization_seed: u64, mu: f64) -> Result<HalfSpaceSample> {
    let torus = model.clone().with_lattice(cylinder_lattice(model, false)?);
    let bulk = diagonalize_matrix(&build_hamiltonian(&torus, realization_seed)?.matrix)?;
    let bulk_gap = detect_gap(&bulk, mu)?;
    let half = model.clone().with_lattice(cylinder_lattice(model, true)?);
    let hamiltonian = build_hamiltonian(&half, realization_seed)?;
    Ok(HalfSpaceSample { hamiltonian, bulk_gap, mu, bulk })
}

/// Edge unitary with its layer-resolved deviation from the identity.
#[derive(Clone, Debug)]
pub struct BoundaryUnitary {
    pub u: CMat,
    /// Operator norm of `U - 1` restricted to each layer.
    pub profile: Vec<f64>,
    /// Decay length of a log-linear fit over the lower half, when the profile decays.
    pub decay_length: Option<f64>,
    pub unitarity_defect: f64,
}

/// Operator norm of the diagonal block of `a` on each layer.
pub fn layer_profile(a: &CMat, layers: &[usize], depth: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(depth);
    for n in 0..depth {
        let idx: Vec<usize> = (0..a.nrows()).filter(|&i| layers[i] == n).collect();
        let block = linalg::principal(a, &idx);
        out.push(linalg::singular_values(&block)?.first().copied().unwrap_or(0.0));
    }
    Ok(out)
}

/// Least-squares decay length of `log profile[n]` against `n` over the lower half.
pub fn decay_length(profile: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = profile[..profile.len() / 2]
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-15)
        .map(|(n, &p)| (n as f64, p.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -1.0 / slope)
}

fn edge_unitary(e: &EigenData, f: &SwitchFunction) -> CMat {
    e.apply(|x| linalg::cis(-TAU * f.eval(x)))
}

/// `U = exp(-2 pi i f(H))` on the half-space sample.
pub fn exp_map(half: &HalfSpaceSample, f: &SwitchFunction) -> Result<BoundaryUnitary> {
    half.check_switch(f)?;
    let e = half.diagonalize()?;
    let u = edge_unitary(&e, f);
    let n = u.nrows();
    let one = linalg::identity(n);
    let unitarity_defect = linalg::max_diff(&(&u * u.adjoint()), &one);
    if unitarity_defect > UNITARITY_TOL {
        return Err(TopoError::ConvergenceFailure(format!("edge unitary defect {unitarity_defect:e}")));
    }
    let profile = layer_profile(&(&u - &one), &half.layers(), half.depth())?;
    let decay_length = decay_length(&profile);
    Ok(BoundaryUnitary { u, profile, decay_length, unitarity_defect })
}

/// `H` with a flux `theta` distributed uniformly along the periodic `axis`.
pub fn twisted(h: &CMat, lattice: &LatticeSpec, axis: usize, theta: f64) -> CMat {
    let l = lattice.fiber;
    let x: Vec<i64> = (0..lattice.n_sites()).map(|s| lattice.coords(s)[axis]).collect();
    let n = lattice.sizes[axis] as f64;
    linalg::hadamard_with(h, |r, c| {
        let d = lattice.min_image(x[r / l] - x[c / l], axis) as f64;
        linalg::cis(-theta * d / n)
    })
}

/// `Ch_{j}` of the edge unitary for `I = {j}` with `j < d`.
///
/// A flux `theta` is threaded uniformly through the periodic axis `j`, and the winding of
/// `det` of the lower-half block of `exp(-2 pi i f(H_theta))` over `theta in [0, 2 pi]`
/// is accumulated from `samples` steps. The diagnostic is the largest phase step.
pub fn boundary_winding(half: &HalfSpaceSample, f: &SwitchFunction, i: &IndexSet, samples: usize) -> Result<InvariantResult> {
    let lattice = half.lattice();
    if i.len() != 1 || i.axes()[0] >= lattice.dim() {
        return Err(TopoError::InvalidSpec(format!("boundary winding needs I = {{j}}, j < d, got {:?}", i.axes())));
    }
    let axis = i.axes()[0] - 1;
    let bu = exp_map(half, f)?;
    let deepest = bu.profile[half.depth() / 2 - 1];
    if deepest > PROFILE_TOL {
        return Err(TopoError::ProfileNotDecayed(deepest));
    }
    let lower: Vec<usize> = half.lower_half().iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect();
    let samples = samples.max(4);
    let mut phases = Vec::with_capacity(samples + 1);
    for s in 0..=samples {
        let theta = TAU * s as f64 / samples as f64;
        let u = if s == 0 {
            bu.u.clone()
        } else {
            let h = twisted(&half.hamiltonian.matrix, lattice, axis, theta);
            edge_unitary(&diagonalize_matrix(&h)?, f)
        };
        phases.push(linalg::determinant(&linalg::principal(&u, &lower)).arg());
    }
    let mut total = 0.0;
    let mut largest: f64 = 0.0;
    for w in phases.windows(2) {
        let step = (w[1] - w[0] + PI).rem_euclid(TAU) - PI;
        largest = largest.max(step.abs());
        total += step;
    }
    let value = total / TAU;
    Ok(InvariantResult::new(value, i, Estimator::BoundaryWinding, &lattice.sizes, Admissible::Z).with_diagnostic(largest))
}

/// Projection pair representing the index-map image, with the lower-half trace of their
/// difference.
#[derive(Clone, Debug)]
pub struct IndMapResult {
    /// `exp(-i pi/2 f(H)) Pi_+ exp(i pi/2 f(H))`.
    pub projection: CMat,
    /// Negative-chirality projection `Pi_-`, equal to the conjugated one deep in the bulk.
    pub reference: CMat,
    /// Trace of the difference over the lower half.
    pub trace: f64,
}

/// Chirality-resolved weights of the central surface band on the lower half.
#[derive(Clone, Debug)]
pub struct SurfaceSectors {
    pub plus_trace: f64,
    pub minus_trace: f64,
    pub band_size: usize,
    /// Largest `|E|` in the band and the next `|E|` outside it.
    pub band_edge: (f64, f64),
}

fn chiral_projections(half: &HalfSpaceSample, sym: &SymmetrySpec) -> Result<(CMat, CMat)> {
    let s = sym.s_ch.as_ref().ok_or_else(|| TopoError::NotChiral("no chiral operator".into()))?;
    let big = fiber_op(half.lattice(), s);
    let one = linalg::identity(big.nrows());
    let half_c = c64::new(0.5, 0.0);
    Ok((linalg::scale(&(&one + &big), half_c), linalg::scale(&(&one - &big), half_c)))
}

/// Index-map image `[exp(-i pi/2 f(H)) Pi_+ exp(i pi/2 f(H))] - [Pi_-]` for a chiral
/// half-space sample and an odd switch `f`.
pub fn ind_map(half: &HalfSpaceSample, f: &SwitchFunction, sym: &SymmetrySpec) -> Result<IndMapResult> {
    half.check_switch(f)?;
    if (f.a + f.b).abs() > 1e-12 * (f.b - f.a) {
        return Err(TopoError::GapMismatch(format!("switch interval ({}, {}) not symmetric about 0", f.a, f.b)));
    }
    let (plus, minus) = chiral_projections(half, sym)?;
    let e = half.diagonalize()?;
    let w = e.apply(|x| linalg::cis(-PI / 2.0 * f.eval(x)));
    let projection = &(&w * &plus) * w.adjoint();
    let lower = half.lower_half();
    let trace = (0..lower.len()).filter(|&i| lower[i]).map(|i| (projection[(i, i)] - minus[(i, i)]).re).sum();
    Ok(IndMapResult { projection, reference: minus, trace })
}

/// Splits the central surface band by chirality.
///
/// The band is the cluster of eigenvalues closest to zero inside the bulk gap, separated from
/// the remaining in-gap states by a jump at least five times its own width.
pub fn surface_sectors(half: &HalfSpaceSample, sym: &SymmetrySpec) -> Result<SurfaceSectors> {
    let s = sym.s_ch.as_ref().ok_or_else(|| TopoError::NotChiral("no chiral operator".into()))?;
    let e = half.diagonalize()?;
    let (lo, hi) = half.bulk_gap;
    let mut order: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > lo && e.values[k] < hi).collect();
    order.sort_by(|&x, &y| e.values[x].abs().total_cmp(&e.values[y].abs()));
    let mags: Vec<f64> = order.iter().map(|&k| e.values[k].abs()).chain([hi.min(-lo)]).collect();
    let (cut, jump) = (0..mags.len() - 1)
        .map(|k| (k, mags[k + 1] - mags[k]))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or(TopoError::SurfaceBandAmbiguous)?;
    if order.is_empty() || jump < 5.0 * mags[cut] {
        return Err(TopoError::SurfaceBandAmbiguous);
    }
    let band: Vec<usize> = order[..=cut].to_vec();
    let w = linalg::select_columns(&e.vectors, &band);
    let big = fiber_op(half.lattice(), s);
    let m = &(w.adjoint() * &big) * &w;
    let (chir, vecs) = linalg::eigh(&m)?;
    let frame = &w * &vecs;
    let lower = half.lower_half();
    let (mut plus_trace, mut minus_trace) = (0.0, 0.0);
    for (k, &c) in chir.iter().enumerate() {
        let weight: f64 = (0..lower.len()).filter(|&i| lower[i]).map(|i| frame[(i, k)].norm_sqr()).sum();
        if c > 0.0 {
            plus_trace += weight;
        } else {
            minus_trace += weight;
        }
    }
    Ok(SurfaceSectors { plus_trace, minus_trace, band_size: band.len(), band_edge: (mags[cut], mags[cut + 1]) })
}

/// Edge current of the lower and upper edges.
#[derive(Clone, Copy, Debug)]
pub struct EdgeCurrent {
    pub lower: f64,
    pub upper: f64,
}

/// `2 pi / |boundary| sum_{lower half} Re <n| f'(H) O |n>` and the same over the upper half.
fn current_density(half: &HalfSpaceSample, f: &SwitchFunction, observable: &CMat, e: &EigenData) -> EdgeCurrent {
    let fp = e.apply(|x| c64::new(f.deriv(x), 0.0));
    let lower = half.lower_half();
    let n = fp.nrows();
    let (mut lo, mut up) = (0.0, 0.0);
    for i in 0..n {
        let v: f64 = (0..n).map(|k| fp[(i, k)] * observable[(k, i)]).sum::<c64>().re;
        if lower[i] {
            lo += v;
        } else {
            up += v;
        }
    }
    let norm = TAU / half.boundary_volume() as f64;
    EdgeCurrent { lower: lo * norm, upper: up * norm }
}

/// `i [X_1, H]` on the sample.
pub fn velocity(h: &CMat, lattice: &LatticeSpec) -> CMat {
    crate::invariants::nc_derivative(h, lattice, 1)
}

/// Boundary current `2 pi / N_1 sum_{n_2 < N_2/2} Re <0, n_2| f'(H) i[X_1, H] |0, n_2>`,
/// translation-averaged along the edge, for both edges of a `d = 2` cylinder.
pub fn boundary_current(half: &HalfSpaceSample, f: &SwitchFunction) -> Result<EdgeCurrent> {
    if half.lattice().dim() != 2 {
        return Err(TopoError::BadDimension { expected: "2".into(), got: half.lattice().dim() });
    }
    half.check_switch(f)?;
    let e = half.diagonalize()?;
    let v = velocity(&half.hamiltonian.matrix, half.lattice());
    Ok(current_density(half, f, &v, &e))
}

/// Spin-filtered edge current and its correction budget.
#[derive(Clone, Copy, Debug)]
pub struct SpinCurrent {
    pub current: EdgeCurrent,
    /// `||[H, s_z]||` in operator norm.
    pub commutator: f64,
    /// `||[H, s_z]|| * ||f||_{C^6}`.
    pub budget: f64,
}

/// Expectation of `f'(H) 1/2 {i[X_1, H], s_z}` in spin-1/2 units, so that the
/// decoupled-spin limit returns the spin Chern number.
pub fn spin_edge_current(half: &HalfSpaceSample, f: &SwitchFunction, s_z: &CMat) -> Result<SpinCurrent> {
    if half.lattice().dim() != 2 {
        return Err(TopoError::BadDimension { expected: "2".into(), got: half.lattice().dim() });
    }
    half.check_switch(f)?;
    let lattice = half.lattice();
    let big = fiber_op(lattice, s_z);
    let occ = half.bulk.below(half.mu);
    let w = linalg::select_columns(&half.bulk.vectors, &occ);
    let spins = linalg::eigvalsh(&(&(w.adjoint() * &big) * &w))?;
    if spins.iter().any(|x| x.abs() < 5e-4) {
        let width = spins.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min) * 2.0;
        return Err(TopoError::SpinSpectrumGapless(width));
    }
    let h = &half.hamiltonian.matrix;
    let e = half.diagonalize()?;
    let v = velocity(h, lattice);
    let quarter = c64::new(0.25, 0.0);
    let obs = linalg::scale(&(&(&v * &big) + &(&big * &v)), quarter);
    let commutator = linalg::op_norm(&(&(h * &big) - &(&big * h)))?;
    Ok(SpinCurrent { current: current_density(half, f, &obs, &e), commutator, budget: commutator * f.ck_norm(6) })
}

/// Number of half-space eigenvalues in each of `bins` equal subintervals of the bulk gap.
pub fn gap_coverage(half: &HalfSpaceSample, e: &EigenData, bins: usize) -> Vec<usize> {
    let (lo, hi) = half.bulk_gap;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for &x in &e.values {
        if x > lo && x < hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    counts
}

/// Edge dispersion of a clean `d = 2` cylinder: for every transverse momentum `k_1`, the
/// energies with the mean layer and the lower-half weight of each eigenvector.
pub fn edge_dispersion(half: &HalfSpaceSample) -> Result<Vec<(f64, f64, f64, f64)>> {
    let lattice = half.lattice();
    if lattice.dim() != 2 {
        return Err(TopoError::BadDimension { expected: "2".into(), got: lattice.dim() });
    }
    let (n1, n2, l) = (lattice.sizes[0], lattice.sizes[1], lattice.fiber);
    let h = &half.hamiltonian.matrix;
    let m = n2 * l;
    let mut rows = Vec::new();
    for q in 0..n1 {
        let k = TAU * q as f64 / n1 as f64;
        let hk = CMat::from_fn(m, m, |r, c| {
            let (y, o) = (r / l, r % l);
            let (y2, o2) = (c / l, c % l);
            let col = lattice.site(&[0, y2 as i64]) * l + o2;
            (0..n1)
                .map(|x| {
                    let row = lattice.site(&[x as i64, y as i64]) * l + o;
                    let dx = lattice.min_image(x as i64, 0) as f64;
                    h[(row, col)] * linalg::cis(-k * dx)
                })
                .sum()
        });
        let (vals, vecs) = linalg::eigh(&hk)?;
        for (b, &en) in vals.iter().enumerate() {
            let mut mean = 0.0;
            let mut lower = 0.0;
            for i in 0..m {
                let w = vecs[(i, b)].norm_sqr();
                mean += w * (i / l) as f64;
                if i / l < n2 / 2 {
                    lower += w;
                }
            }
            rows.push((k, en, mean, lower));
        }
    }
    Ok(rows)
}

pub fn write_dispersion_csv<W: Write>(w: W, rows: &[(f64, f64, f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k1", "energy", "mean_layer", "lower_weight"]).map_err(crate::model::io::csv_err)?;
    for (k, e, m, lw) in rows {
        out.write_record(&[format!("{k:.12e}"), format!("{e:.12e}"), format!("{m:.6}"), format!("{lw:.6}")])
            .map_err(crate::model::io::csv_err)?;
    }
    out.flush()?;
    Ok(())
}
