//! Spectral flow under flux insertion, half-flux bound states and Pfaffian-sign flows.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Result, TopoError};
use crate::invariants::{pfaffian_sign_log, Region, RMat};
use crate::linalg::{self, c64, CMat};
use crate::model::{fiber_op, insert_flux, majorana_basis, HamiltonianSample, SymmetrySpec};
use crate::spectral::{diagonalize_matrix, EigenData};

const DEGENERACY_TOL: f64 = 1e-8;
const MIN_STEP: f64 = 1.0 / 4096.0;

/// Flux insertion path `t -> H_t` through one cell, sampled at increasing `t` in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct FluxPath {
    pub base: HamiltonianSample,
    pub plaquette: Vec<i64>,
    pub ts: Vec<f64>,
}

impl FluxPath {
    /// `n + 1` equally spaced samples from `t = 0` to `t = 1`.
    pub fn uniform(base: HamiltonianSample, plaquette: Vec<i64>, n: usize) -> Self {
        let n = n.max(1);
        Self { base, plaquette, ts: (0..=n).map(|k| k as f64 / n as f64).collect() }
    }

    /// Restriction to `[t0, t1]` with `n + 1` equally spaced samples.
    pub fn segment(&self, t0: f64, t1: f64, n: usize) -> Self {
        let n = n.max(1);
        Self {
            base: self.base.clone(),
            plaquette: self.plaquette.clone(),
            ts: (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect(),
        }
    }

    pub fn sample(&self, t: f64) -> Result<HamiltonianSample> {
        insert_flux(&self.base, t, &self.plaquette)
    }

    /// Centre of the flux cell.
    pub fn centre(&self) -> Vec<f64> {
        self.plaquette.iter().map(|&p| p as f64 + 0.5).collect()
    }
}

/// Tuning of the branch tracking.
#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Half-width of the energy window around `mu` in which branches are followed.
    pub window: f64,
    pub min_overlap: f64,
    /// Crossings count only when the crossing state has more than half its weight here.
    pub core: Option<Region>,
}

impl FlowOptions {
    pub fn new(window: f64) -> Self {
        Self { window, min_overlap: 0.7, core: None }
    }

    pub fn with_core(mut self, core: Region) -> Self {
        self.core = Some(core);
        self
    }
}

/// A branch passing through `mu` between two consecutive samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// `+1` upward, `-1` downward.
    pub direction: i32,
    pub multiplicity: usize,
    pub core_weight: f64,
    /// Whether the crossing is localized at the flux and enters the count.
    pub counted: bool,
}

#[derive(Clone, Debug)]
pub struct SpectralFlowResult {
    pub flow: i64,
    pub crossings: Vec<Crossing>,
    /// Smallest accepted overlap between matched branches.
    pub min_overlap: f64,
    /// Sampled `t` values after refinement, with the eigenvalues in the window.
    pub trace: Vec<(f64, Vec<f64>)>,
}

struct Step {
    t: f64,
    eig: EigenData,
}

fn eigen_at(path: &FluxPath, t: f64) -> Result<Step> {
    Ok(Step { t, eig: diagonalize_matrix(&path.sample(t)?.matrix)? })
}

/// Groups sorted indices whose eigenvalues agree within the degeneracy tolerance.
fn clusters(values: &[f64], idx: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &i in idx {
        match out.last_mut() {
            Some(c) if (values[i] - values[*c.last().unwrap()]).abs() < DEGENERACY_TOL * values[i].abs().max(1.0) => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

struct Matching {
    min_overlap: f64,
    crossings: Vec<Crossing>,
}

/// Matches every window state of `a` to the cluster of `b` onto which it projects most.
fn match_steps(a: &Step, b: &Step, mu: f64, opts: &FlowOptions, mask: &[bool], l: usize) -> Matching {
    let win_a: Vec<usize> = (0..a.eig.values.len()).filter(|&i| (a.eig.values[i] - mu).abs() < opts.window).collect();
    let win_b: Vec<usize> = (0..b.eig.values.len())
        .filter(|&i| (b.eig.values[i] - mu).abs() < 2.0 * opts.window)
        .collect();
    let va = linalg::select_columns(&a.eig.vectors, &win_a);
    let vb = linalg::select_columns(&b.eig.vectors, &win_b);
    let ov = va.adjoint() * &vb;
    let groups = clusters(&b.eig.values, &(0..win_b.len()).map(|k| win_b[k]).collect::<Vec<_>>());
    let pos: std::collections::HashMap<usize, usize> = win_b.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut min_overlap: f64 = 1.0;
    let mut crossings: Vec<Crossing> = Vec::new();
    for (r, &i) in win_a.iter().enumerate() {
        let best = groups
            .iter()
            .map(|g| (g, g.iter().map(|j| ov[(r, pos[j])].norm_sqr()).sum::<f64>().sqrt()))
            .max_by(|x, y| x.1.total_cmp(&y.1));
        let Some((group, overlap)) = best else {
            min_overlap = 0.0;
            continue;
        };
        min_overlap = min_overlap.min(overlap);
        let ea = a.eig.values[i] - mu;
        let eb = b.eig.values[group[0]] - mu;
        if ea * eb >= 0.0 {
            continue;
        }
        // component of the source state inside the target cluster
        let mut core = 0.0;
        let mut norm = 0.0;
        for site_idx in 0..b.eig.vectors.nrows() {
            let amp: c64 = group.iter().map(|j| b.eig.vectors[(site_idx, *j)] * ov[(r, pos[j])]).sum();
            let w = amp.norm_sqr();
            norm += w;
            if mask[site_idx / l] {
                core += w;
            }
        }
        let core_weight = if norm > 0.0 { core / norm } else { 0.0 };
        let direction = if eb > 0.0 { 1 } else { -1 };
        let counted = core_weight > 0.5;
        let t = a.t + (b.t - a.t) * ea.abs() / (ea.abs() + eb.abs());
        match crossings.iter_mut().find(|c| c.direction == direction && c.counted == counted && (c.t - t).abs() < 1e-12) {
            Some(c) => c.multiplicity += 1,
            None => crossings.push(Crossing { t, direction, multiplicity: 1, core_weight, counted }),
        }
    }
    Matching { min_overlap, crossings }
}

/// Signed number of eigenvalues moving upward through `mu` along the path.
///
/// Consecutive samples are matched by maximal eigenvector overlap onto degenerate clusters.
/// Intervals with an overlap below `min_overlap` or a window branch moving by more than a
/// tenth of the window are bisected down to a step of `1/4096`.
pub fn spectral_flow(path: &FluxPath, mu: f64, opts: &FlowOptions) -> Result<SpectralFlowResult> {
    let lattice = &path.base.lattice;
    let mask = match &opts.core {
        Some(r) => r.mask(lattice),
        None => vec![true; lattice.n_sites()],
    };
    let l = lattice.fiber;
    let mut steps: Vec<Step> = path.ts.par_iter().map(|&t| eigen_at(path, t)).collect::<Result<Vec<_>>>()?;
    let mut k = 0;
    let mut min_overlap: f64 = 1.0;
    let mut crossings = Vec::new();
    while k + 1 < steps.len() {
        let m = match_steps(&steps[k], &steps[k + 1], mu, opts, &mask, l);
        let jump = max_branch_jump(&steps[k], &steps[k + 1], mu, opts.window);
        let dt = steps[k + 1].t - steps[k].t;
        if m.min_overlap < opts.min_overlap || jump > opts.window / 10.0 {
            if dt / 2.0 < MIN_STEP {
                if m.min_overlap < opts.min_overlap {
                    return Err(TopoError::BranchAmbiguity(m.min_overlap));
                }
            } else {
                let mid = eigen_at(path, steps[k].t + dt / 2.0)?;
                steps.insert(k + 1, mid);
                continue;
            }
        }
        min_overlap = min_overlap.min(m.min_overlap);
        crossings.extend(m.crossings);
        k += 1;
    }
    let flow = crossings.iter().filter(|c| c.counted).map(|c| c.direction as i64 * c.multiplicity as i64).sum();
    let trace = steps
        .iter()
        .map(|s| (s.t, s.eig.values.iter().copied().filter(|e| (e - mu).abs() < opts.window).collect()))
        .collect();
    Ok(SpectralFlowResult { flow, crossings, min_overlap, trace })
}

/// Largest eigenvalue displacement near `mu` between two samples, pairing sorted levels.
fn max_branch_jump(a: &Step, b: &Step, mu: f64, window: f64) -> f64 {
    a.eig
        .values
        .iter()
        .zip(&b.eig.values)
        .filter(|(x, y)| (*x - mu).abs() < window || (*y - mu).abs() < window)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Writes `t, eigenvalue, level` rows of a flow trace, levels numbered upward inside the window.
pub fn write_flow_csv<W: Write>(w: W, result: &SpectralFlowResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "eigenvalue", "level"]).map_err(crate::model::io::csv_err)?;
    for (t, values) in &result.trace {
        for (k, e) in values.iter().enumerate() {
            out.write_record(&[format!("{t:.9}"), format!("{e:.12e}"), k.to_string()])
                .map_err(crate::model::io::csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Eigenvalues of `H_{1/2}` in a gap with their Kramers structure.
#[derive(Clone, Debug)]
pub struct KramersProbe {
    pub eigenvalues: Vec<f64>,
    /// Multiplicity of each distinct midgap level.
    pub multiplicities: Vec<usize>,
    /// Largest `|<v, Theta v>|` over the midgap eigenvectors.
    pub partner_overlap: f64,
    /// Weight of each midgap eigenvector inside the core window.
    pub core_weights: Vec<f64>,
}

impl KramersProbe {
    pub fn all_even(&self) -> bool {
        self.multiplicities.iter().all(|m| m % 2 == 0)
    }
}

/// `|| S conj(H) S* - sign H ||` for a fiber operator `S`.
fn antiunitary_defect(h: &HamiltonianSample, s: &CMat, sign: f64) -> f64 {
    let big = fiber_op(&h.lattice, s);
    let conj = &(&big * &linalg::conj(&h.matrix)) * big.adjoint();
    linalg::max_abs(&(&conj - &linalg::scale(&h.matrix, c64::new(sign, 0.0))))
}

/// Midgap spectrum of `H_{1/2}` for an odd time-reversal invariant sample.
pub fn kramers_halfflux_probe(path: &FluxPath, sym: &SymmetrySpec, gap: (f64, f64), core: &Region) -> Result<KramersProbe> {
    let (s, eta) = sym.s_tr.as_ref().ok_or_else(|| TopoError::InvalidSpec("probe needs time reversal".into()))?;
    if *eta != -1 {
        return Err(TopoError::InvalidSpec("probe needs odd time reversal".into()));
    }
    let scale = linalg::max_abs(&path.base.matrix).max(1.0);
    let h0 = path.sample(0.0)?;
    let half = path.sample(0.5)?;
    for h in [&h0, &half] {
        let d = antiunitary_defect(h, s, 1.0);
        if d > 1e-10 * scale {
            return Err(TopoError::SymmetryBrokenAtHalfFlux(format!("time-reversal defect {d:e}")));
        }
    }
    let e = diagonalize_matrix(&half.matrix)?;
    let idx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > gap.0 && e.values[i] < gap.1).collect();
    let big = fiber_op(&half.lattice, s);
    let mask = core.mask(&half.lattice);
    let l = half.lattice.fiber;
    let mut partner_overlap: f64 = 0.0;
    let mut core_weights = Vec::new();
    for &i in &idx {
        let v = linalg::select_columns(&e.vectors, &[i]);
        let theta_v = &big * &linalg::conj(&v);
        partner_overlap = partner_overlap.max((v.adjoint() * &theta_v)[(0, 0)].norm());
        core_weights.push((0..v.nrows()).filter(|&r| mask[r / l]).map(|r| v[(r, 0)].norm_sqr()).sum());
    }
    let multiplicities = clusters_with(&e.values, &idx, 1e-8 * scale).iter().map(Vec::len).collect();
    Ok(KramersProbe { eigenvalues: idx.iter().map(|&i| e.values[i]).collect(), multiplicities, partner_overlap, core_weights })
}

fn clusters_with(values: &[f64], idx: &[usize], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &i in idx {
        match out.last_mut() {
            Some(c) if (values[i] - values[*c.last().unwrap()]).abs() < tol => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Real antisymmetric `-i C* H C` in the Majorana basis of a `L = 2` particle-hole fiber.
pub fn majorana_form(h: &HamiltonianSample) -> Result<RMat> {
    if h.lattice.fiber != 2 {
        return Err(TopoError::BadDimension { expected: "fiber 2".into(), got: h.lattice.fiber });
    }
    let c = fiber_op(&h.lattice, &majorana_basis());
    let m = &(c.adjoint() * &h.matrix) * &c;
    let scale = linalg::max_abs(&h.matrix).max(1.0);
    let real_part = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].re.abs()).fold(0.0, f64::max);
    if real_part > 1e-10 * scale {
        return Err(TopoError::NotAntisymmetric(real_part));
    }
    Ok(RMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im))
}

/// Pfaffian sign along a particle-hole symmetric path.
#[derive(Clone, Debug)]
pub struct Z2FlowResult {
    pub sf2: u8,
    /// `(t, sign Pf, smallest |E|)` per sample.
    pub signs: Vec<(f64, f64, f64)>,
}

/// `Z2` spectral flow as the change of `sign Pf(-i C* H_t C)` between the endpoints. The
/// sign is recorded at every sample; it may change only where the smallest `|E|` closes.
pub fn z2_spectral_flow(path: &FluxPath) -> Result<Z2FlowResult> {
    let rows: Vec<(f64, f64, f64)> = path
        .ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64, f64)> {
            let h = path.sample(t)?;
            let a = majorana_form(&h)?;
            let (sign, _) = pfaffian_sign_log(&a)?;
            let gap = linalg::eigvalsh(&h.matrix)?.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            Ok((t, sign, gap))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = linalg::max_abs(&path.base.matrix).max(1.0);
    for end in [rows.first(), rows.last()].into_iter().flatten() {
        if end.2 < 1e-8 * scale {
            return Err(TopoError::KernelAtEndpoint);
        }
    }
    let first = rows.first().map(|r| r.1).unwrap_or(1.0);
    let last = rows.last().map(|r| r.1).unwrap_or(1.0);
    Ok(Z2FlowResult { sf2: u8::from(first != last), signs: rows })
}

/// Near-kernel of a particle-hole symmetric sample.
#[derive(Clone, Debug)]
pub struct KernelParity {
    pub parity: u8,
    pub kernel_dim: usize,
    /// Ratio of the smallest `|E|` above the threshold to the largest below it.
    pub margin: f64,
    /// Near-kernel weight inside the core window, when one is given.
    pub core_weight: Option<f64>,
}

fn near_kernel(h: &HamiltonianSample, tau_rel: f64, core: Option<&Region>) -> Result<(Vec<usize>, f64, EigenData, Option<f64>)> {
    let e = diagonalize_matrix(&h.matrix)?;
    let norm = e.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tau = tau_rel * norm;
    let ker: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i].abs() < tau).collect();
    let above = e.values.iter().map(|x| x.abs()).filter(|&x| x >= tau).fold(f64::INFINITY, f64::min);
    let below = ker.iter().map(|&i| e.values[i].abs()).fold(0.0, f64::max);
    let margin = if ker.is_empty() { above / tau } else { above / below.max(f64::MIN_POSITIVE) };
    if margin < 1e2 {
        return Err(TopoError::MarginTooSmall(margin));
    }
    let weight = core.map(|r| {
        let mask = r.mask(&h.lattice);
        let l = h.lattice.fiber;
        ker.iter()
            .map(|&c| (0..e.vectors.nrows()).filter(|&i| mask[i / l]).map(|i| e.vectors[(i, c)].norm_sqr()).sum::<f64>())
            .sum()
    });
    Ok((ker, margin, e, weight))
}

fn check_ph(h: &HamiltonianSample, sym: &SymmetrySpec) -> Result<()> {
    let (s, _) = sym.s_ph.as_ref().ok_or_else(|| TopoError::InvalidSpec("needs particle-hole symmetry".into()))?;
    let scale = linalg::max_abs(&h.matrix).max(1.0);
    let d = antiunitary_defect(h, s, -1.0);
    if d > 1e-10 * scale {
        return Err(TopoError::SymmetryBrokenAtHalfFlux(format!("particle-hole defect {d:e}")));
    }
    Ok(())
}

/// `dim Ker(H_{1/2}) / 2 mod 2` with the kernel counted below `tau_rel * ||H||` (default `1e-6`).
pub fn halfflux_kernel_parity(path: &FluxPath, sym: &SymmetrySpec, tau_rel: Option<f64>) -> Result<KernelParity> {
    let half = path.sample(0.5)?;
    check_ph(&half, sym)?;
    let (ker, margin, _, _) = near_kernel(&half, tau_rel.unwrap_or(1e-6), None)?;
    Ok(KernelParity { parity: ((ker.len() / 2) % 2) as u8, kernel_dim: ker.len(), margin, core_weight: None })
}

/// Majorana zero modes bound to a half flux in `d = 2` against the Chern parity.
#[derive(Clone, Debug)]
pub struct MajoranaParity {
    pub kernel: KernelParity,
    pub chern: f64,
    pub chern_parity: u8,
}

/// Parity of the near-kernel of `H_{1/2}` localized in `core`, compared with `Ch_{1,2}(P) mod 2`.
///
/// In finite volume the zero mode at the flux pairs with one on the outer edge, so the
/// parity is taken of the rounded core weight of the near-kernel below `tau_rel * ||H||`.
pub fn majorana_zero_mode_parity(path: &FluxPath, sym: &SymmetrySpec, chern: f64, core: &Region, tau_rel: f64) -> Result<MajoranaParity> {
    if path.base.lattice.dim() != 2 {
        return Err(TopoError::BadDimension { expected: "2".into(), got: path.base.lattice.dim() });
    }
    let half = path.sample(0.5)?;
    check_ph(&half, sym)?;
    let (ker, margin, _, weight) = near_kernel(&half, tau_rel, Some(core))?;
    let w = weight.unwrap_or(0.0);
    let kernel = KernelParity { parity: (w.round() as i64).rem_euclid(2) as u8, kernel_dim: ker.len(), margin, core_weight: weight };
    Ok(MajoranaParity { kernel, chern, chern_parity: (chern.round() as i64).rem_euclid(2) as u8 })
}
