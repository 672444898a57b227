use std::f64::consts::TAU;

use crate::boundary::{boundary_current, boundary_winding, edge_dispersion, exp_map, half_space, HalfSpaceSample};
use crate::error::{Result, TopoError};
use crate::flow::{halfflux_kernel_parity, spectral_flow, z2_spectral_flow, FlowOptions, FluxPath, SpectralFlowResult};
use crate::invariants::{
    chern_projection, chern_unitary, dirac_phase, fermi_unitary, index_operator, pair_index, pairing_range_check,
    spin_chern, streda_derivative, veg_invariant, z2_kernel_parity, IndexSet, Region,
};
use crate::model::{build_hamiltonian, classify_caz, LatticeSpec, ModelDefinition};
use crate::spectral::{
    detect_gap, diagonalize, diagonalize_matrix, fermi_projection, lowest_gap, EigenData, SwitchFunction, SwitchKind,
};

use super::config::{ExperimentConfig, Task, TaskOptions};

const GAP_FRACTION: f64 = 0.5;
const DEFAULT_FLUX_SAMPLES: usize = 40;
const DEFAULT_KITAEV_SAMPLES: usize = 8;
const DEFAULT_TWIST_SAMPLES: usize = 16;
const DEFAULT_CONTOUR_POINTS: usize = 64;
const DEFAULT_WINDOW: f64 = 0.5;
const DEFAULT_SWITCH_DEGREE: usize = 7;

/// Raw output of one task on one realization.
#[derive(Clone, Debug, Default)]
pub struct Measurement {
    pub raw: Vec<f64>,
    pub note: String,
    pub spectrum: Option<EigenData>,
    pub flow: Option<SpectralFlowResult>,
    pub dispersion: Option<Vec<(f64, f64, f64, f64)>>,
}

impl Measurement {
    fn new(raw: Vec<f64>, note: String) -> Self {
        Self { raw, note, ..Self::default() }
    }
}

/// Rounded values and distance from admissibility of a raw vector, or `None` when the
/// task has no quantized output.
pub fn assess(task: Task, raw: &[f64]) -> Option<(Vec<i64>, f64)> {
    let r = |x: f64| x.round();
    let frac = |x: f64| (x - x.round()).abs();
    let ints = |v: &[f64]| v.iter().map(|&x| x.round() as i64).collect::<Vec<_>>();
    Some(match task {
        Task::Spectrum => return None,
        Task::Chern | Task::Winding | Task::Caz => (ints(raw), raw.iter().map(|&x| frac(x)).fold(0.0, f64::max)),
        Task::SpinChern => (ints(&raw[..1]), frac(raw[0])),
        Task::Z2 => (vec![(r(raw[0]) as i64).rem_euclid(2)], frac(raw[0])),
        Task::Bbc => (ints(raw), frac(raw[0]).max(frac(raw[1])).max((raw[0] - raw[1]).abs())),
        Task::BoundaryCurrent => (ints(raw), frac(raw[0]).max((raw[0] + raw[1]).abs())),
        Task::Laughlin => (ints(raw), frac(raw[1]).max((raw[0] - r(raw[1])).abs())),
        Task::KitaevHalfflux => (ints(raw), (raw[0] - raw[1]).abs().max(frac(raw[0]))),
        Task::Veg => (ints(raw), frac(raw[0]).max((raw[0] - raw[1]).abs())),
        Task::Streda => (Vec::new(), (raw[0] - raw[1]).abs() / raw[1].abs().max(f64::MIN_POSITIVE)),
        Task::PairingRange => (Vec::new(), (raw[0] - raw[1]).abs()),
    })
}

/// Fermi level: the configured value, else 0 when it lies in a sizeable gap, else the centre of the
/// lowest sizeable gap.
fn resolve_mu(opts: &TaskOptions, e: &EigenData) -> Result<f64> {
    if let Some(mu) = opts.mu {
        return Ok(mu);
    }
    let widest = e.values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if let Ok((lo, hi)) = detect_gap(e, 0.0) {
        if hi - lo >= GAP_FRACTION * widest {
            return Ok(0.0);
        }
    }
    let (a, b) = lowest_gap(e, GAP_FRACTION)?;
    Ok(0.5 * (a + b))
}

fn full_index_set(d: usize) -> Result<IndexSet> {
    IndexSet::new(&(1..=d).collect::<Vec<_>>())
}

fn index_set(opts: &TaskOptions, d: usize) -> Result<IndexSet> {
    match &opts.index_set {
        Some(i) => IndexSet::new(i),
        None => full_index_set(d),
    }
}

fn region(opts: &TaskOptions, lattice: &LatticeSpec) -> Region {
    match opts.core_fraction {
        Some(f) => Region::Core(f),
        None => Region::default_for(lattice),
    }
}

/// Window of half-width `core_fraction * N / 2` (default a quarter of each size) around `centre`.
fn window(opts: &TaskOptions, lattice: &LatticeSpec, centre: Vec<f64>) -> Region {
    let f = opts.core_fraction.unwrap_or(0.5);
    Region::Window { center: centre, half_width: lattice.sizes.iter().map(|&n| f * n as f64 / 2.0).collect() }
}

fn plaquette(opts: &TaskOptions, lattice: &LatticeSpec) -> Vec<i64> {
    opts.plaquette.clone().unwrap_or_else(|| lattice.sizes.iter().map(|&n| n as i64 / 2 - 1).collect())
}

fn switch(opts: &TaskOptions, kind: SwitchKind, gap: (f64, f64)) -> Result<SwitchFunction> {
    let m = opts.switch_margin.unwrap_or(0.0);
    let w = gap.1 - gap.0;
    SwitchFunction::new(kind, gap.0 + m * w, gap.1 - m * w, opts.switch_degree.unwrap_or(DEFAULT_SWITCH_DEGREE))
}

/// Half-space sample whose Fermi level defaults to one picked on the torus companion.
fn default_half_space(model: &ModelDefinition, opts: &TaskOptions, seed: u64) -> Result<HalfSpaceSample> {
    let mu = match opts.mu {
        Some(mu) => mu,
        None => {
            let lattice = LatticeSpec::periodic(&model.lattice.sizes, model.lattice.fiber);
            let torus = model.clone().with_lattice(lattice);
            resolve_mu(opts, &diagonalize(&build_hamiltonian(&torus, seed)?)?)?
        }
    };
    half_space(model, seed, mu)
}

/// Runs `task` on realization `seed`.
pub fn run_task(cfg: &ExperimentConfig, model: &ModelDefinition, seed: u64) -> Result<Measurement> {
    let opts = &cfg.options;
    let d = model.lattice.dim();
    match cfg.task {
        Task::Spectrum => {
            let e = diagonalize(&build_hamiltonian(model, seed)?)?;
            let (lo, hi) = (e.values[0], e.values[e.values.len() - 1]);
            let note = match lowest_gap(&e, GAP_FRACTION) {
                Ok((a, b)) => format!("lowest gap ({a:.6}, {b:.6})"),
                Err(_) => "no sizeable gap".into(),
            };
            let mut m = Measurement::new(vec![lo, hi], note);
            m.spectrum = Some(e);
            Ok(m)
        }
        Task::Chern => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let p = fermi_projection(&e, resolve_mu(opts, &e)?)?;
            let i = index_set(opts, d)?;
            let estimator = opts.estimator.as_deref().unwrap_or("nc");
            let res = match estimator {
                "nc" => chern_projection(&p, &h.lattice, &i, &region(opts, &h.lattice))?,
                "pair" => pair_index(&p, &h.lattice, &dirac_phase(&h.lattice, None)?, 3, None)?,
                other => return Err(TopoError::Config { section: "options".into(), message: format!("unknown estimator '{other}'") }),
            };
            Ok(Measurement::new(vec![res.value], format!("estimator {estimator}, mu {}", p.mu)))
        }
        Task::Winding => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let p = fermi_projection(&e, resolve_mu(opts, &e)?)?;
            let (u, sector, smin) = fermi_unitary(&p, &h.lattice, &model.symmetry)?;
            let res = chern_unitary(&u, &sector, &index_set(opts, d)?, &region(opts, &sector))?;
            Ok(Measurement::new(vec![res.value], format!("smallest block singular value {smin:.3e}")))
        }
        Task::Z2 => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let p = fermi_projection(&e, resolve_mu(opts, &e)?)?;
            let dirac = dirac_phase(&h.lattice, None)?;
            let t = index_operator(&p, &dirac)?;
            let win = window(opts, &h.lattice, dirac.origin.clone());
            let z = z2_kernel_parity(&t, &model.symmetry, &h.lattice, &win, opts.kernel_threshold)?;
            Ok(Measurement::new(
                vec![z.window_weight],
                format!("parity {}, kernel dim {}, margin {:.3e}", z.parity, z.kernel_dim, z.margin),
            ))
        }
        Task::SpinChern => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let p = fermi_projection(&e, resolve_mu(opts, &e)?)?;
            let s_z = model.spin_z.as_ref().ok_or_else(|| TopoError::InvalidSpec("model has no spin operator".into()))?;
            let s = spin_chern(&p, s_z, &h.lattice, &region(opts, &h.lattice))?;
            Ok(Measurement::new(
                vec![s.sch.value, s.ch_total],
                format!("PsP gap ({:.3e}, {:.3e}), sum rule {:.1e}", s.gap.0, s.gap.1, s.sum_rule),
            ))
        }
        Task::Bbc => {
            let half = default_half_space(model, opts, seed)?;
            let torus = LatticeSpec::periodic(&model.lattice.sizes, model.lattice.fiber);
            let p = fermi_projection(&half.bulk, half.mu)?;
            let bulk = chern_projection(&p, &torus, &full_index_set(d)?, &Region::All)?;
            let f = switch(opts, SwitchKind::Exp, half.bulk_gap)?;
            let i = IndexSet::new(&(1..d).collect::<Vec<_>>())?;
            let edge = boundary_winding(&half, &f, &i, opts.twist_samples.unwrap_or(DEFAULT_TWIST_SAMPLES))?;
            let unitary = exp_map(&half, &f)?;
            let note = format!("mu {:.6}, gap ({:.4}, {:.4}), decay length {:?}", half.mu, half.bulk_gap.0, half.bulk_gap.1, unitary.decay_length);
            let mut m = Measurement::new(vec![bulk.value, edge.value], note);
            if cfg.output.dispersion && d == 2 {
                m.dispersion = Some(edge_dispersion(&half)?);
            }
            Ok(m)
        }
        Task::BoundaryCurrent => {
            let half = default_half_space(model, opts, seed)?;
            let f = switch(opts, SwitchKind::Exp, half.bulk_gap)?;
            let c = boundary_current(&half, &f)?;
            let mut m = Measurement::new(vec![c.lower, c.upper], format!("mu {:.6}", half.mu));
            if cfg.output.dispersion {
                m.dispersion = Some(edge_dispersion(&half)?);
            }
            Ok(m)
        }
        Task::Streda => {
            let i = match &opts.index_set {
                Some(i) => IndexSet::new(i)?,
                None => IndexSet::empty(),
            };
            let n: usize = model.lattice.sizes.iter().product();
            let s = streda_derivative(model, &i, (1, 2), opts.delta_b.unwrap_or(TAU / n as f64), opts.mu)?;
            Ok(Measurement::new(vec![s.lhs, s.rhs], format!("mu {:.6}, values {:?}", s.mu, s.values)))
        }
        Task::Laughlin => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let mu = resolve_mu(opts, &e)?;
            let p = fermi_projection(&e, mu)?;
            let pair = pair_index(&p, &h.lattice, &dirac_phase(&h.lattice, None)?, 3, None)?;
            let path = FluxPath::uniform(h.clone(), plaquette(opts, &h.lattice), opts.flux_samples.unwrap_or(DEFAULT_FLUX_SAMPLES));
            let core = window(opts, &h.lattice, path.centre());
            let sf = spectral_flow(&path, mu, &FlowOptions::new(opts.window.unwrap_or(DEFAULT_WINDOW)).with_core(core))?;
            let counted = sf.crossings.iter().filter(|c| c.counted).count();
            let mut m = Measurement::new(
                vec![sf.flow as f64, pair.value],
                format!("{counted} counted of {} crossings, min overlap {:.3}", sf.crossings.len(), sf.min_overlap),
            );
            m.flow = Some(sf);
            Ok(m)
        }
        Task::KitaevHalfflux => {
            let h = build_hamiltonian(model, seed)?;
            let path = FluxPath::uniform(h.clone(), plaquette(opts, &h.lattice), opts.flux_samples.unwrap_or(DEFAULT_KITAEV_SAMPLES));
            let k = halfflux_kernel_parity(&path, &model.symmetry, opts.kernel_threshold)?;
            let z = z2_spectral_flow(&path)?;
            Ok(Measurement::new(
                vec![k.parity as f64, z.sf2 as f64],
                format!("kernel dim {}, margin {:.3e}", k.kernel_dim, k.margin),
            ))
        }
        Task::Veg => {
            let h = build_hamiltonian(model, seed)?;
            let e = diagonalize(&h)?;
            let mu = resolve_mu(opts, &e)?;
            let v = veg_invariant(&h, mu, opts.contour_points.unwrap_or(DEFAULT_CONTOUR_POINTS))?;
            let ch = chern_projection(&fermi_projection(&e, mu)?, &h.lattice, &full_index_set(d)?, &Region::All)?;
            Ok(Measurement::new(vec![v.value, ch.value], format!("imaginary residue {:.1e}", v.diagnostic)))
        }
        Task::PairingRange => {
            if model.lattice.sizes.iter().any(|&n| n != model.lattice.sizes[0]) {
                return Err(TopoError::InvalidSpec("pairing-range needs a square sample".into()));
            }
            let i = match &opts.index_set {
                Some(i) => IndexSet::new(i)?,
                None => IndexSet::empty(),
            };
            let j = IndexSet::new(opts.generator.as_deref().unwrap_or(&[1, 2]))?;
            let c = pairing_range_check(d, model.field.b[0][1], &i, &j, model.lattice.sizes[0])?;
            Ok(Measurement::new(vec![c.measured, c.predicted], format!("I {:?}, J {:?}", i.axes(), j.axes())))
        }
        Task::Caz => {
            let h = build_hamiltonian(model, seed)?;
            let (class, j) = classify_caz(&h, &model.symmetry)?;
            let strong = class.strong_invariant(d);
            Ok(Measurement::new(vec![j as f64], format!("class {class:?}, strong invariant {strong:?}")))
        }
    }
}

/// Spectrum of one realization.
pub fn spectrum_of(model: &ModelDefinition, seed: u64) -> Result<EigenData> {
    diagonalize_matrix(&build_hamiltonian(model, seed)?.matrix)
}

