use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopoError};
use crate::linalg::{c64, CMat};
use crate::model::{
    make_named_model, Boundary, DisorderFamily, DisorderKind, DisorderSpec, Hopping, LatticeSpec, MagneticFieldSpec,
    ModelDefinition, SymmetrySpec,
};

/// Computations a configuration can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    Chern,
    Winding,
    Z2,
    SpinChern,
    Bbc,
    BoundaryCurrent,
    Streda,
    Laughlin,
    KitaevHalfflux,
    Veg,
    PairingRange,
    Caz,
}

impl Task {
    pub const ALL: [Task; 13] = [
        Task::Spectrum,
        Task::Chern,
        Task::Winding,
        Task::Z2,
        Task::SpinChern,
        Task::Bbc,
        Task::BoundaryCurrent,
        Task::Streda,
        Task::Laughlin,
        Task::KitaevHalfflux,
        Task::Veg,
        Task::PairingRange,
        Task::Caz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Chern => "chern",
            Task::Winding => "winding",
            Task::Z2 => "z2",
            Task::SpinChern => "spin-chern",
            Task::Bbc => "bbc",
            Task::BoundaryCurrent => "boundary-current",
            Task::Streda => "streda",
            Task::Laughlin => "laughlin",
            Task::KitaevHalfflux => "kitaev-halfflux",
            Task::Veg => "veg",
            Task::PairingRange => "pairing-range",
            Task::Caz => "caz",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixEntries = Vec<Vec<[f64; 2]>>;

pub fn to_matrix(rows: &MatrixEntries) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(TopoError::InvalidSpec("matrix entries must be square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| c64::new(rows[i][j][0], rows[i][j][1])))
}

pub fn from_matrix(m: &CMat) -> MatrixEntries {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Shipped model name, or `custom` for a model declared in the other sections.
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onsite: Option<MatrixEntries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<Boundary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub family: DisorderKind,
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<MatrixEntries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntiunitarySection {
    pub matrix: MatrixEntries,
    pub sign: i8,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr: Option<AntiunitarySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ph: Option<AntiunitarySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ch: Option<MatrixEntries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingEntry {
    pub disp: Vec<i64>,
    pub matrix: MatrixEntries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self { realizations: 1, base_seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub spectrum: bool,
    #[serde(default)]
    pub flow: bool,
    #[serde(default)]
    pub dispersion: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), spectrum: false, flow: false, dispersion: false }
    }
}

/// Task parameters; unset values fall back to per-task defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskOptions {
    /// Fermi level; defaults to 0 when it lies in a sizeable gap, else the centre of the lowest sizeable gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// 1-based axes of the pairing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_set: Option<Vec<usize>>,
    /// `chern` estimator: `nc`, `pair` or `kspace`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_degree: Option<usize>,
    /// Fraction of the gap on each side left out of the switch transition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plaquette: Option<Vec<i64>>,
    /// Half-width of the energy window followed by spectral flow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Relative singular-value threshold for kernel counting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_threshold: Option<f64>,
    /// Generator index set `J` for `pairing-range`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Largest accepted distance of a quantized value from its admissible value.
    pub quantization: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { quantization: 0.05 }
    }
}

/// Complete description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub model: ModelSection,
    pub lattice: LatticeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hoppings: Vec<HoppingEntry>,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub options: TaskOptions,
    #[serde(default)]
    pub tolerance: ToleranceSection,
}

/// Line (1-based) of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Section header in force at a byte offset.
fn section_of(text: &str, offset: usize) -> String {
    text[..offset.min(text.len())]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').to_string())
        .unwrap_or_else(|| "top level".into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let (section, line) = match e.span() {
                Some(span) => (section_of(text, span.start), Some(line_of(text, span.start))),
                None => ("unknown".into(), None),
            };
            let message = match line {
                Some(l) => format!("line {l}: {}", e.message()),
                None => e.message().to_string(),
            };
            TopoError::Config { section, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| TopoError::Config { section: "top level".into(), message: e.to_string() })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    fn err(section: &str, message: impl Into<String>) -> TopoError {
        TopoError::Config { section: section.into(), message: message.into() }
    }

    /// Cheap checks run before any diagonalization.
    pub fn validate(&self) -> Result<()> {
        if self.ensemble.realizations == 0 {
            return Err(Self::err("ensemble", "realizations must be at least 1"));
        }
        if !(self.tolerance.quantization > 0.0) {
            return Err(Self::err("tolerance", "quantization tolerance must be positive"));
        }
        if let Some(f) = self.options.core_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Self::err("options", "core_fraction must lie in (0, 1]"));
            }
        }
        if let Some(deg) = self.options.switch_degree {
            if deg % 2 == 0 {
                return Err(Self::err("options", "switch_degree must be odd"));
            }
        }
        let model = self.build_model()?;
        let d = model.lattice.dim();
        if let Some(i) = &self.options.index_set {
            if i.iter().any(|&a| a == 0 || a > d) || i.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Self::err("options", format!("index_set {i:?} is not an increasing subset of 1..={d}")));
            }
        }
        if let Some(p) = &self.options.plaquette {
            if p.len() != d {
                return Err(Self::err("options", "plaquette has the wrong dimension"));
            }
        }
        let needs = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Self::err("model", format!("task {} needs {what}", self.task.name()))) };
        match self.task {
            Task::Winding => needs(model.symmetry.s_ch.is_some(), "a chiral operator"),
            Task::Z2 => needs(model.symmetry.s_tr.as_ref().is_some_and(|s| s.1 == -1) && d == 2, "odd time reversal in d = 2"),
            Task::SpinChern => needs(model.spin_z.is_some() && d == 2, "a spin operator in d = 2"),
            Task::Bbc | Task::BoundaryCurrent => needs(d >= 2, "d >= 2"),
            Task::Streda | Task::Veg | Task::PairingRange => needs(d == 2, "d = 2"),
            Task::Laughlin => needs(d == 2, "d = 2"),
            Task::KitaevHalfflux => needs(d == 1 && model.lattice.fiber == 2 && model.symmetry.s_ph.is_some(), "a d = 1 particle-hole ladder"),
            _ => Ok(()),
        }
    }

    /// Model definition described by the configuration.
    pub fn build_model(&self) -> Result<ModelDefinition> {
        let sizes = &self.lattice.sizes;
        let boundary = self.lattice.boundary.clone().unwrap_or_else(|| vec![Boundary::Periodic; sizes.len()]);
        if self.model.name != "custom" {
            let mut model = make_named_model(&self.model.name, &self.model.params, sizes, &boundary)
                .map_err(|e| Self::err("model", e.to_string()))?;
            if let Some(f) = &self.field {
                model = model.with_field(field_from(f)?);
            }
            if let Some(ds) = &self.disorder {
                let disorder = disorder_from(ds, &model.symmetry, model.lattice.fiber)?;
                model = model.with_disorder(disorder);
            }
            model.validate().map_err(|e| Self::err("model", e.to_string()))?;
            return Ok(model);
        }
        let fiber = self.lattice.fiber.ok_or_else(|| Self::err("lattice", "custom models need a fiber size"))?;
        let lattice = LatticeSpec::new(sizes.clone(), boundary, fiber).map_err(|e| Self::err("lattice", e.to_string()))?;
        let d = lattice.dim();
        let field = match &self.field {
            Some(f) => field_from(f)?,
            None => MagneticFieldSpec::zero(d),
        };
        let symmetry = match &self.symmetry {
            Some(s) => symmetry_from(s)?,
            None => SymmetrySpec::none(),
        };
        let disorder = match &self.disorder {
            Some(ds) => disorder_from(ds, &symmetry, fiber)?,
            None => DisorderSpec::clean(),
        };
        let onsite = match &self.model.onsite {
            Some(m) => to_matrix(m).map_err(|e| Self::err("model", e.to_string()))?,
            None => CMat::zeros(fiber, fiber),
        };
        let hoppings = self
            .hoppings
            .iter()
            .map(|h| Ok(Hopping::new(&h.disp, to_matrix(&h.matrix)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Self::err("hoppings", e.to_string()))?;
        let model = ModelDefinition { name: "custom".into(), lattice, field, hoppings, onsite, disorder, symmetry, spin_z: None };
        model.validate().map_err(|e| Self::err("hoppings", e.to_string()))?;
        Ok(model)
    }
}

fn field_from(f: &FieldSection) -> Result<MagneticFieldSpec> {
    let mut field = MagneticFieldSpec::new(f.b.clone()).map_err(|e| ExperimentConfig::err("field", e.to_string()))?;
    if let Some(o) = &f.origin {
        field = field.with_origin(o.clone());
    }
    Ok(field)
}

fn symmetry_from(s: &SymmetrySection) -> Result<SymmetrySpec> {
    let anti = |a: &Option<AntiunitarySection>| -> Result<Option<(CMat, i8)>> {
        a.as_ref().map(|a| Ok((to_matrix(&a.matrix)?, a.sign))).transpose()
    };
    let ch = s.ch.as_ref().map(to_matrix).transpose()?;
    SymmetrySpec::new(anti(&s.tr)?, anti(&s.ph)?, ch).map_err(|e| ExperimentConfig::err("symmetry", e.to_string()))
}

fn disorder_from(ds: &DisorderSection, sym: &SymmetrySpec, fiber: usize) -> Result<DisorderSpec> {
    let e = |m: String| ExperimentConfig::err("disorder", m);
    if ds.strength < 0.0 {
        return Err(e("strength must be non-negative".into()));
    }
    match ds.family {
        DisorderKind::DiagonalScalar => Ok(DisorderSpec::scalar(ds.strength)),
        DisorderKind::DiagonalMatrix => Ok(DisorderSpec { family: DisorderFamily::DiagonalMatrix, strength: ds.strength, seed: 0 }),
        DisorderKind::SymmetryConstrained => {
            let dir = ds.direction.as_ref().ok_or_else(|| e("symmetry-constrained disorder needs a direction".into()))?;
            let m = to_matrix(dir).map_err(|x| e(x.to_string()))?;
            if m.nrows() != fiber {
                return Err(e("direction does not match the fiber".into()));
            }
            DisorderSpec::constrained(m, ds.strength, sym).map_err(|x| e(x.to_string()))
        }
    }
}
