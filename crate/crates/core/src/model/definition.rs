use std::collections::BTreeMap;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::disorder::{DisorderFamily, DisorderSpec};
use super::field::MagneticFieldSpec;
use super::lattice::{Boundary, LatticeSpec};
use super::symmetry::SymmetrySpec;
use crate::error::{Result, TopoError};
use crate::linalg::{self, c64, CMat};

const HERM_TOL: f64 = 1e-12;

/// Hopping term `t_a` with `<n + a| H |n> = t_a` (times the Peierls phase).
#[derive(Clone, Debug)]
pub struct Hopping {
    pub disp: Vec<i64>,
    pub matrix: CMat,
}

impl Hopping {
    pub fn new(disp: &[i64], matrix: CMat) -> Self {
        Self { disp: disp.to_vec(), matrix }
    }
}

/// Covariant tight-binding family `Delta^B + W_omega` on a finite box.
#[derive(Clone, Debug)]
pub struct ModelDefinition {
    pub name: String,
    pub lattice: LatticeSpec,
    pub field: MagneticFieldSpec,
    pub hoppings: Vec<Hopping>,
    pub onsite: CMat,
    pub disorder: DisorderSpec,
    pub symmetry: SymmetrySpec,
    /// Spin operator on the fiber, when the model has one.
    pub spin_z: Option<CMat>,
}

impl ModelDefinition {
    /// Checks all type invariants.
    pub fn validate(&self) -> Result<()> {
        let l = self.lattice.fiber;
        let d = self.lattice.dim();
        if self.onsite.nrows() != l || self.onsite.ncols() != l {
            return Err(TopoError::InvalidSpec("onsite block has wrong size".into()));
        }
        if linalg::hermitian_defect(&self.onsite) > HERM_TOL {
            return Err(TopoError::InvalidSpec("onsite block not Hermitian".into()));
        }
        for h in &self.hoppings {
            if h.disp.len() != d {
                return Err(TopoError::InvalidSpec(format!("hopping {:?} has wrong dimension", h.disp)));
            }
            if h.matrix.nrows() != l || h.matrix.ncols() != l {
                return Err(TopoError::InvalidSpec(format!("hopping {:?} has wrong size", h.disp)));
            }
            if h.disp.iter().all(|&x| x == 0) {
                return Err(TopoError::InvalidSpec("zero displacement belongs in onsite".into()));
            }
        }
        self.check_closure()?;
        if let Some(f) = self.symmetry.fiber() {
            if f != l {
                return Err(TopoError::InvalidSpec("symmetry operators have wrong size".into()));
            }
        }
        self.symmetry.validate()?;
        if self.disorder.strength < 0.0 {
            return Err(TopoError::InvalidSpec("negative disorder strength".into()));
        }
        if let DisorderFamily::SymmetryConstrained(dir) = &self.disorder.family {
            if dir.nrows() != l {
                return Err(TopoError::InvalidSpec("disorder direction has wrong size".into()));
            }
        }
        self.field.validate(&self.lattice)
    }

    fn grouped(&self) -> BTreeMap<Vec<i64>, CMat> {
        let l = self.lattice.fiber;
        let mut map: BTreeMap<Vec<i64>, CMat> = BTreeMap::new();
        for h in &self.hoppings {
            let e = map.entry(h.disp.clone()).or_insert_with(|| linalg::zeros(l, l));
            *e = &*e + &h.matrix;
        }
        map
    }

    fn check_closure(&self) -> Result<()> {
        let map = self.grouped();
        for (a, m) in &map {
            let rev: Vec<i64> = a.iter().map(|x| -x).collect();
            match map.get(&rev) {
                Some(r) if linalg::max_diff(r, &linalg::adjoint(m)) < HERM_TOL => {}
                _ => return Err(TopoError::NonHermitianHoppings(a.clone())),
            }
        }
        Ok(())
    }

    pub fn with_disorder(mut self, disorder: DisorderSpec) -> Self {
        self.disorder = disorder;
        self
    }

    pub fn with_lattice(mut self, lattice: LatticeSpec) -> Self {
        self.lattice = lattice;
        self
    }

    pub fn with_field(mut self, field: MagneticFieldSpec) -> Self {
        self.field = field;
        self
    }

    /// Stable hex digest of all defining data.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        for &n in &self.lattice.sizes {
            h.update((n as u64).to_le_bytes());
        }
        for b in &self.lattice.boundary {
            h.update([matches!(b, Boundary::Periodic) as u8]);
        }
        h.update((self.lattice.fiber as u64).to_le_bytes());
        for row in &self.field.b {
            for x in row {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        for o in &self.field.origin {
            h.update(o.to_le_bytes());
        }
        for hop in &self.hoppings {
            for a in &hop.disp {
                h.update(a.to_le_bytes());
            }
            hash_mat(&mut h, &hop.matrix);
        }
        hash_mat(&mut h, &self.onsite);
        h.update([self.disorder.kind() as u8]);
        h.update(self.disorder.strength.to_bits().to_le_bytes());
        h.update(self.disorder.seed.to_le_bytes());
        if let DisorderFamily::SymmetryConstrained(d) = &self.disorder.family {
            hash_mat(&mut h, d);
        }
        for (tag, op) in [(1u8, &self.symmetry.s_tr), (2u8, &self.symmetry.s_ph)] {
            if let Some((s, e)) = op {
                h.update([tag, *e as u8]);
                hash_mat(&mut h, s);
            }
        }
        if let Some(s) = &self.symmetry.s_ch {
            h.update([3u8]);
            hash_mat(&mut h, s);
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn hash_mat(h: &mut Sha256, m: &CMat) {
    for x in linalg::to_vec_row_major(m) {
        h.update(x.re.to_bits().to_le_bytes());
        h.update(x.im.to_bits().to_le_bytes());
    }
}

/// Finite-volume matrix of one disorder realization.
#[derive(Clone, Debug)]
pub struct HamiltonianSample {
    pub matrix: CMat,
    pub lattice: LatticeSpec,
    pub model: Arc<ModelDefinition>,
    pub seed: u64,
}

impl HamiltonianSample {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Coordinates of the site carrying Hilbert index `i`.
    pub fn position(&self, i: usize) -> Vec<i64> {
        self.lattice.coords(i / self.lattice.fiber)
    }

    pub fn with_matrix(&self, matrix: CMat) -> Self {
        Self { matrix, lattice: self.lattice.clone(), model: self.model.clone(), seed: self.seed }
    }
}

/// Assembles `sum_a t_a U_a` on the lattice with Landau-gauge phases.
pub fn assemble_hops(lattice: &LatticeSpec, field: &MagneticFieldSpec, hops: &[Hopping]) -> CMat {
    let l = lattice.fiber;
    let mut h = linalg::zeros(lattice.hilbert_dim(), lattice.hilbert_dim());
    let with_field = !field.is_zero();
    for s in 0..lattice.n_sites() {
        let n = lattice.coords(s);
        for hop in hops {
            let target: Vec<i64> = n.iter().zip(&hop.disp).map(|(a, b)| a + b).collect();
            let Some((w, r)) = lattice.wrap(&target) else { continue };
            let t = lattice.site(&w);
            let phase = if with_field {
                linalg::cis(field.peierls(&n, &hop.disp) - field.transition(&r, &w))
            } else {
                linalg::ONE
            };
            for i in 0..l {
                for j in 0..l {
                    let v = hop.matrix[(i, j)];
                    if v != linalg::ZERO {
                        h[(t * l + i, s * l + j)] += v * phase;
                    }
                }
            }
        }
    }
    h
}

/// Magnetic translation `U_j` along `axis` (0-based) on the fiber-1 lattice.
pub fn magnetic_translation(lattice: &LatticeSpec, field: &MagneticFieldSpec, axis: usize) -> CMat {
    let mut disp = vec![0i64; lattice.dim()];
    disp[axis] = 1;
    let scalar = LatticeSpec { fiber: 1, ..lattice.clone() };
    assemble_hops(&scalar, field, &[Hopping::new(&disp, linalg::identity(1))])
}

/// Dual magnetic translation by `b`, commuting with every clean covariant Hamiltonian
/// on the torus.
pub fn dual_translation(lattice: &LatticeSpec, field: &MagneticFieldSpec, b: &[i64]) -> CMat {
    let l = lattice.fiber;
    let d = lattice.dim();
    let mut v = linalg::zeros(lattice.hilbert_dim(), lattice.hilbert_dim());
    let ab: Vec<f64> = (0..d).map(|i| ((i + 1)..d).map(|j| field.b[i][j] * b[j] as f64).sum()).collect();
    for s in 0..lattice.n_sites() {
        let n = lattice.coords(s);
        let target: Vec<i64> = n.iter().zip(b).map(|(x, y)| x + y).collect();
        let Some((w, r)) = lattice.wrap(&target) else { continue };
        let t = lattice.site(&w);
        let phase: f64 = (0..d).map(|i| ab[i] * (target[i] - field.origin[i]) as f64).sum::<f64>()
            - field.transition(&r, &w);
        let p = linalg::cis(phase);
        for o in 0..l {
            v[(t * l + o, s * l + o)] = p;
        }
    }
    v
}

/// Matrix of `Delta^B + W_omega` for one realization.
pub fn build_hamiltonian(model: &ModelDefinition, realization_seed: u64) -> Result<HamiltonianSample> {
    model.validate()?;
    let lattice = &model.lattice;
    let l = lattice.fiber;
    let mut h = assemble_hops(lattice, &model.field, &model.hoppings);
    for s in 0..lattice.n_sites() {
        let w = model.disorder.sample(l, s as u64, realization_seed);
        for i in 0..l {
            for j in 0..l {
                h[(s * l + i, s * l + j)] += model.onsite[(i, j)] + w[(i, j)];
            }
        }
    }
    Ok(HamiltonianSample {
        matrix: h,
        lattice: lattice.clone(),
        model: Arc::new(model.clone()),
        seed: realization_seed,
    })
}

/// Dirichlet compression onto the layers `0 <= n_d < depth` of the last axis.
pub fn restrict_half_space(h: &HamiltonianSample, depth: usize) -> Result<HamiltonianSample> {
    let d = h.lattice.dim();
    let nd = h.lattice.sizes[d - 1];
    if depth == 0 || depth > nd {
        return Err(TopoError::InvalidSpec(format!("depth {depth} outside 1..={nd}")));
    }
    let mut lattice = h.lattice.clone();
    lattice.sizes[d - 1] = depth;
    lattice.boundary[d - 1] = Boundary::Open;
    // the last axis is slowest, so retained indices form a leading block
    let keep = lattice.hilbert_dim();
    let m = h.matrix.submatrix(0, 0, keep, keep).to_owned();
    Ok(HamiltonianSample { matrix: m, lattice, model: h.model.clone(), seed: h.seed })
}

pub(crate) fn fiber_op(lattice: &LatticeSpec, s: &CMat) -> CMat {
    linalg::kron(&linalg::identity(lattice.n_sites()), s)
}

pub(crate) fn c(x: f64) -> c64 {
    c64::new(x, 0.0)
}
