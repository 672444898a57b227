use thiserror::Error;

/// Errors raised by model construction, numerics and invariant estimators.
#[derive(Debug, Error)]
pub enum TopoError {
    #[error("flux quantization violated on periodic axes ({0}, {1}): B*N_i*N_j = {2}")]
    FluxQuantization(usize, usize, f64),
    #[error("hopping closure violated: displacement {0:?} has no Hermitian partner")]
    NonHermitianHoppings(Vec<i64>),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("inconsistent symmetries: {0}")]
    InconsistentSymmetries(String),
    #[error("operation requires dimension {expected}, got {got}")]
    BadDimension { expected: String, got: usize },
    #[error("numerical kernel failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("no spectral gap at mu = {mu} (width {width:e})")]
    NoGap { mu: f64, width: f64 },
    #[error("switch function gap does not match the spectrum: {0}")]
    GapMismatch(String),
    #[error("index set must have even cardinality")]
    OddIndexSet,
    #[error("index set must have odd cardinality")]
    EvenIndexSet,
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("sample is not chiral: {0}")]
    NotChiral(String),
    #[error("off-diagonal chiral block is singular (smallest singular value {0:e})")]
    BlockSingular(f64),
    #[error("oracle requires a clean sample")]
    NotClean,
    #[error("oracle requires periodic boundary conditions")]
    NotPeriodic,
    #[error("Dirac origin lies on the lattice")]
    OriginOnLattice,
    #[error("index estimate not converged: raw {raw}, nearest integer {rounded}")]
    NotConverged { raw: f64, rounded: i64 },
    #[error("singular values too close to the kernel threshold")]
    ThresholdAmbiguity,
    #[error("kernel margin {0:e} below the trust level")]
    MarginTooSmall(f64),
    #[error("spectrum of PsP on ran P has no gap at 0 (width {0:e})")]
    SpinSpectrumGapless(f64),
    #[error("matrix has odd dimension")]
    OddDimension,
    #[error("matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("contour passes within {0:e} of the spectrum")]
    ContourHitsSpectrum(f64),
    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),
    #[error("edge deviation at maximal depth is {0:e}")]
    ProfileNotDecayed(f64),
    #[error("central surface band is not separated")]
    SurfaceBandAmbiguous,
    #[error("branch matching failed (overlap {0})")]
    BranchAmbiguity(f64),
    #[error("symmetry broken at half flux: {0}")]
    SymmetryBrokenAtHalfFlux(String),
    #[error("Pfaffian underflow")]
    PfaffianUnderflow,
    #[error("kernel at path endpoint")]
    KernelAtEndpoint,
    #[error("config error in [{section}]: {message}")]
    Config { section: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TopoError>;
