use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gaussian integral does not converge: hermitian part has eigenvalue {min_eigenvalue:e}")]
    NonConvergent { min_eigenvalue: f64 },
    #[error("wigner value has imaginary residual {imag:e} (real part {real:e})")]
    ImaginaryResidual { real: f64, imag: f64 },
    #[error("state has vanishing trace ({trace:e})")]
    ZeroTrace { trace: f64 },
    #[error("transmittance {0} outside [0, 1]")]
    BadTransmittance(f64),
    #[error("negative loss time gamma*t = {0}")]
    NegativeTime(f64),
    #[error("variance V = {0} must be >= 1")]
    BadVariance(f64),
    #[error("mode index {index} out of range for {num_modes} modes")]
    BadMode { index: usize, num_modes: usize },
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("term {0} has no adjoint partner")]
    NotHermitian(usize),
    #[error("phase point has {got} components, state needs {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("operation needs a qubit-tagged state")]
    NoQubit,
    #[error("operation is not defined on qubit-tagged states")]
    HasQubit,
    #[error("grid step {step:e} exceeds 1/40 of the fringe period {period:e}")]
    ResolutionTooCoarse { step: f64, period: f64 },
    #[error("fewer than three fringe maxima resolvable")]
    NoFringes,
    #[error("fock cutoff {cutoff} too small: tail mass {tail:e}")]
    CutoffTooSmall { cutoff: usize, tail: f64 },
    #[error("no Bell violation at gamma*t = 0 (b_max = {0})")]
    NoViolationAtZero(f64),
    #[error("parity correlation {0} outside [-1, 1]; state is unphysical")]
    ParityOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
