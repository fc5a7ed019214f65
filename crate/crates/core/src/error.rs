use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the spectral library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("potential violates {identity} at z = {z:.6} (residual {residual:.3e})")]
    SymmetryViolation {
        identity: &'static str,
        z: Complex64,
        residual: f64,
    },

    #[error("F_k pole: z = {z:.6} is a lattice point and the numerator zero does not cancel")]
    PoleAtLattice { z: Complex64 },

    #[error("cutoff N = {cutoff} too small: mode offset ({m}, {n}) couples no basis pair")]
    CutoffTooSmall { cutoff: usize, m: i64, n: i64 },

    #[error("resolvent pole: basis momentum {q:.6} within {dist:.3e} of the shift")]
    ResolventPole { q: Complex64, dist: f64 },

    #[error("eigenvalue branch ambiguous near {anchor:.6}: competing eigenvalues at distances {d0:.3e} and {d1:.3e}")]
    BranchAmbiguous {
        anchor: Complex64,
        d0: f64,
        d1: f64,
    },

    #[error("Newton iteration diverged from k = {start:.6}")]
    NewtonDiverged { start: Complex64 },

    #[error("Dirac point set fails the k -> -k pairing: {count} points, worst mismatch {mismatch:.3e}")]
    CountMismatch { count: usize, mismatch: f64 },

    #[error("continuation lost at alpha = {alpha} after {restarts} restarts")]
    ContinuationLost { alpha: f64, restarts: usize },

    #[error("alpha = {alpha:.6} is not magic: sigma_min = {sigma_min:.3e}")]
    NotMagic { alpha: Complex64, sigma_min: f64 },

    #[error("magic angle {alpha:.6} is not simple: second singular value {sigma_second:.3e}")]
    NotSimple {
        alpha: Complex64,
        sigma_second: f64,
    },

    #[error("quadrature node within {dist:.3e} of a lattice point")]
    QuadratureNearPole { dist: f64 },

    #[error("g0 extraction inconsistent over k samples: relative spread {spread:.3e}")]
    InconsistentK { spread: f64 },

    #[error("g1 vanishes; c1 is undefined")]
    DegenerateG1,

    #[error("bifurcation exponent fit unstable: relative residual {residual:.3e}")]
    FitUnstable { residual: f64 },

    #[error("linear algebra backend: {0}")]
    Linalg(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
