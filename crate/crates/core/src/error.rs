use std::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed argument: dimension mismatch, bad range, point off the grid.
    InvalidInput(String),
    /// Matrix integration produced non-finite entries.
    IntegrationBlowup { t: f64 },
    /// The normalization matrix of a control ansatz is numerically singular.
    DegenerateAnsatz { rcond: f64 },
    /// A pairing integral required to be nonzero vanished; the construction
    /// is undefined for these inputs.
    DegenerateControl(String),
    /// omega0^2 < 1/(4 tau0^2): the basis frequency would be imaginary.
    Overdamped { omega0: f64, tau0: f64 },
    /// A documented precondition between paired inputs does not hold.
    ContractViolation(String),
    /// A denominator collapsed below the safe threshold before the stopping time.
    NumericalDegeneracy { t: f64, detail: String },
    /// Re of the spectrum is not positive at some frequency, so the principal
    /// branch of the attenuation extraction is undefined there.
    ExtractionUndefined { omega: f64 },
    /// The kernel fails both admissibility conditions for law extraction.
    InvalidKernel(String),
    /// Requested radius does not fit in the transform window.
    WindowTooShort { needed: f64, window: f64 },
    /// 1 - ell_hat winds around the origin; no continuous logarithm exists.
    BranchCrossing { omega: f64 },
    /// A 2-D residual scan has too few nodes across the support to be meaningful.
    ResolutionTooCoarse(String),
    /// Field evaluation at a point where the expression is singular (|x| = 0).
    SingularPoint(String),
    /// A support or energy measurement received an identically zero signal.
    ZeroSignal,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Self::IntegrationBlowup { t } => {
                write!(f, "integration produced non-finite values at t = {t}")
            }
            Self::DegenerateAnsatz { rcond } => {
                write!(f, "degenerate control ansatz: reciprocal condition number {rcond:.3e}")
            }
            Self::DegenerateControl(msg) => write!(f, "degenerate control: {msg}"),
            Self::Overdamped { omega0, tau0 } => write!(
                f,
                "overdamped parameters unsupported: omega0 = {omega0}, tau0 = {tau0}"
            ),
            Self::ContractViolation(msg) => write!(f, "contract violation: {msg}"),
            Self::NumericalDegeneracy { t, detail } => {
                write!(f, "numerical degeneracy at t = {t}: {detail}")
            }
            Self::ExtractionUndefined { omega } => {
                write!(f, "attenuation extraction undefined: Re spectrum <= 0 at omega = {omega}")
            }
            Self::InvalidKernel(msg) => write!(f, "invalid kernel: {msg}"),
            Self::WindowTooShort { needed, window } => {
                write!(f, "window too short: need {needed}, have {window}")
            }
            Self::BranchCrossing { omega } => {
                write!(f, "logarithm branch crossing near omega = {omega}")
            }
            Self::ResolutionTooCoarse(msg) => write!(f, "resolution too coarse: {msg}"),
            Self::SingularPoint(msg) => write!(f, "singular point: {msg}"),
            Self::ZeroSignal => write!(f, "signal has zero energy"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
