use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which discretization guard was violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    /// The box is too small for the kernel decay: `a L / (2 eps) < 20`.
    Periodization,
    /// The grid does not resolve the kernel width: `h > eps / (4 a)`.
    Resolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardViolation {
    pub kind: GuardKind,
    pub a: f64,
    pub epsilon: f64,
    pub box_length: f64,
    pub n: usize,
    /// Smallest points-per-axis that satisfies the resolution guard.
    pub required_n: usize,
}

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GuardKind::Periodization => write!(
                f,
                "periodization guard: a*L/(2*eps) = {:.4} < 20 (a = {}, eps = {}, L = {})",
                self.a * self.box_length / (2.0 * self.epsilon),
                self.a,
                self.epsilon,
                self.box_length
            ),
            GuardKind::Resolution => write!(
                f,
                "resolution guard: spacing {:.6} > eps/(4a) = {:.6}; need n >= {} (have {})",
                self.box_length / self.n as f64,
                self.epsilon / (4.0 * self.a),
                self.required_n,
                self.n
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value {value} at grid point ({i}, {j}, {k})")]
    NonFinite {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential below a^2 at grid point ({i}, {j}, {k}): q = {q}, a^2 = {a_squared}")]
    PotentialBelowFloor {
        i: usize,
        j: usize,
        k: usize,
        q: f64,
        a_squared: f64,
    },

    #[error("nonlinearity `{name}` is not finite at u = {u}")]
    NonFiniteNonlinearity { name: String, u: f64 },

    #[error("{0}")]
    Guard(GuardViolation),

    #[error("iteration {iteration}: iterate norm {norm} left the ball of radius {limit}")]
    Divergence {
        iteration: usize,
        norm: f64,
        limit: f64,
        residual_history: Vec<f64>,
    },

    #[error("iteration {iteration}: certified iterate norm {norm} exceeds R = {radius}")]
    BallInvariant {
        iteration: usize,
        norm: f64,
        radius: f64,
    },

    #[error("pointwise limit iteration diverged at grid point ({i}, {j}, {k}) where q = {q}")]
    PointwiseDivergence { i: usize, j: usize, k: usize, q: f64 },

    #[error("conjugate gradient stagnated after {iterations} iterations (relative residual {residual:e})")]
    Stagnation {
        iterations: usize,
        residual: f64,
        residual_history: Vec<f64>,
    },

    #[error("grid with n = {n} exceeds the verification limit n <= {limit}")]
    GridTooLarge { n: usize, limit: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
