use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A mathematical precondition does not hold (resonance, missing data, ...).
    Precondition,
    /// Malformed or inconsistent input.
    Validation,
    /// Floating point or solver breakdown.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis mismatch: cannot combine {0} and {1} polynomials")]
    BasisMismatch(&'static str, &'static str),

    #[error("linear map is singular")]
    SingularMatrix,

    #[error("invalid potential: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    Parse(String),

    #[error("frequencies are resonant: sum m_j omega_j vanishes for m = {witness:?}")]
    Resonant { witness: Vec<i64> },

    #[error("small divisor {divisor:.3e} for monomial z^{a:?} zbar^{b:?}")]
    SmallDivisor { a: Vec<u32>, b: Vec<u32>, divisor: f64 },

    #[error("parity violated in {context}: monomial {exps:?} has an odd degree in coordinate {coord}")]
    Parity {
        context: &'static str,
        exps: Vec<u32>,
        coord: usize,
    },

    #[error("{what} has imaginary part {imag:.3e} beyond tolerance {tol:.1e}")]
    NonReal { what: String, imag: f64, tol: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("two resonances map to label {label:?}")]
    LabelCollision { label: Vec<u32> },

    #[error("lattice point {label:?} has no matching resonance")]
    LabelGap { label: Vec<u32> },

    #[error("ambiguous excitation gap {gap}: neither elliptic nor hyperbolic")]
    AmbiguousGap { gap: String },

    #[error("rank-deficient design, unidentifiable coefficients: {0:?}")]
    RankDeficient(Vec<String>),

    #[error("polynomial exceeds the term limit ({0})")]
    TooManyTerms(usize),

    #[error("operator dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Resonant { .. } | SmallDivisor { .. } | Precondition(_) | LabelCollision { .. }
            | LabelGap { .. } | AmbiguousGap { .. } | RankDeficient(_) => ErrorKind::Precondition,
            DimensionMismatch { .. } | BasisMismatch(..) | InvalidSpec(_) | Parse(_)
            | Parity { .. } | SingularMatrix | Json(_) => ErrorKind::Validation,
            NonReal { .. } | TooManyTerms(_) | TooLarge { .. } | Numerical(_) => {
                ErrorKind::Numerical
            }
        }
    }
}
