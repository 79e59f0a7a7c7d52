use thiserror::Error;

/// Everything that can go wrong in the pipeline.
///
/// Verification failures are errors, not warnings: a run that cannot
/// certify its own output must not produce it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("characteristic {p} is below the supported minimum {min}")]
    SmallCharacteristic { p: u64, min: u64 },
    #[error("modulus of degree {degree} over F_{p} is reducible")]
    ReducibleModulus { p: u64, degree: u32 },
    #[error("F_{{p^{sub}}} is not a subfield of F_{{p^{ext}}}")]
    NotSubfield { sub: u32, ext: u32 },
    #[error("element does not lie in F_{{p^{0}}}")]
    NotInSubfield(u32),
    #[error("field of order {0} is too large for table arithmetic")]
    FieldTooLarge(u128),
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
    #[error("{0} must be nonzero")]
    Zero(&'static str),
    #[error("F_{0} has no character of order 3")]
    NoCubicCharacter(u64),
    #[error("precision {bits} bits cannot resolve {what}")]
    Precision { what: String, bits: u32 },
    #[error("coefficient {index} of the assembled product is not a rational integer")]
    Integrality { index: usize },
    #[error("expected degree {expected}, got {actual}")]
    Degree { expected: usize, actual: usize },
    #[error("functional equation fails for both signs")]
    FunctionalEquation,
    #[error("root modulus deviation {deviation:e} exceeds tolerance {tol:e}")]
    RiemannHypothesis { deviation: f64, tol: f64 },
    #[error("special value check failed: {0}")]
    SpecialValue(String),
    #[error("no integral Sha candidate")]
    NoIntegralCandidate,
    #[error("dim Sha routes disagree or are nonzero: valuation {valuation}, newton {newton}")]
    DimSha { valuation: String, newton: String },
    #[error("request of {requested} evaluations exceeds budget {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("place is not of good reduction: {0}")]
    BadPlace(String),
    #[error("Weil bound violated: {0}")]
    WeilBound(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("angle coincidence at orbit size {size}")]
    AngleCoincidence { size: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrimePower(_) => "not_prime_power",
            Error::SmallCharacteristic { .. } => "small_characteristic",
            Error::ReducibleModulus { .. } => "reducible_modulus",
            Error::NotSubfield { .. } => "not_subfield",
            Error::NotInSubfield(_) => "not_in_subfield",
            Error::FieldTooLarge(_) => "field_too_large",
            Error::ConductorMismatch(..) => "conductor_mismatch",
            Error::Zero(_) => "zero_argument",
            Error::NoCubicCharacter(_) => "no_cubic_character",
            Error::Precision { .. } => "precision",
            Error::Integrality { .. } => "integrality",
            Error::Degree { .. } => "degree",
            Error::FunctionalEquation => "functional_equation",
            Error::RiemannHypothesis { .. } => "riemann_hypothesis",
            Error::SpecialValue(_) => "special_value",
            Error::NoIntegralCandidate => "no_integral_candidate",
            Error::DimSha { .. } => "dim_sha",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::OracleMismatch(_) => "oracle_mismatch",
            Error::BadPlace(_) => "bad_place",
            Error::WeilBound(_) => "weil_bound",
            Error::OutOfRange(_) => "out_of_range",
            Error::AngleCoincidence { .. } => "angle_coincidence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
