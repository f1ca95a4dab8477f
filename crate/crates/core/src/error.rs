use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is outside the supported range")]
    ModulusOutOfRange(u64),
    #[error("{value} is not invertible modulo {modulus}")]
    NonInvertible { value: u64, modulus: u64 },
    #[error("quadratic character is undefined in characteristic {0}")]
    UnsupportedCharacteristic(u64),
    #[error("singular curve y^2 = x^3 + ({a})x + ({b})")]
    SingularCurve { a: String, b: String },
    #[error("could not parse curve {input:?}: {reason}")]
    CurveParse { input: String, reason: String },
    #[error("group order over F_{p} is still ambiguous after {attempts} random points")]
    AmbiguousOrder { p: u64, attempts: usize },
    #[error("Hasse bound violated at p = {p}: a_p = {a_p}")]
    HasseViolation { p: u64, a_p: i64 },
    #[error("counting failed at p = {p}: {source}")]
    Counting {
        p: u64,
        #[source]
        source: Box<Error>,
    },
    #[error("record at p = {0} has bad reduction")]
    NotApplicable(u64),
    #[error("cannot factor 4A^3 + 27B^2 and the point search left torsion order {bound} unresolved (found {found})")]
    FactorizationTooHard { bound: u64, found: u64 },
    #[error("torsion computation produced an impossible group: {0}")]
    InvalidTorsion(String),
    #[error("no family for d = {0}")]
    UnsupportedFamily(i64),
    #[error("factored and expanded forms of the d = {d} family disagree at t = {t}")]
    FamilyTranscription { d: i64, t: String },
    #[error("modulus d must be > 1, got {0}")]
    InvalidModulus(i64),
    #[error("generator {0} is not invertible")]
    NonInvertibleGenerator(String),
    #[error("subgroup closure exceeded {0} elements")]
    SizeCapExceeded(usize),
    #[error("could not parse matrix list: {0}")]
    MatrixParse(String),
    #[error("invalid prime range [{lo}, {hi}]")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cache conflict for curve {curve} at p = {p}: {existing} vs {incoming}")]
    CacheConflict {
        curve: String,
        p: u64,
        existing: String,
        incoming: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_prime(self, p: u64) -> Error {
        match self {
            e @ Error::Counting { .. } => e,
            e => Error::Counting { p, source: Box::new(e) },
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_)
                | Error::ModulusOutOfRange(_)
                | Error::SingularCurve { .. }
                | Error::CurveParse { .. }
                | Error::UnsupportedFamily(_)
                | Error::InvalidModulus(_)
                | Error::NonInvertibleGenerator(_)
                | Error::MatrixParse(_)
                | Error::InvalidRange { .. }
                | Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::SizeCapExceeded(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
