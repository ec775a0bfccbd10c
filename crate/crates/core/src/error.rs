use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants are grouped by the layer that raises them; [`Error::exit_code`]
/// maps them onto the CLI's exit status classes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // finite fields
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0:?} is reducible over F_p")]
    ReducibleModulus(Vec<u32>),
    #[error("field too large: p^n = {0}")]
    FieldTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no primitive {m}-th root of unity in F_{q}")]
    NoSuchRoot { m: u64, q: u64 },
    #[error("{m} is not prime to p = {p}")]
    NotCoprime { m: u64, p: u64 },

    // series
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("series live over different residue fields")]
    FieldMismatch,
    #[error("valuation is indeterminate at the available precision")]
    ValuationIndeterminate,
    #[error("cannot compose with a series of valuation {0} (need >= 1)")]
    CompositionDomain(i64),
    #[error("series of valuation {0} is not a uniformizer series")]
    NotAUniformizerSeries(i64),
    #[error("series is not a p-th power")]
    NotAPthPower,
    #[error("series has no {0}-th root")]
    NoNthRoot(u64),

    // expressions and towers
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("Artin-Schreier step is unramified (constant term outside the image of x^p - x)")]
    NotWildTotallyRamified,
    #[error("Artin-Schreier equation splits over the current field")]
    TrivialStep,
    #[error("leading linear system of the uniformizer solve is singular")]
    SingularLeadingSystem,
    #[error("step {index}: {source}")]
    Step { index: usize, source: Box<Error> },
    #[error("invalid tower spec: {0}")]
    InvalidSpec(String),

    // galois / groups
    #[error("extension is not Galois: found {found} automorphisms, degree {degree}")]
    ExtensionNotGalois { found: usize, degree: usize },
    #[error("two distinct corrections give the same automorphism to precision")]
    AmbiguousCorrection,
    #[error("group table is not closed: {0}")]
    ClosureFailure(String),
    #[error("lower ramification sets do not form a filtration by subgroups")]
    NonFiltration,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("group is not a p-group")]
    NotPGroup,
    #[error("permutation is not an automorphism of order dividing {0}")]
    NotAnAutomorphism(u64),
    #[error("invalid group table: {0}")]
    InvalidTable(String),

    // witnesses
    #[error("p divides the requested break {0}")]
    InvalidBreak(u64),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("break multisets are not disjoint")]
    BreaksNotDisjoint,

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_step(self, index: usize) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                index,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, looking through step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_precision(&self) -> bool {
        matches!(self.root(), Error::PrecisionExhausted(_))
    }

    /// CLI exit status: 2 for bad input, 3 for precision or internal failures.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::PrecisionExhausted(_)
            | Error::ValuationIndeterminate
            | Error::SingularLeadingSystem
            | Error::AmbiguousCorrection
            | Error::ClosureFailure(_)
            | Error::NonFiltration
            | Error::FieldMismatch => 3,
            _ => 2,
        }
    }

    /// Short explanation of what the error means mathematically.
    pub fn hint(&self) -> Option<&'static str> {
        Some(match self.root() {
            Error::NotWildTotallyRamified => {
                "the right-hand side reduces to a constant outside x^p - x (F_q): the step is unramified"
            }
            Error::TrivialStep => "the right-hand side is of the form x^p - x: the equation splits",
            Error::NoSuchRoot { .. } => {
                "a tame C_m step needs a primitive m-th root of unity in the residue field"
            }
            Error::BreaksNotDisjoint => {
                "the composite law needs the two upper break multisets to be disjoint"
            }
            Error::ExtensionNotGalois { .. } => {
                "not every conjugate of the generators lies in the tower"
            }
            Error::PrecisionExhausted(_) => "raise --precision",
            Error::ConstraintViolation(_) => "need p > 2, p not dividing b, a > b, a != 0 and a != -b mod p",
            Error::InvalidBreak(_) => "Artin-Schreier breaks are prime to p",
            _ => return None,
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
