use thiserror::Error;

/// Every failure the library can report. Each variant has a stable
/// machine-readable code (see [`Error::code`]) used by the CLI diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point map is undefined at support point {0}")]
    UndefinedPoint(String),
    #[error("measures have overlapping supports at {0}")]
    OverlappingSupports(String),
    #[error("measure {0} is not a probability measure")]
    NotProbability(usize),

    #[error("set element {0} lies outside the submeasure domain")]
    OutOfDomain(u64),
    #[error("no certified tail rule: {0}")]
    NoTailRule(String),
    #[error("domain of size {size} exceeds the cap {cap}")]
    DomainTooLarge { size: usize, cap: usize },
    #[error("submeasure values on the window are not exact rationals")]
    InexactSubmeasure,
    #[error("comparison could not be separated within {0} bits of precision")]
    UndecidedComparison(u32),

    #[error("empty measure sequence")]
    EmptySequence,
    #[error("test set {0} is not a member of the filter")]
    TestSetNotInFilter(usize),
    #[error("measure {0} has the filter point in its support")]
    SupportHitsStar(usize),
    #[error("block {0} has zero mass")]
    ZeroMassBlock(usize),
    #[error("horizon exhausted while searching for interval {0}")]
    HorizonExhausted(usize),
    #[error("dominated measure on window [{start}, {end}] has mass {value}, not above {bound}")]
    WitnessTooSmall {
        start: u64,
        end: u64,
        value: String,
        bound: String,
    },
    #[error("no measure survived the ordering pass")]
    NothingKept,
    #[error("block {0} has zero mass under the aggregate measure")]
    ZeroBlockMass(usize),

    #[error("largest atom {atom} is not below {bound}")]
    AtomTooLarge { atom: String, bound: String },
    #[error("greedy packing failed: {0}")]
    PackingFailed(String),
    #[error("source atoms never drop below {0} within the horizon")]
    HorizonTooShort(String),
    #[error("designated set is not in the dual ideal of the filter")]
    XNotInIdeal,

    #[error("step {step}: |H| = {found} < {needed}")]
    CardinalityShortfall {
        step: usize,
        found: u64,
        needed: u64,
    },
    #[error("scan bound {0} exceeded")]
    ScanLimit(u64),
    #[error("measure {0} is not supported inside its aligned block")]
    MisalignedSupports(usize),
    #[error("block {block} fails the pathology contract: gap {gap}")]
    ContractFailed { block: usize, gap: String },
    #[error("no half-mass set exists: {0}")]
    NotFound(String),
    #[error("internal defect: {0}")]
    Defect(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::MalformedRational(_) => "MALFORMED_RATIONAL",
            Error::Precondition(_) => "PRECONDITION_VIOLATED",
            Error::UndefinedPoint(_) => "UNDEFINED_POINT",
            Error::OverlappingSupports(_) => "OVERLAPPING_SUPPORTS",
            Error::NotProbability(_) => "NOT_PROBABILITY",
            Error::OutOfDomain(_) => "OUT_OF_DOMAIN",
            Error::NoTailRule(_) => "NO_TAIL_RULE",
            Error::DomainTooLarge { .. } => "DOMAIN_TOO_LARGE",
            Error::InexactSubmeasure => "INEXACT_SUBMEASURE",
            Error::UndecidedComparison(_) => "UNDECIDED_COMPARISON",
            Error::EmptySequence => "EMPTY_SEQUENCE",
            Error::TestSetNotInFilter(_) => "TEST_SET_NOT_IN_FILTER",
            Error::SupportHitsStar(_) => "SUPPORT_HITS_STAR",
            Error::ZeroMassBlock(_) => "ZERO_MASS_BLOCK",
            Error::HorizonExhausted(_) => "HORIZON_EXHAUSTED",
            Error::WitnessTooSmall { .. } => "WITNESS_TOO_SMALL",
            Error::NothingKept => "NOTHING_KEPT",
            Error::ZeroBlockMass(_) => "ZERO_BLOCK_MASS",
            Error::AtomTooLarge { .. } => "ATOM_TOO_LARGE",
            Error::PackingFailed(_) => "PACKING_FAILED",
            Error::HorizonTooShort(_) => "HORIZON_TOO_SHORT",
            Error::XNotInIdeal => "X_NOT_IN_IDEAL",
            Error::CardinalityShortfall { .. } => "CARDINALITY_SHORTFALL",
            Error::ScanLimit(_) => "SCAN_LIMIT",
            Error::MisalignedSupports(_) => "MISALIGNED_SUPPORTS",
            Error::ContractFailed { .. } => "CONTRACT_FAILED",
            Error::NotFound(_) => "NOT_FOUND",
            Error::Defect(_) => "DEFECT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
