use thiserror::Error;

/// Errors raised by field construction, character algebra and the verifiers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("p = {0} must be an odd prime")]
    NotOddPrime(u64),
    #[error("field size {0}^{1} exceeds the 2^20 cap")]
    SizeBound(u64, u32),
    #[error("degree {0} does not divide {1}")]
    BadDegree(u32, u32),
    #[error("norm-one subgroup needs an even relative degree, got {0}")]
    OddRelativeDegree(u32),
    #[error("element does not lie in the degree-{0} subfield")]
    NotInSubfield(u32),
    #[error("multiplicative character evaluated at zero")]
    EvalAtZero,
    #[error("additive character must be nontrivial (scale must be a unit mod p)")]
    TrivialPsi,
    #[error("character lives on the wrong field level: expected degree {expected}, got {got}")]
    LevelMismatch { expected: u32, got: u32 },
    #[error("torus datum is incomplete: {0}")]
    IncompleteDatum(String),
    #[error("unsupported group type for this operation")]
    UnsupportedGroup,
    #[error("group order {got} exceeds the enumeration bound {bound}")]
    OrderBound { got: u64, bound: u64 },
    #[error("generator closure produced {got} elements, order formula says {expected}")]
    ClosureMismatch { expected: u64, got: u64 },
    #[error("matrix must be invertible")]
    SingularMatrix,
    #[error("matrix must be singular")]
    InvertibleMatrix,
    #[error("chi = 1 brute-force kernel only supported for k <= 2 and |E| <= 9")]
    BruteForceBound,
    #[error("regular character required for the elliptic Deligne-Lusztig identification")]
    NonRegularTheta,
    #[error("chi is conjugate-dual (chi^(1+sigma) = 1); use the appendix_C verifiers")]
    ConjugateDualChi,
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
