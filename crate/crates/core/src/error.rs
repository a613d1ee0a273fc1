use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),
    #[error("adjacency matrix is not primitive")]
    NotPrimitive,
    #[error("word is not admissible: {0}")]
    InadmissibleWord(String),
    #[error("point is not admissible: {0}")]
    InadmissiblePoint(String),
    #[error("matrix is singular or numerically singular: {0}")]
    SingularMatrix(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),
    #[error("top singular value is not simple; the hyperplane is undefined")]
    DegenerateTopSingularValue,
    #[error("matrix is not proximal (top eigenvalue is not simple and real)")]
    NotProximal,
    #[error("points are not on a common local {0} leaf")]
    NotOnLocalLeaf(&'static str),
    #[error("points are not on a common global {0} leaf")]
    NotOnGlobalLeaf(&'static str),
    #[error("point is not homoclinic to the fixed point")]
    NotHomoclinic,
    #[error("symbol {0} is not a fixed point of the shift")]
    NotFixedPoint(u8),
    #[error("the shift has no fixed symbol")]
    NoFixedSymbol,
    #[error("bracket undefined: zeroth coordinates differ")]
    BracketUndefined,
    #[error("paths do not share an endpoint")]
    EndpointMismatch,
    #[error("no typical pair found with excursions up to length {0}")]
    NotTypical(usize),
    #[error("family member {0} is not 1-typical with respect to the pair")]
    MemberNotTypical(usize),
    #[error("direction could not be turned within {0} iterations")]
    TurnCapExceeded(usize),
    #[error("transversality could not be established: {0}")]
    TransversalityFailed(String),
    #[error("synthesis failed: {0}")]
    SynthesisFailed(String),
    #[error("computation exceeds budget: {0}")]
    BudgetExceeded(String),
    #[error("the top exponent difference is not constant: {0}")]
    NotConstant(Box<crate::thermo::DifferenceWitness>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("schema error at line {line}, field `{field}`: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
