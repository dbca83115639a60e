use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: upper bound {upper} must exceed lower bound {lower}")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("a grid needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("sample does not live on the model's grid")]
    GridMismatch,
    #[error("profile covers [{first}, {last}] but the grid needs [{lower}, {upper}]")]
    GridNotCovered {
        first: f64,
        last: f64,
        lower: f64,
        upper: f64,
    },
    #[error("profile positions must be strictly increasing")]
    NonMonotonePositions,
    #[error("dataset must contain at least one sample")]
    EmptyDataset,
    #[error("sample {id} has L2 norm {norm} above the bound {bound}")]
    KappaExceeded { id: i64, norm: f64, bound: f64 },
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("invalid regularization parameters: {0}")]
    InvalidLambda(String),
    #[error("linear solve failed: {0}")]
    SolverFailure(String),
    #[error("aggregation needs at least one model")]
    EmptyModelList,
    #[error("degenerate aggregation: all base predictions vanish")]
    DegenerateAggregation,
    #[error(
        "insufficient stratum: need {needed_pos} positives and {needed_neg} negatives, have {have_pos} and {have_neg}"
    )]
    InsufficientStratum {
        needed_pos: usize,
        needed_neg: usize,
        have_pos: usize,
        have_neg: usize,
    },
    #[error("invalid label {0}: expected one of 0, 0.25, 0.5, 0.75, 1")]
    InvalidLabel(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
