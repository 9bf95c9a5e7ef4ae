use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid node name {0:?}")]
    InvalidName(String),
    #[error("duplicate node {0:?}")]
    DuplicateNode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("path enumeration exceeded the budget of {0} paths")]
    PathBudgetExceeded(usize),
    #[error("path endpoint {0:?} is in the conditioning set")]
    EndpointInConditioningSet(String),
    #[error("vertex sets overlap on {0:?}")]
    SetsOverlap(String),
    #[error("vertex set must be nonempty")]
    EmptySet,

    #[error("exposure and outcome must differ")]
    SameEndpoints,
    #[error("treatment levels a and a* must differ")]
    SameLevels,
    #[error("{0:?} is the exposure or outcome")]
    IsEndpoint(String),
    #[error("adjustment set contains the exposure or outcome {0:?}")]
    ContainsEndpoint(String),
    #[error("too many candidate vertices for subset enumeration ({0} > {1})")]
    TooManyVertices(usize, usize),
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("state space of {0} configurations exceeds the cap")]
    StateSpaceTooLarge(u128),
    #[error("target {0:?} is itself intervened on")]
    TargetIntervened(String),
    #[error("invalid sample size {0}")]
    InvalidSampleSize(usize),
    #[error("positivity violation: p({0}) = 0")]
    PositivityViolation(String),
    #[error("no closed form available: {0}")]
    UnsupportedClosedForm(String),

    #[error("no observations in cell {0}")]
    EmptyCell(String),
    #[error("singular design matrix in outcome regression")]
    SingularDesign,
    #[error("continuous adjustment variable {0:?} needs binning for the weight term")]
    UnsupportedContinuousWeights(String),
    #[error("estimated p(a, z1, z2) = {0:e} below the floor")]
    PropensityUnderflow(f64),
    #[error("dataset is missing column {0:?}")]
    MissingColumn(String),
    #[error("need at least {0} observations")]
    TooFewObservations(usize),

    #[error("replication {rep}, adjustment set {set}: {source}")]
    Replication {
        rep: usize,
        set: String,
        source: Box<Error>,
    },
    #[error("no row for adjustment set {0}")]
    MissingRow(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("fixture is not adversarial: population gap {0:e} <= threshold")]
    FixtureNotAdversarial(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
