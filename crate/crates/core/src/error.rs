use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no connected Erdős–Rényi draw reachable: {0}")]
    ConnectivityUnreachable(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge ({0}, {1}) does not exist")]
    MissingEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) already present or is a self-loop")]
    InvalidEdge(NodeId, NodeId),
    #[error("sample of {requested} nodes requested from a graph of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("invalid growth plan: {0}")]
    PlanInvalid(String),
    #[error("cannot draw {requested} distinct candidates out of {available}")]
    CountTooLarge { requested: usize, available: usize },
    #[error("summary {0} requires a directed graph")]
    WrongDirectedness(&'static str),
    #[error("{points} distinct points cannot identify {params} parameters")]
    TooFewPoints { points: usize, params: usize },
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("fit did not converge")]
    NotConverged,
    #[error("extrapolated value is not representable")]
    Overflow,
    #[error("kernel matrix is not positive definite after jitter escalation")]
    SingularKernel,
    #[error("need at least {needed} inputs, got {got}")]
    TooFewInputs { needed: usize, got: usize },
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("k = {k} exceeds table size {size}")]
    KTooLarge { k: usize, size: usize },
    #[error("covariance matrix is degenerate")]
    DegenerateCovariance,
    #[error("table entry {0} carries no GP predictive fields")]
    MissingGpFields(u64),
    #[error("posterior is empty")]
    EmptyPosterior,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge list has no timestamp column")]
    MissingTimestamps,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ConnectivityUnreachable(_) => "ConnectivityUnreachable",
            Error::UnknownNode(_) => "UnknownNode",
            Error::MissingEdge(..) => "MissingEdge",
            Error::InvalidEdge(..) => "InvalidEdge",
            Error::SampleTooLarge { .. } => "SampleTooLarge",
            Error::EmptyGraph => "EmptyGraph",
            Error::PlanInvalid(_) => "PlanInvalid",
            Error::CountTooLarge { .. } => "CountTooLarge",
            Error::WrongDirectedness(_) => "WrongDirectedness",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::NonFiniteInput => "NonFiniteInput",
            Error::NotConverged => "NotConverged",
            Error::Overflow => "Overflow",
            Error::SingularKernel => "SingularKernel",
            Error::TooFewInputs { .. } => "TooFewInputs",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::DegenerateCovariance => "DegenerateCovariance",
            Error::MissingGpFields(_) => "MissingGpFields",
            Error::EmptyPosterior => "EmptyPosterior",
            Error::Parse { .. } => "ParseError",
            Error::MissingTimestamps => "MissingTimestamps",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
        }
    }
}
