use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("tree needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("Prüfer entry {value} at position {position} is outside 1..={n}")]
    PruferEntryOutOfRange { position: usize, value: usize, n: usize },

    #[error("Prüfer sequence has length {len}, expected {expected}")]
    PruferLength { len: usize, expected: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("parameter error: {0}")]
    Params(String),

    #[error("divisibility violated: {what} must be divisible by {modulus}")]
    Divisibility { what: String, modulus: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("interval starting at {0} is not a member of the J family")]
    NotInFamily(usize),

    #[error("negative correction mass {mass} at interval starting {start}")]
    NegativeMass { start: usize, mass: String },

    #[error("labelling is not graceful: {0}")]
    NotGraceful(String),

    #[error("improper 2-colouring: edge {0}-{1} joins vertices of the same class")]
    ImproperColoring(usize, usize),

    #[error("exact solver cap exceeded: n={n}, cap={cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TooFewVertices(_) => "too_few_vertices",
            Error::PruferEntryOutOfRange { .. } => "prufer_entry_out_of_range",
            Error::PruferLength { .. } => "prufer_length",
            Error::InvalidTree(_) => "invalid_tree",
            Error::Parse { .. } => "parse",
            Error::Params(_) => "params",
            Error::Divisibility { .. } => "divisibility",
            Error::Precondition(_) => "precondition",
            Error::NotInFamily(_) => "not_in_family",
            Error::NegativeMass { .. } => "negative_mass",
            Error::NotGraceful(_) => "not_graceful",
            Error::ImproperColoring(..) => "improper_coloring",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
