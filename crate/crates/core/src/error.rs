use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map {index} is not a contraction (operator norm {norm:.6})")]
    NonContractive { index: usize, norm: f64 },
    #[error("level-1 cells do not form a connected set")]
    Disconnected,
    #[error("not post-critically finite: {0}")]
    NotPcf(String),
    #[error("letter {letter} outside alphabet 1..={alphabet}")]
    BadLetter { letter: usize, alphabet: usize },
    #[error("invalid fractal spec: {0}")]
    InvalidSpec(String),
    #[error("invalid harmonic structure: {0}")]
    InvalidStructure(String),
    #[error("level {level} needs {cells} cells, above the limit of {limit}")]
    LevelTooLarge { level: usize, cells: u128, limit: u128 },
    #[error("operation only defined on the Sierpinski gasket (got {0})")]
    UnsupportedFractal(String),
    #[error("no unique shortest refinement path for edge {from} -> {to}")]
    AmbiguousPath { from: String, to: String },
    #[error("no admissible cut vertex for basis cycle {cycle}")]
    NoAdmissibleCut { cycle: usize },
    #[error("cut vertex {0} is not a vertex of the graph")]
    CutNotInGraph(String),
    #[error("cut vertex {0} lies on the boundary")]
    CutOnBoundary(String),
    #[error("increment {increment:.4} at step {position} of loop {cycle} is not below 1/4")]
    IncrementTooLarge { cycle: usize, position: usize, increment: f64 },
    #[error("level {level} too small for an order-{order} degree vector (need at least {required})")]
    LevelTooSmall { level: usize, order: usize, required: usize },
    #[error("singular system: a free component containing {0} touches no fixed vertex")]
    SingularSystem(String),
    #[error("no value recorded for vertex {0}")]
    MissingValue(String),
    #[error("interior block of the level-1 network is singular")]
    SingularInterior,
    #[error("no renormalization fixed point under the uniform ansatz: {0}")]
    NoFixedPoint(String),
    #[error("invalid degree vector: {0}")]
    InvalidDegree(String),
    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),
    #[error("linear solve failed: {0}")]
    NotConverged(String),
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
    #[error("cannot parse '{0}' as a number")]
    BadLiteral(String),
}
