use thiserror::Error;

/// Errors raised by geometry validation and density evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("supporting lines are parallel")]
    ParallelLines,
    #[error("supporting lines coincide")]
    CoincidentLines,
    #[error("segment has zero length")]
    DegenerateSegment,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("line through the vertex is parallel to the target line")]
    LineThroughVertexParallel,
    #[error("ring {ring} is self-intersecting (edges {first} and {second})")]
    SelfIntersecting {
        ring: usize,
        first: usize,
        second: usize,
    },
    #[error("hole {hole} is not strictly inside the outer ring")]
    HoleOutsideOuter { hole: usize },
    #[error("ring {ring} has fewer than three distinct vertices")]
    TooFewVertices { ring: usize },
    #[error("polygon is not convex")]
    NotConvex,
    #[error("argument outside the domain of the primitive: {0}")]
    DomainError(String),
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("engine failure: {0}")]
    EngineFailure(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
