use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GerbeError {
    #[error("edge {0:?} lies in more than two triangles")]
    NonManifoldEdge((String, String)),
    #[error("malformed surface: {0}")]
    MalformedSurface(String),
    #[error("surface is not closed")]
    NotClosed,
    #[error("surface is not oriented")]
    NotOriented,
    #[error("simplicial map does not send simplices to simplices: {0}")]
    NotSimplicial(String),
    #[error("objects live over different sites")]
    SiteMismatch,
    #[error("objects live over different base surfaces")]
    BaseMismatch,
    #[error("gerbes do not match: {0}")]
    GerbeMismatch(String),
    #[error("1-morphisms do not match: {0}")]
    MorphismMismatch(String),
    #[error("1-morphism of rank {0} is not invertible")]
    NotInvertible(usize),
    #[error("refinement is not surjective: {0}")]
    EmptyRefinement(String),
    #[error("invalid descent datum: {0}")]
    InvalidDescent(String),
    #[error("2-morphism does not descend: {0}")]
    DescentObstruction(String),
    #[error("gerbe is not trivial")]
    NotTrivialGerbe,
    #[error("invalid gerbe: {0}")]
    InvalidGerbe(String),
    #[error("boundary is not mapped into the brane support")]
    BoundaryNotOnBrane,
    #[error("input is not equivariant: {0}")]
    NotEquivariant(String),
    #[error("index {index} is not valid on edge {edge}")]
    IndexNotValidOnEdge { index: usize, edge: usize },
    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, GerbeError>;
