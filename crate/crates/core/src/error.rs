use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported matrix dimension {0} (expected 1, 2 or 3)")]
    Dimension(usize),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("plastic strain is not isochoric{}: det = {det}", element_suffix(*.element))]
    NotIsochoric { element: Option<usize>, det: f64 },

    #[error("degenerate element {element}: area {area:e}")]
    DegenerateElement { element: usize, area: f64 },

    #[error("growth bound violated ({bound}) at F = {matrix:?}: W = {value}, bound = {limit}")]
    GrowthViolation { bound: &'static str, matrix: Vec<Vec<f64>>, value: f64, limit: f64 },

    #[error("point set is empty")]
    EmptySet,

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid loading: {0}")]
    InvalidLoading(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("isochoric projection stalled: max |det - 1| = {defect:e} after {sweeps} sweeps")]
    ProjectionStall { defect: f64, sweeps: usize },

    #[error("Ciarlet-Necas condition violated: margin {margin:e}")]
    CnViolation { margin: f64 },

    #[error("inadmissible state: {0}")]
    Inadmissible(String),

    #[error("solver failed at knot {knot}: {source}")]
    Solver {
        knot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn element_suffix(element: Option<usize>) -> String {
    element.map(|e| format!(" on element {e}")).unwrap_or_default()
}
