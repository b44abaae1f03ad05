pub mod cone;
pub mod disc;
pub mod resolution;
pub mod table;
pub mod tate;
pub mod tor;
pub use cone::{cone_les_solve, ConeDegree, ConeHints, DegreeMap, PresentedGroup};
pub use disc::{discriminant_cokernel, power_shift_family, trace_gram, GradedMatrixFamily, TraceRule};
pub use resolution::{resolve_cyclic_auto, ExactnessReport, FreeResolution, PeriodicTail, Stage};
pub use table::{BigradedTable, DiffKind, TableDiff, TableEntry};
pub use tate::{tate_cyclic, tate_sigma3_via_sylow, ActionKind, CyclicAction};
pub use tor::tor_table;

#[derive(Debug, Clone, thiserror::Error)]
pub enum HomalgError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("resolution target is not a cyclic quotient module")]
    NotCyclic,
    #[error("not exact: {0}")]
    NotExact(String),
    #[error("map data does not cover the window: {0}")]
    InsufficientWindow(String),
    #[error("the supplied map does not normalize the cyclic action: {0}")]
    NotNormalizing(String),
    #[error("inconsistent hint: {0}")]
    InconsistentHint(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Graded(#[from] crate::graded::GradedError),
    #[error(transparent)]
    Base(#[from] crate::base::BaseError),
}
