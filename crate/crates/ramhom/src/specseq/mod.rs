//! Multiplicative spectral-sequence engine: pages carried by indexed
//! monomial families, generator-level differentials extended by the
//! Leibniz rule, page turning through degreewise homology, collapse
//! detection, and abutment assembly with extension flags.
//!
//! The differential on page `r` has bidegree `(-r, r-1)`.

pub mod diff;
pub mod page;
pub mod turn;

#[cfg(test)]
mod tests;

pub use diff::{crosscheck_rules, DiffRule, DifferentialSpec, PagePoly};
pub use page::{AmbientGen, Factor, FamilyPage, Instance, PageFamily};
pub use turn::{
    assemble_abutment, check_d_squared, detect_collapse, differential_matrix, turn_page_at,
    AbutmentDegree, CollapseVerdict, DiffMatrix, TurnOptions,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SpecseqError {
    #[error("differential bidegree mismatch: {0}")]
    BidegreeMismatch(String),
    #[error("d o d != 0; witness class {0}")]
    DSquaredNonzero(String),
    #[error("family index is not integral at {0}")]
    NonIntegralIndex(String),
    #[error("no differential rule for factor `{0}`")]
    MissingFactorRule(String),
    #[error("differential target outside support: {0}")]
    TargetOutsideSupport(String),
    #[error("declared and derived differentials disagree: {0}")]
    RuleMismatch(String),
    #[error(transparent)]
    Family(#[from] crate::graded::family::FamilyError),
    #[error(transparent)]
    Base(#[from] crate::base::BaseError),
}
