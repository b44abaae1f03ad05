//! Presented graded-commutative algebras with canonical monomial normal
//! forms, and graded modules evaluated degreewise to finite free pieces.

mod algebra;
pub mod family;
mod module;

pub use algebra::{
    AlgebraData, Bidegree, ExpBounds, GeneratorSpec, Monomial, Poly, PresentedGradedAlgebra,
    RewriteRule,
};
pub use module::{
    ActionRule, BasisElem, BasisFamily, DegreewiseModule, FreeGen, GradedMap, Presentation,
};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GradedError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("rewrite rules are not confluent; witness monomial {0}")]
    NonConfluentRules(String),
    #[error("invalid rewrite rule: {0}")]
    InvalidRule(String),
    #[error("generator `{0}` sits in degree zero")]
    DegreeZeroGenerator(String),
    #[error("generator `{0}` has odd total degree without a square-zero rule over a base where -1 != 1")]
    OddDegreeGenerator(String),
    #[error("exponent of `{0}` is unbounded; declare a window for it")]
    UnboundedExponent(String),
    #[error("degree {0} is outside the window [{1}, {2}]")]
    OutsideWindow(i64, i64, i64),
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("negative exponents are not supported in module actions")]
    NegativeActionExponent,
    #[error(transparent)]
    Family(#[from] family::FamilyError),
    #[error(transparent)]
    Base(#[from] crate::base::BaseError),
}

/// A closed integer degree interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        assert!(lo <= hi, "empty window");
        Window { lo, hi }
    }

    pub fn contains(&self, d: i64) -> bool {
        self.lo <= d && d <= self.hi
    }

    pub fn pad(&self, by: i64) -> Window {
        Window::new(self.lo - by, self.hi + by)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}
