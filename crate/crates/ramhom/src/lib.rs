//! Exact graded homological algebra at desk scale.
//!
//! Everything in this crate reduces to exact linear algebra over three base
//! rings: the integers, the `p`-local integers (rationals with denominator
//! prime to `p`) and prime fields. On top of that sit rewrite-presented
//! graded-commutative algebras and degreewise-evaluated modules, free
//! resolutions and bigraded Tor tables, Tate cohomology of cyclic groups,
//! a multiplicative spectral-sequence engine with named classes, and the
//! cyclotomic norm arithmetic that decides Tate non-vanishing on `pi_0`
//! for full level structures.
//!
//! Computations are driven by declarative scenario files (see [`scenario`]);
//! each bundled scenario pins an expected table and the suite runner diffs
//! computed output against it.

pub mod base;
pub mod graded;
pub mod homalg;
pub mod numtheory;
pub mod scenario;
pub mod specseq;

pub use base::{BaseRing, FgAbelianShape, Matrix, Scalar};
