//! Exact computations with strength, partition rank and regular towers of forms.
//!
//! Coefficients live in `Q` or in a small prime field `F_p`. Every search that
//! produces an upper bound also produces a certificate that is re-checked by
//! exact arithmetic before it is returned.

pub mod bounds;
pub mod error;
pub mod field;
pub mod geometry;
pub mod ideal;
pub mod linalg;
pub mod monomial;
pub mod multilinear;
pub mod poly;
pub mod rank;
pub mod regularize;
pub mod taylor;
pub mod text;
pub mod tower;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use monomial::Monomial;
pub use poly::{Form, Poly};
