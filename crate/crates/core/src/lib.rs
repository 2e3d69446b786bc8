//! Exact computation of critical modules, critical loci, discriminants and
//! the higher critical tower of polynomial map-germs, plus a truncated-jet
//! laboratory for right and left-right equivalence.

pub mod classify;
pub mod crit;
pub mod field;
pub mod gb;
pub mod germ;
pub mod germfile;
pub mod jetlab;
pub mod linalg;
pub mod modops;
pub mod report;
pub mod ring;

pub use field::{CoefficientField, Fp, Rational, Scalar};
pub use gb::{LocalIdeal, QuotientDim, RadicalVerdict, Reducedness};
pub use ring::{parse_poly, Monomial, MonomialOrder, Polynomial, Ring, RingError};

/// Polynomials over the rationals.
pub type QPoly = Polynomial<Rational>;
/// Polynomials over a prime field.
pub type FpPoly = Polynomial<Fp>;
