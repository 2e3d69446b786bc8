//! Sparse exact multivariate polynomials.

mod monomial;
mod order;
mod parse;
mod poly;

use std::fmt;
use std::sync::Arc;

pub use monomial::Monomial;
pub use order::MonomialOrder;
pub use parse::parse_poly;
pub use poly::Polynomial;

use crate::field::{CoefficientField, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("polynomials live in different variable contexts")]
    ContextMismatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Immutable variable context plus coefficient field, shared by `Arc`.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    names: Vec<String>,
    field: CoefficientField,
}

impl Ring {
    pub fn new<S: AsRef<str>>(names: &[S], field: CoefficientField) -> Result<Arc<Ring>, RingError> {
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref().trim().to_string();
            if n.is_empty() || !n.chars().next().unwrap().is_alphabetic() || !n.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(RingError::UnknownVariable(n));
            }
            if out.contains(&n) {
                return Err(RingError::DuplicateVariable(n));
            }
            out.push(n);
        }
        Ok(Arc::new(Ring { names: out, field }))
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn field(&self) -> CoefficientField {
        self.field
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, RingError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| RingError::UnknownVariable(name.to_string()))
    }

    /// Context with extra variables appended. Clashing names get primes.
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Arc<Ring> {
        let mut names = self.names.clone();
        for e in extra {
            let mut n = e.as_ref().to_string();
            while names.contains(&n) {
                n.push('_');
            }
            names.push(n);
        }
        Arc::new(Ring { names, field: self.field })
    }

    pub fn same(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.field, self.names.join(", "))
    }
}
