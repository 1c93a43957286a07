use thiserror::Error;

/// A value that violates a domain invariant, named by field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{field} {reason}")]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl FieldError {
    pub fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self { field, reason: reason.into() }
    }

    pub fn out_of_range(field: &'static str) -> Self {
        Self::new(field, "out of range")
    }
}

pub(crate) fn check_range(field: &'static str, v: f64, lo: f64, hi: f64) -> Result<(), FieldError> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(FieldError::out_of_range(field))
    }
}

pub(crate) fn check_time(field: &'static str, t: f64) -> Result<(), FieldError> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(FieldError::new(field, "is not finite"))
    }
}
