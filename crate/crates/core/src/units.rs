//! Decibel conversions and angle helpers.

use crate::error::{Error, Result};

/// Converts a power ratio in decibels to linear scale.
pub fn db_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a positive linear power ratio to decibels.
pub fn linear_db(linear: f64) -> Result<f64> {
    if linear > 0.0 && linear.is_finite() {
        Ok(10.0 * linear.log10())
    } else {
        Err(Error::domain("linear", linear, "must be positive and finite"))
    }
}

pub(crate) fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_points() {
        assert_eq!(db_linear(0.0), 1.0);
        assert!((db_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_db(db_linear(8.64)).unwrap() - 8.64).abs() < 1e-12 * 8.64);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(linear_db(0.0).is_err());
        assert!(linear_db(-3.0).is_err());
        assert!(linear_db(f64::NAN).is_err());
    }
}
