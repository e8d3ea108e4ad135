use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stored quantity `theta(q)` per unit concentration.
///
/// `Quadratic { a, b }` is `a q + b q^2`; it is strictly increasing for
/// `q > -a / (2b)`, and the operating range is taken to be `q >= 0`, where
/// `theta'(q) >= a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RetardationModel {
    Linear { kappa: f64 },
    Quadratic { a: f64, b: f64 },
}

impl RetardationModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RetardationModel::Linear { kappa } => {
                if !(kappa.is_finite() && kappa > 0.0) {
                    return Err(Error::InvalidProblem(format!("capacity must be positive, got {kappa}")));
                }
            }
            RetardationModel::Quadratic { a, b } => {
                if !(a.is_finite() && a > 0.0 && b.is_finite() && b >= 0.0) {
                    return Err(Error::InvalidProblem(format!(
                        "quadratic retardation needs a > 0 and b >= 0, got a = {a}, b = {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn theta(&self, q: f64) -> f64 {
        match *self {
            RetardationModel::Linear { kappa } => kappa * q,
            RetardationModel::Quadratic { a, b } => a * q + b * q * q,
        }
    }

    #[inline]
    pub fn dtheta(&self, q: f64) -> f64 {
        match *self {
            RetardationModel::Linear { kappa } => kappa,
            RetardationModel::Quadratic { a, b } => a + 2.0 * b * q,
        }
    }

    /// Lower bound of `theta'` on the operating range.
    pub fn kappa_min(&self) -> f64 {
        match *self {
            RetardationModel::Linear { kappa } => kappa,
            RetardationModel::Quadratic { a, .. } => a,
        }
    }

    /// `Some(kappa)` for the linear model.
    pub fn capacity(&self) -> Option<f64> {
        match *self {
            RetardationModel::Linear { kappa } => Some(kappa),
            RetardationModel::Quadratic { .. } => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.capacity().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values() {
        let m = RetardationModel::Quadratic { a: 0.9, b: 0.1 };
        assert!((m.theta(1.0) - 1.0).abs() < 1e-15);
        assert!((m.dtheta(1.0) - 1.1).abs() < 1e-15);
        assert_eq!(m.kappa_min(), 0.9);
        assert!(m.capacity().is_none());
    }

    #[test]
    fn validation() {
        assert!(RetardationModel::Linear { kappa: 0.0 }.validate().is_err());
        assert!(RetardationModel::Quadratic { a: 0.9, b: -0.1 }.validate().is_err());
        assert!(RetardationModel::Quadratic { a: 0.9, b: 0.1 }.validate().is_ok());
    }

    #[test]
    fn serde_shape() {
        let m: RetardationModel = serde_json::from_str(r#"{"type":"quadratic","a":0.9,"b":0.1}"#).unwrap();
        assert_eq!(m, RetardationModel::Quadratic { a: 0.9, b: 0.1 });
        let l: RetardationModel = serde_json::from_str(r#"{"type":"linear","kappa":2.0}"#).unwrap();
        assert_eq!(l.capacity(), Some(2.0));
        assert!(serde_json::from_str::<RetardationModel>(r#"{"type":"linear","kappa":2.0,"x":1}"#).is_err());
    }
}
