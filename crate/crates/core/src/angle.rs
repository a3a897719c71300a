//! Real angle parameters with an optional symbolic spelling.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Tolerance used when snapping angles to distinguished values.
pub const ANGLE_EPS: f64 = 1e-9;

/// A rotation angle. `expr` keeps the text the user wrote so printing is stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Angle {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

impl Angle {
    pub fn new(value: f64) -> Self {
        Angle { value, expr: None }
    }

    pub fn with_expr(value: f64, expr: impl Into<String>) -> Self {
        Angle {
            value,
            expr: Some(expr.into()),
        }
    }

    pub fn zero() -> Self {
        Angle::new(0.0)
    }

    pub fn pi() -> Self {
        Angle::with_expr(PI, "pi")
    }
}

impl PartialEq for Angle {
    // The spelling is presentation only.
    fn eq(&self, other: &Self) -> bool {
        self.value.to_bits() == other.value.to_bits()
    }
}

impl From<f64> for Angle {
    fn from(value: f64) -> Self {
        Angle::new(value)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.expr {
            Some(e) => f.write_str(e),
            None => write!(f, "{:?}", self.value),
        }
    }
}

/// Below this distance from `2pi` a reduced angle snaps to `0`.
pub const WRAP_EPS: f64 = 1e-12;

/// Reduce into `[0, 2pi)`. Values within [`WRAP_EPS`] of `2pi` map to `0`.
pub fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if TAU - r < WRAP_EPS {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap_tau(a - b);
    d.min(TAU - d)
}

pub fn approx_zero_mod_tau(x: f64) -> bool {
    circle_dist(x, 0.0) < ANGLE_EPS
}
