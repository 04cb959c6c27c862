use serde::{Deserialize, Serialize};

/// Extended real resulting from an integral or a measure query.
///
/// Finite values carry an absolute-error bound so that tail partial sums
/// stay honest about truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite { value: f64, abs_err: f64 },
    Infinite,
}

impl Extended {
    pub fn exact(value: f64) -> Self {
        Extended::Finite {
            value,
            abs_err: 0.0,
        }
    }

    pub const ZERO: Extended = Extended::Finite {
        value: 0.0,
        abs_err: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite { .. })
    }

    /// Finite value, or +inf.
    pub fn value_or_inf(&self) -> f64 {
        match self {
            Extended::Finite { value, .. } => *value,
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn abs_err(&self) -> f64 {
        match self {
            Extended::Finite { abs_err, .. } => *abs_err,
            Extended::Infinite => 0.0,
        }
    }

    pub fn add(self, other: Extended) -> Extended {
        match (self, other) {
            (
                Extended::Finite { value: a, abs_err: ea },
                Extended::Finite { value: b, abs_err: eb },
            ) => Extended::Finite {
                value: a + b,
                abs_err: ea + eb,
            },
            _ => Extended::Infinite,
        }
    }

    pub fn scale(self, c: f64) -> Extended {
        match self {
            Extended::Finite { value, abs_err } => Extended::Finite {
                value: c * value,
                abs_err: c.abs() * abs_err,
            },
            Extended::Infinite => {
                if c == 0.0 {
                    Extended::ZERO
                } else {
                    Extended::Infinite
                }
            }
        }
    }

    /// p-th root, used to pass from ‖·‖^p to the norm itself.
    pub fn powf(self, e: f64) -> Extended {
        match self {
            Extended::Finite { value, abs_err } => {
                let v = value.max(0.0).powf(e);
                // first-order error propagation; exact when abs_err == 0
                let err = if abs_err == 0.0 {
                    0.0
                } else if value > 0.0 {
                    e * value.powf(e - 1.0) * abs_err
                } else {
                    abs_err.powf(e)
                };
                Extended::Finite { value: v, abs_err: err }
            }
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite { value, abs_err } => {
                if *abs_err > 0.0 {
                    write!(f, "{value} (±{abs_err:.3e})")
                } else {
                    write!(f, "{value}")
                }
            }
            Extended::Infinite => write!(f, "inf"),
        }
    }
}
