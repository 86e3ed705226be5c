use alloc::string::String;

/// One named verification result.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `residual <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckOutcome { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }

    /// Passes when `value >= bound`; `residual` holds the value.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckOutcome { name: name.into(), residual: value, tolerance: bound, passed: value >= bound }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64) -> Self {
        CheckOutcome { name: name.into(), residual: f64::NAN, tolerance, passed: false }
    }
}
