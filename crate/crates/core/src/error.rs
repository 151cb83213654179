use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FlushError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FlushError {
    /// An input violated one of its invariants. `field` is a dotted path
    /// such as `system.total_volume_m3`.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unreachable target: oil fraction {target} is never reached by exponential decay")]
    UnreachableTarget { target: f64 },

    #[error("loop solver did not converge after {iterations} iterations (last residual {residual_pa:.3} Pa)")]
    NonConvergence { iterations: usize, residual_pa: f64 },

    #[error("cavitation/infeasible: absolute pressure at node {node} is {pressure_pa:.1} Pa")]
    Infeasible { node: char, pressure_pa: f64 },

    #[error("unknown product {0:?}")]
    UnknownProduct(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

impl FlushError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FlushError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FlushError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            FlushError::NonConvergence { .. } | FlushError::Infeasible { .. } => 2,
            FlushError::Io { .. } | FlushError::Csv { .. } => 3,
            _ => 1,
        }
    }
}

/// Checks `value` is finite and strictly positive.
pub(crate) fn require_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(FlushError::invalid(field, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn require_non_negative(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(FlushError::invalid(field, format!("must be >= 0, got {value}")))
    }
}

/// Fractions in (0, 1], used for machine efficiencies.
pub(crate) fn require_efficiency(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(FlushError::invalid(field, format!("must be in (0, 1], got {value}")))
    }
}
