//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by state operations, circuit construction, parsing,
/// lumping and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands have incompatible dimensions or qubit counts.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A basis index is outside `0..2^n`.
    #[error("basis index {index} out of range for {n} qubit(s)")]
    IndexOutOfRange { index: u64, n: usize },

    /// A size cap was exceeded (dense statevector, dense unitary, or
    /// reduced dimension `d_max`). `partial` carries the dimension
    /// reached before giving up, when meaningful.
    #[error("capacity exceeded: {what} (partial dimension {partial:?})")]
    Capacity {
        what: String,
        partial: Option<usize>,
    },

    /// Invalid argument at the mathematical level (bad marked-set size,
    /// non-coprime order-finding pair, non-Hermitian input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A gate outside the supported OpenQASM subset.
    #[error("unsupported gate '{name}' at line {line}")]
    UnsupportedGate { name: String, line: usize },

    /// Malformed OpenQASM input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A measurement outcome with probability below the normalization
    /// tolerance has no post-measurement state.
    #[error("degenerate measurement outcome (probability {probability:.3e})")]
    DegenerateOutcome { probability: f64 },

    /// A configured time budget ran out.
    #[error("timed out after {elapsed_ms} ms (budget {budget_ms} ms)")]
    Timeout { elapsed_ms: u64, budget_ms: u64 },

    /// Bad run/bench configuration.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<V> = std::result::Result<V, Error>;

/// A wall-clock budget checked at loop boundaries inside long-running
/// computations (reduction iterations, simulation steps).
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    start: std::time::Instant,
    budget: std::time::Duration,
}

impl Deadline {
    pub fn new(budget: std::time::Duration) -> Self {
        Deadline {
            start: std::time::Instant::now(),
            budget,
        }
    }

    pub fn check(&self) -> Result<()> {
        let elapsed = self.start.elapsed();
        if elapsed > self.budget {
            return Err(Error::Timeout {
                elapsed_ms: elapsed.as_millis() as u64,
                budget_ms: self.budget.as_millis() as u64,
            });
        }
        Ok(())
    }
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(what: impl Into<String>, partial: Option<usize>) -> Self {
        Error::Capacity {
            what: what.into(),
            partial,
        }
    }
}
