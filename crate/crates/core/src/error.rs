use thiserror::Error;

/// Errors raised by the simulation and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// Quadrature, rejection sampling or regression could not reach the
    /// requested accuracy, or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// No hybrid-coupling schedule satisfies the validity conditions.
    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),
}

impl Error {
    /// Prefixes the message with the replica that raised it.
    pub fn in_replica(self, i: usize) -> Self {
        match self {
            Error::Usage(m) => Error::Usage(format!("replica {i}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("replica {i}: {m}")),
            Error::ScheduleInfeasible(m) => Error::ScheduleInfeasible(format!("replica {i}: {m}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
