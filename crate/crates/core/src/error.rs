use thiserror::Error;

use crate::lp::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time budget violated: tau + sum(T_i) = {total}, expected {slot_seconds}")]
    TimeBudget { total: f64, slot_seconds: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear program is {status:?}")]
    Solver { status: LpStatus },

    #[error("SAA replication {replication} (seed {seed:#018x}) failed: LP {status:?}")]
    Replication {
        replication: usize,
        seed: u64,
        status: LpStatus,
    },

    #[error("planner failed at slot {slot} of episode {episode}: {source}")]
    Planner {
        episode: usize,
        slot: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
