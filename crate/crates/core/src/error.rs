use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("goodness-of-fit test needs at least one sample")]
    EmptySample,

    #[error("rejection sampler gave up after {attempts} proposals")]
    RejectionExhausted { attempts: u32, last_proposal: f64 },

    #[error("arm {arm} out of range for a {arms}-armed instance")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("replication {index} (seed {seed:#018x}) failed: {source}")]
    Replication {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        field,
        reason: reason.into(),
    }
}
