use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability argument fell outside `[0, 1)`.
    #[error("probability {0} is outside [0, 1)")]
    Domain(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The training frame carries no energy, so amplitude-normalised weights
    /// are undefined.
    #[error("degenerate training frame on node {node}: {reason}")]
    DegenerateTraining { node: usize, reason: String },

    #[error("technique `{0}` needs channel state information")]
    NeedsChannelState(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
