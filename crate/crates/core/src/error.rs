use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {n} qubits requested, cap is {cap}")]
    ResourceLimit { n: usize, cap: usize },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("indeterminate result: {0}")]
    Indeterminate(String),

    #[error("protocol error ({code}): {msg}")]
    Protocol {
        code: ProtocolErrorCode,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure classes of a verifier/prover session. Each maps to a distinct
/// process exit code (all ≥ 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolErrorCode {
    Timeout,
    Malformed,
    VersionMismatch,
    BadResponse,
    ProverFailure,
    Transport,
}

impl ProtocolErrorCode {
    pub fn exit_code(self) -> i32 {
        match self {
            ProtocolErrorCode::Transport => 2,
            ProtocolErrorCode::Timeout => 3,
            ProtocolErrorCode::Malformed => 4,
            ProtocolErrorCode::VersionMismatch => 5,
            ProtocolErrorCode::BadResponse => 6,
            ProtocolErrorCode::ProverFailure => 7,
        }
    }
}

impl std::fmt::Display for ProtocolErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProtocolErrorCode::Timeout => "timeout",
            ProtocolErrorCode::Malformed => "malformed",
            ProtocolErrorCode::VersionMismatch => "version-mismatch",
            ProtocolErrorCode::BadResponse => "bad-response",
            ProtocolErrorCode::ProverFailure => "prover-failure",
            ProtocolErrorCode::Transport => "transport",
        };
        f.write_str(s)
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
