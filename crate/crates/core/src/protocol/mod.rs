//! Challenge-response harness: a verifier sends planted IQP circuits to an
//! untrusted prover over TCP and judges the returned samples.

mod prover;
mod verifier;
mod wire;

pub use prover::{
    answer_circuit, serve_connection, serve_prover, ProverConfig, SessionLog, Strategy,
};
pub use verifier::{
    aggregate, make_challenge, run_verifier, run_verifier_on, scan_for_secrets, secret_needles,
    ChallengeSpec, SessionReport,
};
pub use wire::{
    Body, Challenge, Connection, ErrorReport, Hello, Message, Response, SessionVerdict,
    PROTOCOL_VERSION,
};
