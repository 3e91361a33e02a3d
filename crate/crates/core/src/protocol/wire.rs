//! One JSON document per line: `{"v":1,"session":…,"kind":…,"payload":…}`.

use crate::error::{Error, ProtocolErrorCode, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

pub const PROTOCOL_VERSION: u32 = 1;

pub(crate) fn proto_err(code: ProtocolErrorCode, msg: impl Into<String>) -> Error {
    Error::Protocol {
        code,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hello {
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    /// Circuits in their text schema.
    pub circuits: Vec<String>,
    /// Samples requested per circuit.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    /// One sample file per challenge circuit, same order.
    pub samples: Vec<String>,
}

/// What the prover learns about the outcome: counts only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionVerdict {
    pub accepted: bool,
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: ProtocolErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Body {
    Hello(Hello),
    Challenge(Challenge),
    Response(Response),
    Verdict(SessionVerdict),
    Error(ErrorReport),
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Hello(_) => "hello",
            Body::Challenge(_) => "challenge",
            Body::Response(_) => "response",
            Body::Verdict(_) => "verdict",
            Body::Error(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub v: u32,
    pub session: String,
    #[serde(flatten)]
    pub body: Body,
}

impl Message {
    pub fn new(session: impl Into<String>, body: Body) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            session: session.into(),
            body,
        }
    }

    /// Single line, no trailing newline.
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }

    pub fn decode(line: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| proto_err(ProtocolErrorCode::Malformed, e.to_string()))?;
        match value.get("v").and_then(|v| v.as_u64()) {
            None => {
                return Err(proto_err(
                    ProtocolErrorCode::Malformed,
                    "missing version field",
                ))
            }
            Some(v) if v != u64::from(PROTOCOL_VERSION) => {
                return Err(proto_err(
                    ProtocolErrorCode::VersionMismatch,
                    format!("peer speaks v{v}, expected v{PROTOCOL_VERSION}"),
                ))
            }
            Some(_) => {}
        }
        serde_json::from_value(value)
            .map_err(|e| proto_err(ProtocolErrorCode::Malformed, e.to_string()))
    }
}

/// A line-oriented session over TCP that records every byte in each
/// direction.
pub struct Connection {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    sent: Vec<u8>,
    received: Vec<u8>,
}

fn transport(e: std::io::Error) -> Error {
    match e.kind() {
        ErrorKind::WouldBlock | ErrorKind::TimedOut => {
            proto_err(ProtocolErrorCode::Timeout, e.to_string())
        }
        _ => proto_err(ProtocolErrorCode::Transport, e.to_string()),
    }
}

impl Connection {
    pub fn new(stream: TcpStream, timeout: Option<Duration>) -> Result<Self> {
        stream.set_read_timeout(timeout).map_err(transport)?;
        stream.set_write_timeout(timeout).map_err(transport)?;
        let writer = stream.try_clone().map_err(transport)?;
        Ok(Self {
            reader: BufReader::new(stream),
            writer,
            sent: Vec::new(),
            received: Vec::new(),
        })
    }

    pub fn connect(endpoint: &str, timeout: Duration) -> Result<Self> {
        let addrs = endpoint
            .to_socket_addrs()
            .map_err(|e| proto_err(ProtocolErrorCode::Transport, format!("{endpoint}: {e}")))?;
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(s) => return Self::new(s, Some(timeout)),
                Err(e) => last = Some(e),
            }
        }
        Err(match last {
            Some(e) => transport(e),
            None => proto_err(
                ProtocolErrorCode::Transport,
                format!("{endpoint} resolves to no address"),
            ),
        })
    }

    pub fn send(&mut self, m: &Message) -> Result<()> {
        self.send_raw(&m.encode())
    }

    /// Writes `line` plus a newline verbatim.
    pub fn send_raw(&mut self, line: &str) -> Result<()> {
        let mut bytes = Vec::with_capacity(line.len() + 1);
        bytes.extend_from_slice(line.as_bytes());
        bytes.push(b'\n');
        self.writer.write_all(&bytes).map_err(transport)?;
        self.writer.flush().map_err(transport)?;
        self.sent.extend_from_slice(&bytes);
        Ok(())
    }

    /// Next message. A closed stream counts as a timeout: the peer will
    /// never answer.
    pub fn recv(&mut self) -> Result<Message> {
        let mut line = String::new();
        let n = self.reader.read_line(&mut line).map_err(transport)?;
        if n == 0 {
            return Err(proto_err(
                ProtocolErrorCode::Timeout,
                "peer closed the connection",
            ));
        }
        self.received.extend_from_slice(line.as_bytes());
        Message::decode(line.trim_end_matches(['\n', '\r']))
    }

    pub fn sent_bytes(&self) -> &[u8] {
        &self.sent
    }

    pub fn received_bytes(&self) -> &[u8] {
        &self.received
    }

    /// Best-effort error notice to the peer before giving up.
    pub(crate) fn abort(&mut self, session: &str, err: &Error) {
        let (code, message) = match err {
            Error::Protocol { code, msg } => (*code, msg.clone()),
            other => (ProtocolErrorCode::ProverFailure, other.to_string()),
        };
        let _ = self.send(&Message::new(
            session,
            Body::Error(ErrorReport { code, message }),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code() -> impl Strategy<Value = ProtocolErrorCode> {
        prop_oneof![
            Just(ProtocolErrorCode::Timeout),
            Just(ProtocolErrorCode::Malformed),
            Just(ProtocolErrorCode::VersionMismatch),
            Just(ProtocolErrorCode::BadResponse),
            Just(ProtocolErrorCode::ProverFailure),
            Just(ProtocolErrorCode::Transport),
        ]
    }

    fn body() -> impl Strategy<Value = Body> {
        prop_oneof![
            ".{0,12}".prop_map(|role| Body::Hello(Hello { role })),
            (prop::collection::vec(".{0,40}", 0..4), 0usize..1_000_000)
                .prop_map(|(circuits, samples)| Body::Challenge(Challenge { circuits, samples })),
            prop::collection::vec("(.|\n){0,60}", 0..4)
                .prop_map(|samples| Body::Response(Response { samples })),
            (any::<bool>(), 0usize..100, 0usize..100).prop_map(|(accepted, passed, total)| {
                Body::Verdict(SessionVerdict {
                    accepted,
                    passed,
                    total,
                })
            }),
            (code(), ".{0,30}")
                .prop_map(|(code, message)| Body::Error(ErrorReport { code, message })),
        ]
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(session in "[a-f0-9]{0,16}", body in body()) {
            let m = Message::new(session, body);
            let line = m.encode();
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(Message::decode(&line).unwrap(), m);
        }
    }

    #[test]
    fn wire_shape() {
        let m = Message::new(
            "ab",
            Body::Verdict(SessionVerdict {
                accepted: true,
                passed: 5,
                total: 5,
            }),
        );
        assert_eq!(
            m.encode(),
            r#"{"v":1,"session":"ab","kind":"verdict","payload":{"accepted":true,"passed":5,"total":5}}"#
        );
    }

    fn code_of(r: Result<Message>) -> ProtocolErrorCode {
        match r {
            Err(Error::Protocol { code, .. }) => code,
            other => panic!("expected a protocol error, got {other:?}"),
        }
    }

    #[test]
    fn decode_errors_are_classified() {
        assert_eq!(
            code_of(Message::decode("not json")),
            ProtocolErrorCode::Malformed
        );
        assert_eq!(
            code_of(Message::decode(
                r#"{"session":"x","kind":"hello","payload":{"role":"p"}}"#
            )),
            ProtocolErrorCode::Malformed
        );
        assert_eq!(
            code_of(Message::decode(
                r#"{"v":2,"session":"x","kind":"hello","payload":{"role":"p"}}"#
            )),
            ProtocolErrorCode::VersionMismatch
        );
        assert_eq!(
            code_of(Message::decode(
                r#"{"v":1,"session":"x","kind":"hello","payload":{"samples":[]}}"#
            )),
            ProtocolErrorCode::Malformed
        );
        assert_eq!(
            code_of(Message::decode(
                r#"{"v":1,"session":"x","kind":"shrug","payload":{}}"#
            )),
            ProtocolErrorCode::Malformed
        );
    }
}
