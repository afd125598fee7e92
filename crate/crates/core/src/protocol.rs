//! WebSocket wire format: one UTF-8 JSON object per text frame, discriminated
//! by `"kind"`.

use serde::{Deserialize, Serialize};

use crate::layout::RenderFrame;
use crate::{ClientId, Millis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Participant,
    Host,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub source: ClientId,
    pub target: Option<ClientId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioEntry {
    pub id: ClientId,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    UnknownRecipient,
    CapacityExceeded,
    HostTaken,
    NotHost,
    UnknownTarget,
    NotJoined,
    BadMessage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Message {
    Join {
        session: String,
        role: Role,
    },
    Welcome {
        id: ClientId,
        members: Vec<ClientId>,
        tick_ms: u64,
    },
    PeerJoined {
        id: ClientId,
    },
    PeerLeft {
        id: ClientId,
    },
    /// Opaque peer-connection negotiation, relayed verbatim.
    Signal {
        from: ClientId,
        to: ClientId,
        payload: String,
    },
    Gaze {
        seq: u64,
        source: ClientId,
        target: Option<ClientId>,
        t: Millis,
    },
    Audio {
        seq: u64,
        source: ClientId,
        level: f64,
    },
    State {
        tick: u64,
        edges: Vec<EdgeEntry>,
        audio: Vec<AudioEntry>,
    },
    Observe {
        target: Option<ClientId>,
    },
    Snapshot {
        viewer: ClientId,
        tick: u64,
        frame: Box<RenderFrame>,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Join { .. } => "join",
            Self::Welcome { .. } => "welcome",
            Self::PeerJoined { .. } => "peer-joined",
            Self::PeerLeft { .. } => "peer-left",
            Self::Signal { .. } => "signal",
            Self::Gaze { .. } => "gaze",
            Self::Audio { .. } => "audio",
            Self::State { .. } => "state",
            Self::Observe { .. } => "observe",
            Self::Snapshot { .. } => "snapshot",
            Self::Error { .. } => "error",
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Self::Error {
            code,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("messages always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
