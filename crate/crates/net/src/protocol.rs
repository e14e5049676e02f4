//! The `twp/1` wire protocol.
//!
//! One JSON object per WebSocket text frame:
//!
//! ```json
//! {"v":"twp/1","session":"5f3c…","body":{"type":"action","tick":12,"tank":3,"throttle":1.0,"steer":0.0,"fire":-1.0}}
//! ```
//!
//! Unknown fields are rejected at every level. Decode errors carry the path
//! of the offending field. Observation grids travel as base64 of the 8-bit
//! quantized raster in channel, row, column order.

use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use tanksworld::raster::OBS_LEN;
use tanksworld::sensing::VisibilitySet;
use tanksworld::world::WorldState;
use tanksworld::{Action, EnvConfig, Observation, RewardComponents, TankId, Team};
use thiserror::Error;

pub const PROTOCOL: &str = "twp/1";
pub const DEFAULT_PORT: u16 = 8736;

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("malformed message at `{path}`: {message}")]
    Malformed { path: String, message: String },
    #[error("protocol version mismatch: got {got:?}, expected {PROTOCOL:?}")]
    VersionMismatch { got: String },
}

impl DecodeError {
    /// Path of the offending field, `.` for the whole message.
    pub fn field(&self) -> &str {
        match self {
            DecodeError::Malformed { path, .. } => path,
            DecodeError::VersionMismatch { .. } => "v",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Remote policy; receives rasters only.
    Agent,
    /// A person driving one tank through the browser client.
    Human,
    /// Read-only spectator with full ground truth.
    Viewer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub v: String,
    pub session: String,
    pub body: Message,
}

impl Envelope {
    pub fn new(session: impl Into<String>, body: Message) -> Self {
        Self {
            v: PROTOCOL.to_string(),
            session: session.into(),
            body,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Message {
    Hello {
        role: Role,
        /// Tank ids to claim; empty lets the server choose.
        #[serde(default)]
        tanks: Vec<u32>,
    },
    Assigned {
        role: Role,
        tanks: Vec<u32>,
        config: EnvConfig,
    },
    StateFrame(StateFrame),
    ObsFrame(ObsFrame),
    Action(ActionMsg),
    Reset {
        seed: u64,
    },
    Error {
        code: ErrorCode,
        text: String,
    },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Hello { .. } => "hello",
            Message::Assigned { .. } => "assigned",
            Message::StateFrame(_) => "state_frame",
            Message::ObsFrame(_) => "obs_frame",
            Message::Action(_) => "action",
            Message::Reset { .. } => "reset",
            Message::Error { .. } => "error",
        }
    }

    pub fn error(code: ErrorCode, text: impl Into<String>) -> Self {
        Message::Error {
            code,
            text: text.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    TankTaken,
    VersionMismatch,
    BadMessage,
    NotAllowed,
    UnknownTank,
    WrongSession,
    StaleAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySummary {
    pub id: u32,
    pub team: Team,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSummary {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityMsg {
    pub enemies: Vec<u32>,
    pub neutrals: Vec<u32>,
}

impl From<&VisibilitySet> for VisibilityMsg {
    fn from(v: &VisibilitySet) -> Self {
        Self {
            enemies: v.visible_enemies.iter().map(|t| t.0).collect(),
            neutrals: v.visible_neutrals.iter().map(|t| t.0).collect(),
        }
    }
}

/// Entity-level view for human and viewer roles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFrame {
    pub tick: u64,
    pub arena_side: f64,
    pub comm_range: f64,
    pub entities: Vec<EntitySummary>,
    pub obstacles: Vec<ObstacleSummary>,
    /// Keyed by recipient tank id.
    pub visibility: BTreeMap<String, VisibilityMsg>,
    /// Component deltas of the last step, keyed by tank id.
    pub rewards: BTreeMap<String, RewardComponents>,
    pub red_score: f64,
    pub blue_score: f64,
    pub done: bool,
}

impl StateFrame {
    /// Build a frame showing `entities` (ids) out of `state`.
    pub fn from_state(
        state: &WorldState,
        comm_range: f64,
        shown: impl Fn(TankId) -> bool,
        visibility: BTreeMap<String, VisibilityMsg>,
        rewards: BTreeMap<String, RewardComponents>,
        scores: (f64, f64),
        done: bool,
    ) -> Self {
        Self {
            tick: state.tick,
            arena_side: state.arena_side,
            comm_range,
            entities: state
                .tanks
                .iter()
                .filter(|t| shown(t.id))
                .map(|t| EntitySummary {
                    id: t.id.0,
                    team: t.team,
                    x: t.pose.x,
                    y: t.pose.y,
                    heading: t.pose.heading,
                    alive: t.alive,
                })
                .collect(),
            obstacles: state
                .obstacles
                .iter()
                .map(|o| ObstacleSummary {
                    x: o.center.x,
                    y: o.center.y,
                    radius: o.radius,
                })
                .collect(),
            visibility,
            rewards,
            red_score: scores.0,
            blue_score: scores.1,
            done,
        }
    }
}

/// One tank's raster for agent roles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObsFrame {
    pub tick: u64,
    pub tank: u32,
    pub alive: bool,
    /// Base64 of the 8-bit grid; `null` once the tank is dead.
    pub grid: Option<String>,
    pub reward: RewardComponents,
    pub scalar_reward: f64,
    pub done: bool,
}

impl ObsFrame {
    pub fn encode_grid(obs: &Observation) -> String {
        B64.encode(obs.to_u8())
    }

    /// Decode the carried grid back into a raster.
    pub fn observation(&self) -> Option<Result<Observation, DecodeError>> {
        let text = self.grid.as_ref()?;
        let bad = |message: String| DecodeError::Malformed {
            path: "body.grid".into(),
            message,
        };
        Some(
            B64.decode(text)
                .map_err(|e| bad(e.to_string()))
                .and_then(|bytes| {
                    if bytes.len() != OBS_LEN {
                        return Err(bad(format!("expected {OBS_LEN} bytes, got {}", bytes.len())));
                    }
                    Observation::from_u8(&bytes).ok_or_else(|| bad("bad grid".into()))
                }),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionMsg {
    pub tick: u64,
    pub tank: u32,
    pub throttle: f64,
    pub steer: f64,
    pub fire: f64,
    /// Set on receipt when any component had to be clamped into `[-1, 1]`.
    #[serde(skip)]
    pub clamped: bool,
}

impl ActionMsg {
    pub fn new(tick: u64, tank: u32, action: Action) -> Self {
        Self {
            tick,
            tank,
            throttle: action.throttle,
            steer: action.steer,
            fire: action.fire,
            clamped: false,
        }
    }

    pub fn action(&self) -> Action {
        Action::new(self.throttle, self.steer, self.fire)
    }

    fn clamp_in_place(&mut self) {
        for v in [&mut self.throttle, &mut self.steer, &mut self.fire] {
            let c = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
            if c != *v || v.is_nan() {
                self.clamped = true;
                *v = c;
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvelope {
    v: String,
    session: String,
    body: serde_json::Value,
}

fn from_value<T: serde::de::DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, DecodeError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            ("", p) => p.to_string(),
            (pre, ".") => pre.to_string(),
            (pre, p) => format!("{pre}.{p}"),
        };
        DecodeError::Malformed {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

// The body is decoded in two steps, tag first and then the variant's own
// fields, so that errors keep the full path to the bad field. serde's
// internally tagged enums buffer their content and lose it.
fn decode_body(body: serde_json::Value) -> Result<Message, DecodeError> {
    let bad = |path: &str, message: String| DecodeError::Malformed {
        path: path.into(),
        message,
    };
    let serde_json::Value::Object(mut fields) = body else {
        return Err(bad("body", "expected an object".into()));
    };
    let kind = match fields.remove("type") {
        Some(serde_json::Value::String(k)) => k,
        Some(_) => return Err(bad("body.type", "expected a string".into())),
        None => return Err(bad("body", "missing field `type`".into())),
    };
    let rest = serde_json::Value::Object(fields);

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Hello {
        role: Role,
        #[serde(default)]
        tanks: Vec<u32>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Assigned {
        role: Role,
        tanks: Vec<u32>,
        config: EnvConfig,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Reset {
        seed: u64,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Error {
        code: ErrorCode,
        text: String,
    }

    Ok(match kind.as_str() {
        "hello" => {
            let Hello { role, tanks } = from_value(rest, "body")?;
            Message::Hello { role, tanks }
        }
        "assigned" => {
            let Assigned { role, tanks, config } = from_value(rest, "body")?;
            Message::Assigned { role, tanks, config }
        }
        "state_frame" => Message::StateFrame(from_value(rest, "body")?),
        "obs_frame" => Message::ObsFrame(from_value(rest, "body")?),
        "action" => Message::Action(from_value(rest, "body")?),
        "reset" => {
            let Reset { seed } = from_value(rest, "body")?;
            Message::Reset { seed }
        }
        "error" => {
            let Error { code, text } = from_value(rest, "body")?;
            Message::Error { code, text }
        }
        other => return Err(bad("body.type", format!("unknown message type `{other}`"))),
    })
}

pub fn encode(msg: &Envelope) -> String {
    serde_json::to_string(msg).expect("protocol types always serialize")
}

/// Decode one frame. Action components outside `[-1, 1]` are clamped and
/// flagged rather than rejected.
pub fn decode(text: &str) -> Result<Envelope, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| DecodeError::Malformed {
        path: ".".into(),
        message: e.to_string(),
    })?;
    match value.get("v") {
        Some(serde_json::Value::String(v)) if v != PROTOCOL => {
            return Err(DecodeError::VersionMismatch { got: v.clone() })
        }
        _ => {}
    }
    let raw: RawEnvelope = from_value(value, "")?;
    let mut env = Envelope {
        v: raw.v,
        session: raw.session,
        body: decode_body(raw.body)?,
    };
    if let Message::Action(a) = &mut env.body {
        a.clamp_in_place();
    }
    Ok(env)
}
