//! twp/1: the WebSocket session protocol for tanksworld, and a server that
//! drives one environment for a set of remote agents, humans and viewers.

mod http;
pub mod protocol;
pub mod server;

pub use protocol::{decode, encode, DecodeError, Envelope, ErrorCode, Message, Role, PROTOCOL};
pub use server::{EpisodeSummary, Server, ServerConfig, ServerError, ServerHandle};
