#![allow(dead_code)]

use std::net::{SocketAddr, TcpStream};
use std::time::{Duration, Instant};

use tanksworld::{ControlSpec, EnvConfig, ScriptedKind};
use tanksworld_net::protocol::{decode, encode, Envelope, Message, Role};
use tanksworld_net::{Server, ServerConfig, ServerHandle};
use tungstenite::WebSocket;

/// Two red tanks driven over the wire against two scripted blue tanks.
pub fn small_config() -> EnvConfig {
    EnvConfig {
        team_size: 2,
        neutral_count: 1,
        max_steps: 30,
        red: ControlSpec::External,
        blue: ControlSpec::scripted(ScriptedKind::Patrol),
        ..EnvConfig::default()
    }
}

pub fn server_config(env: EnvConfig) -> ServerConfig {
    let mut cfg = ServerConfig::new(env);
    cfg.addr = SocketAddr::from(([127, 0, 0, 1], 0));
    cfg.barrier_timeout = Duration::from_millis(150);
    cfg
}

pub fn start(cfg: ServerConfig) -> ServerHandle {
    Server::bind(cfg).unwrap().spawn().unwrap()
}

pub struct Client {
    pub ws: WebSocket<TcpStream>,
    pub session: String,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Self {
        let stream = TcpStream::connect(addr).unwrap();
        let (ws, _) = tungstenite::client(format!("ws://{addr}/"), stream).unwrap();
        ws.get_ref().set_read_timeout(Some(Duration::from_millis(20))).unwrap();
        Self {
            ws,
            session: String::new(),
        }
    }

    pub fn send_raw(&mut self, text: &str) {
        self.ws.send(tungstenite::Message::Text(text.to_string())).unwrap();
    }

    pub fn send(&mut self, body: Message) {
        let text = encode(&Envelope::new(self.session.clone(), body));
        self.send_raw(&text);
    }

    /// Next decoded message, or `None` if nothing arrives within `wait`
    /// or the server closed the socket.
    pub fn recv_within(&mut self, wait: Duration) -> Option<Message> {
        let deadline = Instant::now() + wait;
        while Instant::now() < deadline {
            match self.ws.read() {
                Ok(tungstenite::Message::Text(t)) => {
                    let env = decode(&t).expect("server sends valid twp/1");
                    if self.session.is_empty() {
                        self.session = env.session.clone();
                    }
                    return Some(env.body);
                }
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
                Err(_) => return None,
            }
        }
        None
    }

    pub fn recv(&mut self) -> Message {
        self.recv_within(Duration::from_secs(5)).expect("message from server")
    }

    /// Skip messages until one satisfies `pred`.
    pub fn recv_until(&mut self, mut pred: impl FnMut(&Message) -> bool) -> Message {
        loop {
            let m = self.recv();
            if pred(&m) {
                return m;
            }
        }
    }

    /// True once the server has closed the connection.
    pub fn closed_within(&mut self, wait: Duration) -> bool {
        let deadline = Instant::now() + wait;
        while Instant::now() < deadline {
            match self.ws.read() {
                Ok(_) => {}
                Err(tungstenite::Error::Io(e))
                    if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
                Err(_) => return true,
            }
        }
        false
    }

    pub fn hello(&mut self, role: Role, tanks: &[u32]) -> Message {
        self.send(Message::Hello {
            role,
            tanks: tanks.to_vec(),
        });
        self.recv()
    }
}
