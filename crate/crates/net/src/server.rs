//! Session server: one env, many WebSocket clients, one step barrier.
//!
//! Threads:
//! * the acceptor hands each TCP connection to its own connection thread;
//! * a connection thread either answers a static-asset request or runs a
//!   WebSocket, forwarding decoded messages to the stepper and writing
//!   whatever the stepper queues for it;
//! * the stepper owns the [`Env`] and is the only thread that touches it.
//!
//! The episode starts once every external tank is claimed. Each tick the
//! stepper sends frames, then waits until every claimed alive tank has an
//! action for that tick or the barrier timeout passes; missing actions are
//! replaced by the zero action.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use tanksworld::env::{EnvError, TeamScores};
use tanksworld::trajectory::{TrajError, TrajectoryFooter, TrajectoryHeader, TrajectoryWriter};
use tanksworld::sensing::ally_components;
use tanksworld::{Action, Env, EnvConfig, Observation, RewardComponents, TankId};
use thiserror::Error;
use tungstenite::protocol::WebSocket;

use crate::http;
use crate::protocol::{
    decode, encode, ActionMsg, DecodeError, Envelope, ErrorCode, Message, ObsFrame, Role, StateFrame, VisibilityMsg,
    DEFAULT_PORT,
};

pub const DEFAULT_BARRIER_TIMEOUT: Duration = Duration::from_millis(100);
const POLL: Duration = Duration::from_millis(2);

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Trajectory(#[from] TrajError),
}

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub env: EnvConfig,
    pub addr: SocketAddr,
    /// Seed of the first episode; later episodes use the seed in the reset request.
    pub seed: u64,
    pub barrier_timeout: Duration,
    /// Minimum wall time per tick; 100 ms gives the 10 ticks/s human pace.
    pub tick_interval: Duration,
    /// Browser client assets served over plain HTTP on the same port.
    pub static_dir: Option<PathBuf>,
    /// Record every episode; episode `n > 0` goes to `<stem>-<n>.<ext>`.
    pub record: Option<PathBuf>,
    /// Embed observations of external tanks in recordings.
    pub record_observations: bool,
    /// Stop serving after this many finished episodes.
    pub max_episodes: Option<u32>,
}

impl ServerConfig {
    pub fn new(env: EnvConfig) -> Self {
        Self {
            seed: env.seed,
            env,
            addr: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            barrier_timeout: DEFAULT_BARRIER_TIMEOUT,
            tick_interval: Duration::ZERO,
            static_dir: None,
            record: None,
            record_observations: false,
            max_episodes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub ticks: u64,
    pub red_score: f64,
    pub blue_score: f64,
    pub final_state_hash: u64,
    pub recording: Option<PathBuf>,
}

pub struct Server {
    listener: TcpListener,
    config: ServerConfig,
    session: String,
}

pub struct ServerHandle {
    addr: SocketAddr,
    session: String,
    shutdown: Arc<AtomicBool>,
    acceptor: JoinHandle<()>,
    stepper: JoinHandle<Result<Vec<EpisodeSummary>, ServerError>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn session(&self) -> &str {
        &self.session
    }

    pub fn is_finished(&self) -> bool {
        self.stepper.is_finished()
    }

    /// Block until the stepper stops on its own (see `max_episodes`).
    pub fn join(self) -> Result<Vec<EpisodeSummary>, ServerError> {
        let out = self.stepper.join().expect("stepper panicked");
        self.shutdown.store(true, Ordering::SeqCst);
        let _ = self.acceptor.join();
        out
    }

    pub fn shutdown(self) -> Result<Vec<EpisodeSummary>, ServerError> {
        self.shutdown.store(true, Ordering::SeqCst);
        self.join()
    }
}

fn session_id(addr: &SocketAddr, seed: u64) -> String {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let mut h = tanksworld::hash::Fnv64::new();
    h.write_u64(nanos);
    h.write_u64(seed);
    h.write(addr.to_string().as_bytes());
    format!("{:016x}", h.finish())
}

impl Server {
    pub fn bind(config: ServerConfig) -> Result<Self, ServerError> {
        config.env.validate().map_err(EnvError::from)?;
        let listener = TcpListener::bind(config.addr)?;
        let addr = listener.local_addr()?;
        Ok(Self {
            session: session_id(&addr, config.seed),
            listener,
            config,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener")
    }

    pub fn session(&self) -> &str {
        &self.session
    }

    /// Serve until the episode budget is spent or `shutdown` is called.
    pub fn spawn(self) -> Result<ServerHandle, ServerError> {
        let addr = self.local_addr();
        let shutdown = Arc::new(AtomicBool::new(false));
        let (events_tx, events_rx) = mpsc::channel();
        let env = Env::new(self.config.env.clone())?;

        let stepper = {
            let shutdown = shutdown.clone();
            let mut stepper = Stepper::new(env, self.config.clone(), self.session.clone(), events_rx, shutdown);
            thread::Builder::new()
                .name("tw-stepper".into())
                .spawn(move || stepper.run())?
        };

        self.listener.set_nonblocking(true)?;
        let acceptor = {
            let shutdown = shutdown.clone();
            let static_dir = self.config.static_dir.clone();
            let session = self.session.clone();
            let listener = self.listener;
            thread::Builder::new().name("tw-accept".into()).spawn(move || {
                let next_conn = AtomicU64::new(1);
                while !shutdown.load(Ordering::SeqCst) {
                    match listener.accept() {
                        Ok((stream, peer)) => {
                            let conn = next_conn.fetch_add(1, Ordering::SeqCst);
                            debug!("connection {conn} from {peer}");
                            let events = events_tx.clone();
                            let shutdown = shutdown.clone();
                            let static_dir = static_dir.clone();
                            let session = session.clone();
                            let _ = thread::Builder::new().name(format!("tw-conn-{conn}")).spawn(move || {
                                if let Err(e) =
                                    handle_connection(stream, conn, events, static_dir.as_deref(), &session, shutdown)
                                {
                                    debug!("connection {conn}: {e}");
                                }
                            });
                        }
                        Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(5)),
                        Err(e) => {
                            warn!("accept failed: {e}");
                            thread::sleep(Duration::from_millis(20));
                        }
                    }
                }
            })?
        };
        info!("twp/1 session {} listening on {addr}", self.session);
        Ok(ServerHandle {
            addr,
            session: self.session,
            shutdown,
            acceptor,
            stepper,
        })
    }

    /// Serve in the calling thread's stead until the server stops.
    pub fn run(self) -> Result<Vec<EpisodeSummary>, ServerError> {
        self.spawn()?.join()
    }
}

#[allow(clippy::large_enum_variant)]
enum Event {
    Connected { conn: u64, outbox: Sender<Outgoing> },
    Received { conn: u64, msg: Envelope },
    Closed { conn: u64 },
}

enum Outgoing {
    Text(String),
    Close,
}

fn handle_connection(
    stream: TcpStream,
    conn: u64,
    events: Sender<Event>,
    static_dir: Option<&Path>,
    session: &str,
    shutdown: Arc<AtomicBool>,
) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    let head = http::sniff(&stream, Duration::from_secs(5))?;
    if !head.upgrade_websocket {
        return http::serve_static(stream, &head, static_dir);
    }
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    ws.get_mut().set_read_timeout(Some(POLL))?;
    ws.get_mut().set_nodelay(true)?;

    let (out_tx, out_rx) = mpsc::channel();
    if events.send(Event::Connected { conn, outbox: out_tx }).is_err() {
        return Ok(());
    }
    let result = pump(&mut ws, conn, &events, &out_rx, session, &shutdown);
    let _ = events.send(Event::Closed { conn });
    result
}

fn send_text(ws: &mut WebSocket<TcpStream>, text: String) -> io::Result<()> {
    ws.send(tungstenite::Message::Text(text))
        .map_err(|e| io::Error::other(e.to_string()))
}

fn pump(
    ws: &mut WebSocket<TcpStream>,
    conn: u64,
    events: &Sender<Event>,
    outbox: &Receiver<Outgoing>,
    session: &str,
    shutdown: &AtomicBool,
) -> io::Result<()> {
    let io_err = |e: tungstenite::Error| io::Error::other(e.to_string());
    let reply = |code, text: String| encode(&Envelope::new(session, Message::error(code, text)));
    let mut closing = false;
    loop {
        loop {
            match outbox.try_recv() {
                Ok(Outgoing::Text(t)) if !closing => send_text(ws, t)?,
                Ok(Outgoing::Text(_)) => {}
                Ok(Outgoing::Close) => {
                    if !closing {
                        let _ = ws.close(None);
                        closing = true;
                    }
                }
                Err(mpsc::TryRecvError::Empty) => {
                    // Checked after draining so frames queued before a stop still go out.
                    if shutdown.load(Ordering::SeqCst) && !closing {
                        let _ = ws.close(None);
                        closing = true;
                    }
                    break;
                }
                Err(mpsc::TryRecvError::Disconnected) => {
                    if !closing {
                        let _ = ws.close(None);
                        closing = true;
                    }
                    break;
                }
            }
        }
        match ws.read() {
            Ok(tungstenite::Message::Text(text)) if !closing => match decode(&text) {
                Ok(msg) => {
                    if events.send(Event::Received { conn, msg }).is_err() {
                        return Ok(());
                    }
                }
                Err(e @ DecodeError::VersionMismatch { .. }) => {
                    send_text(ws, reply(ErrorCode::VersionMismatch, e.to_string()))?;
                    let _ = ws.close(None);
                    closing = true;
                }
                Err(e) => send_text(ws, reply(ErrorCode::BadMessage, e.to_string()))?,
            },
            Ok(tungstenite::Message::Binary(_)) if !closing => {
                send_text(ws, reply(ErrorCode::BadMessage, "binary frames are not part of twp/1".into()))
                    ?;
            }
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed) | Err(tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(io_err(e)),
        }
    }
}

struct Client {
    role: Option<Role>,
    tanks: BTreeSet<TankId>,
    outbox: Sender<Outgoing>,
}

/// Per-tick data the frames are built from.
#[derive(Default)]
struct FrameData {
    observations: BTreeMap<TankId, Observation>,
    rewards: BTreeMap<TankId, RewardComponents>,
    scalar: BTreeMap<TankId, f64>,
    deltas: BTreeMap<TankId, RewardComponents>,
}

struct Recording {
    writer: TrajectoryWriter<BufWriter<File>>,
    path: PathBuf,
    embed: bool,
}

struct Stepper {
    env: Env,
    config: ServerConfig,
    session: String,
    events: Receiver<Event>,
    shutdown: Arc<AtomicBool>,
    clients: BTreeMap<u64, Client>,
    claims: BTreeMap<TankId, u64>,
    external: Vec<TankId>,
    /// An episode is in progress and not yet done.
    running: bool,
    /// Seed for the next reset, if one is due.
    pending_reset: Option<u64>,
    pending: BTreeMap<TankId, Action>,
    frames_sent_at: Instant,
    frame: FrameData,
    recording: Option<Recording>,
    finished: Vec<EpisodeSummary>,
    episodes_started: u32,
}

impl Stepper {
    fn new(
        env: Env,
        config: ServerConfig,
        session: String,
        events: Receiver<Event>,
        shutdown: Arc<AtomicBool>,
    ) -> Self {
        Self {
            external: env.external_tanks(),
            pending_reset: Some(config.seed),
            env,
            config,
            session,
            events,
            shutdown,
            clients: BTreeMap::new(),
            claims: BTreeMap::new(),
            running: false,
            pending: BTreeMap::new(),
            frames_sent_at: Instant::now(),
            frame: FrameData::default(),
            recording: None,
            finished: Vec::new(),
            episodes_started: 0,
        }
    }

    fn run(&mut self) -> Result<Vec<EpisodeSummary>, ServerError> {
        while !self.shutdown.load(Ordering::SeqCst) {
            let wait = if self.running {
                let deadline = self.frames_sent_at + self.config.barrier_timeout.max(self.config.tick_interval);
                deadline.saturating_duration_since(Instant::now()).min(Duration::from_millis(20))
            } else {
                Duration::from_millis(20)
            };
            match self.events.recv_timeout(wait) {
                Ok(ev) => self.handle(ev),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => break,
            }
            while let Ok(ev) = self.events.try_recv() {
                self.handle(ev);
            }
            self.maybe_start()?;
            self.maybe_advance()?;
            if self
                .config
                .max_episodes
                .is_some_and(|n| self.finished.len() as u32 >= n)
            {
                break;
            }
        }
        if let Some(rec) = self.recording.take() {
            // Interrupted mid-episode: leave the file readable but unfinalized.
            rec.writer.abandon()?;
        }
        for c in self.clients.values() {
            let _ = c.outbox.send(Outgoing::Close);
        }
        self.shutdown.store(true, Ordering::SeqCst);
        Ok(std::mem::take(&mut self.finished))
    }

    fn send(&self, conn: u64, body: Message) {
        if let Some(c) = self.clients.get(&conn) {
            let _ = c.outbox.send(Outgoing::Text(encode(&Envelope::new(self.session.clone(), body))));
        }
    }

    fn handle(&mut self, ev: Event) {
        match ev {
            Event::Connected { conn, outbox } => {
                self.clients.insert(
                    conn,
                    Client {
                        role: None,
                        tanks: BTreeSet::new(),
                        outbox,
                    },
                );
            }
            Event::Closed { conn } => {
                if let Some(c) = self.clients.remove(&conn) {
                    for t in c.tanks {
                        self.claims.remove(&t);
                        self.pending.remove(&t);
                    }
                }
            }
            Event::Received { conn, msg } => {
                if !msg.session.is_empty() && msg.session != self.session {
                    self.send(conn, Message::error(ErrorCode::WrongSession, format!("session is {}", self.session)));
                    return;
                }
                self.handle_message(conn, msg.body);
            }
        }
    }

    fn handle_message(&mut self, conn: u64, body: Message) {
        let role = self.clients.get(&conn).and_then(|c| c.role);
        match (body, role) {
            (Message::Hello { role: r, tanks }, None) => self.hello(conn, r, tanks),
            (Message::Hello { .. }, Some(_)) => {
                self.send(conn, Message::error(ErrorCode::BadMessage, "already greeted"));
            }
            (_, None) => self.send(conn, Message::error(ErrorCode::NotAllowed, "send hello first")),
            (Message::Action(a), Some(Role::Agent | Role::Human)) => self.action(conn, a),
            (Message::Reset { seed }, Some(Role::Agent | Role::Human)) => {
                self.pending_reset = Some(seed);
            }
            (Message::Action(_) | Message::Reset { .. }, Some(Role::Viewer)) => {
                self.send(conn, Message::error(ErrorCode::NotAllowed, "viewers cannot act"));
            }
            (other, Some(_)) => self.send(
                conn,
                Message::error(ErrorCode::NotAllowed, format!("{} is server-to-client only", other.kind())),
            ),
        }
    }

    fn hello(&mut self, conn: u64, role: Role, requested: Vec<u32>) {
        let free: Vec<TankId> = self.external.iter().copied().filter(|t| !self.claims.contains_key(t)).collect();
        let wanted: Vec<TankId> = match role {
            Role::Viewer => Vec::new(),
            _ if !requested.is_empty() => requested.iter().map(|t| TankId(*t)).collect(),
            Role::Agent => free.clone(),
            Role::Human => free.iter().take(1).copied().collect(),
        };
        if role != Role::Viewer {
            if let Some(bad) = wanted.iter().find(|t| !self.external.contains(t)) {
                self.send(conn, Message::error(ErrorCode::UnknownTank, format!("tank {bad} is not externally controlled")));
                return;
            }
            if let Some(taken) = wanted.iter().find(|t| self.claims.contains_key(t)) {
                self.send(conn, Message::error(ErrorCode::TankTaken, format!("tank {taken} is taken")));
                return;
            }
            if wanted.is_empty() {
                self.send(conn, Message::error(ErrorCode::TankTaken, "no free tank"));
                return;
            }
        }
        for t in &wanted {
            self.claims.insert(*t, conn);
        }
        if let Some(c) = self.clients.get_mut(&conn) {
            c.role = Some(role);
            c.tanks = wanted.iter().copied().collect();
        }
        info!("connection {conn} joined as {role:?} with tanks {wanted:?}");
        self.send(
            conn,
            Message::Assigned {
                role,
                tanks: wanted.iter().map(|t| t.0).collect(),
                config: self.config.env.clone(),
            },
        );
        // Late joiners see the current tick straight away.
        if self.env.state().is_some() {
            self.send_frames_to(conn);
        }
    }

    fn action(&mut self, conn: u64, a: ActionMsg) {
        let tank = TankId(a.tank);
        if self.claims.get(&tank) != Some(&conn) {
            self.send(conn, Message::error(ErrorCode::NotAllowed, format!("tank {tank} is not yours")));
            return;
        }
        let tick = self.env.state().map(|s| s.tick);
        if !self.running || Some(a.tick) != tick {
            self.send(
                conn,
                Message::error(ErrorCode::StaleAction, format!("action for tick {}, current tick {tick:?}", a.tick)),
            );
            return;
        }
        if a.clamped {
            warn!("connection {conn}: action for tank {tank} clamped into [-1, 1]");
        }
        self.pending.insert(tank, a.action());
    }

    fn all_claimed(&self) -> bool {
        self.external.iter().all(|t| self.claims.contains_key(t))
    }

    fn record_path(&self, episode: u32) -> Option<PathBuf> {
        let base = self.config.record.as_ref()?;
        if episode == 0 {
            return Some(base.clone());
        }
        let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("episode");
        let name = match base.extension().and_then(|e| e.to_str()) {
            Some(ext) => format!("{stem}-{episode}.{ext}"),
            None => format!("{stem}-{episode}"),
        };
        Some(base.with_file_name(name))
    }

    fn maybe_start(&mut self) -> Result<(), ServerError> {
        let Some(seed) = self.pending_reset else {
            return Ok(());
        };
        if !self.all_claimed() || !self.clients.values().any(|c| c.role.is_some()) {
            return Ok(());
        }
        if self.running {
            self.close_episode()?;
        }
        self.pending_reset = None;
        let (obs, _) = self.env.reset(seed)?;
        self.running = !self.env.is_done();
        self.pending.clear();
        self.frame = FrameData {
            observations: obs,
            ..FrameData::default()
        };
        if let Some(path) = self.record_path(self.episodes_started) {
            let header = TrajectoryHeader::new(self.env.config(), seed, self.config.record_observations);
            let writer = TrajectoryWriter::begin(BufWriter::new(File::create(&path)?), &header)?;
            self.recording = Some(Recording {
                writer,
                path,
                embed: self.config.record_observations,
            });
        }
        self.episodes_started += 1;
        info!("episode {} started with seed {seed}", self.episodes_started);
        self.broadcast_frames();
        if !self.running {
            self.close_episode()?;
        }
        Ok(())
    }

    fn maybe_advance(&mut self) -> Result<(), ServerError> {
        if !self.running {
            return Ok(());
        }
        let state = self.env.state().expect("running episode");
        let waiting_on: Vec<TankId> = self
            .claims
            .keys()
            .copied()
            .filter(|t| state.tank(*t).is_some_and(|s| s.alive) && !self.pending.contains_key(t))
            .collect();
        let elapsed = self.frames_sent_at.elapsed();
        if elapsed < self.config.tick_interval {
            return Ok(());
        }
        if !waiting_on.is_empty() && elapsed < self.config.barrier_timeout {
            return Ok(());
        }
        if !waiting_on.is_empty() {
            debug!("tick {}: barrier timeout, zero actions for {waiting_on:?}", state.tick);
        }
        let tick = state.tick;
        let actions: BTreeMap<TankId, Action> = self
            .external
            .iter()
            .filter(|t| state.tank(**t).is_some_and(|s| s.alive))
            .map(|t| (*t, self.pending.get(t).copied().unwrap_or(Action::ZERO)))
            .collect();
        if let Some(rec) = &mut self.recording {
            if rec.embed {
                for (id, obs) in &self.frame.observations {
                    rec.writer.write_observation(tick, *id, obs)?;
                }
            }
        }
        let result = self.env.step(&actions)?;
        self.pending.clear();
        if let Some(rec) = &mut self.recording {
            let hash = self.env.state().expect("running").state_hash();
            rec.writer.write_tick(hash, &result.info.actions)?;
        }
        self.frame = FrameData {
            observations: result
                .tanks
                .iter()
                .filter_map(|(id, t)| t.observation.clone().map(|o| (*id, o)))
                .collect(),
            rewards: result.tanks.iter().map(|(id, t)| (*id, t.reward)).collect(),
            scalar: result.tanks.iter().map(|(id, t)| (*id, t.scalar_reward)).collect(),
            deltas: result.info.deltas.clone(),
        };
        self.running = !result.done;
        self.broadcast_frames();
        if result.done {
            self.close_episode()?;
        }
        Ok(())
    }

    fn close_episode(&mut self) -> Result<(), ServerError> {
        self.running = false;
        let state = self.env.state().expect("episode");
        let scores = self.env.team_scores();
        let recording = match self.recording.take() {
            Some(rec) => {
                rec.writer.finish(&TrajectoryFooter::from_env(&self.env))?;
                Some(rec.path)
            }
            None => None,
        };
        let summary = EpisodeSummary {
            seed: self.env.seed().unwrap_or_default(),
            ticks: state.tick,
            red_score: scores.red,
            blue_score: scores.blue,
            final_state_hash: state.state_hash(),
            recording,
        };
        info!("episode finished: {summary:?}");
        self.finished.push(summary);
        Ok(())
    }

    fn broadcast_frames(&mut self) {
        self.frames_sent_at = Instant::now();
        let conns: Vec<u64> = self.clients.keys().copied().collect();
        for conn in conns {
            self.send_frames_to(conn);
        }
    }

    fn send_frames_to(&self, conn: u64) {
        let Some(client) = self.clients.get(&conn) else { return };
        let Some(role) = client.role else { return };
        let state = self.env.state().expect("episode");
        let done = self.env.is_done();
        let TeamScores { red, blue } = self.env.team_scores();
        match role {
            Role::Agent => {
                for id in &client.tanks {
                    let alive = state.tank(*id).is_some_and(|t| t.alive);
                    let obs = if alive {
                        self.frame.observations.get(id).cloned().or_else(|| self.env.observe_tank(*id))
                    } else {
                        None
                    };
                    self.send(
                        conn,
                        Message::ObsFrame(ObsFrame {
                            tick: state.tick,
                            tank: id.0,
                            alive,
                            grid: obs.as_ref().map(ObsFrame::encode_grid),
                            reward: self.frame.rewards.get(id).copied().unwrap_or_default(),
                            scalar_reward: self.frame.scalar.get(id).copied().unwrap_or_default(),
                            done,
                        }),
                    );
                }
            }
            Role::Human => {
                // Own tanks, the allies they are linked with, and what those can see.
                let mut seen: BTreeSet<TankId> = client.tanks.clone();
                for t in client.tanks.iter().filter_map(|t| state.tank(*t)) {
                    let graph = ally_components(state, t.team, self.env.sensing().comm_range);
                    seen.extend(graph.component_of(t.id).unwrap_or_default());
                }
                let mut visibility = BTreeMap::new();
                for id in &client.tanks {
                    let v = self.env.visibility(*id).unwrap_or_default();
                    seen.extend(v.visible_enemies.iter().chain(&v.visible_neutrals));
                    visibility.insert(id.0.to_string(), VisibilityMsg::from(&v));
                }
                let rewards = client
                    .tanks
                    .iter()
                    .map(|id| (id.0.to_string(), self.frame.rewards.get(id).copied().unwrap_or_default()))
                    .collect();
                let shown = |id: TankId| seen.contains(&id);
                self.send(
                    conn,
                    Message::StateFrame(StateFrame::from_state(
                        state,
                        self.config.env.comm_range,
                        shown,
                        visibility,
                        rewards,
                        (red, blue),
                        done,
                    )),
                );
            }
            Role::Viewer => {
                let visibility = state
                    .tanks
                    .iter()
                    .filter_map(|t| self.env.visibility(t.id).map(|v| (t.id.0.to_string(), VisibilityMsg::from(&v))))
                    .collect();
                let rewards = self.frame.deltas.iter().map(|(id, c)| (id.0.to_string(), *c)).collect();
                self.send(
                    conn,
                    Message::StateFrame(StateFrame::from_state(
                        state,
                        self.config.env.comm_range,
                        |_| true,
                        visibility,
                        rewards,
                        (red, blue),
                        done,
                    )),
                );
            }
        }
    }
}
