//! Episode recording and bit-exact replay.
//!
//! # `.twtraj` v1
//!
//! UTF-8 text, one record per `\n`-terminated line, fields separated by tabs:
//!
//! ```text
//! TANKSWORLD-TRAJ v1
//! H  <header JSON>
//! O  <tick>  <tank id>  <base64 of the 8-bit quantized observation>   (optional)
//! A  <tick>  <state hash>  <id>:<throttle>,<steer>,<fire>  ...
//! F  <footer JSON>
//! C  <checksum>
//! ```
//!
//! * `A` rows hold the actions applied on `tick` to every tank alive at that
//!   tick (ascending id, six decimals) and the 16-hex-digit hash of the
//!   world after the step. Ticks run contiguously from 0.
//! * `O` rows, present only when recording with embedded observations, hold
//!   what an external tank saw when choosing its action on `tick`; they
//!   precede that tick's `A` row.
//! * The header carries the full [`EnvConfig`], the seed and the effective
//!   control map; the footer the tick count, final team scores, final state
//!   hash, termination status and every tank's cumulative components.
//! * `C` is the FNV-1a 64-bit hash (offset `0xcbf29ce484222325`, prime
//!   `0x100000001b3`) of every byte after the magic line up to and including
//!   the newline ending the `F` line, as 16 lowercase hex digits.
//!
//! A file without `F` and `C` lines is readable but unfinalized.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ControlSpec, EnvConfig, TankId};
use crate::env::{Env, EnvError, StepResult};
use crate::hash::Fnv64;
use crate::raster::Observation;
use crate::scoring::RewardComponents;
use crate::world::Action;

pub const MAGIC_LINE: &str = "TANKSWORLD-TRAJ v1";
pub const EXTENSION: &str = "twtraj";

#[derive(Debug, Error)]
pub enum TrajError {
    #[error("unsupported version: {0:?}")]
    UnsupportedVersion(String),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("trajectory is not finalized")]
    NotFinalized,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
}

fn corrupt(msg: impl Into<String>) -> TrajError {
    TrajError::Corrupt(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader {
    pub format_version: u32,
    pub generator: String,
    pub created_unix: u64,
    pub seed: u64,
    pub embed_observations: bool,
    pub config: EnvConfig,
    pub control: BTreeMap<String, ControlSpec>,
}

impl TrajectoryHeader {
    pub fn new(config: &EnvConfig, seed: u64, embed_observations: bool) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            format_version: 1,
            generator: concat!("tanksworld ", env!("CARGO_PKG_VERSION")).to_string(),
            created_unix,
            seed,
            embed_observations,
            config: config.clone(),
            control: config
                .control_map()
                .into_iter()
                .map(|(id, c)| (id.0.to_string(), c))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFooter {
    pub ticks: u64,
    pub red_score: f64,
    pub blue_score: f64,
    pub final_state_hash: String,
    pub status: String,
    pub components: BTreeMap<String, RewardComponents>,
}

impl TrajectoryFooter {
    pub fn from_env(env: &Env) -> Self {
        let scores = env.team_scores();
        let state = env.state().expect("episode");
        Self {
            ticks: state.tick,
            red_score: scores.red,
            blue_score: scores.blue,
            final_state_hash: format!("{:016x}", state.state_hash()),
            status: env.status().expect("episode").to_string(),
            components: env
                .cumulative()
                .expect("episode")
                .iter()
                .map(|(id, c)| (id.0.to_string(), *c))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickRecord {
    pub tick: u64,
    pub state_hash: u64,
    pub actions: BTreeMap<TankId, Action>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationRecord {
    pub tick: u64,
    pub tank: TankId,
    /// 8-bit quantized grid in storage order.
    pub grid: Vec<u8>,
}

/// A parsed `.twtraj` file.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub ticks: Vec<TickRecord>,
    pub observations: Vec<ObservationRecord>,
    pub footer: Option<TrajectoryFooter>,
}

impl Trajectory {
    pub fn is_finalized(&self) -> bool {
        self.footer.is_some()
    }

    pub fn read(reader: impl BufRead) -> Result<Self, TrajError> {
        read_trajectory(reader)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, TrajError> {
        let f = std::fs::File::open(path)?;
        read_trajectory(std::io::BufReader::new(f))
    }
}

fn format_action(id: TankId, a: &Action) -> String {
    format!("{}:{:.6},{:.6},{:.6}", id.0, a.throttle, a.steer, a.fire)
}

/// Streams records to `W` as they happen; nothing is buffered beyond `W`.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    hasher: Fnv64,
    next_tick: u64,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn begin(mut out: W, header: &TrajectoryHeader) -> Result<Self, TrajError> {
        writeln!(out, "{MAGIC_LINE}")?;
        let mut w = Self {
            out,
            hasher: Fnv64::new(),
            next_tick: 0,
        };
        let json = serde_json::to_string(header).map_err(|e| corrupt(e.to_string()))?;
        w.line(&format!("H\t{json}"))?;
        Ok(w)
    }

    fn line(&mut self, text: &str) -> Result<(), TrajError> {
        self.hasher.write(text.as_bytes());
        self.hasher.write(b"\n");
        self.out.write_all(text.as_bytes())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn ticks_written(&self) -> u64 {
        self.next_tick
    }

    pub fn write_observation(&mut self, tick: u64, tank: TankId, obs: &Observation) -> Result<(), TrajError> {
        let b64 = B64.encode(obs.to_u8());
        self.line(&format!("O\t{tick}\t{}\t{b64}", tank.0))
    }

    pub fn write_tick(
        &mut self,
        state_hash: u64,
        actions: &BTreeMap<TankId, Action>,
    ) -> Result<(), TrajError> {
        let mut row = format!("A\t{}\t{state_hash:016x}", self.next_tick);
        for (id, a) in actions {
            row.push('\t');
            row.push_str(&format_action(*id, a));
        }
        self.line(&row)?;
        self.next_tick += 1;
        Ok(())
    }

    /// Write footer and checksum, flush, and hand back the sink.
    pub fn finish(mut self, footer: &TrajectoryFooter) -> Result<W, TrajError> {
        let json = serde_json::to_string(footer).map_err(|e| corrupt(e.to_string()))?;
        self.line(&format!("F\t{json}"))?;
        let sum = self.hasher.finish();
        writeln!(self.out, "C\t{sum:016x}")?;
        self.out.flush()?;
        Ok(self.out)
    }

    /// Stop without a footer; the file stays readable but unfinalized.
    pub fn abandon(mut self) -> Result<W, TrajError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

fn parse_tick(s: &str, expected: u64, what: &str) -> Result<u64, TrajError> {
    let tick: u64 = s.parse().map_err(|_| corrupt(format!("bad tick in {what} record: {s:?}")))?;
    if tick != expected {
        return Err(corrupt(format!("{what} record for tick {tick}, expected {expected}")));
    }
    Ok(tick)
}

fn parse_action(field: &str) -> Result<(TankId, Action), TrajError> {
    let bad = || corrupt(format!("bad action field {field:?}"));
    let (id, rest) = field.split_once(':').ok_or_else(bad)?;
    let id: u32 = id.parse().map_err(|_| bad())?;
    let vals: Vec<f64> = rest
        .split(',')
        .map(|v| v.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    if vals.len() != 3 || vals.iter().any(|v| !(-1.0..=1.0).contains(v)) {
        return Err(bad());
    }
    Ok((TankId(id), Action::new(vals[0], vals[1], vals[2])))
}

pub fn read_trajectory(mut reader: impl BufRead) -> Result<Trajectory, TrajError> {
    let mut buf = String::new();
    if reader.read_line(&mut buf)? == 0 {
        return Err(corrupt("empty file"));
    }
    let magic = buf.trim_end_matches('\n');
    if magic != MAGIC_LINE {
        return if magic.starts_with("TANKSWORLD-TRAJ ") {
            Err(TrajError::UnsupportedVersion(magic.to_string()))
        } else {
            Err(corrupt("missing magic line"))
        };
    }

    let mut hasher = Fnv64::new();
    let mut header: Option<TrajectoryHeader> = None;
    let mut ticks = Vec::new();
    let mut observations = Vec::new();
    let mut footer: Option<TrajectoryFooter> = None;
    let mut checksum_seen = false;

    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        let Some(line) = buf.strip_suffix('\n') else {
            return Err(corrupt("truncated record"));
        };
        if checksum_seen {
            return Err(corrupt("data after checksum"));
        }
        let mut fields = line.split('\t');
        let kind = fields.next().unwrap_or("");
        if kind == "C" {
            let stored = fields.next().ok_or_else(|| corrupt("empty checksum"))?;
            let stored = u64::from_str_radix(stored, 16).map_err(|_| corrupt("bad checksum field"))?;
            if footer.is_none() {
                return Err(corrupt("checksum without footer"));
            }
            if stored != hasher.finish() {
                return Err(corrupt("checksum mismatch"));
            }
            checksum_seen = true;
            continue;
        }
        hasher.write(line.as_bytes());
        hasher.write(b"\n");
        if footer.is_some() {
            return Err(corrupt("record after footer"));
        }
        match kind {
            "H" => {
                if header.is_some() {
                    return Err(corrupt("duplicate header"));
                }
                let json = fields.next().ok_or_else(|| corrupt("empty header"))?;
                let h: TrajectoryHeader =
                    serde_json::from_str(json).map_err(|e| corrupt(format!("header: {e}")))?;
                if h.format_version != 1 {
                    return Err(TrajError::UnsupportedVersion(format!("format_version {}", h.format_version)));
                }
                h.config.validate().map_err(|e| corrupt(format!("header config: {e}")))?;
                header = Some(h);
            }
            _ if header.is_none() => return Err(corrupt("record before header")),
            "O" => {
                let tick = parse_tick(fields.next().unwrap_or(""), ticks.len() as u64, "observation")?;
                let tank: u32 = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| corrupt("bad observation tank id"))?;
                let grid = B64
                    .decode(fields.next().unwrap_or(""))
                    .map_err(|_| corrupt("bad observation payload"))?;
                if grid.len() != crate::raster::OBS_LEN {
                    return Err(corrupt("observation payload has wrong size"));
                }
                observations.push(ObservationRecord {
                    tick,
                    tank: TankId(tank),
                    grid,
                });
            }
            "A" => {
                let tick = parse_tick(fields.next().unwrap_or(""), ticks.len() as u64, "action")?;
                let state_hash = fields
                    .next()
                    .and_then(|s| u64::from_str_radix(s, 16).ok())
                    .ok_or_else(|| corrupt("bad state hash"))?;
                let mut actions = BTreeMap::new();
                for f in fields {
                    let (id, a) = parse_action(f)?;
                    if actions.insert(id, a).is_some() {
                        return Err(corrupt(format!("duplicate action for tank {id}")));
                    }
                }
                ticks.push(TickRecord {
                    tick,
                    state_hash,
                    actions,
                });
            }
            "F" => {
                let json = fields.next().ok_or_else(|| corrupt("empty footer"))?;
                let f: TrajectoryFooter =
                    serde_json::from_str(json).map_err(|e| corrupt(format!("footer: {e}")))?;
                if f.ticks != ticks.len() as u64 {
                    return Err(corrupt("footer tick count disagrees with records"));
                }
                footer = Some(f);
            }
            other => return Err(corrupt(format!("unknown record kind {other:?}"))),
        }
    }

    let header = header.ok_or_else(|| corrupt("missing header"))?;
    if footer.is_some() && !checksum_seen {
        return Err(corrupt("footer without checksum"));
    }
    Ok(Trajectory {
        header,
        ticks,
        observations,
        footer,
    })
}

/// Drives an [`Env`] and logs every step.
pub struct EpisodeRecorder<W: Write> {
    env: Env,
    writer: TrajectoryWriter<W>,
    embed: bool,
    last_obs: BTreeMap<TankId, Observation>,
}

impl<W: Write> EpisodeRecorder<W> {
    /// Reset `env` with `seed` and write the header. Returns the recorder and
    /// the initial external observations.
    pub fn start(
        mut env: Env,
        seed: u64,
        sink: W,
        embed_observations: bool,
    ) -> Result<(Self, BTreeMap<TankId, Observation>), TrajError> {
        let (obs, _) = env.reset(seed)?;
        let header = TrajectoryHeader::new(env.config(), seed, embed_observations);
        let writer = TrajectoryWriter::begin(sink, &header)?;
        let mut rec = Self {
            env,
            writer,
            embed: embed_observations,
            last_obs: BTreeMap::new(),
        };
        if embed_observations {
            rec.last_obs = rec.current_external_obs(&obs);
        }
        Ok((rec, obs))
    }

    fn current_external_obs(&self, fresh: &BTreeMap<TankId, Observation>) -> BTreeMap<TankId, Observation> {
        self.env
            .external_tanks()
            .into_iter()
            .filter_map(|id| {
                fresh
                    .get(&id)
                    .cloned()
                    .or_else(|| self.env.observe_tank(id))
                    .map(|o| (id, o))
            })
            .collect()
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn step(&mut self, external: &BTreeMap<TankId, Action>) -> Result<StepResult, TrajError> {
        let tick = self.env.state().map(|s| s.tick).unwrap_or(0);
        let result = self.env.step(external)?;
        if self.embed {
            for (id, obs) in &self.last_obs {
                self.writer.write_observation(tick, *id, obs)?;
            }
        }
        let hash = self.env.state().expect("episode").state_hash();
        self.writer.write_tick(hash, &result.info.actions)?;
        if self.embed {
            let fresh: BTreeMap<TankId, Observation> = result
                .tanks
                .iter()
                .filter_map(|(id, t)| t.observation.clone().map(|o| (*id, o)))
                .collect();
            self.last_obs = self.current_external_obs(&fresh);
        }
        Ok(result)
    }

    /// Finalize the file; returns the env and the sink.
    pub fn finish(self) -> Result<(Env, W), TrajError> {
        let footer = TrajectoryFooter::from_env(&self.env);
        let out = self.writer.finish(&footer)?;
        Ok((self.env, out))
    }

    /// Stop recording without a footer.
    pub fn abort(self) -> Result<(Env, W), TrajError> {
        let out = self.writer.abandon()?;
        Ok((self.env, out))
    }
}

/// Outcome of replaying a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub ticks_replayed: u64,
    pub first_divergent_tick: Option<u64>,
    pub final_state_hash: u64,
    pub expected_state_hash: u64,
    pub red_score: f64,
    pub blue_score: f64,
    pub components_match: bool,
    pub observations_checked: usize,
    pub observation_mismatches: usize,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.first_divergent_tick.is_none()
            && self.final_state_hash == self.expected_state_hash
            && self.components_match
            && self.observation_mismatches == 0
    }
}

impl std::fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.identical() {
            write!(
                f,
                "identical\tticks={}\thash={:016x}\tred={}\tblue={}\tobs_checked={}",
                self.ticks_replayed, self.final_state_hash, self.red_score, self.blue_score, self.observations_checked
            )
        } else {
            write!(
                f,
                "diverged\tfirst_tick={}\tticks={}\thash={:016x}\texpected={:016x}\tcomponents_match={}\tobs_mismatches={}",
                self.first_divergent_tick.map_or("-".to_string(), |t| t.to_string()),
                self.ticks_replayed,
                self.final_state_hash,
                self.expected_state_hash,
                self.components_match,
                self.observation_mismatches
            )
        }
    }
}

/// Rebuild the episode from the header and feed the recorded actions back,
/// bypassing every policy, comparing per-tick state hashes, embedded
/// observations, and the footer.
pub fn replay(traj: &Trajectory) -> Result<ReplayReport, TrajError> {
    let footer = traj.footer.as_ref().ok_or(TrajError::NotFinalized)?;
    let expected_state_hash =
        u64::from_str_radix(&footer.final_state_hash, 16).map_err(|_| corrupt("bad final state hash"))?;

    // Policies are bypassed, so every tank is replayed as external; this
    // keeps replay independent of clone model files.
    let mut config = traj.header.config.clone();
    config.red = ControlSpec::External;
    config.blue = ControlSpec::External;
    config.control.clear();
    let mut env = Env::new(config)?;
    env.set_observe(false);
    env.reset(traj.header.seed)?;

    let mut obs_by_tick: BTreeMap<u64, Vec<&ObservationRecord>> = BTreeMap::new();
    for o in &traj.observations {
        obs_by_tick.entry(o.tick).or_default().push(o);
    }

    let mut first_divergent_tick = None;
    let mut observations_checked = 0;
    let mut observation_mismatches = 0;
    let mut replayed = 0;
    for rec in &traj.ticks {
        for o in obs_by_tick.get(&rec.tick).into_iter().flatten() {
            observations_checked += 1;
            let same = env.observe_tank(o.tank).is_some_and(|live| live.to_u8() == o.grid);
            if !same {
                observation_mismatches += 1;
                first_divergent_tick.get_or_insert(rec.tick);
            }
        }
        match env.step_with_actions(&rec.actions) {
            Ok(_) => {}
            Err(EnvError::IncompleteActions(_)) | Err(EnvError::EpisodeFinished) => {
                first_divergent_tick.get_or_insert(rec.tick);
                break;
            }
            Err(e) => return Err(e.into()),
        }
        replayed += 1;
        if env.state().expect("episode").state_hash() != rec.state_hash {
            first_divergent_tick.get_or_insert(rec.tick);
        }
    }

    let final_state_hash = env.state().expect("episode").state_hash();
    let scores = env.team_scores();
    let components: BTreeMap<String, RewardComponents> = env
        .cumulative()
        .expect("episode")
        .iter()
        .map(|(id, c)| (id.0.to_string(), *c))
        .collect();
    let components_match = components == footer.components
        && scores.red == footer.red_score
        && scores.blue == footer.blue_score;
    Ok(ReplayReport {
        ticks_replayed: replayed,
        first_divergent_tick,
        final_state_hash,
        expected_state_hash,
        red_score: scores.red,
        blue_score: scores.blue,
        components_match,
        observations_checked,
        observation_mismatches,
    })
}

/// Regenerate `(observation, action)` pairs for the given tanks by replaying
/// a finalized trajectory. With `tanks = None`, the trajectory's external
/// tanks are used.
pub fn demonstrations(
    traj: &Trajectory,
    tanks: Option<&[TankId]>,
) -> Result<Vec<crate::knn::Demonstration>, TrajError> {
    let wanted: Vec<TankId> = match tanks {
        Some(t) => t.to_vec(),
        None => traj.header.config.external_tanks(),
    };
    let mut config = traj.header.config.clone();
    config.red = ControlSpec::External;
    config.blue = ControlSpec::External;
    config.control.clear();
    let mut env = Env::new(config)?;
    env.set_observe(false);
    env.reset(traj.header.seed)?;

    let mut demos: Vec<crate::knn::Demonstration> = vec![Vec::new(); wanted.len()];
    for rec in &traj.ticks {
        for (slot, id) in wanted.iter().enumerate() {
            if let (Some(obs), Some(action)) = (env.observe_tank(*id), rec.actions.get(id)) {
                demos[slot].push(crate::knn::DemoStep { obs, action: *action });
            }
        }
        env.step_with_actions(&rec.actions)?;
    }
    Ok(demos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScriptedKind;

    fn random_cfg(max_steps: u64) -> EnvConfig {
        EnvConfig {
            red: ControlSpec::External,
            blue: ControlSpec::scripted(ScriptedKind::Aggressive),
            max_steps,
            ..EnvConfig::default()
        }
    }

    fn record(cfg: EnvConfig, seed: u64, embed: bool) -> Vec<u8> {
        use rand::{Rng, SeedableRng};
        let env = Env::new(cfg).unwrap();
        let (mut rec, _) = EpisodeRecorder::start(env, seed, Vec::new(), embed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        while !rec.env().is_done() {
            let actions = rec
                .env()
                .external_tanks()
                .into_iter()
                .map(|id| (id, Action::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            rec.step(&actions).unwrap();
        }
        rec.finish().unwrap().1
    }

    #[test]
    fn record_counts_and_checksum() {
        let cfg = EnvConfig {
            max_steps: 100,
            red: ControlSpec::scripted(ScriptedKind::Random),
            blue: ControlSpec::scripted(ScriptedKind::Random),
            ..EnvConfig::default()
        };
        let bytes = record(cfg, 11, false);
        let traj = Trajectory::read(&bytes[..]).unwrap();
        assert!(traj.is_finalized());
        let n = traj.ticks.len();
        assert!(n <= 100);
        // Random play rarely kills anyone in 100 ticks; every alive tank is logged.
        for rec in &traj.ticks {
            assert!(rec.actions.len() <= 12);
        }
        if traj.footer.as_ref().unwrap().status == "max_steps" {
            assert_eq!(n, 100);
        }
        assert_eq!(traj.ticks[0].actions.len(), 12);
    }

    #[test]
    fn replay_identical() {
        let bytes = record(random_cfg(150), 4, false);
        let traj = Trajectory::read(&bytes[..]).unwrap();
        let report = replay(&traj).unwrap();
        assert!(report.identical(), "{report}");
        assert_eq!(report.ticks_replayed, traj.ticks.len() as u64);
    }

    #[test]
    fn embedded_observations_replay() {
        let bytes = record(random_cfg(5), 9, true);
        let traj = Trajectory::read(&bytes[..]).unwrap();
        assert_eq!(traj.observations.len(), 5 * 5);
        let report = replay(&traj).unwrap();
        assert_eq!(report.observations_checked, 25);
        assert!(report.identical(), "{report}");
    }

    #[test]
    fn truncation_is_corrupt() {
        let bytes = record(random_cfg(30), 2, false);
        let cut = &bytes[..bytes.len() - 7];
        assert!(matches!(Trajectory::read(cut), Err(TrajError::Corrupt(_))));
    }

    #[test]
    fn flipped_byte_fails_checksum() {
        let bytes = record(random_cfg(30), 2, false);
        let text = String::from_utf8(bytes).unwrap();
        let edited = text.replacen(":0.", ":1.", 1);
        assert_ne!(edited, text);
        assert!(matches!(Trajectory::read(edited.as_bytes()), Err(TrajError::Corrupt(_))));
    }

    #[test]
    fn edited_action_diverges_at_or_after_edit() {
        let bytes = record(random_cfg(80), 6, false);
        let mut traj = Trajectory::read(&bytes[..]).unwrap();
        let a = traj.ticks[20].actions.get_mut(&TankId(0)).unwrap();
        a.throttle = if a.throttle > 0.0 { -1.0 } else { 1.0 };

        // Re-sign the edited records so only the content differs.
        let mut w = TrajectoryWriter::begin(Vec::new(), &traj.header).unwrap();
        for rec in &traj.ticks {
            w.write_tick(rec.state_hash, &rec.actions).unwrap();
        }
        let edited = w.finish(traj.footer.as_ref().unwrap()).unwrap();
        traj = Trajectory::read(&edited[..]).unwrap();
        let report = replay(&traj).unwrap();
        assert!(!report.identical());
        assert!(report.first_divergent_tick.unwrap() >= 20, "{report}");
    }

    #[test]
    fn wrong_version_rejected() {
        let bytes = record(random_cfg(3), 2, false);
        let text = String::from_utf8(bytes).unwrap().replacen("v1", "v2", 1);
        assert!(matches!(
            Trajectory::read(text.as_bytes()),
            Err(TrajError::UnsupportedVersion(_))
        ));
    }

    #[test]
    fn aborted_file_is_unfinalized() {
        let env = Env::new(random_cfg(50)).unwrap();
        let (mut rec, _) = EpisodeRecorder::start(env, 1, Vec::new(), false).unwrap();
        let zero: BTreeMap<TankId, Action> = (0..5).map(|i| (TankId(i), Action::ZERO)).collect();
        for _ in 0..10 {
            rec.step(&zero).unwrap();
        }
        let (_, bytes) = rec.abort().unwrap();
        let traj = Trajectory::read(&bytes[..]).unwrap();
        assert!(!traj.is_finalized());
        assert_eq!(traj.ticks.len(), 10);
        assert!(matches!(replay(&traj), Err(TrajError::NotFinalized)));
    }

    #[test]
    fn demonstrations_regenerate_observations() {
        let bytes = record(random_cfg(5), 9, true);
        let traj = Trajectory::read(&bytes[..]).unwrap();
        let demos = demonstrations(&traj, None).unwrap();
        assert_eq!(demos.len(), 5);
        for (slot, d) in demos.iter().enumerate() {
            assert_eq!(d.len(), 5);
            let embedded = traj
                .observations
                .iter()
                .find(|o| o.tick == 0 && o.tank == TankId(slot as u32))
                .unwrap();
            assert_eq!(d[0].obs.to_u8(), embedded.grid);
        }
    }
}
