//! Command-line front end for tanksworld.
//!
//! Report lines are tab-separated `key=value` pairs in a fixed order, one per
//! episode (or per measurement), so they can be diffed and cut(1)-ed.
//!
//! Exit codes: 0 success, 1 replay diverged, 2 usage, 3 config, 4 I/O,
//! 5 protocol or file format.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;
use tanksworld::config::ConfigError;
use tanksworld::rng::{stream, SimRng, Stream};
use tanksworld::trajectory::{demonstrations, EpisodeRecorder, TrajError};
use tanksworld::{
    fit_knn_clone, Action, CloneModel, ControlSpec, Env, EnvConfig, EnvError, TankId, Team, Trajectory,
};
use tanksworld_net::{Server, ServerConfig, ServerError};
use thiserror::Error;

pub const EXIT_DIVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_PROTOCOL: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Protocol(String),
    #[error("replay diverged")]
    Diverged,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Protocol(_) => EXIT_PROTOCOL,
            CliError::Diverged => EXIT_DIVERGED,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Config(c) => CliError::Config(c),
            EnvError::Policy(tanksworld::policy::PolicyError::Io(e)) => CliError::Io(e.to_string()),
            EnvError::Policy(p) => CliError::Config(ConfigError::Invalid(p.to_string())),
            other => CliError::Protocol(other.to_string()),
        }
    }
}

impl From<TrajError> for CliError {
    fn from(e: TrajError) -> Self {
        match e {
            TrajError::Io(e) => CliError::Io(e.to_string()),
            TrajError::Env(e) => e.into(),
            other => CliError::Protocol(other.to_string()),
        }
    }
}

impl From<ServerError> for CliError {
    fn from(e: ServerError) -> Self {
        match e {
            ServerError::Io(e) => CliError::Io(e.to_string()),
            ServerError::Env(e) => e.into(),
            ServerError::Trajectory(e) => e.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tanksworld", version, about = "Deterministic multi-agent tank arena")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run episodes headlessly and print one report line per episode.
    Run(RunArgs),
    /// Measure environment throughput with random actions.
    Bench(BenchArgs),
    /// Host a twp/1 session for remote agents, humans and viewers.
    Serve(ServeArgs),
    /// Re-simulate a trajectory file and compare it tick by tick.
    Replay(ReplayArgs),
    /// Fit a nearest-neighbour clone from recorded trajectories.
    FitClone(FitCloneArgs),
    /// Run episodes headlessly and record each one to a trajectory file.
    Record(RecordArgs),
}

/// Scenario flags. Each one overrides the key of the same name in the
/// config file (or the defaults); nested keys drop their table prefix.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with scenario parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub team_size: Option<u32>,
    #[arg(long)]
    pub neutral_count: Option<u32>,
    #[arg(long)]
    pub obstacle_density: Option<f64>,
    #[arg(long)]
    pub comm_range: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Controller of every red tank: external, scripted:<kind>[@skill] or clone:<model-file>[@skill].
    #[arg(long)]
    pub red: Option<ControlSpec>,
    /// Controller of every blue tank.
    #[arg(long)]
    pub blue: Option<ControlSpec>,
    /// Per-tank override, ID=SPEC; repeatable.
    #[arg(long = "control", value_name = "ID=SPEC")]
    pub control: Vec<String>,
    #[arg(long)]
    pub two_hop_only: bool,
    #[arg(long)]
    pub neutral_always_visible: bool,
    #[arg(long)]
    pub team_includes_ally_kills: bool,
    #[arg(long)]
    pub arena_side: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub max_speed: Option<f64>,
    #[arg(long)]
    pub max_turn_rate: Option<f64>,
    #[arg(long)]
    pub tank_radius: Option<f64>,
    #[arg(long)]
    pub projectile_speed: Option<f64>,
    #[arg(long)]
    pub projectile_lifetime: Option<u32>,
    #[arg(long)]
    pub projectile_radius: Option<f64>,
    #[arg(long)]
    pub reload_interval: Option<u32>,
    #[arg(long)]
    pub obstacle_radius_min: Option<f64>,
    #[arg(long)]
    pub obstacle_radius_max: Option<f64>,
    #[arg(long)]
    pub health: Option<u32>,
    #[arg(long)]
    pub reward_enemy: Option<f64>,
    #[arg(long)]
    pub reward_death: Option<f64>,
    #[arg(long)]
    pub reward_ally: Option<f64>,
    #[arg(long)]
    pub reward_neutral: Option<f64>,
}

macro_rules! overlay {
    ($src:expr, $dst:expr; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $src.$field.clone() { $dst.$field = v; })*
    };
}

impl ConfigArgs {
    pub fn build(&self) -> Result<EnvConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) if !path.exists() => {
                return Err(CliError::Usage(format!("config file {} does not exist", path.display())))
            }
            Some(path) => EnvConfig::load(path)?,
            None => EnvConfig::default(),
        };
        overlay!(self, cfg; seed, team_size, neutral_count, obstacle_density, comm_range, max_steps, red, blue);
        let p = &mut cfg.physics;
        overlay!(self, p; arena_side, dt, max_speed, max_turn_rate, tank_radius, projectile_speed,
            projectile_lifetime, projectile_radius, reload_interval, obstacle_radius_min, obstacle_radius_max, health);
        let w = &mut cfg.rewards;
        for (flag, slot) in [
            (self.reward_enemy, &mut w.enemy),
            (self.reward_death, &mut w.death),
            (self.reward_ally, &mut w.ally),
            (self.reward_neutral, &mut w.neutral),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        cfg.flags.two_hop_only |= self.two_hop_only;
        cfg.flags.neutral_always_visible |= self.neutral_always_visible;
        cfg.flags.team_includes_ally_kills |= self.team_includes_ally_kills;
        for item in &self.control {
            let (id, spec) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--control expects ID=SPEC, got {item:?}")))?;
            let id: u32 = id
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad tank id in --control {item:?}")))?;
            cfg.control.insert(TankId(id), spec.parse()?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Load every clone model the config refers to, keyed by its reference.
pub fn load_models(cfg: &EnvConfig) -> Result<HashMap<String, Arc<CloneModel>>, CliError> {
    let mut models = HashMap::new();
    for spec in cfg.control_map().values() {
        if let ControlSpec::Clone { model, .. } = spec {
            if models.contains_key(model) {
                continue;
            }
            let m = CloneModel::load(model).map_err(|e| match e {
                tanksworld::policy::PolicyError::Io(e) => CliError::Io(format!("clone model {model}: {e}")),
                other => CliError::Config(ConfigError::Invalid(format!("clone model {model}: {other}"))),
            })?;
            models.insert(model.clone(), Arc::new(m));
        }
    }
    Ok(models)
}

fn make_env(cfg: &EnvConfig) -> Result<Env, CliError> {
    Ok(Env::with_models(cfg.clone(), load_models(cfg)?)?)
}

/// Stand-in for the remote controllers of external tanks in headless runs:
/// uniform random actions, one stream per tank keyed by the episode seed.
pub struct ExternalDriver {
    rngs: BTreeMap<TankId, SimRng>,
}

impl ExternalDriver {
    pub fn new(cfg: &EnvConfig, seed: u64) -> Self {
        let rngs = cfg
            .external_tanks()
            .into_iter()
            .map(|id| (id, stream(seed, Stream::Policy(id))))
            .collect();
        Self { rngs }
    }

    pub fn actions(&mut self, env: &Env) -> BTreeMap<TankId, Action> {
        let Some(state) = env.state() else {
            return BTreeMap::new();
        };
        self.rngs
            .iter_mut()
            .filter(|(id, _)| state.tank(**id).is_some_and(|t| t.alive))
            .map(|(id, rng)| {
                let a = Action::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                (*id, a)
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub episodes: u32,
    /// Step this many episodes concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
}

/// One finished episode, as reported by `run` and `record`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeReport {
    pub episode: u32,
    pub seed: u64,
    pub ticks: u64,
    pub status: String,
    pub red: f64,
    pub blue: f64,
    /// Per-team totals of enemy kills, ally kills, neutral kills and deaths.
    pub components: BTreeMap<Team, [u32; 4]>,
    pub state_hash: u64,
}

impl EpisodeReport {
    fn from_env(episode: u32, env: &Env) -> Self {
        let state = env.state().expect("episode");
        let mut components: BTreeMap<Team, [u32; 4]> = [(Team::Red, [0; 4]), (Team::Blue, [0; 4])].into();
        for (id, c) in env.cumulative().into_iter().flatten() {
            if let Some(t) = components.get_mut(&env.config().team_of(*id)) {
                t[0] += c.enemy_kills;
                t[1] += c.ally_kills;
                t[2] += c.neutral_kills;
                t[3] += c.died;
            }
        }
        let scores = env.team_scores();
        Self {
            episode,
            seed: env.seed().expect("episode"),
            ticks: state.tick,
            status: env.status().expect("episode").to_string(),
            red: scores.red,
            blue: scores.blue,
            components,
            state_hash: state.state_hash(),
        }
    }
}

impl std::fmt::Display for EpisodeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "episode={}\tseed={}\tticks={}\tstatus={}\tred={}\tblue={}",
            self.episode, self.seed, self.ticks, self.status, self.red, self.blue
        )?;
        for (team, [e, a, n, d]) in &self.components {
            write!(f, "\t{team}_enemy_kills={e}\t{team}_ally_kills={a}\t{team}_neutral_kills={n}\t{team}_deaths={d}")?;
        }
        write!(f, "\thash={:016x}", self.state_hash)
    }
}

fn episode_seeds(cfg: &EnvConfig, episodes: u32) -> Vec<(u32, u64)> {
    (0..episodes).map(|i| (i, cfg.seed.wrapping_add(i as u64))).collect()
}

fn run_one(cfg: &EnvConfig, models: &HashMap<String, Arc<CloneModel>>, i: u32, seed: u64) -> Result<EpisodeReport, CliError> {
    let mut env = Env::with_models(cfg.clone(), models.clone())?;
    env.set_observe(false);
    env.reset(seed)?;
    let mut driver = ExternalDriver::new(cfg, seed);
    while !env.is_done() {
        let actions = driver.actions(&env);
        env.step(&actions)?;
    }
    Ok(EpisodeReport::from_env(i, &env))
}

pub fn run(args: &RunArgs) -> Result<Vec<EpisodeReport>, CliError> {
    if args.parallel == 0 {
        return Err(CliError::Usage("--parallel must be >= 1".into()));
    }
    let cfg = args.config.build()?;
    let models = load_models(&cfg)?;
    let seeds = episode_seeds(&cfg, args.episodes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.parallel)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| {
        seeds
            .par_iter()
            .map(|(i, seed)| run_one(&cfg, &models, *i, *seed))
            .collect()
    })
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub seconds: f64,
    /// Render observations every step (the default).
    #[arg(long, overrides_with = "no_observe")]
    pub observe: bool,
    /// Skip rendering observations.
    #[arg(long)]
    pub no_observe: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub observe: bool,
    pub steps: u64,
    pub observations: u64,
    pub seconds: f64,
}

impl BenchReport {
    pub fn steps_per_sec(&self) -> f64 {
        self.steps as f64 / self.seconds
    }

    pub fn observations_per_sec(&self) -> f64 {
        self.observations as f64 / self.seconds
    }
}

impl std::fmt::Display for BenchReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "observe={}\tsteps={}\tseconds={:.3}\tsteps_per_sec={:.1}\tobs_per_sec={:.1}",
            self.observe,
            self.steps,
            self.seconds,
            self.steps_per_sec(),
            self.observations_per_sec()
        )
    }
}

/// Step a default 5v5 world, every combatant external and driven by uniform
/// random actions, until the budget is spent.
pub fn bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    if !(args.seconds.is_finite() && args.seconds > 0.0) {
        return Err(CliError::Usage("--seconds must be > 0".into()));
    }
    let observe = !args.no_observe;
    let cfg = EnvConfig {
        red: ControlSpec::External,
        blue: ControlSpec::External,
        ..EnvConfig::default()
    };
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut env = Env::new(cfg)?;
    env.set_observe(observe);
    let mut rng = stream(seed, Stream::Policy(TankId(0)));
    let budget = Duration::from_secs_f64(args.seconds);
    let (mut steps, mut observations) = (0u64, 0u64);
    let mut episode = seed;
    let start = Instant::now();
    env.reset(episode)?;
    while start.elapsed() < budget {
        if env.is_done() {
            episode = episode.wrapping_add(1);
            env.reset(episode)?;
        }
        let state = env.state().expect("episode");
        let actions: BTreeMap<TankId, Action> = state
            .tanks
            .iter()
            .filter(|t| t.alive && t.team != Team::Neutral)
            .map(|t| {
                let a = Action::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                (t.id, a)
            })
            .collect();
        let result = env.step(&actions)?;
        steps += 1;
        observations += result.tanks.values().filter(|t| t.observation.is_some()).count() as u64;
    }
    Ok(BenchReport {
        observe,
        steps,
        observations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = tanksworld_net::protocol::DEFAULT_PORT)]
    pub port: u16,
    /// Directory with the browser client build, served over HTTP on the same port.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Record every episode to this trajectory file (later episodes get a -N suffix).
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Embed the observations of external tanks in recordings.
    #[arg(long)]
    pub record_observations: bool,
    /// How long to wait for missing actions before substituting zero actions.
    #[arg(long, default_value_t = 100)]
    pub barrier_ms: u64,
    /// Minimum time per tick; 100 gives the 10 ticks/s pace for human play.
    #[arg(long, default_value_t = 0)]
    pub tick_ms: u64,
    /// Exit after this many finished episodes.
    #[arg(long)]
    pub episodes: Option<u32>,
}

pub fn serve(args: &ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let env = args.config.build()?;
    if env.external_tanks().is_empty() {
        return Err(CliError::Usage("nothing to serve: no tank is external".into()));
    }
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("--static-dir {} is not a directory", dir.display())));
        }
    }
    if load_models(&env)?.values().next().is_some() {
        return Err(CliError::Usage("clone controllers are not supported by serve".into()));
    }
    let mut cfg = ServerConfig::new(env);
    cfg.addr = SocketAddr::new(args.host, args.port);
    cfg.static_dir = args.static_dir.clone();
    cfg.record = args.record.clone();
    cfg.record_observations = args.record_observations;
    cfg.barrier_timeout = Duration::from_millis(args.barrier_ms);
    cfg.tick_interval = Duration::from_millis(args.tick_ms);
    cfg.max_episodes = args.episodes;
    let server = Server::bind(cfg)?;
    writeln!(out, "listening=ws://{}/\tsession={}", server.local_addr(), server.session())?;
    out.flush()?;
    for s in server.run()? {
        writeln!(
            out,
            "seed={}\tticks={}\tred={}\tblue={}\thash={:016x}\trecording={}",
            s.seed,
            s.ticks,
            s.red_score,
            s.blue_score,
            s.final_state_hash,
            s.recording.as_deref().map_or("-".into(), |p| p.display().to_string())
        )?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitCloneArgs {
    /// Trajectory files to learn from.
    #[arg(required = true)]
    pub trajectories: Vec<PathBuf>,
    /// Tanks whose decisions are imitated; defaults to every external tank.
    #[arg(long, value_delimiter = ',')]
    pub tanks: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn fit_clone(args: &FitCloneArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be >= 1".into()));
    }
    let tanks: Vec<TankId> = args.tanks.iter().copied().map(TankId).collect();
    let mut demos = Vec::new();
    for path in &args.trajectories {
        let traj = load_trajectory(path)?;
        demos.extend(demonstrations(&traj, (!tanks.is_empty()).then_some(&tanks[..]))?);
    }
    let pairs: usize = demos.iter().map(Vec::len).sum();
    let model = fit_knn_clone(&demos, args.k).map_err(|e| CliError::Usage(e.to_string()))?;
    model.save(&args.out).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(
        out,
        "model={}\tk={}\tpairs={pairs}\textractor={}",
        args.out.display(),
        model.k(),
        model.extractor()
    )?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub episodes: u32,
    /// Output file; episode N > 0 goes to <stem>-N.<ext>.
    #[arg(long)]
    pub out: PathBuf,
    /// Embed observations so replays also check the rasters.
    #[arg(long)]
    pub embed_observations: bool,
}

/// File name for episode `n` of a recording series.
pub fn series_path(base: &Path, n: u32) -> PathBuf {
    if n == 0 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("episode");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-{n}.{ext}"),
        None => format!("{stem}-{n}"),
    };
    base.with_file_name(name)
}

pub fn record(args: &RecordArgs, out: &mut dyn Write) -> Result<Vec<EpisodeReport>, CliError> {
    let cfg = args.config.build()?;
    make_env(&cfg)?;
    let mut reports = Vec::new();
    for (i, seed) in episode_seeds(&cfg, args.episodes) {
        let path = series_path(&args.out, i);
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut env = make_env(&cfg)?;
        env.set_observe(args.embed_observations);
        let (mut rec, _) = EpisodeRecorder::start(env, seed, BufWriter::new(file), args.embed_observations)?;
        let mut driver = ExternalDriver::new(&cfg, seed);
        while !rec.env().is_done() {
            let actions = driver.actions(rec.env());
            rec.step(&actions)?;
        }
        let (env, w) = rec.finish()?;
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let report = EpisodeReport::from_env(i, &env);
        writeln!(out, "{report}\tfile={}", path.display())?;
        reports.push(report);
    }
    Ok(reports)
}

fn load_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    Trajectory::load(path).map_err(|e| match e {
        TrajError::Io(e) => CliError::Io(format!("{}: {e}", path.display())),
        other => CliError::Protocol(format!("{}: {other}", path.display())),
    })
}

/// Parse `argv` and execute, writing report lines to `out`. Returns the exit code.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            if !matches!(e, CliError::Diverged) {
                let _ = writeln!(err, "error: {e}");
            }
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(args) => {
            for r in run(args)? {
                writeln!(out, "{r}")?;
            }
        }
        Command::Bench(args) => writeln!(out, "{}", bench(args)?)?,
        Command::Serve(args) => serve(args, out)?,
        Command::Replay(args) => {
            let traj = load_trajectory(&args.file)?;
            let report = tanksworld::replay(&traj)?;
            writeln!(out, "{report}")?;
            if !report.identical() {
                return Err(CliError::Diverged);
            }
        }
        Command::FitClone(args) => fit_clone(args, out)?,
        Command::Record(args) => {
            record(args, out)?;
        }
    }
    Ok(())
}
