//! Episode orchestration.
//!
//! [`Env`] owns one episode at a time: it spawns the world, drives scripted,
//! cloned and neutral tanks from their own policies, applies the external
//! actions it is given, tallies rewards and renders observations for the
//! externally controlled tanks.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ControlSpec, EnvConfig, ScriptedKind, TankId, Team};
use crate::knn::{CloneModel, KnnClone};
use crate::policy::{
    degrade_skill, Aggressive, NeutralDriver, Patrol, Policy, PolicyError, PolicyInput, RandomPolicy,
};
use crate::raster::{Observation, Scene};
use crate::rng::{self, SimRng, Stream};
use crate::scoring::{accumulate, scalarize, team_score, RewardComponents};
use crate::sensing::{all_visibility, SensingParams, VisibilitySet};
use crate::world::{spawn_world, step_world_in_place, Action, KillEvent, WorldError, WorldState};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    World(WorldError),
    #[error("incomplete action map: no action for alive tank {0}")]
    IncompleteActions(TankId),
    #[error("episode finished")]
    EpisodeFinished,
    #[error("env not reset")]
    NotReset,
    #[error("policy: {0}")]
    Policy(#[from] PolicyError),
}

impl From<WorldError> for EnvError {
    fn from(e: WorldError) -> Self {
        match e {
            WorldError::IncompleteActions(id) => EnvError::IncompleteActions(id),
            other => EnvError::World(other),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    TeamEliminated(Team),
    MaxSteps,
}

impl Status {
    pub fn is_done(self) -> bool {
        self != Status::Running
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Running => f.write_str("running"),
            Status::MaxSteps => f.write_str("max_steps"),
            Status::TeamEliminated(t) => write!(f, "eliminated:{t}"),
        }
    }
}

/// Elimination is checked before the step limit; red is checked before blue.
/// Neutral losses never end an episode.
pub fn is_terminal(state: &WorldState, tick: u64, config: &EnvConfig) -> Status {
    for team in [Team::Red, Team::Blue] {
        if state.alive_count(team) == 0 {
            return Status::TeamEliminated(team);
        }
    }
    if tick >= config.max_steps {
        Status::MaxSteps
    } else {
        Status::Running
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TeamScores {
    pub red: f64,
    pub blue: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AliveCounts {
    pub red: usize,
    pub blue: usize,
    pub neutral: usize,
}

/// Diagnostics attached to every reset and step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub tick: u64,
    pub alive: AliveCounts,
    pub team_scores: TeamScores,
    pub status: Status,
    /// Kills during this step.
    pub events: Vec<KillEvent>,
    /// Actions applied to every alive tank this step, after sanitizing.
    pub actions: BTreeMap<TankId, Action>,
    /// Component deltas of every tank touched by this step's events.
    pub deltas: BTreeMap<TankId, RewardComponents>,
}

/// Result for one externally controlled tank.
#[derive(Clone, Debug, PartialEq)]
pub struct TankStep {
    /// `None` if the tank died during this step, or when rendering is off.
    pub observation: Option<Observation>,
    pub reward: RewardComponents,
    pub scalar_reward: f64,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// One entry per external tank that was alive when the step began.
    pub tanks: BTreeMap<TankId, TankStep>,
    pub done: bool,
    pub info: StepInfo,
}

enum Controller {
    External,
    Policy(Box<dyn Policy>, Box<SimRng>),
}

struct Episode {
    seed: u64,
    state: WorldState,
    controllers: Vec<Controller>,
    neutral_rng: SimRng,
    cumulative: BTreeMap<TankId, RewardComponents>,
    events: Vec<KillEvent>,
    status: Status,
}

pub struct Env {
    config: EnvConfig,
    sensing: SensingParams,
    models: HashMap<String, Arc<CloneModel>>,
    observe: bool,
    blank: Observation,
    episode: Option<Episode>,
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Env")
            .field("tick", &self.episode.as_ref().map(|e| e.state.tick))
            .field("observe", &self.observe)
            .finish()
    }
}

impl Env {
    /// Validate `config` and load any clone models it references from disk.
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        Self::with_models(config, HashMap::new())
    }

    /// Like [`Env::new`], resolving `clone:<name>` controls from `models`
    /// before falling back to loading `<name>` as a file path.
    pub fn with_models(
        config: EnvConfig,
        mut models: HashMap<String, Arc<CloneModel>>,
    ) -> Result<Self, EnvError> {
        config.validate()?;
        for spec in config.control_map().values() {
            if let ControlSpec::Clone { model, .. } = spec {
                if !models.contains_key(model) {
                    let loaded = CloneModel::load(Path::new(model))?;
                    models.insert(model.clone(), Arc::new(loaded));
                }
            }
        }
        Ok(Self {
            sensing: SensingParams::from_flags(config.comm_range, &config.flags),
            config,
            models,
            observe: true,
            blank: Observation::zeros(),
            episode: None,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// Toggle observation rendering for external tanks.
    pub fn set_observe(&mut self, observe: bool) {
        self.observe = observe;
    }

    pub fn state(&self) -> Option<&WorldState> {
        self.episode.as_ref().map(|e| &e.state)
    }

    pub fn seed(&self) -> Option<u64> {
        self.episode.as_ref().map(|e| e.seed)
    }

    pub fn status(&self) -> Option<Status> {
        self.episode.as_ref().map(|e| e.status)
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.status.is_done())
    }

    /// Episode-cumulative components for every tank.
    pub fn cumulative(&self) -> Option<&BTreeMap<TankId, RewardComponents>> {
        self.episode.as_ref().map(|e| &e.cumulative)
    }

    pub fn event_log(&self) -> &[KillEvent] {
        self.episode.as_ref().map(|e| e.events.as_slice()).unwrap_or(&[])
    }

    pub fn external_tanks(&self) -> Vec<TankId> {
        self.config.external_tanks()
    }

    pub fn sensing(&self) -> &SensingParams {
        &self.sensing
    }

    pub fn team_scores(&self) -> TeamScores {
        let Some(ep) = &self.episode else {
            return TeamScores::default();
        };
        let include = self.config.flags.team_includes_ally_kills;
        let team_of = |id| self.config.team_of(id);
        TeamScores {
            red: team_score(&ep.cumulative, team_of, Team::Red, include),
            blue: team_score(&ep.cumulative, team_of, Team::Blue, include),
        }
    }

    fn build_policy(&self, spec: &ControlSpec) -> Result<Box<dyn Policy>, EnvError> {
        let phys = &self.config.physics;
        let (base, skill): (Box<dyn Policy>, f64) = match spec {
            ControlSpec::External => unreachable!("external tanks have no policy"),
            ControlSpec::Scripted { kind, skill } => {
                let p: Box<dyn Policy> = match kind {
                    ScriptedKind::Random => Box::new(RandomPolicy),
                    ScriptedKind::Patrol => {
                        Box::new(Patrol::new(phys.projectile_range(), phys.arena_side))
                    }
                    ScriptedKind::Aggressive => {
                        Box::new(Aggressive::new(phys.projectile_range(), phys.arena_side))
                    }
                };
                (p, *skill)
            }
            ControlSpec::Clone { model, skill } => {
                let m = self.models.get(model).cloned().ok_or_else(|| {
                    PolicyError::Format(format!("clone model {model:?} not loaded"))
                })?;
                (Box::new(KnnClone::new(m)), *skill)
            }
        };
        if skill == 1.0 {
            Ok(base)
        } else {
            Ok(Box::new(degrade_skill(base, skill)?))
        }
    }

    /// Start a new episode. Returns the initial observation of every
    /// external tank (empty when rendering is off).
    pub fn reset(&mut self, seed: u64) -> Result<(BTreeMap<TankId, Observation>, StepInfo), EnvError> {
        let state = spawn_world(&self.config, seed)?;
        let mut controllers = Vec::with_capacity(state.tanks.len());
        for t in &state.tanks {
            let c = match self.config.control_of(t.id) {
                // Neutrals draw from the shared `neutral_rng`; their own stream stays unused.
                None => Controller::Policy(Box::new(NeutralDriver::default()), Box::new(rng::stream(seed, Stream::NeutralDriver))),
                Some(ControlSpec::External) => Controller::External,
                Some(spec) => Controller::Policy(self.build_policy(spec)?, Box::new(rng::stream(seed, Stream::Policy(t.id)))),
            };
            controllers.push(c);
        }
        let cumulative = state.tanks.iter().map(|t| (t.id, RewardComponents::default())).collect();
        let status = is_terminal(&state, 0, &self.config);
        self.episode = Some(Episode {
            seed,
            state,
            controllers,
            neutral_rng: rng::stream(seed, Stream::NeutralDriver),
            cumulative,
            events: Vec::new(),
            status,
        });
        let ep = self.episode.as_ref().expect("just set");
        let mut observations = BTreeMap::new();
        if self.observe {
            let vis = all_visibility(&ep.state, &self.sensing);
            for id in self.external_tanks() {
                if let Some(v) = &vis[id.index()] {
                    observations.insert(id, self.render(&ep.state, id, v));
                }
            }
        }
        Ok((observations, self.info(Vec::new(), BTreeMap::new(), BTreeMap::new())))
    }

    fn render(&self, state: &WorldState, id: TankId, vis: &VisibilitySet) -> Observation {
        Scene::from_world(state, id, vis, self.config.physics.tank_radius)
            .expect("alive combatant")
            .render()
    }

    /// Render the current observation of any alive combatant.
    pub fn observe_tank(&self, id: TankId) -> Option<Observation> {
        let ep = self.episode.as_ref()?;
        let t = ep.state.tank(id)?;
        if !t.alive || !t.team.is_combatant() {
            return None;
        }
        let vis = crate::sensing::visibility_sets(&ep.state, id, &self.sensing).ok()?;
        Some(self.render(&ep.state, id, &vis))
    }

    pub fn visibility(&self, id: TankId) -> Option<VisibilitySet> {
        let ep = self.episode.as_ref()?;
        crate::sensing::visibility_sets(&ep.state, id, &self.sensing).ok()
    }

    fn info(
        &self,
        events: Vec<KillEvent>,
        actions: BTreeMap<TankId, Action>,
        deltas: BTreeMap<TankId, RewardComponents>,
    ) -> StepInfo {
        let ep = self.episode.as_ref().expect("episode");
        StepInfo {
            tick: ep.state.tick,
            alive: AliveCounts {
                red: ep.state.alive_count(Team::Red),
                blue: ep.state.alive_count(Team::Blue),
                neutral: ep.state.alive_count(Team::Neutral),
            },
            team_scores: self.team_scores(),
            status: ep.status,
            events,
            actions,
            deltas,
        }
    }

    /// Advance one tick with actions for the external tanks; every other
    /// tank is driven by its policy. Actions for dead or non-external tanks
    /// are ignored. On error nothing changes.
    pub fn step(&mut self, external: &BTreeMap<TankId, Action>) -> Result<StepResult, EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotReset)?;
        if ep.status.is_done() {
            return Err(EnvError::EpisodeFinished);
        }
        for id in self.config.external_tanks() {
            if ep.state.tanks[id.index()].alive && !external.contains_key(&id) {
                return Err(EnvError::IncompleteActions(id));
            }
        }
        let actions = self.gather_actions(external);
        self.advance(actions)
    }

    /// Advance one tick applying `actions` verbatim to every tank, bypassing
    /// all policies. Used to replay recorded episodes.
    pub fn step_with_actions(&mut self, actions: &BTreeMap<TankId, Action>) -> Result<StepResult, EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotReset)?;
        if ep.status.is_done() {
            return Err(EnvError::EpisodeFinished);
        }
        if let Some(t) = ep
            .state
            .tanks
            .iter()
            .find(|t| t.alive && t.team.is_combatant() && !actions.contains_key(&t.id))
        {
            return Err(EnvError::IncompleteActions(t.id));
        }
        let applied = ep
            .state
            .tanks
            .iter()
            .filter(|t| t.alive)
            .map(|t| (t.id, actions.get(&t.id).copied().unwrap_or(Action::ZERO).sanitized()))
            .collect();
        self.advance(applied)
    }

    fn gather_actions(&mut self, external: &BTreeMap<TankId, Action>) -> BTreeMap<TankId, Action> {
        let ep = self.episode.as_mut().expect("episode");
        let needs_vis = ep
            .controllers
            .iter()
            .zip(&ep.state.tanks)
            .any(|(c, t)| t.alive && matches!(c, Controller::Policy(p, _) if p.observes()));
        let vis = if needs_vis {
            all_visibility(&ep.state, &self.sensing)
        } else {
            Vec::new()
        };
        let mut actions = BTreeMap::new();
        let mut scratch = Observation::zeros();
        for (ctrl, tank) in ep.controllers.iter_mut().zip(&ep.state.tanks) {
            if !tank.alive {
                continue;
            }
            let action = match ctrl {
                Controller::External => external[&tank.id].sanitized(),
                Controller::Policy(policy, own_rng) => {
                    let obs = if policy.observes() {
                        let v = vis[tank.id.index()].as_ref().expect("alive combatant");
                        Scene::from_world(&ep.state, tank.id, v, self.config.physics.tank_radius)
                            .expect("alive combatant")
                            .render_into(&mut scratch, [0.0, 0.0]);
                        &scratch
                    } else {
                        &self.blank
                    };
                    let input = PolicyInput {
                        obs,
                        pose: tank.pose,
                        tick: ep.state.tick,
                    };
                    let rng = if tank.team.is_combatant() {
                        own_rng
                    } else {
                        &mut ep.neutral_rng
                    };
                    policy.act(&input, rng).sanitized()
                }
            };
            actions.insert(tank.id, action);
        }
        actions
    }

    fn advance(&mut self, actions: BTreeMap<TankId, Action>) -> Result<StepResult, EnvError> {
        let external = self.config.external_tanks();
        let weights = self.config.rewards;
        let ep = self.episode.as_mut().expect("episode");
        let alive_before: Vec<TankId> = external
            .iter()
            .copied()
            .filter(|id| ep.state.tanks[id.index()].alive)
            .collect();
        let events = step_world_in_place(&mut ep.state, &actions, &self.config.physics)?;
        let deltas = accumulate(&events);
        for (id, d) in &deltas {
            *ep.cumulative.entry(*id).or_default() += *d;
        }
        ep.events.extend_from_slice(&events);
        ep.status = is_terminal(&ep.state, ep.state.tick, &self.config);

        let ep = self.episode.as_ref().expect("episode");
        let vis = if self.observe {
            all_visibility(&ep.state, &self.sensing)
        } else {
            Vec::new()
        };
        let mut tanks = BTreeMap::new();
        for id in alive_before {
            let alive = ep.state.tanks[id.index()].alive;
            let reward = deltas.get(&id).copied().unwrap_or_default();
            let observation = match vis.get(id.index()) {
                Some(Some(v)) if alive => Some(self.render(&ep.state, id, v)),
                _ => None,
            };
            tanks.insert(
                id,
                TankStep {
                    observation,
                    reward,
                    scalar_reward: scalarize(&reward, &weights),
                    alive,
                },
            );
        }
        let done = ep.status.is_done();
        Ok(StepResult {
            tanks,
            done,
            info: self.info(events, actions, deltas),
        })
    }
}

/// Several independent environments stepped in parallel.
pub struct VecEnv {
    envs: Vec<Env>,
}

impl VecEnv {
    pub fn new(envs: Vec<Env>) -> Self {
        Self { envs }
    }

    pub fn from_config(config: &EnvConfig, count: usize) -> Result<Self, EnvError> {
        let envs = (0..count)
            .map(|_| Env::new(config.clone()))
            .collect::<Result<_, _>>()?;
        Ok(Self { envs })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[Env] {
        &self.envs
    }

    pub fn envs_mut(&mut self) -> &mut [Env] {
        &mut self.envs
    }

    #[allow(clippy::type_complexity)]
    pub fn reset(
        &mut self,
        seeds: &[u64],
    ) -> Vec<Result<(BTreeMap<TankId, Observation>, StepInfo), EnvError>> {
        assert_eq!(seeds.len(), self.envs.len(), "one seed per env");
        self.envs
            .par_iter_mut()
            .zip(seeds.par_iter())
            .map(|(env, seed)| env.reset(*seed))
            .collect()
    }

    pub fn step(&mut self, actions: &[BTreeMap<TankId, Action>]) -> Vec<Result<StepResult, EnvError>> {
        assert_eq!(actions.len(), self.envs.len(), "one action map per env");
        self.envs
            .par_iter_mut()
            .zip(actions.par_iter())
            .map(|(env, a)| env.step(a))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_map(ids: &[TankId]) -> BTreeMap<TankId, Action> {
        ids.iter().map(|id| (*id, Action::ZERO)).collect()
    }

    #[test]
    fn reset_observes_external_team() {
        let mut env = Env::new(EnvConfig::default()).unwrap();
        let (obs, info) = env.reset(42).unwrap();
        assert_eq!(obs.len(), 5);
        assert!(obs.keys().all(|id| id.0 < 5));
        assert_eq!(info.tick, 0);
        assert_eq!(info.alive, AliveCounts { red: 5, blue: 5, neutral: 2 });

        let mut again = Env::new(EnvConfig::default()).unwrap();
        assert_eq!(again.reset(42).unwrap().0, obs);
    }

    #[test]
    fn zero_team_rejected() {
        let cfg = EnvConfig {
            team_size: 0,
            ..EnvConfig::default()
        };
        assert!(matches!(Env::new(cfg), Err(EnvError::Config(_))));
    }

    #[test]
    fn step_before_reset() {
        let mut env = Env::new(EnvConfig::default()).unwrap();
        assert!(matches!(env.step(&BTreeMap::new()), Err(EnvError::NotReset)));
    }

    #[test]
    fn missing_action_leaves_state() {
        let mut env = Env::new(EnvConfig::default()).unwrap();
        env.reset(1).unwrap();
        let before = env.state().unwrap().clone();
        let mut actions = zero_map(&env.external_tanks());
        actions.remove(&TankId(2));
        assert!(matches!(env.step(&actions), Err(EnvError::IncompleteActions(TankId(2)))));
        assert_eq!(env.state().unwrap(), &before);
    }

    #[test]
    fn quiet_step_has_zero_rewards() {
        let cfg = EnvConfig {
            red: ControlSpec::External,
            blue: ControlSpec::External,
            neutral_count: 0,
            ..EnvConfig::default()
        };
        let mut env = Env::new(cfg).unwrap();
        env.reset(3).unwrap();
        let r = env.step(&zero_map(&env.external_tanks())).unwrap();
        assert_eq!(r.tanks.len(), 10);
        assert!(r.tanks.values().all(|t| t.reward.is_zero() && t.scalar_reward == 0.0));
        assert!(r.tanks.values().all(|t| t.observation.is_some()));
        assert!(!r.done);
    }

    #[test]
    fn max_steps_ends_episode() {
        let cfg = EnvConfig {
            max_steps: 3,
            ..EnvConfig::default()
        };
        let mut env = Env::new(cfg).unwrap();
        env.reset(5).unwrap();
        let ids = env.external_tanks();
        let mut last = None;
        for _ in 0..3 {
            last = Some(env.step(&zero_map(&ids)).unwrap());
        }
        let last = last.unwrap();
        assert!(last.done);
        assert!(matches!(env.step(&zero_map(&ids)), Err(EnvError::EpisodeFinished)));
        assert!(matches!(last.info.status, Status::MaxSteps | Status::TeamEliminated(_)));
    }

    #[test]
    fn terminal_status_rules() {
        let cfg = EnvConfig::default();
        let mut w = spawn_world(&cfg, 0).unwrap();
        assert_eq!(is_terminal(&w, 0, &cfg), Status::Running);
        assert_eq!(is_terminal(&w, cfg.max_steps, &cfg), Status::MaxSteps);
        for t in w.tanks.iter_mut().filter(|t| t.team == Team::Neutral) {
            t.alive = false;
        }
        assert_eq!(is_terminal(&w, 10, &cfg), Status::Running);
        for t in w.tanks.iter_mut().filter(|t| t.team == Team::Blue) {
            t.alive = false;
        }
        assert_eq!(is_terminal(&w, 10, &cfg), Status::TeamEliminated(Team::Blue));
    }

    #[test]
    fn vec_env_matches_serial() {
        let cfg = EnvConfig {
            red: ControlSpec::scripted(ScriptedKind::Random),
            blue: ControlSpec::scripted(ScriptedKind::Aggressive),
            max_steps: 50,
            ..EnvConfig::default()
        };
        let mut venv = VecEnv::from_config(&cfg, 3).unwrap();
        venv.reset(&[1, 2, 3]);
        let empty = vec![BTreeMap::new(); 3];
        for _ in 0..50 {
            venv.step(&empty);
        }
        for (i, seed) in [1u64, 2, 3].iter().enumerate() {
            let mut env = Env::new(cfg.clone()).unwrap();
            env.reset(*seed).unwrap();
            while !env.is_done() {
                env.step(&BTreeMap::new()).unwrap();
            }
            assert_eq!(env.state(), venv.envs()[i].state());
        }
    }
}
