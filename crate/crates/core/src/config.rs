//! Scenario configuration.
//!
//! An [`EnvConfig`] round-trips through TOML with every field named exactly
//! as in the struct; unknown keys are rejected at load time.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Red,
    Blue,
    Neutral,
}

impl Team {
    /// The opposing combatant team. Neutrals have no opponent.
    pub fn opponent(self) -> Option<Team> {
        match self {
            Team::Red => Some(Team::Blue),
            Team::Blue => Some(Team::Red),
            Team::Neutral => None,
        }
    }

    pub fn is_combatant(self) -> bool {
        self != Team::Neutral
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Team::Red => "red",
            Team::Blue => "blue",
            Team::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Entity id of a tank. Red tanks occupy `0..N`, blue `N..2N`, neutrals follow.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct TankId(pub u32);

impl TankId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TankId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Physical constants of the arena. Lengths in world units, times in seconds
/// or ticks as named.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub arena_side: f64,
    pub dt: f64,
    pub max_speed: f64,
    pub max_turn_rate: f64,
    pub tank_radius: f64,
    pub projectile_speed: f64,
    pub projectile_lifetime: u32,
    pub projectile_radius: f64,
    pub reload_interval: u32,
    pub obstacle_radius_min: f64,
    pub obstacle_radius_max: f64,
    /// Hits needed to destroy a tank.
    pub health: u32,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            arena_side: 100.0,
            dt: 0.1,
            max_speed: 5.0,
            max_turn_rate: std::f64::consts::FRAC_PI_2,
            tank_radius: 1.5,
            projectile_speed: 20.0,
            projectile_lifetime: 25,
            projectile_radius: 0.5,
            reload_interval: 10,
            obstacle_radius_min: 1.0,
            obstacle_radius_max: 4.0,
            health: 1,
        }
    }
}

impl PhysicsConfig {
    /// Maximum distance a projectile covers before it expires.
    pub fn projectile_range(&self) -> f64 {
        self.projectile_speed * self.dt * self.projectile_lifetime as f64
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("arena_side", self.arena_side),
            ("dt", self.dt),
            ("max_speed", self.max_speed),
            ("max_turn_rate", self.max_turn_rate),
            ("tank_radius", self.tank_radius),
            ("projectile_speed", self.projectile_speed),
            ("projectile_radius", self.projectile_radius),
            ("obstacle_radius_min", self.obstacle_radius_min),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("physics.{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.obstacle_radius_max.is_finite()
            && self.obstacle_radius_max >= self.obstacle_radius_min)
        {
            return Err(invalid("physics.obstacle_radius_max must be >= obstacle_radius_min"));
        }
        if 2.0 * self.obstacle_radius_max >= self.arena_side {
            return Err(invalid("physics.obstacle_radius_max does not fit the arena"));
        }
        if self.projectile_lifetime == 0 {
            return Err(invalid("physics.projectile_lifetime must be >= 1"));
        }
        if self.health == 0 {
            return Err(invalid("physics.health must be >= 1"));
        }
        Ok(())
    }
}

/// Weights for collapsing reward components into one scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub enemy: f64,
    pub death: f64,
    pub ally: f64,
    pub neutral: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            enemy: 1.0,
            death: -1.0,
            ally: -1.0,
            neutral: -1.0,
        }
    }
}

impl RewardWeights {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            enemy: self.enemy * factor,
            death: self.death * factor,
            ally: self.ally * factor,
            neutral: self.neutral * factor,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    /// Relay threats over at most one intermediate ally instead of the full
    /// communication component.
    pub two_hop_only: bool,
    /// Neutral tanks are visible to everyone regardless of range.
    pub neutral_always_visible: bool,
    /// Count allied kills in team score aggregates.
    pub team_includes_ally_kills: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScriptedKind {
    Random,
    Patrol,
    Aggressive,
}

impl ScriptedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptedKind::Random => "random",
            ScriptedKind::Patrol => "patrol",
            ScriptedKind::Aggressive => "aggressive",
        }
    }
}

impl FromStr for ScriptedKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(ScriptedKind::Random),
            "patrol" => Ok(ScriptedKind::Patrol),
            "aggressive" => Ok(ScriptedKind::Aggressive),
            other => Err(invalid(format!("unknown scripted policy {other:?}"))),
        }
    }
}

/// Who drives a tank.
///
/// Text form: `external`, `scripted:<kind>[@skill]`, `clone:<model>[@skill]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlSpec {
    External,
    Scripted { kind: ScriptedKind, skill: f64 },
    Clone { model: String, skill: f64 },
}

impl ControlSpec {
    pub fn scripted(kind: ScriptedKind) -> Self {
        ControlSpec::Scripted { kind, skill: 1.0 }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, ControlSpec::External)
    }

    fn skill(&self) -> f64 {
        match self {
            ControlSpec::External => 1.0,
            ControlSpec::Scripted { skill, .. } | ControlSpec::Clone { skill, .. } => *skill,
        }
    }
}

fn split_skill(rest: &str) -> Result<(&str, f64), ConfigError> {
    match rest.rsplit_once('@') {
        Some((name, skill)) => {
            let skill: f64 = skill
                .parse()
                .map_err(|_| invalid(format!("bad skill level {skill:?}")))?;
            Ok((name, skill))
        }
        None => Ok((rest, 1.0)),
    }
}

impl FromStr for ControlSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "external" {
            return Ok(ControlSpec::External);
        }
        let spec = if let Some(rest) = s.strip_prefix("scripted:") {
            let (name, skill) = split_skill(rest)?;
            ControlSpec::Scripted {
                kind: name.parse()?,
                skill,
            }
        } else if let Some(rest) = s.strip_prefix("clone:") {
            let (model, skill) = split_skill(rest)?;
            if model.is_empty() {
                return Err(invalid("clone control needs a model reference"));
            }
            ControlSpec::Clone {
                model: model.to_string(),
                skill,
            }
        } else {
            return Err(invalid(format!("unknown control {s:?}")));
        };
        let skill = spec.skill();
        if !(0.0..=1.0).contains(&skill) {
            return Err(invalid(format!("skill must lie in [0,1], got {skill}")));
        }
        Ok(spec)
    }
}

impl fmt::Display for ControlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, skill) = match self {
            ControlSpec::External => return f.write_str("external"),
            ControlSpec::Scripted { kind, skill } => (format!("scripted:{}", kind.as_str()), *skill),
            ControlSpec::Clone { model, skill } => (format!("clone:{model}"), *skill),
        };
        if skill == 1.0 {
            f.write_str(&head)
        } else {
            write!(f, "{head}@{skill}")
        }
    }
}

impl Serialize for ControlSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ControlSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod overrides {
    use super::*;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<TankId, ControlSpec>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut out = serializer.serialize_map(Some(map.len()))?;
        for (id, spec) in map {
            out.serialize_entry(&id.0.to_string(), spec)?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<TankId, ControlSpec>, D::Error> {
        let raw = BTreeMap::<String, ControlSpec>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|id| (TankId(id), v))
                    .map_err(|_| serde::de::Error::custom(format!("control key {k:?} is not a tank id")))
            })
            .collect()
    }
}

/// All scenario parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub team_size: u32,
    pub neutral_count: u32,
    pub obstacle_density: f64,
    pub comm_range: f64,
    pub max_steps: u64,
    pub seed: u64,
    /// Default controller for every red tank.
    pub red: ControlSpec,
    /// Default controller for every blue tank.
    pub blue: ControlSpec,
    /// Per-tank overrides of the team defaults, keyed by tank id.
    #[serde(with = "overrides")]
    pub control: BTreeMap<TankId, ControlSpec>,
    pub flags: Flags,
    pub physics: PhysicsConfig,
    pub rewards: RewardWeights,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            team_size: 5,
            neutral_count: 2,
            obstacle_density: 0.5,
            comm_range: 30.0,
            max_steps: 1000,
            seed: 0,
            red: ControlSpec::External,
            blue: ControlSpec::scripted(ScriptedKind::Aggressive),
            control: BTreeMap::new(),
            flags: Flags::default(),
            physics: PhysicsConfig::default(),
            rewards: RewardWeights::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.team_size == 0 {
            return Err(invalid("team_size must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.obstacle_density) {
            return Err(invalid(format!(
                "obstacle_density must lie in [0,1], got {}",
                self.obstacle_density
            )));
        }
        if !(self.comm_range.is_finite() && self.comm_range >= 0.0) {
            return Err(invalid("comm_range must be finite and >= 0"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps must be >= 1"));
        }
        let w = &self.rewards;
        if ![w.enemy, w.death, w.ally, w.neutral].iter().all(|v| v.is_finite()) {
            return Err(invalid("reward weights must be finite"));
        }
        self.physics.validate()?;
        let combatants = 2 * self.team_size;
        for id in self.control.keys() {
            if id.0 >= combatants {
                return Err(invalid(format!(
                    "control override for tank {id}, but only tanks 0..{combatants} are controllable"
                )));
            }
        }
        Ok(())
    }

    pub fn total_tanks(&self) -> u32 {
        2 * self.team_size + self.neutral_count
    }

    pub fn team_of(&self, id: TankId) -> Team {
        if id.0 < self.team_size {
            Team::Red
        } else if id.0 < 2 * self.team_size {
            Team::Blue
        } else {
            Team::Neutral
        }
    }

    pub fn team_members(&self, team: Team) -> impl Iterator<Item = TankId> {
        let (lo, hi) = match team {
            Team::Red => (0, self.team_size),
            Team::Blue => (self.team_size, 2 * self.team_size),
            Team::Neutral => (2 * self.team_size, self.total_tanks()),
        };
        (lo..hi).map(TankId)
    }

    /// Controller of tank `id`, or `None` for neutrals.
    pub fn control_of(&self, id: TankId) -> Option<&ControlSpec> {
        match self.team_of(id) {
            Team::Neutral => None,
            team => Some(self.control.get(&id).unwrap_or(match team {
                Team::Red => &self.red,
                _ => &self.blue,
            })),
        }
    }

    /// Effective controller of every combatant tank.
    pub fn control_map(&self) -> BTreeMap<TankId, ControlSpec> {
        (0..2 * self.team_size)
            .map(TankId)
            .map(|id| (id, self.control_of(id).cloned().expect("combatant")))
            .collect()
    }

    pub fn external_tanks(&self) -> Vec<TankId> {
        (0..2 * self.team_size)
            .map(TankId)
            .filter(|id| self.control_of(*id).is_some_and(ControlSpec::is_external))
            .collect()
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: EnvConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
