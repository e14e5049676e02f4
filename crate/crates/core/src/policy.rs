//! Built-in controllers.
//!
//! Every policy maps one tank's observation (plus its own pose, which a
//! driver always knows) to an [`Action`]. Randomness comes only from the
//! stream handed in by the caller, so a policy replays exactly given the
//! same seed and inputs.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use thiserror::Error;

use crate::raster::{Channel, Observation, GRID};
use crate::rng::SimRng;
use crate::world::{Action, Pose};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("skill must lie in [0,1], got {0}")]
    InvalidSkill(f64),
    #[error("no demonstrations")]
    NoDemonstrations,
    #[error("k must be >= 1")]
    InvalidK,
    #[error("inconsistent feature lengths: expected {expected}, got {got}")]
    FeatureLength { expected: usize, got: usize },
    #[error("clone model: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a policy sees on one tick.
#[derive(Clone, Copy, Debug)]
pub struct PolicyInput<'a> {
    pub obs: &'a Observation,
    pub pose: Pose,
    pub tick: u64,
}

pub trait Policy: Send {
    fn act(&mut self, input: &PolicyInput<'_>, rng: &mut SimRng) -> Action;

    /// Whether `act` reads `input.obs`. Callers may pass a blank raster otherwise.
    fn observes(&self) -> bool {
        true
    }

    fn name(&self) -> String;
}

/// Uniform noise on every axis.
#[derive(Clone, Debug, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&mut self, _input: &PolicyInput<'_>, rng: &mut SimRng) -> Action {
        Action::new(
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        )
    }

    fn observes(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "random".into()
    }
}

/// Wanders: fresh uniform throttle and steer every `period` ticks, never fires.
#[derive(Clone, Debug)]
pub struct NeutralDriver {
    period: u32,
    elapsed: u32,
    current: Action,
}

impl Default for NeutralDriver {
    fn default() -> Self {
        Self::new(20)
    }
}

impl NeutralDriver {
    pub fn new(period: u32) -> Self {
        Self {
            period: period.max(1),
            elapsed: 0,
            current: Action::new(0.0, 0.0, -1.0),
        }
    }
}

impl Policy for NeutralDriver {
    fn act(&mut self, _input: &PolicyInput<'_>, rng: &mut SimRng) -> Action {
        if self.elapsed.is_multiple_of(self.period) {
            self.current = Action::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), -1.0);
        }
        self.elapsed = self.elapsed.wrapping_add(1);
        self.current
    }

    fn observes(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "neutral".into()
    }
}

/// A threat located in the ego frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    /// Estimated center of the nearest visible enemy, ego frame.
    pub position: [f64; 2],
    pub distance: f64,
    /// Counter-clockwise angle from the ego heading, in `(-π, π]`.
    pub bearing: f64,
}

/// Locate the nearest visible enemy from chassis pixels in the threat channel.
///
/// The nearest lit pixel picks the enemy; the centroid of chassis pixels
/// within 4.5 units of it estimates that enemy's center.
pub fn nearest_threat(obs: &Observation) -> Option<Target> {
    let chan = obs.channel(Channel::Threats as usize);
    let mut best: Option<([f64; 2], f64)> = None;
    for (i, v) in chan.iter().enumerate() {
        if *v < 1.0 {
            continue;
        }
        let p = Observation::pixel_center(i / GRID, i % GRID);
        let d2 = p[0] * p[0] + p[1] * p[1];
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((p, d2));
        }
    }
    let (anchor, _) = best?;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for (i, v) in chan.iter().enumerate() {
        if *v < 1.0 {
            continue;
        }
        let p = Observation::pixel_center(i / GRID, i % GRID);
        if (p[0] - anchor[0]).hypot(p[1] - anchor[1]) <= 4.5 {
            sx += p[0];
            sy += p[1];
            n += 1.0;
        }
    }
    let position = [sx / n, sy / n];
    Some(Target {
        position,
        distance: position[0].hypot(position[1]),
        bearing: (-position[0]).atan2(position[1]),
    })
}

fn bearing_to(pose: &Pose, goal: [f64; 2]) -> f64 {
    let ego = crate::raster::world_to_ego(goal, pose);
    (-ego[0]).atan2(ego[1])
}

fn steer_toward(bearing: f64) -> f64 {
    (2.0 * bearing).clamp(-1.0, 1.0)
}

/// Fire decision shared by the scripted shooters.
fn trigger(target: &Target, fire_range: f64) -> f64 {
    if target.distance <= fire_range && target.bearing.abs() <= 0.1 {
        1.0
    } else {
        -1.0
    }
}

/// Charges the nearest visible enemy and shoots when lined up; heads for the
/// arena center when nothing is visible.
#[derive(Clone, Debug)]
pub struct Aggressive {
    /// Fire only within this distance (80% of shell range).
    pub fire_range: f64,
    pub arena_side: f64,
}

impl Aggressive {
    pub fn new(projectile_range: f64, arena_side: f64) -> Self {
        Self {
            fire_range: 0.8 * projectile_range,
            arena_side,
        }
    }
}

impl Policy for Aggressive {
    fn act(&mut self, input: &PolicyInput<'_>, _rng: &mut SimRng) -> Action {
        match nearest_threat(input.obs) {
            Some(target) => {
                let throttle = if target.bearing.abs() < FRAC_PI_4 { 1.0 } else { 0.3 };
                Action::new(throttle, steer_toward(target.bearing), trigger(&target, self.fire_range))
            }
            None => {
                let mid = self.arena_side / 2.0;
                let b = bearing_to(&input.pose, [mid, mid]);
                Action::new(0.5, steer_toward(b), -1.0)
            }
        }
    }

    fn name(&self) -> String {
        "aggressive".into()
    }
}

/// Loops over the four quadrant centers; stops to aim and shoot whenever a
/// threat is visible.
#[derive(Clone, Debug)]
pub struct Patrol {
    pub fire_range: f64,
    waypoints: [[f64; 2]; 4],
    next: usize,
}

impl Patrol {
    pub fn new(projectile_range: f64, arena_side: f64) -> Self {
        let (a, b) = (arena_side / 4.0, 3.0 * arena_side / 4.0);
        Self {
            fire_range: 0.8 * projectile_range,
            waypoints: [[a, a], [b, a], [b, b], [a, b]],
            next: 0,
        }
    }

    pub fn current_waypoint(&self) -> [f64; 2] {
        self.waypoints[self.next]
    }
}

impl Policy for Patrol {
    fn act(&mut self, input: &PolicyInput<'_>, _rng: &mut SimRng) -> Action {
        if let Some(target) = nearest_threat(input.obs) {
            return Action::new(0.0, steer_toward(target.bearing), trigger(&target, self.fire_range));
        }
        let wp = self.waypoints[self.next];
        if (input.pose.x - wp[0]).hypot(input.pose.y - wp[1]) < 5.0 {
            self.next = (self.next + 1) % self.waypoints.len();
        }
        let b = bearing_to(&input.pose, self.waypoints[self.next]);
        let throttle = if b.abs() < FRAC_PI_4 { 1.0 } else { 0.3 };
        Action::new(throttle, steer_toward(b), -1.0)
    }

    fn name(&self) -> String {
        "patrol".into()
    }
}

/// Variable-skill teammate: blends the inner action with uniform noise and
/// answers late.
///
/// Output is `clamp(skill * inner + (1 - skill) * noise)`, where the inner
/// policy sees the observation from `round((1 - skill) * 5)` ticks ago. The
/// delay buffer starts filled with the first observation.
pub struct SkillWrapped {
    inner: Box<dyn Policy>,
    skill: f64,
    delay: usize,
    history: VecDeque<(Observation, Pose, u64)>,
}

impl std::fmt::Debug for SkillWrapped {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkillWrapped")
            .field("inner", &self.inner.name())
            .field("skill", &self.skill)
            .field("delay", &self.delay)
            .finish()
    }
}

pub fn degrade_skill(inner: Box<dyn Policy>, skill: f64) -> Result<SkillWrapped, PolicyError> {
    if !(0.0..=1.0).contains(&skill) {
        return Err(PolicyError::InvalidSkill(skill));
    }
    Ok(SkillWrapped {
        inner,
        skill,
        delay: ((1.0 - skill) * 5.0).round() as usize,
        history: VecDeque::new(),
    })
}

impl SkillWrapped {
    pub fn skill(&self) -> f64 {
        self.skill
    }

    pub fn delay(&self) -> usize {
        self.delay
    }
}

impl Policy for SkillWrapped {
    fn act(&mut self, input: &PolicyInput<'_>, rng: &mut SimRng) -> Action {
        let inner = if self.delay == 0 {
            self.inner.act(input, rng)
        } else {
            let frame = (input.obs.clone(), input.pose, input.tick);
            if self.history.is_empty() {
                self.history.extend(std::iter::repeat_n(frame, self.delay + 1));
            } else {
                self.history.push_back(frame);
                self.history.pop_front();
            }
            let (obs, pose, tick) = &self.history[0];
            let delayed = PolicyInput {
                obs,
                pose: *pose,
                tick: *tick,
            };
            self.inner.act(&delayed, rng)
        };
        if self.skill == 1.0 {
            return inner;
        }
        let s = self.skill;
        let mut blend = |v: f64| s * v + (1.0 - s) * rng.gen_range(-1.0..=1.0);
        Action::new(blend(inner.throttle), blend(inner.steer), blend(inner.fire))
    }

    fn observes(&self) -> bool {
        self.inner.observes()
    }

    fn name(&self) -> String {
        format!("{}@{}", self.inner.name(), self.skill)
    }
}
