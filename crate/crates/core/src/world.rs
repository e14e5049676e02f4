//! Ground-truth world state and the deterministic physics step.
//!
//! Coordinates are world units with the origin at the arena's lower-left
//! corner. A heading of 0 faces +y and angles grow counter-clockwise, so the
//! forward unit vector of heading `h` is `(-sin h, cos h)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use thiserror::Error;

use crate::config::{EnvConfig, PhysicsConfig, TankId, Team};
use crate::hash::Fnv64;
use crate::rng::{self, Stream};

const PLACEMENT_ATTEMPTS: u32 = 10_000;
const PLACEMENT_CLEARANCE: f64 = 1.0;
const CONTACT_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("arena overcrowded: could not place {what} after {PLACEMENT_ATTEMPTS} attempts")]
    Overcrowded { what: String },
    #[error("incomplete action map: no action for alive tank {0}")]
    IncompleteActions(TankId),
}

pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn forward(&self) -> [f64; 2] {
        let (s, c) = self.heading.sin_cos();
        [-s, c]
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TankState {
    pub id: TankId,
    pub team: Team,
    pub pose: Pose,
    pub alive: bool,
    pub reload_remaining: u32,
    pub health: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projectile {
    pub shooter_id: TankId,
    pub pose: Pose,
    pub age: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    pub center: Pose,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub tick: u64,
    /// Ordered by ascending id; `tanks[i].id == TankId(i)`.
    pub tanks: Vec<TankState>,
    /// Ordered by spawn time.
    pub projectiles: Vec<Projectile>,
    pub obstacles: Vec<Obstacle>,
    pub arena_side: f64,
}

impl WorldState {
    pub fn tank(&self, id: TankId) -> Option<&TankState> {
        self.tanks.get(id.index())
    }

    pub fn alive_count(&self, team: Team) -> usize {
        self.tanks.iter().filter(|t| t.alive && t.team == team).count()
    }

    /// Fingerprint of every field, bit-exact over floats.
    pub fn state_hash(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_u64(self.tick);
        h.write_f64(self.arena_side);
        h.write_u64(self.tanks.len() as u64);
        for t in &self.tanks {
            h.write_u64(t.id.0 as u64);
            h.write(&[t.team as u8, t.alive as u8]);
            h.write_f64(t.pose.x);
            h.write_f64(t.pose.y);
            h.write_f64(t.pose.heading);
            h.write_u64(t.reload_remaining as u64);
            h.write_u64(t.health as u64);
        }
        h.write_u64(self.projectiles.len() as u64);
        for p in &self.projectiles {
            h.write_u64(p.shooter_id.0 as u64);
            h.write_f64(p.pose.x);
            h.write_f64(p.pose.y);
            h.write_f64(p.pose.heading);
            h.write_u64(p.age as u64);
        }
        h.write_u64(self.obstacles.len() as u64);
        for o in &self.obstacles {
            h.write_f64(o.center.x);
            h.write_f64(o.center.y);
            h.write_f64(o.radius);
        }
        h.finish()
    }
}

/// Three controls in `[-1, 1]`: forward/reverse, turn (positive is
/// counter-clockwise), and fire (shoots when `> 0`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Action {
    pub throttle: f64,
    pub steer: f64,
    pub fire: f64,
}

fn sanitize_component(v: f64) -> f64 {
    if v.is_nan() {
        return 0.0;
    }
    // Actions live on a 1e-6 grid so the six-digit trajectory encoding is lossless.
    let q = (v.clamp(-1.0, 1.0) * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

impl Action {
    pub const ZERO: Action = Action {
        throttle: 0.0,
        steer: 0.0,
        fire: 0.0,
    };

    /// Clamped and quantized action.
    pub fn new(throttle: f64, steer: f64, fire: f64) -> Self {
        Action {
            throttle,
            steer,
            fire,
        }
        .sanitized()
    }

    pub fn sanitized(self) -> Self {
        Action {
            throttle: sanitize_component(self.throttle),
            steer: sanitize_component(self.steer),
            fire: sanitize_component(self.fire),
        }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.throttle, self.steer, self.fire]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KillEvent {
    pub shooter_id: TankId,
    pub victim_id: TankId,
    pub shooter_team: Team,
    pub victim_team: Team,
    /// Tick at the start of the step in which the kill happened.
    pub tick: u64,
}

fn sample_point<R: Rng>(rng: &mut R, x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    (rng.gen_range(x.0..=x.1), rng.gen_range(y.0..=y.1))
}

/// Place obstacles and tanks for a new episode.
///
/// Obstacles go first (`round(density * 20)` discs), then red tanks on the
/// west third, blue on the east third and neutrals in the middle band, each
/// by rejection sampling with at least one unit of clearance to every body
/// already placed.
pub fn spawn_world(config: &EnvConfig, seed: u64) -> Result<WorldState, WorldError> {
    let phys = &config.physics;
    let side = phys.arena_side;
    let mut rng = rng::stream(seed, Stream::Placement);

    let mut bodies: Vec<([f64; 2], f64)> = Vec::new();
    let clear = |bodies: &[([f64; 2], f64)], p: [f64; 2], r: f64| {
        bodies
            .iter()
            .all(|(q, rq)| (p[0] - q[0]).hypot(p[1] - q[1]) >= r + rq + PLACEMENT_CLEARANCE)
    };

    let n_obstacles = (config.obstacle_density * 20.0).round() as usize;
    let mut obstacles = Vec::with_capacity(n_obstacles);
    for i in 0..n_obstacles {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let r = rng.gen_range(phys.obstacle_radius_min..=phys.obstacle_radius_max);
            let (x, y) = sample_point(&mut rng, (r, side - r), (r, side - r));
            if clear(&bodies, [x, y], r) {
                bodies.push(([x, y], r));
                obstacles.push(Obstacle {
                    center: Pose::new(x, y, 0.0),
                    radius: r,
                });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(WorldError::Overcrowded {
                what: format!("obstacle {i}"),
            });
        }
    }

    let tr = phys.tank_radius;
    let third = side / 3.0;
    let mut tanks = Vec::with_capacity(config.total_tanks() as usize);
    for i in 0..config.total_tanks() {
        let id = TankId(i);
        let team = config.team_of(id);
        // Red starts west facing east, blue starts east facing west.
        let (xr, heading) = match team {
            Team::Red => ((tr, (third).max(tr)), 1.5 * std::f64::consts::PI),
            Team::Blue => (((side - third).min(side - tr), side - tr), 0.5 * std::f64::consts::PI),
            Team::Neutral => (((third).max(tr), (side - third).min(side - tr)), f64::NAN),
        };
        let mut placed = None;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let (x, y) = sample_point(&mut rng, xr, (tr, side - tr));
            if clear(&bodies, [x, y], tr) {
                placed = Some((x, y));
                break;
            }
        }
        let (x, y) = placed.ok_or_else(|| WorldError::Overcrowded {
            what: format!("tank {id}"),
        })?;
        let heading = if heading.is_nan() {
            rng.gen_range(0.0..TAU)
        } else {
            heading
        };
        bodies.push(([x, y], tr));
        tanks.push(TankState {
            id,
            team,
            pose: Pose::new(x, y, heading),
            alive: true,
            reload_remaining: 0,
            health: phys.health,
        });
    }

    Ok(WorldState {
        tick: 0,
        tanks,
        projectiles: Vec::new(),
        obstacles,
        arena_side: side,
    })
}

/// Explicit Euler update: the heading turns first, then the tank translates
/// along the new heading.
pub fn integrate_tank(tank: &TankState, action: &Action, phys: &PhysicsConfig) -> TankState {
    let mut next = tank.clone();
    if !tank.alive {
        return next;
    }
    let heading = normalize_angle(tank.pose.heading + action.steer * phys.max_turn_rate * phys.dt);
    let mut pose = Pose::new(tank.pose.x, tank.pose.y, heading);
    let step = action.throttle * phys.max_speed * phys.dt;
    let [fx, fy] = pose.forward();
    pose.x += step * fx;
    pose.y += step * fy;
    next.pose = pose;
    next
}

/// Spawn a shell at the nose if the trigger is pulled (`fire > 0`) and the
/// gun is loaded. Firing restarts the reload timer.
pub fn fire_control(tank: &mut TankState, fire: f64, phys: &PhysicsConfig) -> Option<Projectile> {
    if !tank.alive || fire.is_nan() || fire <= 0.0 || tank.reload_remaining > 0 {
        return None;
    }
    tank.reload_remaining = phys.reload_interval;
    let [fx, fy] = tank.pose.forward();
    Some(Projectile {
        shooter_id: tank.id,
        pose: Pose::new(
            tank.pose.x + fx * phys.tank_radius,
            tank.pose.y + fy * phys.tank_radius,
            tank.pose.heading,
        ),
        age: 0,
    })
}

/// Largest fraction `s` in `[0, 1]` of the move `from -> from + d` that keeps
/// a circle clear of a blocker at `center` with combined radius `reach`.
fn contact_fraction(from: [f64; 2], d: [f64; 2], center: [f64; 2], reach: f64) -> f64 {
    let p = [from[0] - center[0], from[1] - center[1]];
    let a = d[0] * d[0] + d[1] * d[1];
    if a == 0.0 {
        return 1.0;
    }
    let b = 2.0 * (p[0] * d[0] + p[1] * d[1]);
    let c = p[0] * p[0] + p[1] * p[1] - reach * reach;
    if b >= 0.0 {
        // Moving away or tangentially.
        return 1.0;
    }
    if c <= 0.0 {
        // Already touching and moving closer.
        return 0.0;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return 1.0;
    }
    let s = (-b - disc.sqrt()) / (2.0 * a);
    if s >= 1.0 {
        1.0
    } else {
        (s - CONTACT_EPS / a.sqrt()).max(0.0)
    }
}

fn segment_point_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    (a[0] + t * d[0] - p[0]).hypot(a[1] + t * d[1] - p[1])
}

/// Advance the world by one tick. See [`step_world_in_place`].
pub fn step_world(
    state: &WorldState,
    actions: &BTreeMap<TankId, Action>,
    phys: &PhysicsConfig,
) -> Result<(WorldState, Vec<KillEvent>), WorldError> {
    let mut next = state.clone();
    let events = step_world_in_place(&mut next, actions, phys)?;
    Ok((next, events))
}

/// Advance the world by one tick in place.
///
/// Sub-step order: reload timers, kinematics, collision clamping, firing,
/// projectile flight, hit tests. Every alive combatant needs an action;
/// neutrals without one stand still. On error the state is untouched.
pub fn step_world_in_place(
    state: &mut WorldState,
    actions: &BTreeMap<TankId, Action>,
    phys: &PhysicsConfig,
) -> Result<Vec<KillEvent>, WorldError> {
    if let Some(missing) = state
        .tanks
        .iter()
        .find(|t| t.alive && t.team.is_combatant() && !actions.contains_key(&t.id))
    {
        return Err(WorldError::IncompleteActions(missing.id));
    }
    let action_of = |id: TankId| {
        actions
            .get(&id)
            .map(|a| a.sanitized())
            .unwrap_or(Action::ZERO)
    };

    for tank in state.tanks.iter_mut().filter(|t| t.alive) {
        tank.reload_remaining = tank.reload_remaining.saturating_sub(1);
    }

    let tr = phys.tank_radius;
    let side = state.arena_side;
    for i in 0..state.tanks.len() {
        if !state.tanks[i].alive {
            continue;
        }
        let old = state.tanks[i].pose;
        let moved = integrate_tank(&state.tanks[i], &action_of(state.tanks[i].id), phys).pose;
        let target = [moved.x.clamp(tr, side - tr), moved.y.clamp(tr, side - tr)];
        let d = [target[0] - old.x, target[1] - old.y];
        let mut s: f64 = 1.0;
        for o in &state.obstacles {
            s = s.min(contact_fraction(old.position(), d, o.center.position(), tr + o.radius));
        }
        for (j, other) in state.tanks.iter().enumerate() {
            if j != i && other.alive {
                s = s.min(contact_fraction(old.position(), d, other.pose.position(), 2.0 * tr));
            }
        }
        let (x, y) = if s >= 1.0 {
            (target[0], target[1])
        } else {
            (old.x + s * d[0], old.y + s * d[1])
        };
        state.tanks[i].pose = Pose {
            x,
            y,
            heading: moved.heading,
        };
    }

    for tank in state.tanks.iter_mut() {
        let fire = action_of(tank.id).fire;
        if let Some(p) = fire_control(tank, fire, phys) {
            state.projectiles.push(p);
        }
    }

    let tick = state.tick;
    let hit_reach = tr + phys.projectile_radius;
    let step_len = phys.projectile_speed * phys.dt;
    let mut events = Vec::new();
    let projectiles = std::mem::take(&mut state.projectiles);
    let mut surviving = Vec::with_capacity(projectiles.len());
    for mut p in projectiles {
        let from = p.pose.position();
        let [fx, fy] = p.pose.forward();
        p.pose.x += fx * step_len;
        p.pose.y += fy * step_len;
        p.age += 1;
        let to = p.pose.position();

        // Smallest id wins when one shell overlaps several tanks.
        let victim = state.tanks.iter().position(|t| {
            t.alive
                && t.id != p.shooter_id
                && segment_point_distance(from, to, t.pose.position()) <= hit_reach
        });
        if let Some(v) = victim {
            let shooter_team = state.tanks[p.shooter_id.index()].team;
            let target = &mut state.tanks[v];
            target.health = target.health.saturating_sub(1);
            if target.health == 0 {
                target.alive = false;
                events.push(KillEvent {
                    shooter_id: p.shooter_id,
                    victim_id: target.id,
                    shooter_team,
                    victim_team: target.team,
                    tick,
                });
            }
            continue;
        }
        let blocked = state.obstacles.iter().any(|o| {
            segment_point_distance(from, to, o.center.position()) <= o.radius + phys.projectile_radius
        });
        let outside = !(0.0..=side).contains(&to[0]) || !(0.0..=side).contains(&to[1]);
        if blocked || outside || p.age >= phys.projectile_lifetime {
            continue;
        }
        surviving.push(p);
    }
    state.projectiles = surviving;
    state.tick += 1;
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tank(id: u32, team: Team, x: f64, y: f64, heading: f64) -> TankState {
        TankState {
            id: TankId(id),
            team,
            pose: Pose::new(x, y, heading),
            alive: true,
            reload_remaining: 0,
            health: 1,
        }
    }

    fn world(tanks: Vec<TankState>) -> WorldState {
        WorldState {
            tick: 0,
            tanks,
            projectiles: vec![],
            obstacles: vec![],
            arena_side: 100.0,
        }
    }

    fn zero_actions(w: &WorldState) -> BTreeMap<TankId, Action> {
        w.tanks.iter().map(|t| (t.id, Action::ZERO)).collect()
    }

    #[test]
    fn spawn_counts() {
        let cfg = EnvConfig {
            team_size: 5,
            neutral_count: 2,
            obstacle_density: 0.5,
            ..EnvConfig::default()
        };
        let w = spawn_world(&cfg, 7).unwrap();
        assert_eq!(w.tanks.iter().filter(|t| t.team.is_combatant()).count(), 10);
        assert_eq!(w.tanks.iter().filter(|t| t.team == Team::Neutral).count(), 2);
        assert_eq!(w.obstacles.len(), 10);
        assert_eq!(spawn_world(&cfg, 7).unwrap(), w);
        assert_ne!(spawn_world(&cfg, 8).unwrap(), w);

        let empty = EnvConfig {
            obstacle_density: 0.0,
            ..cfg
        };
        assert!(spawn_world(&empty, 7).unwrap().obstacles.is_empty());
    }

    #[test]
    fn spawn_clearance() {
        let cfg = EnvConfig {
            obstacle_density: 1.0,
            ..EnvConfig::default()
        };
        for seed in 0..20 {
            let w = spawn_world(&cfg, seed).unwrap();
            let mut bodies: Vec<([f64; 2], f64)> =
                w.obstacles.iter().map(|o| (o.center.position(), o.radius)).collect();
            bodies.extend(w.tanks.iter().map(|t| (t.pose.position(), 1.5)));
            for (i, a) in bodies.iter().enumerate() {
                assert!(a.0[0] >= a.1 && a.0[0] <= 100.0 - a.1);
                assert!(a.0[1] >= a.1 && a.0[1] <= 100.0 - a.1);
                for b in &bodies[i + 1..] {
                    let d = (a.0[0] - b.0[0]).hypot(a.0[1] - b.0[1]);
                    assert!(d >= a.1 + b.1 + 1.0 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn spawn_overcrowded() {
        let mut cfg = EnvConfig {
            team_size: 200,
            ..EnvConfig::default()
        };
        cfg.physics.arena_side = 20.0;
        cfg.physics.obstacle_radius_max = 2.0;
        assert!(matches!(spawn_world(&cfg, 1), Err(WorldError::Overcrowded { .. })));
    }

    #[test]
    fn integrate_examples() {
        let phys = PhysicsConfig::default();
        let t = tank(0, Team::Red, 50.0, 50.0, 0.0);
        assert_eq!(integrate_tank(&t, &Action::ZERO, &phys).pose, t.pose);

        let fwd = integrate_tank(&t, &Action::new(1.0, 0.0, 0.0), &phys);
        assert!((fwd.pose.x - 50.0).abs() < 1e-12);
        assert!((fwd.pose.y - 50.5).abs() < 1e-12);

        let turn = integrate_tank(&t, &Action::new(0.0, 1.0, 0.0), &phys);
        assert!((turn.pose.heading - 0.05 * PI).abs() < 1e-12);
        assert_eq!(turn.pose.position(), t.pose.position());
    }

    #[test]
    fn heading_wraps() {
        let phys = PhysicsConfig::default();
        let t = tank(0, Team::Red, 50.0, 50.0, 0.01);
        let turned = integrate_tank(&t, &Action::new(0.0, -1.0, 0.0), &phys);
        assert!((0.0..TAU).contains(&turned.pose.heading));
        assert!((turned.pose.heading - (TAU + 0.01 - 0.05 * PI)).abs() < 1e-12);
    }

    #[test]
    fn fire_gating() {
        let phys = PhysicsConfig::default();
        let mut t = tank(0, Team::Red, 50.0, 50.0, 0.0);
        assert!(fire_control(&mut t, 0.0, &phys).is_none());
        assert_eq!(t.reload_remaining, 0);
        let p = fire_control(&mut t, 0.5, &phys).expect("shot");
        assert_eq!(t.reload_remaining, 10);
        assert_eq!(p.shooter_id, TankId(0));
        assert!((p.pose.y - 51.5).abs() < 1e-12);
        t.reload_remaining = 3;
        assert!(fire_control(&mut t, 1.0, &phys).is_none());
        assert_eq!(t.reload_remaining, 3);
    }

    #[test]
    fn zero_step_only_advances_tick() {
        let mut w = world(vec![
            tank(0, Team::Red, 20.0, 20.0, 0.3),
            tank(1, Team::Blue, 80.0, 80.0, 2.0),
        ]);
        w.tanks[0].reload_remaining = 4;
        let (next, events) = step_world(&w, &zero_actions(&w), &PhysicsConfig::default()).unwrap();
        assert!(events.is_empty());
        assert_eq!(next.tick, 1);
        assert_eq!(next.tanks[0].reload_remaining, 3);
        assert_eq!(next.tanks[0].pose, w.tanks[0].pose);
        assert_eq!(next.tanks[1].pose, w.tanks[1].pose);
    }

    #[test]
    fn adjacent_projectile_kills() {
        let mut w = world(vec![
            tank(0, Team::Red, 50.0, 40.0, 0.0),
            tank(1, Team::Blue, 50.0, 50.0, 0.0),
        ]);
        w.projectiles.push(Projectile {
            shooter_id: TankId(0),
            pose: Pose::new(50.0, 47.5, 0.0),
            age: 3,
        });
        let (next, events) = step_world(&w, &zero_actions(&w), &PhysicsConfig::default()).unwrap();
        assert_eq!(
            events,
            vec![KillEvent {
                shooter_id: TankId(0),
                victim_id: TankId(1),
                shooter_team: Team::Red,
                victim_team: Team::Blue,
                tick: 0,
            }]
        );
        assert!(!next.tanks[1].alive);
        assert!(next.projectiles.is_empty());
    }

    #[test]
    fn wall_clamps() {
        let w = world(vec![tank(0, Team::Red, 98.7, 50.0, 1.5 * PI)]);
        let mut actions = BTreeMap::new();
        actions.insert(TankId(0), Action::new(1.0, 0.0, 0.0));
        let (next, _) = step_world(&w, &actions, &PhysicsConfig::default()).unwrap();
        assert_eq!(next.tanks[0].pose.x, 98.5);
        assert!((next.tanks[0].pose.y - 50.0).abs() < 1e-9);
    }

    #[test]
    fn tanks_do_not_overlap() {
        let w = world(vec![
            tank(0, Team::Red, 50.0, 50.0, 0.0),
            tank(1, Team::Blue, 50.0, 53.2, PI),
        ]);
        let mut actions = BTreeMap::new();
        actions.insert(TankId(0), Action::new(1.0, 0.0, 0.0));
        actions.insert(TankId(1), Action::new(1.0, 0.0, 0.0));
        let (next, _) = step_world(&w, &actions, &PhysicsConfig::default()).unwrap();
        let d = next.tanks[0].pose.distance(&next.tanks[1].pose);
        assert!(d >= 3.0 - 1e-6, "overlap: {d}");
        assert!(next.tanks[0].pose.y > 50.0);
    }

    #[test]
    fn missing_action_is_error() {
        let w = world(vec![
            tank(0, Team::Red, 20.0, 20.0, 0.0),
            tank(1, Team::Blue, 80.0, 80.0, 0.0),
            tank(2, Team::Neutral, 50.0, 50.0, 0.0),
        ]);
        let mut actions = zero_actions(&w);
        actions.remove(&TankId(2));
        assert!(step_world(&w, &actions, &PhysicsConfig::default()).is_ok());
        actions.remove(&TankId(1));
        assert_eq!(
            step_world(&w, &actions, &PhysicsConfig::default()).unwrap_err(),
            WorldError::IncompleteActions(TankId(1))
        );
    }

    #[test]
    fn shooter_ignored_and_smallest_victim_wins() {
        let mut w = world(vec![
            tank(0, Team::Red, 50.0, 50.0, 0.0),
            tank(1, Team::Blue, 51.0, 55.0, 0.0),
            tank(2, Team::Blue, 49.0, 55.0, 0.0),
        ]);
        w.projectiles.push(Projectile {
            shooter_id: TankId(0),
            pose: Pose::new(50.0, 53.0, 0.0),
            age: 0,
        });
        let (next, events) = step_world(&w, &zero_actions(&w), &PhysicsConfig::default()).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].victim_id, TankId(1));
        assert!(next.tanks[0].alive && next.tanks[2].alive);
    }

    #[test]
    fn projectile_expires_after_range() {
        let phys = PhysicsConfig::default();
        let mut w = world(vec![tank(0, Team::Red, 50.0, 10.0, 0.0)]);
        let mut actions = BTreeMap::new();
        actions.insert(TankId(0), Action::new(0.0, 0.0, 1.0));
        step_world_in_place(&mut w, &actions, &phys).unwrap();
        assert_eq!(w.projectiles.len(), 1);
        actions.insert(TankId(0), Action::ZERO);
        let mut ticks = 1;
        while !w.projectiles.is_empty() {
            step_world_in_place(&mut w, &actions, &phys).unwrap();
            ticks += 1;
        }
        assert_eq!(ticks, phys.projectile_lifetime);
    }

    #[test]
    fn obstacles_absorb_shells() {
        let mut w = world(vec![
            tank(0, Team::Red, 50.0, 20.0, 0.0),
            tank(1, Team::Blue, 50.0, 40.0, 0.0),
        ]);
        w.obstacles.push(Obstacle {
            center: Pose::new(50.0, 30.0, 0.0),
            radius: 2.0,
        });
        let phys = PhysicsConfig::default();
        let mut actions = zero_actions(&w);
        actions.insert(TankId(0), Action::new(0.0, 0.0, 1.0));
        for _ in 0..30 {
            step_world_in_place(&mut w, &actions, &phys).unwrap();
        }
        assert!(w.tanks[1].alive);
    }

    #[test]
    fn health_absorbs_hits() {
        let phys = PhysicsConfig {
            health: 2,
            ..PhysicsConfig::default()
        };
        let mut w = world(vec![
            tank(0, Team::Red, 50.0, 40.0, 0.0),
            tank(1, Team::Blue, 50.0, 50.0, 0.0),
        ]);
        w.tanks[1].health = 2;
        let mut actions = zero_actions(&w);
        actions.insert(TankId(0), Action::new(0.0, 0.0, 1.0));
        let mut kills = 0;
        for _ in 0..40 {
            kills += step_world_in_place(&mut w, &actions, &phys).unwrap().len();
        }
        assert_eq!(kills, 1);
        assert!(!w.tanks[1].alive);
    }

    #[test]
    fn action_sanitizing() {
        let a = Action::new(7.0, -3.0, f64::NAN);
        assert_eq!(a.components(), [1.0, -1.0, 0.0]);
        let q = Action::new(0.123_456_789, -0.5, 1e-9);
        assert_eq!(q.throttle, 0.123457);
        assert_eq!(q.fire, 0.0);
        assert_eq!(format!("{:.6}", q.throttle).parse::<f64>().unwrap(), q.throttle);
    }
}
