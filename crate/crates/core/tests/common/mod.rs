//! Helpers shared by the integration suites: world builders, random drivers,
//! and brute-force oracles written independently of the library internals.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tanksworld::world::{Obstacle, TankState};
use tanksworld::{Action, EnvConfig, PhysicsConfig, Pose, TankId, Team, WorldState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tank(id: u32, team: Team, x: f64, y: f64, heading: f64) -> TankState {
    TankState {
        id: TankId(id),
        team,
        pose: Pose::new(x, y, heading),
        alive: true,
        reload_remaining: 0,
        health: 1,
    }
}

/// A world with the given tanks (ids must be 0..n in order) and no obstacles.
pub fn world(tanks: Vec<TankState>) -> WorldState {
    for (i, t) in tanks.iter().enumerate() {
        assert_eq!(t.id, TankId(i as u32), "tank ids must be dense");
    }
    WorldState {
        tick: 0,
        tanks,
        projectiles: Vec::new(),
        obstacles: Vec::new(),
        arena_side: 100.0,
    }
}

pub fn with_obstacles(mut w: WorldState, obstacles: &[(f64, f64, f64)]) -> WorldState {
    w.obstacles = obstacles
        .iter()
        .map(|&(x, y, r)| Obstacle {
            center: Pose::new(x, y, 0.0),
            radius: r,
        })
        .collect();
    w
}

pub fn random_action(rng: &mut impl Rng) -> Action {
    Action::new(
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(-1.0..=1.0),
    )
}

/// Random actions for every alive tank, neutrals included.
pub fn random_actions(state: &WorldState, rng: &mut impl Rng) -> BTreeMap<TankId, Action> {
    state
        .tanks
        .iter()
        .filter(|t| t.alive)
        .map(|t| (t.id, random_action(rng)))
        .collect()
}

/// Spawn from `config` and drive every tank randomly for `ticks` steps.
pub fn random_state(config: &EnvConfig, seed: u64, ticks: u64) -> WorldState {
    let mut state = tanksworld::spawn_world(config, seed).expect("spawn");
    let mut r = rng(seed ^ 0x5eed);
    for _ in 0..ticks {
        let actions = random_actions(&state, &mut r);
        tanksworld::world::step_world_in_place(&mut state, &actions, &config.physics).expect("step");
    }
    state
}

/// Random config within the ranges that spawn reliably.
pub fn random_config(r: &mut impl Rng) -> EnvConfig {
    EnvConfig {
        team_size: r.gen_range(1..=6),
        neutral_count: r.gen_range(0..=4),
        obstacle_density: r.gen_range(0.0..=1.0),
        comm_range: r.gen_range(5.0..=80.0),
        ..EnvConfig::default()
    }
}

/// Visibility oracle: all-pairs reachability among alive allies by
/// Floyd–Warshall closure, then an enemy/neutral is visible iff some
/// reachable ally (or the observer) is within range of it.
pub fn oracle_visibility(
    state: &WorldState,
    observer: TankId,
    range: f64,
    two_hop: bool,
    neutral_always: bool,
) -> (BTreeSet<TankId>, BTreeSet<TankId>) {
    let n = state.tanks.len();
    let me = &state.tanks[observer.index()];
    let enemy = match me.team {
        Team::Red => Team::Blue,
        Team::Blue => Team::Red,
        Team::Neutral => panic!("neutral observer"),
    };
    let close = |a: usize, b: usize| {
        let (p, q) = (&state.tanks[a].pose, &state.tanks[b].pose);
        ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt() <= range
    };
    let ally = |i: usize| state.tanks[i].alive && state.tanks[i].team == me.team;
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = ally(i) && ally(j) && (i == j || close(i, j));
        }
    }
    if !two_hop {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let o = observer.index();
    let relays: Vec<usize> = (0..n).filter(|&a| reach[o][a]).collect();
    let mut enemies = BTreeSet::new();
    let mut neutrals = BTreeSet::new();
    for (i, t) in state.tanks.iter().enumerate() {
        if !t.alive {
            continue;
        }
        let seen = relays.iter().any(|&a| close(a, i));
        if t.team == enemy && seen {
            enemies.insert(t.id);
        }
        if t.team == Team::Neutral && (seen || neutral_always) {
            neutrals.insert(t.id);
        }
    }
    (enemies, neutrals)
}

/// Random layout of up to `max_tanks` tanks with arbitrary (possibly
/// overlapping) positions; some are dead.
pub fn random_layout(r: &mut impl Rng, max_tanks: usize) -> WorldState {
    let n = r.gen_range(1..=max_tanks);
    let mut tanks = Vec::with_capacity(n);
    for i in 0..n {
        let team = match r.gen_range(0..5) {
            0 | 1 => Team::Red,
            2 | 3 => Team::Blue,
            _ => Team::Neutral,
        };
        let mut t = tank(
            i as u32,
            team,
            r.gen_range(0.0..=100.0),
            r.gen_range(0.0..=100.0),
            r.gen_range(0.0..std::f64::consts::TAU),
        );
        t.alive = r.gen_bool(0.85);
        tanks.push(t);
    }
    world(tanks)
}

pub fn default_phys() -> PhysicsConfig {
    PhysicsConfig::default()
}

/// Number of pixels whose values differ.
pub fn pixel_diff(a: &[f32], b: &[f32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
