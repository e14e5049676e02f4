//! Ego-relative 4-channel observation rasters.
//!
//! Each observation is a 128×128 grid per channel covering a 160×160 unit
//! window centered on the observing tank and rotated so its heading points
//! up (toward row 0). A pixel is lit iff its center lies inside a shape.
//!
//! | channel | content                              | encodes             |
//! |---------|--------------------------------------|---------------------|
//! | 0       | alive allies, ego included           | position + heading  |
//! | 1       | visible enemies                      | position + heading  |
//! | 2       | visible neutrals                     | position            |
//! | 3       | obstacles and arena walls            | position            |
//!
//! Oriented tanks are 3.0×4.5 rectangles at 1.0 with a 4-pixel heading ray
//! at 0.5 in front of the nose. Neutrals and obstacles are discs at 1.0.

use crate::config::{TankId, Team};
use crate::sensing::{SenseError, VisibilitySet};
use crate::world::{Pose, WorldState};

pub const GRID: usize = 128;
pub const CHANNELS: usize = 4;
pub const OBS_LEN: usize = CHANNELS * GRID * GRID;
pub const UNITS_PER_PIXEL: f64 = 1.25;
pub const WINDOW_UNITS: f64 = GRID as f64 * UNITS_PER_PIXEL;
pub const CHASSIS_WIDTH: f64 = 3.0;
pub const CHASSIS_LENGTH: f64 = 4.5;
pub const RAY_PIXELS: usize = 4;
pub const RAY_INTENSITY: f32 = 0.5;

const HALF: f64 = GRID as f64 / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(usize)]
pub enum Channel {
    Allies = 0,
    Threats = 1,
    Neutrals = 2,
    Obstacles = 3,
}

/// A `(4, 128, 128)` grid of values in `[0, 1]`, channel-major then row-major.
#[derive(Clone, PartialEq)]
pub struct Observation {
    data: Vec<f32>,
}

impl std::fmt::Debug for Observation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let lit: Vec<usize> = (0..CHANNELS)
            .map(|c| self.channel(c).iter().filter(|v| **v > 0.0).count())
            .collect();
        f.debug_struct("Observation").field("lit_per_channel", &lit).finish()
    }
}

impl Default for Observation {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Observation {
    pub fn zeros() -> Self {
        Self {
            data: vec![0.0; OBS_LEN],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (CHANNELS, GRID, GRID)
    }

    pub fn from_vec(data: Vec<f32>) -> Option<Self> {
        (data.len() == OBS_LEN && data.iter().all(|v| (0.0..=1.0).contains(v)))
            .then_some(Self { data })
    }

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> f32 {
        self.data[(channel * GRID + row) * GRID + col]
    }

    #[inline]
    fn raise(&mut self, channel: usize, row: usize, col: usize, v: f32) {
        let cell = &mut self.data[(channel * GRID + row) * GRID + col];
        if *cell < v {
            *cell = v;
        }
    }

    pub fn channel(&self, channel: usize) -> &[f32] {
        &self.data[channel * GRID * GRID..(channel + 1) * GRID * GRID]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    /// 8-bit quantization, `round(v * 255)`, in storage order.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    pub fn from_u8(bytes: &[u8]) -> Option<Self> {
        (bytes.len() == OBS_LEN).then(|| Self {
            data: bytes.iter().map(|b| *b as f32 / 255.0).collect(),
        })
    }

    /// Ego-frame coordinates of the center of pixel `(row, col)`.
    pub fn pixel_center(row: usize, col: usize) -> [f64; 2] {
        Grid::default().center(row, col)
    }
}

/// Map a world point into the ego frame: translate by the ego position, then
/// rotate by minus the ego heading. Forward is +y in the ego frame.
pub fn world_to_ego(point: [f64; 2], ego: &Pose) -> [f64; 2] {
    let dx = point[0] - ego.x;
    let dy = point[1] - ego.y;
    let (s, c) = ego.heading.sin_cos();
    [dx * c + dy * s, -dx * s + dy * c]
}

/// A rotation about the origin followed by a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: f64,
    pub translation: [f64; 2],
}

impl RigidTransform {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.rotation.sin_cos();
        [
            c * p[0] - s * p[1] + self.translation[0],
            s * p[0] + c * p[1] + self.translation[1],
        ]
    }

    pub fn apply_pose(&self, pose: &Pose) -> Pose {
        let [x, y] = self.apply(pose.position());
        Pose::new(x, y, pose.heading + self.rotation)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Oriented { pose: Pose },
    Disc { center: [f64; 2], radius: f64 },
    Segment { a: [f64; 2], b: [f64; 2] },
}

/// Everything one tank's observation shows, in world coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub ego: Pose,
    shapes: Vec<(Channel, Shape)>,
}

impl Scene {
    pub fn from_world(
        state: &WorldState,
        tank_id: TankId,
        vis: &VisibilitySet,
        neutral_radius: f64,
    ) -> Result<Scene, SenseError> {
        let ego = state.tank(tank_id).ok_or(SenseError::UnknownTank(tank_id))?;
        if !ego.alive {
            return Err(SenseError::ObserverDead(tank_id));
        }
        let mut shapes = Vec::with_capacity(state.tanks.len() + state.obstacles.len() + 4);
        for t in state.tanks.iter().filter(|t| t.alive) {
            let shape = if t.team == Team::Neutral {
                if !vis.visible_neutrals.contains(&t.id) {
                    continue;
                }
                (
                    Channel::Neutrals,
                    Shape::Disc {
                        center: t.pose.position(),
                        radius: neutral_radius,
                    },
                )
            } else if t.team == ego.team {
                (Channel::Allies, Shape::Oriented { pose: t.pose })
            } else if vis.visible_enemies.contains(&t.id) {
                (Channel::Threats, Shape::Oriented { pose: t.pose })
            } else {
                continue;
            };
            shapes.push(shape);
        }
        for o in &state.obstacles {
            shapes.push((
                Channel::Obstacles,
                Shape::Disc {
                    center: o.center.position(),
                    radius: o.radius,
                },
            ));
        }
        let s = state.arena_side;
        let corners = [[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]];
        for i in 0..4 {
            shapes.push((
                Channel::Obstacles,
                Shape::Segment {
                    a: corners[i],
                    b: corners[(i + 1) % 4],
                },
            ));
        }
        Ok(Scene {
            ego: ego.pose,
            shapes,
        })
    }

    /// The same scene after moving the whole world rigidly.
    pub fn transformed(&self, t: &RigidTransform) -> Scene {
        let shapes = self
            .shapes
            .iter()
            .map(|(ch, shape)| {
                let moved = match shape {
                    Shape::Oriented { pose } => Shape::Oriented {
                        pose: t.apply_pose(pose),
                    },
                    Shape::Disc { center, radius } => Shape::Disc {
                        center: t.apply(*center),
                        radius: *radius,
                    },
                    Shape::Segment { a, b } => Shape::Segment {
                        a: t.apply(*a),
                        b: t.apply(*b),
                    },
                };
                (*ch, moved)
            })
            .collect();
        Scene {
            ego: t.apply_pose(&self.ego),
            shapes,
        }
    }

    pub fn render(&self) -> Observation {
        let mut obs = Observation::zeros();
        self.render_into(&mut obs, [0.0, 0.0]);
        obs
    }

    /// Render with the sampling grid shifted by a fraction of a pixel
    /// (`[columns, rows]`); used to measure rasterization aliasing.
    pub fn render_shifted(&self, shift_px: [f64; 2]) -> Observation {
        let mut obs = Observation::zeros();
        self.render_into(&mut obs, shift_px);
        obs
    }

    pub fn render_into(&self, obs: &mut Observation, shift_px: [f64; 2]) {
        obs.clear();
        let grid = Grid {
            shift_col: shift_px[0],
            shift_row: shift_px[1],
        };
        for (ch, shape) in &self.shapes {
            let ch = *ch as usize;
            match shape {
                Shape::Oriented { pose } => {
                    let center = world_to_ego(pose.position(), &self.ego);
                    let rel = pose.heading - self.ego.heading;
                    draw_oriented(obs, &grid, ch, center, rel);
                }
                Shape::Disc { center, radius } => {
                    let c = world_to_ego(*center, &self.ego);
                    grid.fill(obs, ch, c, *radius, |p| {
                        let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                        dx * dx + dy * dy <= radius * radius
                    });
                }
                Shape::Segment { a, b } => {
                    let a = world_to_ego(*a, &self.ego);
                    let b = world_to_ego(*b, &self.ego);
                    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                    let n = (len / (UNITS_PER_PIXEL / 4.0)).ceil().max(1.0) as usize;
                    for k in 0..=n {
                        let t = k as f64 / n as f64;
                        let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                        if let Some((r, c)) = grid.pixel_of(p) {
                            obs.raise(ch, r, c, 1.0);
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Grid {
    shift_col: f64,
    shift_row: f64,
}

impl Grid {
    #[inline]
    fn center(&self, row: usize, col: usize) -> [f64; 2] {
        [
            (col as f64 + 0.5 - HALF + self.shift_col) * UNITS_PER_PIXEL,
            (HALF - row as f64 - 0.5 + self.shift_row) * UNITS_PER_PIXEL,
        ]
    }

    fn pixel_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let c = (p[0] / UNITS_PER_PIXEL + HALF - self.shift_col).floor();
        let r = (HALF + self.shift_row - p[1] / UNITS_PER_PIXEL).floor();
        let valid = (0.0..GRID as f64).contains(&c) && (0.0..GRID as f64).contains(&r);
        valid.then_some((r as usize, c as usize))
    }

    /// Fill every pixel whose center passes `inside`, scanning the box of
    /// half-size `reach` around `center`.
    fn fill(
        &self,
        obs: &mut Observation,
        ch: usize,
        center: [f64; 2],
        reach: f64,
        inside: impl Fn([f64; 2]) -> bool,
    ) {
        let col_f = center[0] / UNITS_PER_PIXEL + HALF - self.shift_col - 0.5;
        let row_f = HALF + self.shift_row - 0.5 - center[1] / UNITS_PER_PIXEL;
        let span = reach / UNITS_PER_PIXEL;
        let lo = |v: f64| (v - span).ceil().max(0.0);
        let hi = |v: f64| (v + span).floor().min(GRID as f64 - 1.0);
        let (c0, c1, r0, r1) = (lo(col_f), hi(col_f), lo(row_f), hi(row_f));
        if c0 > c1 || r0 > r1 {
            return;
        }
        for r in r0 as usize..=r1 as usize {
            for c in c0 as usize..=c1 as usize {
                if inside(self.center(r, c)) {
                    obs.raise(ch, r, c, 1.0);
                }
            }
        }
    }
}

fn draw_oriented(obs: &mut Observation, grid: &Grid, ch: usize, center: [f64; 2], heading: f64) {
    let (s, c) = heading.sin_cos();
    let fwd = [-s, c];
    let right = [c, s];
    let (hw, hl) = (CHASSIS_WIDTH / 2.0, CHASSIS_LENGTH / 2.0);
    grid.fill(obs, ch, center, hw.hypot(hl), |p| {
        let d = [p[0] - center[0], p[1] - center[1]];
        let u = d[0] * right[0] + d[1] * right[1];
        let v = d[0] * fwd[0] + d[1] * fwd[1];
        u.abs() <= hw && v.abs() <= hl
    });
    for k in 1..=RAY_PIXELS {
        let dist = hl + (k as f64 - 0.5) * UNITS_PER_PIXEL;
        let p = [center[0] + fwd[0] * dist, center[1] + fwd[1] * dist];
        if let Some((r, col)) = grid.pixel_of(p) {
            obs.raise(ch, r, col, RAY_INTENSITY);
        }
    }
}

/// Render `tank_id`'s observation. Neutrals are drawn as discs of
/// `neutral_radius` world units.
pub fn render_observation(
    state: &WorldState,
    tank_id: TankId,
    vis: &VisibilitySet,
    neutral_radius: f64,
) -> Result<Observation, SenseError> {
    Ok(Scene::from_world(state, tank_id, vis, neutral_radius)?.render())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::TankState;
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

    #[test]
    fn ego_transform_examples() {
        let ego = Pose::new(30.0, 40.0, 0.0);
        assert_eq!(world_to_ego([30.0, 40.0], &ego), [0.0, 0.0]);
        assert_eq!(world_to_ego([30.0, 50.0], &ego), [0.0, 10.0]);

        let turned = Pose::new(30.0, 40.0, PI / 2.0);
        let p = world_to_ego([40.0, 40.0], &turned);
        assert!(p[0].abs() < 1e-12 && (p[1] + 10.0).abs() < 1e-12, "{p:?}");
        // A point straight ahead of a tank lands on +y.
        let ahead = [30.0 + 10.0 * turned.forward()[0], 40.0 + 10.0 * turned.forward()[1]];
        let q = world_to_ego(ahead, &turned);
        assert!(q[0].abs() < 1e-12 && (q[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_tank_footprint() {
        let w = world(vec![tank(0, Team::Red, 50.0, 50.0, 1.0)]);
        let vis = VisibilitySet {
            observer_id: TankId(0),
            ..Default::default()
        };
        let obs = render_observation(&w, TankId(0), &vis, 1.5).unwrap();
        assert_eq!(obs.shape(), (4, 128, 128));
        assert_eq!(obs.get(0, 64, 64), 1.0);
        // Chassis spans |x| <= 1.5 -> columns 63..=64, |y| <= 2.25 -> rows 62..=65.
        let lit: Vec<(usize, usize)> = (0..GRID)
            .flat_map(|r| (0..GRID).map(move |c| (r, c)))
            .filter(|&(r, c)| obs.get(0, r, c) == 1.0)
            .collect();
        assert_eq!(lit, vec![(62, 63), (62, 64), (63, 63), (63, 64), (64, 63), (64, 64), (65, 63), (65, 64)]);
        // Heading ray runs up from the nose: rows 61, 60, 59, 58 at half intensity.
        for r in 58..=61 {
            let ray: Vec<f32> = (0..GRID).map(|c| obs.get(0, r, c)).filter(|v| *v > 0.0).collect();
            assert_eq!(ray, vec![RAY_INTENSITY], "row {r}");
        }
        assert!(obs.channel(1).iter().all(|v| *v == 0.0));
        assert!(obs.channel(2).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn invisible_enemy_absent() {
        let w = world(vec![
            tank(0, Team::Red, 20.0, 50.0, 0.0),
            tank(1, Team::Blue, 80.0, 50.0, 0.0),
        ]);
        let vis = VisibilitySet {
            observer_id: TankId(0),
            ..Default::default()
        };
        let obs = render_observation(&w, TankId(0), &vis, 1.5).unwrap();
        assert!(obs.channel(1).iter().all(|v| *v == 0.0));

        let vis = VisibilitySet {
            observer_id: TankId(0),
            visible_enemies: [TankId(1)].into(),
            ..Default::default()
        };
        let obs = render_observation(&w, TankId(0), &vis, 1.5).unwrap();
        assert!(obs.channel(1).contains(&1.0));
    }

    #[test]
    fn walls_and_obstacles_in_channel_three() {
        let mut w = world(vec![tank(0, Team::Red, 50.0, 50.0, 0.0)]);
        w.obstacles.push(crate::world::Obstacle {
            center: Pose::new(50.0, 70.0, 0.0),
            radius: 2.0,
        });
        let vis = VisibilitySet::default();
        let obs = render_observation(&w, TankId(0), &vis, 1.5).unwrap();
        // Obstacle 20 units ahead: row 64 - 16 = 48.
        assert_eq!(obs.get(3, 47, 64), 1.0);
        // North wall 50 units ahead: y = 50 -> row 24.
        let north: usize = (0..GRID).filter(|&c| obs.get(3, 24, c) == 1.0).count();
        assert!(north >= 80, "{north}");
        assert!(obs.channel(0).iter().all(|v| *v <= 1.0));
        assert_eq!(obs.get(3, 0, 0), 0.0);
    }

    #[test]
    fn dead_observer_rejected() {
        let mut w = world(vec![tank(0, Team::Red, 50.0, 50.0, 0.0)]);
        w.tanks[0].alive = false;
        assert_eq!(
            render_observation(&w, TankId(0), &VisibilitySet::default(), 1.5),
            Err(SenseError::ObserverDead(TankId(0)))
        );
    }

    #[test]
    fn quantization_round_trip() {
        let w = world(vec![tank(0, Team::Red, 50.0, 50.0, 0.4)]);
        let obs = render_observation(&w, TankId(0), &VisibilitySet::default(), 1.5).unwrap();
        let bytes = obs.to_u8();
        assert_eq!(bytes.len(), OBS_LEN);
        let back = Observation::from_u8(&bytes).unwrap();
        assert_eq!(back.to_u8(), bytes);
    }
}
