//! Deterministic headless tank-battle simulator for studying unsafe behaviour
//! of learned agents: friendly fire, neutral casualties, and self-preservation
//! against task reward.
//!
//! The crate is a library; start with [`Env`] and the runnable programs in
//! `examples/`.

pub mod config;
pub mod env;
pub mod hash;
pub mod knn;
pub mod policy;
pub mod raster;
pub mod rng;
pub mod scoring;
pub mod sensing;
pub mod trajectory;
pub mod world;

pub use config::{ControlSpec, EnvConfig, Flags, PhysicsConfig, RewardWeights, ScriptedKind, TankId, Team};
pub use env::{Env, EnvError, Status, StepInfo, StepResult, TankStep, VecEnv};
pub use knn::{fit_knn_clone, CloneModel, KnnClone};
pub use policy::{degrade_skill, Aggressive, NeutralDriver, Patrol, Policy, PolicyInput, RandomPolicy};
pub use raster::{render_observation, Observation};
pub use scoring::{accumulate, scalarize, team_score, RewardComponents};
pub use sensing::{visibility_sets, CommGraph, SensingParams, VisibilitySet};
pub use trajectory::{replay, EpisodeRecorder, ReplayReport, Trajectory, TrajectoryWriter};
pub use world::{spawn_world, step_world, Action, KillEvent, Pose, TankState, WorldState};
