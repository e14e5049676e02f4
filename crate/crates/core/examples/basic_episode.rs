// Run one 5v5 episode: red is driven from outside with random actions, blue
// by the built-in aggressive policy.
//
// ```text
// cargo run -p tanksworld --example basic_episode
// ```

use std::collections::BTreeMap;
use std::error::Error;

use rand::{Rng, SeedableRng};
use tanksworld::{Action, Env, EnvConfig, TankId};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = EnvConfig {
        max_steps: 300,
        ..EnvConfig::default()
    };
    let mut env = Env::new(config)?;
    let (observations, info) = env.reset(42)?;
    println!(
        "reset: {} external observations, alive red={} blue={} neutral={}",
        observations.len(),
        info.alive.red,
        info.alive.blue,
        info.alive.neutral
    );

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    while !env.is_done() {
        let state = env.state().expect("reset");
        let actions: BTreeMap<TankId, Action> = env
            .external_tanks()
            .into_iter()
            .filter(|id| state.tank(*id).is_some_and(|t| t.alive))
            .map(|id| {
                let a = Action::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                (id, a)
            })
            .collect();
        let result = env.step(&actions)?;
        for e in &result.info.events {
            println!(
                "tick {:>4}: {} ({}) destroyed {} ({})",
                e.tick, e.shooter_id, e.shooter_team, e.victim_id, e.victim_team
            );
        }
        for (id, t) in &result.tanks {
            if !t.reward.is_zero() {
                println!("           {id} reward {:?} -> {:+}", t.reward, t.scalar_reward);
            }
        }
    }
    let scores = env.team_scores();
    println!(
        "finished after {} ticks ({:?}): red {:+} blue {:+}",
        env.state().expect("reset").tick,
        env.status().expect("reset"),
        scores.red,
        scores.blue
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
