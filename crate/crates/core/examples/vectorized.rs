// Step several independent environments in parallel and report throughput.

use std::collections::BTreeMap;
use std::error::Error;
use std::time::Instant;

use tanksworld::{Action, ControlSpec, EnvConfig, ScriptedKind, TankId, VecEnv};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = EnvConfig {
        max_steps: 200,
        red: ControlSpec::External,
        blue: ControlSpec::scripted(ScriptedKind::Patrol),
        ..EnvConfig::default()
    };
    let k = 8;
    let mut venv = VecEnv::from_config(&config, k)?;
    let seeds: Vec<u64> = (0..k as u64).collect();
    for r in venv.reset(&seeds) {
        r?;
    }

    let start = Instant::now();
    let mut steps = 0;
    // Every red tank drives forward and fires whenever it can.
    while venv.envs().iter().any(|e| !e.is_done()) {
        let actions: Vec<BTreeMap<TankId, Action>> = venv
            .envs()
            .iter()
            .map(|env| match env.state() {
                Some(state) if !env.is_done() => env
                    .external_tanks()
                    .into_iter()
                    .filter(|id| state.tank(*id).is_some_and(|t| t.alive))
                    .map(|id| (id, Action::new(1.0, 0.2, 1.0)))
                    .collect(),
                _ => BTreeMap::new(),
            })
            .collect();
        for r in venv.step(&actions) {
            // Finished instances report EpisodeFinished; that is expected here.
            if r.is_ok() {
                steps += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    println!("{k} envs, {steps} env-steps in {secs:.2}s ({:.0} steps/s)", steps as f64 / secs);
    for (i, env) in venv.envs().iter().enumerate() {
        let s = env.team_scores();
        println!("env {i}: seed {:?} red {:+} blue {:+}", env.seed(), s.red, s.blue);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
