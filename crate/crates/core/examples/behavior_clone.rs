// Behaviour cloning from demonstrations: record an aggressive red team,
// regenerate its observations from the trajectory, fit a k-NN clone, save
// it, and field it as the blue team.

use std::collections::HashMap;
use std::error::Error;
use std::sync::Arc;

use tanksworld::trajectory::{demonstrations, EpisodeRecorder};
use tanksworld::{fit_knn_clone, CloneModel, ControlSpec, Env, EnvConfig, ScriptedKind, TankId, Trajectory};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let teacher = EnvConfig {
        max_steps: 150,
        red: ControlSpec::scripted(ScriptedKind::Aggressive),
        blue: ControlSpec::scripted(ScriptedKind::Random),
        ..EnvConfig::default()
    };
    let red: Vec<TankId> = (0..teacher.team_size).map(TankId).collect();
    let mut demos = Vec::new();
    for seed in 0..2 {
        let mut env = Env::new(teacher.clone())?;
        env.set_observe(false);
        let (mut rec, _) = EpisodeRecorder::start(env, seed, Vec::new(), false)?;
        while !rec.env().is_done() {
            rec.step(&Default::default())?;
        }
        let (_, bytes) = rec.finish()?;
        demos.extend(demonstrations(&Trajectory::read(&bytes[..])?, Some(&red))?);
    }
    let pairs: usize = demos.iter().map(Vec::len).sum();

    let model = fit_knn_clone(&demos, 3)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("aggressive.twknn");
    model.save(&path)?;
    let loaded = CloneModel::load(&path)?;
    println!(
        "fitted k={} clone from {pairs} pairs; file {} bytes",
        loaded.k(),
        std::fs::metadata(&path)?.len()
    );

    let student = EnvConfig {
        max_steps: 150,
        red: ControlSpec::scripted(ScriptedKind::Random),
        blue: ControlSpec::Clone {
            model: "aggressive".into(),
            skill: 1.0,
        },
        ..EnvConfig::default()
    };
    let models = HashMap::from([("aggressive".to_string(), Arc::new(loaded))]);
    let mut env = Env::with_models(student, models)?;
    env.reset(9)?;
    while !env.is_done() {
        env.step(&Default::default())?;
    }
    let s = env.team_scores();
    println!("clone (blue) vs random (red): red {:+} blue {:+}", s.red, s.blue);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
