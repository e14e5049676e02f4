// Record an episode to a `.twtraj` file, read it back, and replay it
// offline with every policy bypassed.

use std::collections::BTreeMap;
use std::error::Error;
use std::fs::File;
use std::io::BufWriter;

use tanksworld::trajectory::EpisodeRecorder;
use tanksworld::{replay, Action, ControlSpec, Env, EnvConfig, ScriptedKind, TankId, Trajectory};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("episode.twtraj");
    let config = EnvConfig {
        max_steps: 40,
        red: ControlSpec::External,
        blue: ControlSpec::Scripted {
            kind: ScriptedKind::Patrol,
            skill: 0.7,
        },
        ..EnvConfig::default()
    };

    let env = Env::new(config)?;
    let sink = BufWriter::new(File::create(&path)?);
    let (mut recorder, _) = EpisodeRecorder::start(env, 5, sink, true)?;
    while !recorder.env().is_done() {
        // Red drives in slow circles and keeps the trigger pulled.
        let state = recorder.env().state().expect("reset");
        let actions: BTreeMap<TankId, Action> = recorder
            .env()
            .external_tanks()
            .into_iter()
            .filter(|id| state.tank(*id).is_some_and(|t| t.alive))
            .map(|id| (id, Action::new(0.6, 0.3, 1.0)))
            .collect();
        recorder.step(&actions)?;
    }
    recorder.finish()?;

    let size = std::fs::metadata(&path)?.len();
    let traj = Trajectory::load(&path)?;
    println!(
        "{}: {} bytes, {} ticks, {} embedded observations",
        path.file_name().unwrap_or_default().to_string_lossy(),
        size,
        traj.ticks.len(),
        traj.observations.len()
    );
    let report = replay(&traj)?;
    println!("{report}");
    assert!(report.identical());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
