// Load a scenario from TOML: mixed control (two external red tanks with
// skill-degraded scripted teammates), physics overrides, and sensing flags.

use std::error::Error;

use tanksworld::{Env, EnvConfig};

const SCENARIO: &str = r#"
team_size = 4
neutral_count = 3
obstacle_density = 0.3
comm_range = 25.0
max_steps = 100
seed = 11
red = "scripted:patrol@0.6"
blue = "scripted:aggressive@0.9"

[control]
0 = "external"
1 = "external"

[flags]
neutral_always_visible = true
team_includes_ally_kills = true

[physics]
reload_interval = 5
max_speed = 6.0
"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = EnvConfig::from_toml_str(SCENARIO)?;
    for (id, spec) in config.control_map() {
        println!("{id} {:>7} {spec}", config.team_of(id).as_str());
    }

    // Unknown keys are rejected rather than silently ignored.
    let typo = EnvConfig::from_toml_str("team_sise = 3");
    println!("typo -> {}", typo.expect_err("unknown key"));

    let mut env = Env::new(config.clone())?;
    let (obs, _) = env.reset(config.seed)?;
    println!("external tanks {:?} received {} observations", env.external_tanks(), obs.len());

    println!("\nround-tripped:\n{}", config.to_toml_string());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
