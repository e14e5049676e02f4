// Render one tank's ego-centric raster and print each channel as coarse
// ASCII art (every 4th pixel). The ego tank sits at the center pointing up.

use std::error::Error;

use tanksworld::raster::{Channel, GRID};
use tanksworld::{spawn_world, visibility_sets, render_observation, EnvConfig, SensingParams, TankId};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = EnvConfig {
        comm_range: 60.0,
        ..EnvConfig::default()
    };
    let world = spawn_world(&config, 3)?;
    let me = TankId(2);
    let vis = visibility_sets(&world, me, &SensingParams::new(config.comm_range))?;
    let obs = render_observation(&world, me, &vis, config.physics.tank_radius)?;
    println!("{me} sees enemies {:?}, neutrals {:?}", vis.visible_enemies, vis.visible_neutrals);
    println!("shape {:?}, ego pixel {}", obs.shape(), obs.get(0, 64, 64));

    for ch in [Channel::Allies, Channel::Threats, Channel::Neutrals, Channel::Obstacles] {
        let lit = obs.channel(ch as usize).iter().filter(|v| **v > 0.0).count();
        println!("\n{ch:?}: {lit} lit pixels");
        for row in (0..GRID).step_by(4) {
            let line: String = (0..GRID)
                .step_by(2)
                .map(|col| {
                    let block = (0..4).flat_map(|dr| (0..2).map(move |dc| (row + dr, col + dc)));
                    let v = block.map(|(r, c)| obs.get(ch as usize, r, c)).fold(0.0f32, f32::max);
                    match v {
                        v if v >= 1.0 => '#',
                        v if v > 0.0 => '+',
                        _ => '.',
                    }
                })
                .collect();
            println!("{line}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
