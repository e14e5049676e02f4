// Transitive threat sharing between allies.
//
// Two blue tanks 25 units apart form one communication component, so an
// enemy seen by either is seen by both. A red tank far from both stays
// hidden. The same layout under the two-hop flag and with a shorter range
// shows how the rule changes.

use std::error::Error;

use tanksworld::sensing::{ally_components, visibility_sets, SensingParams};
use tanksworld::world::TankState;
use tanksworld::{Pose, TankId, Team, WorldState};

fn tank(id: u32, team: Team, x: f64, y: f64) -> TankState {
    TankState {
        id: TankId(id),
        team,
        pose: Pose::new(x, y, 0.0),
        alive: true,
        reload_remaining: 0,
        health: 1,
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let world = WorldState {
        tick: 0,
        tanks: vec![
            tank(0, Team::Red, 20.0, 90.0),
            tank(1, Team::Red, 70.0, 50.0),
            tank(2, Team::Blue, 20.0, 50.0),
            tank(3, Team::Blue, 45.0, 50.0),
            tank(4, Team::Blue, 90.0, 10.0),
        ],
        projectiles: Vec::new(),
        obstacles: Vec::new(),
        arena_side: 100.0,
    };

    for range in [30.0, 20.0] {
        let graph = ally_components(&world, Team::Blue, range);
        println!("comm_range {range}: blue components {:?}", graph.components);
        let params = SensingParams::new(range);
        for id in [2, 3, 4] {
            let v = visibility_sets(&world, TankId(id), &params)?;
            println!("  {} sees enemies {:?}", TankId(id), v.visible_enemies);
        }
    }

    // A chain of three where the far end only reaches the observer via the middle.
    let mut chain = world.clone();
    chain.tanks[4].pose = Pose::new(65.0, 65.0, 0.0);
    chain.tanks[1].pose = Pose::new(90.0, 80.0, 0.0);
    for two_hop_only in [false, true] {
        let params = SensingParams {
            comm_range: 30.0,
            two_hop_only,
            neutral_always_visible: false,
        };
        let v = visibility_sets(&chain, TankId(2), &params)?;
        println!("chain, two_hop_only={two_hop_only}: {} sees {:?}", TankId(2), v.visible_enemies);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
