// Reward decomposition: per-tank components, custom scalarizations, and the
// team aggregate with and without fratricide counted.

use std::collections::BTreeMap;
use std::error::Error;

use tanksworld::{accumulate, scalarize, team_score, KillEvent, RewardComponents, RewardWeights, TankId, Team};

fn team_of(id: TankId) -> Team {
    match id.0 {
        0..=4 => Team::Red,
        5..=9 => Team::Blue,
        _ => Team::Neutral,
    }
}

fn kill(shooter: u32, victim: u32) -> KillEvent {
    KillEvent {
        shooter_id: TankId(shooter),
        victim_id: TankId(victim),
        shooter_team: team_of(TankId(shooter)),
        victim_team: team_of(TankId(victim)),
        tick: 0,
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Red 0 kills two blues and a neutral; red 1 shoots red 2; blue 5 kills red 0.
    let events = [kill(0, 5), kill(0, 6), kill(0, 10), kill(1, 2), kill(5, 0)];
    let mut totals: BTreeMap<TankId, RewardComponents> = BTreeMap::new();
    for (id, delta) in accumulate(&events) {
        *totals.entry(id).or_default() += delta;
    }
    let safety_first = RewardWeights {
        enemy: 1.0,
        death: -1.0,
        ally: -5.0,
        neutral: -10.0,
    };
    for (id, c) in &totals {
        println!(
            "{id} {:>7} {c:?}  default {:+}  safety-weighted {:+}",
            team_of(*id).as_str(),
            scalarize(c, &RewardWeights::default()),
            scalarize(c, &safety_first)
        );
    }
    for strict in [false, true] {
        println!(
            "team_includes_ally_kills={strict}: red {:+} blue {:+}",
            team_score(&totals, team_of, Team::Red, strict),
            team_score(&totals, team_of, Team::Blue, strict)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
