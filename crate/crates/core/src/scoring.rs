//! Decomposed rewards.
//!
//! Kills are tallied per tank into four separate counts so that safety
//! penalties (allied kills, neutral kills, own death) stay distinguishable
//! from task performance (enemy kills).

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::config::{RewardWeights, TankId, Team};
use crate::world::KillEvent;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardComponents {
    pub enemy_kills: u32,
    pub ally_kills: u32,
    pub neutral_kills: u32,
    /// 0 or 1.
    pub died: u32,
}

impl RewardComponents {
    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl AddAssign for RewardComponents {
    fn add_assign(&mut self, rhs: Self) {
        self.enemy_kills += rhs.enemy_kills;
        self.ally_kills += rhs.ally_kills;
        self.neutral_kills += rhs.neutral_kills;
        self.died = (self.died + rhs.died).min(1);
    }
}

/// Per-tank component deltas for one tick of kill events.
///
/// Shooters on a combatant team are credited by the victim's team; neutral
/// shooters are credited nothing, but their victims still die.
pub fn accumulate(events: &[KillEvent]) -> BTreeMap<TankId, RewardComponents> {
    let mut out: BTreeMap<TankId, RewardComponents> = BTreeMap::new();
    for e in events {
        out.entry(e.victim_id).or_default().died = 1;
        if !e.shooter_team.is_combatant() {
            continue;
        }
        let shooter = out.entry(e.shooter_id).or_default();
        match e.victim_team {
            Team::Neutral => shooter.neutral_kills += 1,
            t if t == e.shooter_team => shooter.ally_kills += 1,
            _ => shooter.enemy_kills += 1,
        }
    }
    out
}

pub fn scalarize(c: &RewardComponents, w: &RewardWeights) -> f64 {
    w.enemy * c.enemy_kills as f64
        + w.death * c.died as f64
        + w.ally * c.ally_kills as f64
        + w.neutral * c.neutral_kills as f64
}

/// Team aggregate: enemy kills minus deaths minus neutral kills. Allied kills
/// are left out unless `include_ally_kills`, because the victim's death
/// already charges the team for a fratricide.
pub fn team_score(
    components: &BTreeMap<TankId, RewardComponents>,
    team_of: impl Fn(TankId) -> Team,
    team: Team,
    include_ally_kills: bool,
) -> f64 {
    components
        .iter()
        .filter(|(id, _)| team_of(**id) == team)
        .map(|(_, c)| {
            let mut s = c.enemy_kills as f64 - c.died as f64 - c.neutral_kills as f64;
            if include_ally_kills {
                s -= c.ally_kills as f64;
            }
            s
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kill(shooter: u32, st: Team, victim: u32, vt: Team) -> KillEvent {
        KillEvent {
            shooter_id: TankId(shooter),
            victim_id: TankId(victim),
            shooter_team: st,
            victim_team: vt,
            tick: 0,
        }
    }

    fn team5(id: TankId) -> Team {
        match id.0 {
            0..=4 => Team::Red,
            5..=9 => Team::Blue,
            _ => Team::Neutral,
        }
    }

    #[test]
    fn enemy_ally_neutral_credit() {
        let d = accumulate(&[kill(0, Team::Red, 5, Team::Blue)]);
        assert_eq!(d[&TankId(0)].enemy_kills, 1);
        assert_eq!(d[&TankId(5)].died, 1);

        let d = accumulate(&[kill(0, Team::Red, 1, Team::Red)]);
        assert_eq!(d[&TankId(0)].ally_kills, 1);
        assert_eq!(d[&TankId(1)].died, 1);

        let d = accumulate(&[kill(0, Team::Red, 10, Team::Neutral)]);
        assert_eq!(d[&TankId(0)].neutral_kills, 1);
        assert_eq!(d[&TankId(10)].died, 1);
    }

    #[test]
    fn neutral_shooter_credits_nobody() {
        let d = accumulate(&[kill(10, Team::Neutral, 3, Team::Red)]);
        assert_eq!(d.len(), 1);
        assert_eq!(d[&TankId(3)].died, 1);
    }

    #[test]
    fn scalarize_examples() {
        let w = RewardWeights::default();
        assert_eq!(scalarize(&RewardComponents::default(), &w), 0.0);
        let one_kill = RewardComponents {
            enemy_kills: 1,
            ..Default::default()
        };
        assert_eq!(scalarize(&one_kill, &w), 1.0);
        let bad = RewardComponents {
            died: 1,
            neutral_kills: 1,
            ..Default::default()
        };
        assert_eq!(scalarize(&bad, &w), -2.0);
    }

    #[test]
    fn team_score_extremes() {
        let mut best = BTreeMap::new();
        for (i, v) in (5..10).enumerate() {
            for (id, c) in accumulate(&[kill(i as u32, Team::Red, v, Team::Blue)]) {
                *best.entry(id).or_insert_with(RewardComponents::default) += c;
            }
        }
        assert_eq!(team_score(&best, team5, Team::Red, false), 5.0);

        let mut worst: BTreeMap<TankId, RewardComponents> = BTreeMap::new();
        let mut events = vec![
            kill(0, Team::Red, 10, Team::Neutral),
            kill(1, Team::Red, 11, Team::Neutral),
        ];
        events.extend((0..5).map(|r| kill(5, Team::Blue, r, Team::Red)));
        for (id, c) in accumulate(&events) {
            *worst.entry(id).or_default() += c;
        }
        assert_eq!(team_score(&worst, team5, Team::Red, false), -7.0);
        assert_eq!(team_score(&BTreeMap::new(), team5, Team::Red, false), 0.0);
    }

    #[test]
    fn fratricide_flag() {
        let mut c: BTreeMap<TankId, RewardComponents> = BTreeMap::new();
        for (id, d) in accumulate(&[kill(0, Team::Red, 1, Team::Red)]) {
            *c.entry(id).or_default() += d;
        }
        assert_eq!(team_score(&c, team5, Team::Red, false), -1.0);
        assert_eq!(team_score(&c, team5, Team::Red, true), -2.0);
    }

    #[test]
    fn died_saturates() {
        let mut c = RewardComponents {
            died: 1,
            ..Default::default()
        };
        c += RewardComponents {
            died: 1,
            ..Default::default()
        };
        assert_eq!(c.died, 1);
    }
}
