//! Ally communication graph and threat visibility.
//!
//! Allies within `comm_range` of each other share what they see, and sharing
//! is transitive: an observer perceives every enemy (and, by default, every
//! neutral) within `comm_range` of any alive member of its communication
//! component. Dead tanks neither see nor relay.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::config::{Flags, TankId, Team};
use crate::world::WorldState;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SenseError {
    #[error("observer dead: tank {0}")]
    ObserverDead(TankId),
    #[error("unknown tank {0}")]
    UnknownTank(TankId),
    #[error("tank {0} is neutral and has no allies or threats")]
    NotCombatant(TankId),
}

/// Visibility rule parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingParams {
    pub comm_range: f64,
    pub two_hop_only: bool,
    pub neutral_always_visible: bool,
}

impl SensingParams {
    pub fn new(comm_range: f64) -> Self {
        Self {
            comm_range,
            two_hop_only: false,
            neutral_always_visible: false,
        }
    }

    pub fn from_flags(comm_range: f64, flags: &Flags) -> Self {
        Self {
            comm_range,
            two_hop_only: flags.two_hop_only,
            neutral_always_visible: flags.neutral_always_visible,
        }
    }
}

/// Partition of one team's alive tanks into communication components.
#[derive(Clone, Debug, PartialEq)]
pub struct CommGraph {
    pub team: Team,
    /// Each component sorted by id; components ordered by smallest member.
    pub components: Vec<Vec<TankId>>,
    pub comm_range: f64,
}

impl CommGraph {
    pub fn component_of(&self, id: TankId) -> Option<&[TankId]> {
        self.components
            .iter()
            .find(|c| c.binary_search(&id).is_ok())
            .map(Vec::as_slice)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisibilitySet {
    pub observer_id: TankId,
    pub visible_enemies: BTreeSet<TankId>,
    pub visible_neutrals: BTreeSet<TankId>,
}

impl VisibilitySet {
    pub fn is_visible(&self, id: TankId) -> bool {
        self.visible_enemies.contains(&id) || self.visible_neutrals.contains(&id)
    }
}

fn within(state: &WorldState, a: TankId, b: TankId, range: f64) -> bool {
    state.tanks[a.index()].pose.distance(&state.tanks[b.index()].pose) <= range
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

pub fn ally_components(state: &WorldState, team: Team, comm_range: f64) -> CommGraph {
    let members: Vec<TankId> = state
        .tanks
        .iter()
        .filter(|t| t.alive && t.team == team)
        .map(|t| t.id)
        .collect();
    let mut parent: Vec<usize> = (0..members.len()).collect();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if within(state, members[i], members[j], comm_range) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    // Root at the smaller index keeps the output order stable.
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut components: Vec<Vec<TankId>> = Vec::new();
    let mut slot = vec![usize::MAX; members.len()];
    for (i, id) in members.iter().enumerate() {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(*id);
    }
    CommGraph {
        team,
        components,
        comm_range,
    }
}

/// Alive allies (observer included) whose sensing is pooled with the observer's.
fn relays(state: &WorldState, observer: TankId, params: &SensingParams) -> Vec<TankId> {
    let team = state.tanks[observer.index()].team;
    if params.two_hop_only {
        state
            .tanks
            .iter()
            .filter(|t| {
                t.alive && t.team == team && within(state, observer, t.id, params.comm_range)
            })
            .map(|t| t.id)
            .collect()
    } else {
        ally_components(state, team, params.comm_range)
            .component_of(observer)
            .map(<[TankId]>::to_vec)
            .unwrap_or_else(|| vec![observer])
    }
}

pub fn visibility_sets(
    state: &WorldState,
    tank_id: TankId,
    params: &SensingParams,
) -> Result<VisibilitySet, SenseError> {
    let observer = state.tank(tank_id).ok_or(SenseError::UnknownTank(tank_id))?;
    if !observer.alive {
        return Err(SenseError::ObserverDead(tank_id));
    }
    let enemy_team = observer.team.opponent().ok_or(SenseError::NotCombatant(tank_id))?;
    let relays = relays(state, tank_id, params);
    let seen = |id: TankId| relays.iter().any(|&a| within(state, a, id, params.comm_range));

    let mut vis = VisibilitySet {
        observer_id: tank_id,
        ..Default::default()
    };
    for t in state.tanks.iter().filter(|t| t.alive) {
        if t.team == enemy_team && seen(t.id) {
            vis.visible_enemies.insert(t.id);
        } else if t.team == Team::Neutral && (params.neutral_always_visible || seen(t.id)) {
            vis.visible_neutrals.insert(t.id);
        }
    }
    Ok(vis)
}

/// Visibility for every alive combatant, computing each component once.
pub fn all_visibility(state: &WorldState, params: &SensingParams) -> Vec<Option<VisibilitySet>> {
    let mut out: Vec<Option<VisibilitySet>> = vec![None; state.tanks.len()];
    if params.two_hop_only {
        for t in state.tanks.iter().filter(|t| t.alive && t.team.is_combatant()) {
            out[t.id.index()] = visibility_sets(state, t.id, params).ok();
        }
        return out;
    }
    for team in [Team::Red, Team::Blue] {
        let enemy = team.opponent().expect("combatant");
        for component in ally_components(state, team, params.comm_range).components {
            let seen = |id: TankId| component.iter().any(|&a| within(state, a, id, params.comm_range));
            let mut shared = VisibilitySet::default();
            for t in state.tanks.iter().filter(|t| t.alive) {
                if t.team == enemy && seen(t.id) {
                    shared.visible_enemies.insert(t.id);
                } else if t.team == Team::Neutral && (params.neutral_always_visible || seen(t.id)) {
                    shared.visible_neutrals.insert(t.id);
                }
            }
            for &member in &component {
                out[member.index()] = Some(VisibilitySet {
                    observer_id: member,
                    ..shared.clone()
                });
            }
        }
    }
    out
}
