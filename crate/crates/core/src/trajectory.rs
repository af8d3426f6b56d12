//! Per-actor position sequences across periods, trajectory typing, and
//! transition flow tables.
//!
//! An actor's state in a period is the position label of their cluster
//! in that period's blockmodel, or `NA` when absent from the period's
//! reduced network. `NA` means absent from the active part of the
//! community, not necessarily gone from the platform.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::blockmodel::{BlockModel, Position};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    Core,
    SemiPeriphery,
    Periphery,
    Bridge,
    Na,
}

impl State {
    pub fn is_active(self) -> bool {
        self != State::Na
    }

    pub fn as_str(self) -> &'static str {
        match self {
            State::Core => "C",
            State::SemiPeriphery => "S",
            State::Periphery => "P",
            State::Bridge => "B",
            State::Na => "NA",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "C" => Ok(State::Core),
            "S" => Ok(State::SemiPeriphery),
            "P" => Ok(State::Periphery),
            "B" => Ok(State::Bridge),
            "NA" => Ok(State::Na),
            _ => Err(Error::InvalidInput(alloc::format!("unknown state {s:?}"))),
        }
    }
}

/// How semi-periphery positions map onto trajectory states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateMapping {
    /// Semi-periphery counts as periphery (two main clusters).
    #[default]
    TwoState,
    /// Semi-periphery kept as a distinct state.
    ThreeState,
}

fn state_of(position: Position, mapping: StateMapping) -> State {
    match (position, mapping) {
        (Position::Core, _) => State::Core,
        (Position::Bridge, _) => State::Bridge,
        (Position::Periphery, _) => State::Periphery,
        (Position::SemiPeriphery, StateMapping::TwoState) => State::Periphery,
        (Position::SemiPeriphery, StateMapping::ThreeState) => State::SemiPeriphery,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryType {
    Entries,
    Peripheral,
    Internal,
    Borderline,
    Alienations,
    Mixed,
}

impl TrajectoryType {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryType::Entries => "entries",
            TrajectoryType::Peripheral => "peripheral",
            TrajectoryType::Internal => "internal",
            TrajectoryType::Borderline => "borderline",
            TrajectoryType::Alienations => "alienations",
            TrajectoryType::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Foothold,
    Switch,
    Alienation,
}

impl Perspective {
    pub fn as_str(self) -> &'static str {
        match self {
            Perspective::Foothold => "foothold",
            Perspective::Switch => "switch",
            Perspective::Alienation => "alienation",
        }
    }
}

/// One actor's position sequence with its trajectory classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRecord {
    pub actor: String,
    pub states: Vec<State>,
    pub trajectory_type: TrajectoryType,
    pub perspectives: BTreeSet<Perspective>,
}

/// Classifies a state sequence. Rules, applied in order:
/// 1. any `B` state: borderline;
/// 2. first state `NA`: entries (newcomer to the active set);
/// 3. all active states core: internal;
/// 4. all active states periphery: peripheral;
/// 5. final state `NA` with mixed active states: alienations;
/// 6. otherwise mixed.
///
/// Perspectives are independent of the type: foothold when all active
/// states are equal, switch when consecutive active states differ,
/// alienation when an `NA` follows an active state.
pub fn classify_trajectory(states: &[State]) -> Result<(TrajectoryType, BTreeSet<Perspective>)> {
    let active: Vec<State> = states.iter().copied().filter(|s| s.is_active()).collect();
    if active.is_empty() {
        return Err(Error::InvalidInput("trajectory has no active state".into()));
    }

    let ttype = if states.contains(&State::Bridge) {
        TrajectoryType::Borderline
    } else if states[0] == State::Na {
        TrajectoryType::Entries
    } else if active.iter().all(|&s| s == State::Core) {
        TrajectoryType::Internal
    } else if active.iter().all(|&s| s == State::Periphery) {
        TrajectoryType::Peripheral
    } else if *states.last().expect("nonempty") == State::Na {
        TrajectoryType::Alienations
    } else {
        TrajectoryType::Mixed
    };

    let mut perspectives = BTreeSet::new();
    if active.iter().all(|&s| s == active[0]) {
        perspectives.insert(Perspective::Foothold);
    }
    if active.windows(2).any(|w| w[0] != w[1]) {
        perspectives.insert(Perspective::Switch);
    }
    let first_active = states.iter().position(|s| s.is_active()).expect("has active");
    if states[first_active..].contains(&State::Na) {
        perspectives.insert(Perspective::Alienation);
    }
    Ok((ttype, perspectives))
}

/// Builds classified trajectory records for every actor of `universe`
/// from a sequence of per-period blockmodels.
pub fn build_trajectories(
    models: &[BlockModel],
    universe: &[String],
    mapping: StateMapping,
) -> Result<Vec<TrajectoryRecord>> {
    for m in models {
        for actor in m.partition.units() {
            if !universe.contains(actor) {
                return Err(Error::InvalidInput(alloc::format!(
                    "actor {actor:?} present in a model but missing from the universe"
                )));
            }
        }
    }
    let mut records = Vec::with_capacity(universe.len());
    for actor in universe {
        let states: Vec<State> = models
            .iter()
            .map(|m| match m.partition.cluster_of(actor) {
                Some(c) => state_of(m.position_of_cluster(c), mapping),
                None => State::Na,
            })
            .collect();
        let (trajectory_type, perspectives) = classify_trajectory(&states)?;
        records.push(TrajectoryRecord { actor: actor.clone(), states, trajectory_type, perspectives });
    }
    Ok(records)
}

/// Transition counts between consecutive periods over the full state
/// alphabet including `NA`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlowTable {
    /// `pairs[i]` counts transitions from period `i` to period `i + 1`.
    pub pairs: Vec<BTreeMap<(State, State), u64>>,
}

/// Counts state transitions per consecutive period pair. Incomers show
/// up as `NA -> active`, outgoers as `active -> NA`.
pub fn flow_counts(records: &[TrajectoryRecord]) -> FlowTable {
    let n_periods = records.first().map_or(0, |r| r.states.len());
    let mut pairs: Vec<BTreeMap<(State, State), u64>> =
        (0..n_periods.saturating_sub(1)).map(|_| BTreeMap::new()).collect();
    for r in records {
        for (i, w) in r.states.windows(2).enumerate() {
            *pairs[i].entry((w[0], w[1])).or_insert(0) += 1;
        }
    }
    FlowTable { pairs }
}
