//! Planted core-periphery generators, static and temporal, used as
//! ground-truth oracles for the blockmodeling, stability and trajectory
//! modules. Everything is a pure function of the seed.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{OneModeNetwork, Partition};
use crate::trajectory::{Perspective, State, TrajectoryRecord, TrajectoryType};

/// Arc probabilities per ordered block pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockDensities {
    pub core_core: f64,
    pub core_periphery: f64,
    pub periphery_core: f64,
    pub periphery_periphery: f64,
}

/// Membership churn rates applied at each period transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Churn {
    pub incomer_rate: f64,
    pub outgoer_rate: f64,
    pub switch_rate: f64,
}

impl Churn {
    pub const NONE: Churn = Churn { incomer_rate: 0.0, outgoer_rate: 0.0, switch_rate: 0.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_actors: usize,
    pub core_fraction: f64,
    pub densities: BlockDensities,
    pub n_periods: usize,
    pub churn: Churn,
    /// Mean of the geometric arc-weight distribution; 1 gives binary arcs.
    pub weight_mean: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn core_size(&self) -> usize {
        libm::round(self.core_fraction * self.n_actors as f64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [
            self.densities.core_core,
            self.densities.core_periphery,
            self.densities.periphery_core,
            self.densities.periphery_periphery,
            self.churn.incomer_rate,
            self.churn.outgoer_rate,
            self.churn.switch_rate,
            self.core_fraction,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::DegenerateConfig("probabilities and rates must lie in [0, 1]".into()));
        }
        if self.n_actors < 4 {
            return Err(Error::DegenerateConfig("need at least 4 actors".into()));
        }
        if self.core_size() < 2 {
            return Err(Error::DegenerateConfig("core_fraction * n_actors must be at least 2".into()));
        }
        if self.weight_mean < 1.0 {
            return Err(Error::DegenerateConfig("weight_mean must be at least 1".into()));
        }
        Ok(())
    }
}

fn geometric_weight(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    if mean <= 1.0 {
        return 1.0;
    }
    let q = 1.0 / mean;
    let u: f64 = rng.gen();
    // inverse CDF of the geometric distribution on {1, 2, ...}
    1.0 + libm::floor(libm::log(1.0 - u) / libm::log(1.0 - q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Block {
    Core,
    Periphery,
}

fn block_probability(d: &BlockDensities, from: Block, to: Block) -> f64 {
    match (from, to) {
        (Block::Core, Block::Core) => d.core_core,
        (Block::Core, Block::Periphery) => d.core_periphery,
        (Block::Periphery, Block::Core) => d.periphery_core,
        (Block::Periphery, Block::Periphery) => d.periphery_periphery,
    }
}

fn draw_network(
    rng: &mut ChaCha8Rng,
    actors: &[(String, Block)],
    densities: &BlockDensities,
    weight_mean: f64,
) -> Result<OneModeNetwork> {
    let ids: Vec<String> = actors.iter().map(|(id, _)| id.clone()).collect();
    let mut net = OneModeNetwork::new(ids)?;
    for (i, (src, sb)) in actors.iter().enumerate() {
        for (j, (dst, tb)) in actors.iter().enumerate() {
            if i == j {
                continue;
            }
            let p = block_probability(densities, *sb, *tb);
            if rng.gen::<f64>() < p {
                net.add_arc(src, dst, geometric_weight(rng, weight_mean))?;
            }
        }
    }
    Ok(net)
}

fn truth_partition(actors: &[(String, Block)]) -> Result<Partition> {
    let units: Vec<String> = actors.iter().map(|(id, _)| id.clone()).collect();
    let raw: Vec<usize> =
        actors.iter().map(|(_, b)| if *b == Block::Core { 1 } else { 2 }).collect();
    Partition::new(units, &raw)
}

/// Draws one planted core-periphery network and its ground-truth
/// 2-partition. Deterministic per seed.
pub fn generate_planted(cfg: &SynthConfig) -> Result<(OneModeNetwork, Partition)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let actors = initial_actors(cfg);
    let net = draw_network(&mut rng, &actors, &cfg.densities, cfg.weight_mean)?;
    Ok((net, truth_partition(&actors)?))
}

fn initial_actors(cfg: &SynthConfig) -> Vec<(String, Block)> {
    let core_n = cfg.core_size();
    (0..cfg.n_actors)
        .map(|i| {
            let block = if i < core_n { Block::Core } else { Block::Periphery };
            (alloc::format!("a{i:04}"), block)
        })
        .collect()
}

/// Everything the temporal generator knows: per-period networks and
/// ground-truth partitions, plus trajectory records labeled from the
/// generator's own churn bookkeeping (independently of
/// [`classify_trajectory`](crate::trajectory::classify_trajectory)).
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalTruth {
    pub networks: Vec<OneModeNetwork>,
    pub partitions: Vec<Partition>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub universe: Vec<String>,
}

struct ActorHistory {
    id: String,
    joined_at: usize,
    /// First period the actor is no longer active, or n_periods.
    left_at: usize,
    blocks: Vec<Block>,
    n_switches: usize,
}

/// Generates a sequence of planted networks with membership churn.
///
/// Per period transition: each active actor leaves with the outgoer
/// rate, each survivor switches block with the switch rate, and
/// `round(incomer_rate * n_actors)` incomers join (periphery with
/// probability 0.9, core otherwise). Arcs are redrawn every period.
pub fn generate_temporal(cfg: &SynthConfig) -> Result<TemporalTruth> {
    cfg.validate()?;
    if cfg.n_periods < 2 {
        return Err(Error::DegenerateConfig("n_periods must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut active: Vec<(String, Block)> = initial_actors(cfg);
    let mut histories: Vec<ActorHistory> = active
        .iter()
        .map(|(id, b)| ActorHistory {
            id: id.clone(),
            joined_at: 0,
            left_at: cfg.n_periods,
            blocks: alloc::vec![*b],
            n_switches: 0,
        })
        .collect();
    let mut next_id = cfg.n_actors;

    let mut networks = Vec::with_capacity(cfg.n_periods);
    let mut partitions = Vec::with_capacity(cfg.n_periods);

    for t in 0..cfg.n_periods {
        if t > 0 {
            // outgoers, then switches, then incomers
            let mut survivors = Vec::with_capacity(active.len());
            for (id, block) in active.drain(..) {
                if rng.gen::<f64>() < cfg.churn.outgoer_rate {
                    let h = histories.iter_mut().find(|h| h.id == id).expect("known actor");
                    h.left_at = t;
                } else {
                    survivors.push((id, block));
                }
            }
            for (id, block) in &mut survivors {
                if rng.gen::<f64>() < cfg.churn.switch_rate {
                    *block = match block {
                        Block::Core => Block::Periphery,
                        Block::Periphery => Block::Core,
                    };
                    let h = histories.iter_mut().find(|h| &h.id == id).expect("known actor");
                    h.n_switches += 1;
                }
                let h = histories.iter_mut().find(|h| &h.id == id).expect("known actor");
                h.blocks.push(*block);
            }
            let n_incomers = libm::round(cfg.churn.incomer_rate * cfg.n_actors as f64) as usize;
            for _ in 0..n_incomers {
                let block =
                    if rng.gen::<f64>() < 0.9 { Block::Periphery } else { Block::Core };
                let id = alloc::format!("a{next_id:04}");
                next_id += 1;
                survivors.push((id.clone(), block));
                histories.push(ActorHistory {
                    id,
                    joined_at: t,
                    left_at: cfg.n_periods,
                    blocks: alloc::vec![block],
                    n_switches: 0,
                });
            }
            active = survivors;
        }
        let n_core = active.iter().filter(|(_, b)| *b == Block::Core).count();
        if n_core == 0 {
            return Err(Error::DegenerateConfig(alloc::format!(
                "churn emptied the core at period {}",
                t + 1
            )));
        }
        networks.push(draw_network(&mut rng, &active, &cfg.densities, cfg.weight_mean)?);
        partitions.push(truth_partition(&active)?);
    }

    let universe: Vec<String> = histories.iter().map(|h| h.id.clone()).collect();
    let trajectories = histories.iter().map(|h| label_history(h, cfg.n_periods)).collect();
    Ok(TemporalTruth { networks, partitions, trajectories, universe })
}

/// Labels one actor's churn history. Activity is contiguous
/// (`joined_at..left_at`), so the labels follow directly from the join,
/// leave and switch events.
fn label_history(h: &ActorHistory, n_periods: usize) -> TrajectoryRecord {
    let mut states = Vec::with_capacity(n_periods);
    for t in 0..n_periods {
        if t < h.joined_at || t >= h.left_at {
            states.push(State::Na);
        } else {
            states.push(match h.blocks[t - h.joined_at] {
                Block::Core => State::Core,
                Block::Periphery => State::Periphery,
            });
        }
    }

    let blocks_seen: BTreeSet<Block> =
        h.blocks.iter().take(h.left_at - h.joined_at).copied().collect();
    let trajectory_type = if h.joined_at > 0 {
        TrajectoryType::Entries
    } else if blocks_seen.len() == 1 && blocks_seen.contains(&Block::Core) {
        TrajectoryType::Internal
    } else if blocks_seen.len() == 1 {
        TrajectoryType::Peripheral
    } else if h.left_at < n_periods {
        TrajectoryType::Alienations
    } else {
        TrajectoryType::Mixed
    };

    let mut perspectives = BTreeSet::new();
    if h.n_switches == 0 {
        perspectives.insert(Perspective::Foothold);
    } else {
        perspectives.insert(Perspective::Switch);
    }
    if h.left_at < n_periods {
        perspectives.insert(Perspective::Alienation);
    }

    TrajectoryRecord { actor: h.id.clone(), states, trajectory_type, perspectives }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::classify_trajectory;

    fn cfg() -> SynthConfig {
        SynthConfig {
            n_actors: 20,
            core_fraction: 0.2,
            densities: BlockDensities {
                core_core: 0.8,
                core_periphery: 0.4,
                periphery_core: 0.4,
                periphery_periphery: 0.05,
            },
            n_periods: 4,
            churn: Churn { incomer_rate: 0.1, outgoer_rate: 0.1, switch_rate: 0.1 },
            weight_mean: 3.0,
            seed: 7,
        }
    }

    #[test]
    fn all_one_densities_give_complete_network() {
        let mut c = cfg();
        c.densities = BlockDensities {
            core_core: 1.0,
            core_periphery: 1.0,
            periphery_core: 1.0,
            periphery_periphery: 1.0,
        };
        let (net, _) = generate_planted(&c).unwrap();
        assert_eq!(net.n_arcs(), 20 * 19);
    }

    #[test]
    fn all_zero_densities_give_empty_network() {
        let mut c = cfg();
        c.densities = BlockDensities {
            core_core: 0.0,
            core_periphery: 0.0,
            periphery_core: 0.0,
            periphery_periphery: 0.0,
        };
        let (net, _) = generate_planted(&c).unwrap();
        assert_eq!(net.n_arcs(), 0);
    }

    #[test]
    fn planted_is_deterministic_per_seed() {
        let a = generate_planted(&cfg()).unwrap();
        let b = generate_planted(&cfg()).unwrap();
        assert_eq!(a, b);
        let mut other = cfg();
        other.seed = 8;
        assert_ne!(generate_planted(&other).unwrap(), a);
    }

    #[test]
    fn degenerate_core_rejected() {
        let mut c = cfg();
        c.core_fraction = 0.01;
        assert!(matches!(generate_planted(&c), Err(Error::DegenerateConfig(_))));
    }

    #[test]
    fn zero_churn_gives_identical_partitions_all_foothold() {
        let mut c = cfg();
        c.churn = Churn::NONE;
        let truth = generate_temporal(&c).unwrap();
        for p in &truth.partitions[1..] {
            assert_eq!(p, &truth.partitions[0]);
        }
        for r in &truth.trajectories {
            assert!(r.perspectives.contains(&Perspective::Foothold), "{:?}", r);
            assert_eq!(r.perspectives.len(), 1);
        }
    }

    #[test]
    fn unit_sets_change_with_churn() {
        let truth = generate_temporal(&cfg()).unwrap();
        let sets: Vec<usize> = truth.partitions.iter().map(|p| p.n_units()).collect();
        assert!(truth.universe.len() > cfg().n_actors || sets.iter().any(|&s| s != sets[0]));
    }

    #[test]
    fn truth_labels_match_rule_classification() {
        for seed in 0..5 {
            let mut c = cfg();
            c.seed = seed;
            let truth = generate_temporal(&c).unwrap();
            for r in &truth.trajectories {
                let (t, p) = classify_trajectory(&r.states).unwrap();
                assert_eq!((t, &p), (r.trajectory_type, &r.perspectives), "seed {seed} {r:?}");
            }
        }
    }
}
