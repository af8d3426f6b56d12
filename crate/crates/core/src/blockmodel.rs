//! Indirect structural-equivalence blockmodeling.
//!
//! The chain is: corrected Euclidean dissimilarity over actor profiles,
//! deterministic Ward agglomerative clustering, block density (image)
//! matrix with binary null/complete typing, position labels
//! (core / semi-periphery / periphery / bridge) and classification of
//! the global structure against the five ideal block patterns.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{OneModeNetwork, Partition};

/// Symmetric nonnegative dissimilarity matrix over an ordered actor set.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    units: Vec<String>,
    /// Row-major `n x n`, zero diagonal.
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(units: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = units.len();
        if values.len() != n * n {
            return Err(Error::InvalidInput("dissimilarity matrix shape mismatch".into()));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidInput("dissimilarity diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if v < 0.0 || v != values[j * n + i] {
                    return Err(Error::InvalidInput(
                        "dissimilarity must be symmetric and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(Self { units, values })
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn n(&self) -> usize {
        self.units.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }
}

/// Corrected Euclidean structural-equivalence dissimilarity.
///
/// `d(i,j)^2 = sum_{s != i,j} [(x_is - x_js)^2 + (x_si - x_sj)^2]
///            + p * [(x_ii - x_jj)^2 + (x_ij - x_ji)^2]`
///
/// where `x` is the weighted adjacency matrix with absent arcs as zeros.
/// `p` weighs the reciprocal-tie correction and must be 0, 1 or 2.
pub fn structural_dissimilarity(
    net: &OneModeNetwork,
    p: u8,
) -> Result<DissimilarityMatrix> {
    if net.n_actors() < 2 {
        return Err(Error::TooFewActors { n: net.n_actors(), min: 2 });
    }
    if p > 2 {
        return Err(Error::InvalidInput("correction weight p must be 0, 1 or 2".into()));
    }
    let n = net.n_actors();
    let mut x = vec![0.0f64; n * n];
    for (s, t, w) in net.arc_indices() {
        x[s * n + t] = w;
    }
    let p = p as f64;
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for s in 0..n {
                if s == i || s == j {
                    continue;
                }
                let out = x[i * n + s] - x[j * n + s];
                let inn = x[s * n + i] - x[s * n + j];
                d2 += out * out + inn * inn;
            }
            let diag = x[i * n + i] - x[j * n + j];
            let recip = x[i * n + j] - x[j * n + i];
            d2 += p * (diag * diag + recip * recip);
            let d = libm::sqrt(d2);
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DissimilarityMatrix::new(net.actors().to_vec(), values)
}

/// Ward-linkage agglomerative clustering cut at `k` clusters.
///
/// Merge ties are broken by the smallest (min unit index of A, min unit
/// index of B), so the result is fully deterministic.
pub fn agglomerative_cluster(d: &DissimilarityMatrix, k: usize) -> Result<Partition> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(Error::ClusterCountOutOfRange { k, n });
    }
    // squared distances, Lance-Williams updates for Ward linkage
    let mut dist2 = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            dist2[i * n + j] = v * v;
        }
    }
    let mut alive: Vec<bool> = vec![true; n];
    let mut size: Vec<f64> = vec![1.0; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    for _ in 0..(n - k) {
        // pick the pair (a, b) with minimal Ward distance; ties by the
        // smallest min-member indices with a's min below b's
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !alive[b] {
                    continue;
                }
                let dd = dist2[a * n + b];
                let better = match best {
                    None => true,
                    Some((ba, bb, bd)) => {
                        dd < bd
                            || (dd == bd
                                && (members[a][0], members[b][0])
                                    < (members[ba][0], members[bb][0]))
                    }
                };
                if better {
                    best = Some((a, b, dd));
                }
            }
        }
        let (a, b, dab) = best.expect("at least two clusters alive");
        let (na, nb) = (size[a], size[b]);
        for c in 0..n {
            if !alive[c] || c == a || c == b {
                continue;
            }
            let nc = size[c];
            let updated = ((na + nc) * dist2[a * n + c] + (nb + nc) * dist2[b * n + c]
                - nc * dab)
                / (na + nb + nc);
            dist2[a * n + c] = updated;
            dist2[c * n + a] = updated;
        }
        alive[b] = false;
        size[a] += size[b];
        let moved = core::mem::take(&mut members[b]);
        members[a].extend(moved);
        members[a].sort_unstable();
    }

    let mut raw = vec![0usize; n];
    let mut cluster_id = 0usize;
    for a in 0..n {
        if alive[a] {
            cluster_id += 1;
            for &m in &members[a] {
                raw[m] = cluster_id;
            }
        }
    }
    Partition::new(d.units().to_vec(), &raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockType {
    Null,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Position {
    Core,
    SemiPeriphery,
    Periphery,
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    CohesiveSubgroups,
    CorePeriphery,
    Centralized,
    Hierarchical,
    Transitive,
    Other,
}

/// A fitted blockmodel: partition, block density (image) matrix, binary
/// block types, position labels per cluster and the global structure.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    pub partition: Partition,
    /// `k x k` arc densities in `[0, 1]`.
    pub density: Vec<Vec<f64>>,
    pub block_types: Vec<Vec<BlockType>>,
    /// Label of cluster `c` at index `c - 1`.
    pub positions: Vec<Position>,
    pub structure: Structure,
}

impl BlockModel {
    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn position_of_cluster(&self, cluster: usize) -> Position {
        self.positions[cluster - 1]
    }
}

/// Computes the block density matrix and binary block types.
///
/// `density(r, c)` is the number of arcs from cluster `r` to cluster `c`
/// divided by the number of possible arcs (diagonal cells exclude
/// loops). A block is `complete` when its density reaches
/// `alpha * max(overall density, 1e-9)`, otherwise `null`. Positions and
/// structure are filled by [`label_positions`] and [`classify_structure`].
pub fn image_matrix(
    net: &OneModeNetwork,
    partition: &Partition,
    alpha: f64,
) -> Result<BlockModel> {
    if partition.units() != net.actors() {
        return Err(Error::InvalidInput("partition units must equal network actors".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput("alpha must lie strictly between 0 and 1".into()));
    }
    let k = partition.k();
    let n = net.n_actors();
    let assignment = partition.assignment();

    let mut arc_counts = vec![vec![0u64; k]; k];
    for (s, t, _) in net.arc_indices() {
        arc_counts[assignment[s] - 1][assignment[t] - 1] += 1;
    }
    let mut cluster_sizes = vec![0u64; k];
    for &a in assignment {
        cluster_sizes[a - 1] += 1;
    }

    let mut density = vec![vec![0.0f64; k]; k];
    for r in 0..k {
        for c in 0..k {
            let possible = if r == c {
                cluster_sizes[r] * cluster_sizes[r].saturating_sub(1)
            } else {
                cluster_sizes[r] * cluster_sizes[c]
            };
            density[r][c] = if possible == 0 {
                0.0
            } else {
                arc_counts[r][c] as f64 / possible as f64
            };
        }
    }

    let overall = if n > 1 {
        net.n_arcs() as f64 / (n as f64 * (n as f64 - 1.0))
    } else {
        0.0
    };
    let threshold = alpha * overall.max(1e-9);
    let block_types: Vec<Vec<BlockType>> = density
        .iter()
        .map(|row| {
            row.iter()
                .map(|&d| if d >= threshold { BlockType::Complete } else { BlockType::Null })
                .collect()
        })
        .collect();

    let mut bm = BlockModel {
        partition: partition.clone(),
        density,
        block_types,
        positions: vec![Position::Periphery; k],
        structure: Structure::Other,
    };
    label_positions(&mut bm);
    bm.structure = classify_structure(&bm);
    Ok(bm)
}

/// Assigns position labels by within-cluster density rank: highest is
/// the core, lowest the periphery, everything between semi-periphery.
/// A singleton cluster with complete row or column blocks to at least
/// half of the other clusters is relabeled bridge (at most one per model).
pub fn label_positions(bm: &mut BlockModel) {
    let k = bm.k();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        bm.density[b][b]
            .partial_cmp(&bm.density[a][a])
            .unwrap()
            .then_with(|| a.cmp(&b))
    });
    for (rank, &c) in order.iter().enumerate() {
        bm.positions[c] = if rank == 0 {
            Position::Core
        } else if rank == k - 1 {
            Position::Periphery
        } else {
            Position::SemiPeriphery
        };
    }

    if k < 2 {
        return;
    }
    let mut cluster_sizes = vec![0usize; k];
    for &a in bm.partition.assignment() {
        cluster_sizes[a - 1] += 1;
    }
    // best bridge candidate: singleton tied (complete row or column
    // block) to at least half of the other clusters
    let mut bridge: Option<(usize, usize)> = None;
    for (s, &size) in cluster_sizes.iter().enumerate() {
        if size != 1 {
            continue;
        }
        let connected = (0..k)
            .filter(|&c| c != s)
            .filter(|&c| {
                bm.block_types[s][c] == BlockType::Complete
                    || bm.block_types[c][s] == BlockType::Complete
            })
            .count();
        if 2 * connected >= k - 1 && bridge.is_none_or(|(_, best)| connected > best) {
            bridge = Some((s, connected));
        }
    }
    if let Some((s, _)) = bridge {
        bm.positions[s] = Position::Bridge;
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    fn heap(perm: &mut Vec<usize>, size: usize, out: &mut Vec<Vec<usize>>) {
        if size == 1 {
            out.push(perm.clone());
            return;
        }
        for i in 0..size {
            heap(perm, size - 1, out);
            if size.is_multiple_of(2) {
                perm.swap(i, size - 1);
            } else {
                perm.swap(0, size - 1);
            }
        }
    }
    heap(&mut perm, k, &mut out);
    out
}

fn ideal_cell(structure: Structure, r: usize, c: usize) -> BlockType {
    let complete = match structure {
        Structure::CohesiveSubgroups => r == c,
        Structure::CorePeriphery => r == 0 || c == 0,
        Structure::Centralized => (r == 0 || c == 0) && r != c,
        Structure::Hierarchical => r > c,
        Structure::Transitive => r >= c,
        Structure::Other => false,
    };
    if complete {
        BlockType::Complete
    } else {
        BlockType::Null
    }
}

/// Classifies the global structure as the nearest ideal block-type
/// pattern by Hamming distance, considering all cluster orderings.
/// Ties between distinct ideals give `Other`.
pub fn classify_structure(bm: &BlockModel) -> Structure {
    let k = bm.k();
    if k == 1 {
        return if bm.block_types[0][0] == BlockType::Complete {
            Structure::CohesiveSubgroups
        } else {
            Structure::Other
        };
    }
    let candidates = [
        Structure::CohesiveSubgroups,
        Structure::CorePeriphery,
        Structure::Centralized,
        Structure::Hierarchical,
        Structure::Transitive,
    ];
    // all orderings for small k; density-ranked ordering otherwise
    let orderings = if k <= 8 {
        permutations(k)
    } else {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| bm.density[b][b].partial_cmp(&bm.density[a][a]).unwrap());
        vec![order]
    };

    let mut best: Option<(Structure, usize)> = None;
    let mut tied = false;
    for &cand in &candidates {
        let mut min_dist = usize::MAX;
        for order in &orderings {
            let mut dist = 0;
            for r in 0..k {
                for c in 0..k {
                    if bm.block_types[order[r]][order[c]] != ideal_cell(cand, r, c) {
                        dist += 1;
                    }
                }
            }
            min_dist = min_dist.min(dist);
        }
        match best {
            None => best = Some((cand, min_dist)),
            Some((_, bd)) if min_dist < bd => {
                best = Some((cand, min_dist));
                tied = false;
            }
            Some((_, bd)) if min_dist == bd => tied = true,
            _ => {}
        }
    }
    match best {
        Some((s, _)) if !tied => s,
        _ => Structure::Other,
    }
}

/// Full indirect blockmodeling pipeline: dissimilarity, Ward clustering
/// cut at `k`, image matrix, position labels and structure label.
pub fn fit_blockmodel(
    net: &OneModeNetwork,
    k: usize,
    alpha: f64,
    p: u8,
) -> Result<BlockModel> {
    let d = structural_dissimilarity(net, p)?;
    let partition = agglomerative_cluster(&d, k)?;
    image_matrix(net, &partition, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn named(n: usize) -> Vec<String> {
        (0..n).map(|i| alloc::format!("v{i:02}")).collect()
    }

    #[test]
    fn equivalent_actors_have_zero_dissimilarity() {
        // a and b point at c and at each other symmetrically
        let mut net = OneModeNetwork::new(named(3)).unwrap();
        net.add_arc("v00", "v02", 2.0).unwrap();
        net.add_arc("v01", "v02", 2.0).unwrap();
        net.add_arc("v00", "v01", 1.0).unwrap();
        net.add_arc("v01", "v00", 1.0).unwrap();
        let d = structural_dissimilarity(&net, 1).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn hand_evaluated_correction_term() {
        // arcs a->c, b->c, a->b: only the reciprocal term differs
        let mut net = OneModeNetwork::new(named(3)).unwrap();
        net.add_arc("v00", "v02", 1.0).unwrap();
        net.add_arc("v01", "v02", 1.0).unwrap();
        net.add_arc("v00", "v01", 1.0).unwrap();
        let d1 = structural_dissimilarity(&net, 1).unwrap();
        assert!((d1.get(0, 1) - 1.0).abs() < 1e-12);
        let d0 = structural_dissimilarity(&net, 0).unwrap();
        assert_eq!(d0.get(0, 1), 0.0);
        let d2 = structural_dissimilarity(&net, 2).unwrap();
        assert!((d2.get(0, 1) - libm::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn dissimilarity_needs_two_actors() {
        let net = OneModeNetwork::new(named(1)).unwrap();
        assert!(matches!(
            structural_dissimilarity(&net, 1),
            Err(Error::TooFewActors { n: 1, min: 2 })
        ));
    }

    fn two_blob_matrix() -> DissimilarityMatrix {
        // units 0..3 close together, 4..7 close together, far apart
        let n = 8;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let same = (i < 4) == (j < 4);
                values[i * n + j] = if same { 0.1 } else { 10.0 };
            }
        }
        DissimilarityMatrix::new(named(n), values).unwrap()
    }

    #[test]
    fn ward_recovers_two_blobs() {
        let p = agglomerative_cluster(&two_blob_matrix(), 2).unwrap();
        assert_eq!(p.assignment(), &[1, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn ward_degenerate_cuts() {
        let d = two_blob_matrix();
        let singletons = agglomerative_cluster(&d, 8).unwrap();
        assert_eq!(singletons.k(), 8);
        let one = agglomerative_cluster(&d, 1).unwrap();
        assert_eq!(one.k(), 1);
        assert!(agglomerative_cluster(&d, 9).is_err());
        assert!(agglomerative_cluster(&d, 0).is_err());
    }

    fn complete_network(n: usize) -> OneModeNetwork {
        let mut net = OneModeNetwork::new(named(n)).unwrap();
        let actors: Vec<String> = net.actors().to_vec();
        for s in &actors {
            for t in &actors {
                if s != t {
                    net.add_arc(s, t, 1.0).unwrap();
                }
            }
        }
        net
    }

    #[test]
    fn complete_network_single_block() {
        let net = complete_network(4);
        let p = Partition::new(net.actors().to_vec(), &[1, 1, 1, 1]).unwrap();
        let bm = image_matrix(&net, &p, 0.5).unwrap();
        assert_eq!(bm.density, vec![vec![1.0]]);
        assert_eq!(bm.structure, Structure::CohesiveSubgroups);
    }

    #[test]
    fn planted_core_periphery_densities() {
        // core v00..v02 fully interlinked; v03..v05 each one arc to a core actor
        let mut net = OneModeNetwork::new(named(6)).unwrap();
        for s in 0..3 {
            for t in 0..3 {
                if s != t {
                    net.add_arc(&alloc::format!("v0{s}"), &alloc::format!("v0{t}"), 1.0).unwrap();
                }
            }
        }
        net.add_arc("v03", "v00", 1.0).unwrap();
        net.add_arc("v04", "v01", 1.0).unwrap();
        net.add_arc("v05", "v02", 1.0).unwrap();
        let p = Partition::new(net.actors().to_vec(), &[1, 1, 1, 2, 2, 2]).unwrap();
        let bm = image_matrix(&net, &p, 0.5).unwrap();
        assert_eq!(bm.density[0][0], 1.0);
        assert_eq!(bm.density[1][1], 0.0);
        assert_eq!(bm.positions, vec![Position::Core, Position::Periphery]);
    }

    #[test]
    fn reciprocal_core_periphery_classifies() {
        // periphery tied to the core in both directions
        let mut net = OneModeNetwork::new(named(6)).unwrap();
        for s in 0..3 {
            for t in 0..3 {
                if s != t {
                    net.add_arc(&alloc::format!("v0{s}"), &alloc::format!("v0{t}"), 1.0).unwrap();
                }
            }
        }
        for p in 3..6 {
            net.add_arc(&alloc::format!("v0{p}"), "v00", 1.0).unwrap();
            net.add_arc("v00", &alloc::format!("v0{p}"), 1.0).unwrap();
        }
        let part = Partition::new(net.actors().to_vec(), &[1, 1, 1, 2, 2, 2]).unwrap();
        let bm = image_matrix(&net, &part, 0.5).unwrap();
        assert_eq!(bm.structure, Structure::CorePeriphery);
    }

    #[test]
    fn star_center_is_bridge() {
        let mut net = OneModeNetwork::new(named(5)).unwrap();
        for t in 1..5 {
            net.add_arc("v00", &alloc::format!("v0{t}"), 1.0).unwrap();
        }
        let p = Partition::new(net.actors().to_vec(), &[1, 2, 2, 2, 2]).unwrap();
        let bm = image_matrix(&net, &p, 0.5).unwrap();
        assert_eq!(bm.position_of_cluster(1), Position::Bridge);
    }

    #[test]
    fn three_cluster_labels() {
        let mut bm = BlockModel {
            partition: Partition::new(named(6), &[1, 1, 2, 2, 3, 3]).unwrap(),
            density: vec![
                vec![0.4, 0.0, 0.0],
                vec![0.0, 0.9, 0.0],
                vec![0.0, 0.0, 0.02],
            ],
            block_types: vec![vec![BlockType::Null; 3]; 3],
            positions: vec![Position::Periphery; 3],
            structure: Structure::Other,
        };
        label_positions(&mut bm);
        assert_eq!(
            bm.positions,
            vec![Position::SemiPeriphery, Position::Core, Position::Periphery]
        );
    }

    fn types_model(types: Vec<Vec<BlockType>>) -> BlockModel {
        let k = types.len();
        let raw: Vec<usize> = (1..=k).collect();
        BlockModel {
            partition: Partition::new(named(k), &raw).unwrap(),
            density: vec![vec![0.0; k]; k],
            block_types: types,
            positions: vec![Position::Periphery; k],
            structure: Structure::Other,
        }
    }

    use BlockType::{Complete as C, Null as N};

    #[test]
    fn taxonomy_core_periphery() {
        let bm = types_model(vec![vec![C, C], vec![C, N]]);
        assert_eq!(classify_structure(&bm), Structure::CorePeriphery);
    }

    #[test]
    fn taxonomy_cohesive() {
        let bm = types_model(vec![vec![C, N], vec![N, C]]);
        assert_eq!(classify_structure(&bm), Structure::CohesiveSubgroups);
    }

    #[test]
    fn taxonomy_hierarchical() {
        let bm = types_model(vec![vec![N, N], vec![C, N]]);
        assert_eq!(classify_structure(&bm), Structure::Hierarchical);
    }

    #[test]
    fn taxonomy_invariant_under_relabeling() {
        // same pattern with the cluster order swapped
        let bm = types_model(vec![vec![N, C], vec![N, N]]);
        assert_eq!(classify_structure(&bm), Structure::Hierarchical);
    }

    #[test]
    fn taxonomy_k1() {
        let bm = types_model(vec![vec![C]]);
        assert_eq!(classify_structure(&bm), Structure::CohesiveSubgroups);
        let bm = types_model(vec![vec![N]]);
        assert_eq!(classify_structure(&bm), Structure::Other);
    }

    #[test]
    fn zero_dissimilarity_pair_stays_together() {
        let mut net = OneModeNetwork::new(named(5)).unwrap();
        // v00 and v01 structurally equivalent
        for t in ["v02", "v03"] {
            net.add_arc("v00", t, 1.0).unwrap();
            net.add_arc("v01", t, 1.0).unwrap();
        }
        net.add_arc("v04", "v02", 3.0).unwrap();
        let d = structural_dissimilarity(&net, 1).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        for k in 1..=4 {
            let p = agglomerative_cluster(&d, k).unwrap();
            assert_eq!(p.cluster_of("v00"), p.cluster_of("v01"), "k={k}");
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let net = complete_network(6);
        let a = fit_blockmodel(&net, 2, 0.5, 1).unwrap();
        let b = fit_blockmodel(&net, 2, 0.5, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.partition.units()[0], "v00".to_string());
    }
}
