//! Partition-agreement scores across periods with non-equal unit sets.
//!
//! Units present in only one of the two partitions (incomers and
//! outgoers) are excluded from the pair-counting table and reported
//! separately; the score is computed on the shared units only.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::Partition;

/// Cross-tabulation of two partitions over their shared units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub shared_units: Vec<String>,
    /// `counts[r][c]` = number of shared units in cluster `r+1` of the
    /// first partition and cluster `c+1` of the second.
    pub counts: Vec<Vec<u64>>,
    pub row_marginals: Vec<u64>,
    pub col_marginals: Vec<u64>,
    /// Units only in the second partition.
    pub incomers: Vec<String>,
    /// Units only in the first partition.
    pub outgoers: Vec<String>,
}

/// Builds the shared-unit contingency table of two partitions.
pub fn contingency(p1: &Partition, p2: &Partition) -> Result<ContingencyTable> {
    let mut shared = Vec::new();
    let mut outgoers = Vec::new();
    for u in p1.units() {
        if p2.cluster_of(u).is_some() {
            shared.push(u.clone());
        } else {
            outgoers.push(u.clone());
        }
    }
    let incomers: Vec<String> =
        p2.units().iter().filter(|u| p1.cluster_of(u).is_none()).cloned().collect();
    if shared.len() < 2 {
        return Err(Error::InvalidInput(alloc::format!(
            "partitions share only {} units, need at least 2",
            shared.len()
        )));
    }
    let mut counts = alloc::vec![alloc::vec![0u64; p2.k()]; p1.k()];
    for u in &shared {
        let r = p1.cluster_of(u).expect("shared unit in p1") - 1;
        let c = p2.cluster_of(u).expect("shared unit in p2") - 1;
        counts[r][c] += 1;
    }
    let row_marginals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let col_marginals: Vec<u64> =
        (0..p2.k()).map(|c| counts.iter().map(|row| row[c]).sum()).collect();
    Ok(ContingencyTable { shared_units: shared, counts, row_marginals, col_marginals, incomers, outgoers })
}

/// A partition-agreement score plus a degeneracy flag (set when both
/// restricted partitions are trivial and the index is defined as 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    pub value: f64,
    pub degenerate: bool,
}

/// Scores agreement between two partitions over possibly non-equal
/// unit sets. The default implementation is [`AdjustedRand`]; variants
/// with different treatment of incomers and outgoers can plug in here.
pub trait PartitionScorer {
    fn score(&self, p1: &Partition, p2: &Partition) -> Result<StabilityScore>;
}

/// Chance-adjusted Rand index computed over the shared-unit
/// contingency table: 1 for identical restricted partitions, about 0
/// for independent ones.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdjustedRand;

fn choose2(n: u64) -> f64 {
    (n as f64) * ((n as f64) - 1.0) / 2.0
}

impl PartitionScorer for AdjustedRand {
    fn score(&self, p1: &Partition, p2: &Partition) -> Result<StabilityScore> {
        let table = contingency(p1, p2)?;
        let n = table.shared_units.len() as u64;
        let sum_cells: f64 = table.counts.iter().flatten().map(|&c| choose2(c)).sum();
        let sum_rows: f64 = table.row_marginals.iter().map(|&m| choose2(m)).sum();
        let sum_cols: f64 = table.col_marginals.iter().map(|&m| choose2(m)).sum();
        let expected = sum_rows * sum_cols / choose2(n);
        let max_index = 0.5 * (sum_rows + sum_cols);
        let denom = max_index - expected;
        if denom.abs() < 1e-12 {
            // both restricted partitions trivial (single cluster or all
            // singletons): identical by definition
            return Ok(StabilityScore { value: 1.0, degenerate: true });
        }
        Ok(StabilityScore { value: (sum_cells - expected) / denom, degenerate: false })
    }
}

/// Scores two partitions with the default scorer.
pub fn modified_rand(p1: &Partition, p2: &Partition) -> Result<StabilityScore> {
    AdjustedRand.score(p1, p2)
}

/// How the pairwise scores of a partition sequence are aggregated into
/// one series score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregate {
    ConsecutiveMean,
    AllPairsMean,
    Min,
}

/// Pairwise stability matrix plus the aggregated series score.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySeries {
    /// `scores[i][j]` for all ordered pairs, diagonal = 1.
    pub scores: Vec<Vec<f64>>,
    pub series: f64,
    pub aggregate: Aggregate,
}

/// Scores all period pairs of a partition sequence and aggregates the
/// consecutive pairs (or all pairs / minimum) into a series score.
pub fn stability_series(
    partitions: &[Partition],
    aggregate: Aggregate,
    scorer: &dyn PartitionScorer,
) -> Result<StabilitySeries> {
    let m = partitions.len();
    if m < 2 {
        return Err(Error::InvalidInput("need at least 2 partitions".into()));
    }
    let mut scores = alloc::vec![alloc::vec![1.0f64; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let s = scorer.score(&partitions[i], &partitions[j])?.value;
            scores[i][j] = s;
            scores[j][i] = s;
        }
    }
    let consecutive: Vec<f64> = (0..m - 1).map(|i| scores[i][i + 1]).collect();
    let series = match aggregate {
        Aggregate::ConsecutiveMean => consecutive.iter().sum::<f64>() / consecutive.len() as f64,
        Aggregate::AllPairsMean => {
            let mut acc = 0.0;
            let mut count = 0usize;
            for (i, row) in scores.iter().enumerate() {
                for &s in &row[i + 1..] {
                    acc += s;
                    count += 1;
                }
            }
            acc / count as f64
        }
        Aggregate::Min => consecutive.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
    };
    Ok(StabilitySeries { scores, series, aggregate })
}
