//! Projections from activity logs and two-mode networks to directed
//! actor-actor networks, plus reduction and weight normalization.
//!
//! Arcs always point from the actor performing the action (commenter or
//! reactor) to the owner of the target publication. The raw two-mode
//! matrix product yields the transpose of this orientation, so callers
//! of [`multiply_two_mode`] composing the product chain must transpose
//! the result themselves; [`comment_network`] and [`reaction_network`]
//! already emit the commenter/reactor -> owner orientation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ingest::{ActivityLog, RecordKind};
use crate::netmodel::{OneModeNetwork, TwoModeNetwork};

/// Sparse matrix product of two two-mode networks: `(i, k)` entry is
/// the sum over shared middle units of `X(i, j) * Y(j, k)`. Zero results
/// are omitted.
pub fn multiply_two_mode(x: &TwoModeNetwork, y: &TwoModeNetwork) -> Result<TwoModeNetwork> {
    if x.col_units() != y.row_units() {
        return Err(Error::InvalidInput(
            "column units of X must equal row units of Y".into(),
        ));
    }
    let mut product = TwoModeNetwork::new(x.row_units().to_vec(), y.col_units().to_vec())?;
    let mut y_by_row: BTreeMap<&str, Vec<(&str, u64)>> = BTreeMap::new();
    for (j, k, w) in y.entries() {
        y_by_row.entry(j).or_default().push((k, w));
    }
    for (i, j, wx) in x.entries() {
        if let Some(row) = y_by_row.get(j) {
            for (k, wy) in row {
                product.add_count(i, k, wx * wy)?;
            }
        }
    }
    Ok(product)
}

fn interaction_network(
    slice: &ActivityLog,
    context: &ActivityLog,
    kind: RecordKind,
    binarize: bool,
) -> Result<OneModeNetwork> {
    let actors: Vec<String> = slice.actors().iter().cloned().collect();
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for r in slice.records() {
        if r.kind != kind {
            continue;
        }
        let Some(parent_id) = &r.parent_id else { continue };
        let parent = slice.get(parent_id).or_else(|| context.get(parent_id));
        let Some(parent) = parent else { continue };
        if parent.author_id == r.author_id {
            continue; // loop removal
        }
        *counts.entry((r.author_id.clone(), parent.author_id.clone())).or_insert(0) += 1;
    }
    let mut net = OneModeNetwork::new(actors)?;
    for ((u, v), c) in counts {
        if !net.contains(&v) {
            // parent author only active in an earlier period: skip, the
            // arc target is outside this slice's actor set
            continue;
        }
        let w = if binarize { 1.0 } else { c as f64 };
        net.add_arc(&u, &v, w)?;
    }
    Ok(net)
}

/// Directed network of commenting: arc `u -> v` weighted by the number
/// of comments `u` attached to publications of `v`. Loops are removed;
/// weights are preserved.
pub fn comment_network(log: &ActivityLog) -> Result<OneModeNetwork> {
    interaction_network(log, log, RecordKind::Comment, false)
}

/// Like [`comment_network`], but parent publications may also be
/// resolved from `context` (e.g. the full log when `slice` is one period).
pub fn comment_network_with_context(
    slice: &ActivityLog,
    context: &ActivityLog,
) -> Result<OneModeNetwork> {
    interaction_network(slice, context, RecordKind::Comment, false)
}

/// Directed network of reacting: arc `u -> v` present iff `u` gave at
/// least one reaction to any publication of `v`; all weights are set
/// to 1. Loops are removed.
pub fn reaction_network(log: &ActivityLog) -> Result<OneModeNetwork> {
    interaction_network(log, log, RecordKind::Reaction, true)
}

/// Like [`reaction_network`] with parent resolution falling back to `context`.
pub fn reaction_network_with_context(
    slice: &ActivityLog,
    context: &ActivityLog,
) -> Result<OneModeNetwork> {
    interaction_network(slice, context, RecordKind::Reaction, true)
}

/// Keeps the `top_n` actors by total strength (weighted in-degree plus
/// weighted out-degree), ties broken by actor id, and returns the
/// induced subnetwork. The boolean is a warning flag set when `top_n`
/// exceeds the actor count (the network is returned unchanged).
pub fn reduce_network(net: &OneModeNetwork, top_n: usize) -> Result<(OneModeNetwork, bool)> {
    if top_n == 0 {
        return Err(Error::InvalidInput("top_n must be at least 1".into()));
    }
    if top_n >= net.n_actors() {
        return Ok((net.clone(), top_n > net.n_actors()));
    }
    let mut ranked: Vec<(&str, f64)> =
        net.actors().iter().map(|a| (a.as_str(), net.total_strength(a))).collect();
    ranked.sort_by(|(a, sa), (b, sb)| sb.partial_cmp(sa).unwrap().then_with(|| a.cmp(b)));
    let keep: Vec<&str> = ranked.iter().take(top_n).map(|(a, _)| *a).collect();
    Ok((net.induced(&keep)?, false))
}

/// Replaces every arc weight `w` by `ln(1 + w)`. Topology is unchanged.
pub fn log_normalize(net: &OneModeNetwork) -> Result<OneModeNetwork> {
    let mut out = OneModeNetwork::new(net.actors().to_vec())?;
    for (s, t, w) in net.arcs() {
        out.add_arc(s, t, libm::log1p(w))?;
    }
    Ok(out)
}
