//! Network and partition types plus the Pajek text codec.
//!
//! All types are immutable after construction and keep their unit sets in
//! an explicit order, so serialization is deterministic and ids survive
//! across period files.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};

fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains('"') || label.chars().any(|c| c.is_control()) {
        return Err(Error::InvalidInput(format!(
            "unit label {label:?} must be non-empty and free of quotes and control characters"
        )));
    }
    Ok(())
}

/// Sparse nonnegative count matrix between two disjoint unit sets
/// (e.g. authors x publications).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoModeNetwork {
    row_units: Vec<String>,
    col_units: Vec<String>,
    row_index: BTreeMap<String, usize>,
    col_index: BTreeMap<String, usize>,
    weights: BTreeMap<(usize, usize), u64>,
}

impl TwoModeNetwork {
    pub fn new(row_units: Vec<String>, col_units: Vec<String>) -> Result<Self> {
        let mut row_index = BTreeMap::new();
        for (i, u) in row_units.iter().enumerate() {
            validate_label(u)?;
            if row_index.insert(u.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate row unit {u:?}")));
            }
        }
        let mut col_index = BTreeMap::new();
        for (i, u) in col_units.iter().enumerate() {
            validate_label(u)?;
            if col_index.insert(u.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate column unit {u:?}")));
            }
        }
        Ok(Self { row_units, col_units, row_index, col_index, weights: BTreeMap::new() })
    }

    /// Adds `count` to the (row, col) cell. Units must already exist.
    pub fn add_count(&mut self, row: &str, col: &str, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let r = *self
            .row_index
            .get(row)
            .ok_or_else(|| Error::InvalidInput(format!("unknown row unit {row:?}")))?;
        let c = *self
            .col_index
            .get(col)
            .ok_or_else(|| Error::InvalidInput(format!("unknown column unit {col:?}")))?;
        *self.weights.entry((r, c)).or_insert(0) += count;
        Ok(())
    }

    pub fn row_units(&self) -> &[String] {
        &self.row_units
    }

    pub fn col_units(&self) -> &[String] {
        &self.col_units
    }

    pub fn weight(&self, row: &str, col: &str) -> u64 {
        match (self.row_index.get(row), self.col_index.get(col)) {
            (Some(&r), Some(&c)) => self.weights.get(&(r, c)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Nonzero cells in (row index, col index) order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.weights
            .iter()
            .map(move |(&(r, c), &w)| (self.row_units[r].as_str(), self.col_units[c].as_str(), w))
    }

    pub fn n_entries(&self) -> usize {
        self.weights.len()
    }
}

/// Directed weighted actor-actor network. Arc weights are strictly
/// positive; absent arcs are zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct OneModeNetwork {
    actors: Vec<String>,
    index: BTreeMap<String, usize>,
    arcs: BTreeMap<(usize, usize), f64>,
}

impl OneModeNetwork {
    pub fn new(actors: Vec<String>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, a) in actors.iter().enumerate() {
            validate_label(a)?;
            if index.insert(a.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate actor {a:?}")));
            }
        }
        Ok(Self { actors, index, arcs: BTreeMap::new() })
    }

    /// Sets the weight of the arc `source -> target`. Loops and
    /// nonpositive weights are rejected.
    pub fn add_arc(&mut self, source: &str, target: &str, weight: f64) -> Result<()> {
        if weight.is_nan() || weight <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "arc {source:?} -> {target:?} has nonpositive weight {weight}"
            )));
        }
        let s = self.actor_index(source)?;
        let t = self.actor_index(target)?;
        if s == t {
            return Err(Error::InvalidInput(format!("loop arc on actor {source:?}")));
        }
        self.arcs.insert((s, t), weight);
        Ok(())
    }

    fn actor_index(&self, actor: &str) -> Result<usize> {
        self.index
            .get(actor)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown actor {actor:?}")))
    }

    pub fn actors(&self) -> &[String] {
        &self.actors
    }

    pub fn n_actors(&self) -> usize {
        self.actors.len()
    }

    pub fn contains(&self, actor: &str) -> bool {
        self.index.contains_key(actor)
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Weight of `source -> target`, 0 when the arc is absent.
    pub fn weight(&self, source: &str, target: &str) -> f64 {
        match (self.index.get(source), self.index.get(target)) {
            (Some(&s), Some(&t)) => self.arcs.get(&(s, t)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    pub fn weight_by_index(&self, source: usize, target: usize) -> f64 {
        self.arcs.get(&(source, target)).copied().unwrap_or(0.0)
    }

    /// Arcs in (source index, target index) order.
    pub fn arcs(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.arcs
            .iter()
            .map(move |(&(s, t), &w)| (self.actors[s].as_str(), self.actors[t].as_str(), w))
    }

    pub fn arc_indices(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.arcs.iter().map(|(&(s, t), &w)| (s, t, w))
    }

    /// Weighted out-degree plus weighted in-degree.
    pub fn total_strength(&self, actor: &str) -> f64 {
        let Some(&i) = self.index.get(actor) else { return 0.0 };
        self.arcs
            .iter()
            .filter(|(&(s, t), _)| s == i || t == i)
            .map(|(_, &w)| w)
            .sum()
    }

    /// Subnetwork induced on `keep`, preserving this network's actor order.
    /// Actors in `keep` that are not members are ignored.
    pub fn induced(&self, keep: &[&str]) -> Result<OneModeNetwork> {
        let keep_idx: alloc::collections::BTreeSet<usize> =
            keep.iter().filter_map(|a| self.index.get(*a).copied()).collect();
        let actors: Vec<String> =
            self.actors.iter().enumerate().filter(|(i, _)| keep_idx.contains(i)).map(|(_, a)| a.clone()).collect();
        let mut net = OneModeNetwork::new(actors)?;
        for (&(s, t), &w) in &self.arcs {
            if keep_idx.contains(&s) && keep_idx.contains(&t) {
                net.add_arc(&self.actors[s], &self.actors[t], w)?;
            }
        }
        Ok(net)
    }
}

/// Assignment of an ordered unit set into clusters `1..=k`. Cluster ids
/// are renumbered to consecutive integers (in order of first appearance)
/// on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    units: Vec<String>,
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Builds a partition from raw cluster labels, one per unit.
    /// Labels are renumbered to `1..=k` by first appearance.
    pub fn new(units: Vec<String>, raw_clusters: &[usize]) -> Result<Self> {
        if units.len() != raw_clusters.len() {
            return Err(Error::InvalidInput(format!(
                "{} units but {} cluster labels",
                units.len(),
                raw_clusters.len()
            )));
        }
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut assignment = Vec::with_capacity(raw_clusters.len());
        let mut next = 0usize;
        for &raw in raw_clusters {
            let id = *seen.entry(raw).or_insert_with(|| {
                next += 1;
                next
            });
            assignment.push(id);
        }
        let mut index = BTreeMap::new();
        for (i, u) in units.iter().enumerate() {
            validate_label(u)?;
            if index.insert(u.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate unit {u:?}")));
            }
        }
        Ok(Self { units, assignment, k: next })
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    /// Cluster id of a unit, if the unit belongs to this partition.
    pub fn cluster_of(&self, unit: &str) -> Option<usize> {
        self.units.iter().position(|u| u == unit).map(|i| self.assignment[i])
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Units of cluster `c` (1-based), in unit order.
    pub fn members(&self, c: usize) -> Vec<&str> {
        self.units
            .iter()
            .zip(&self.assignment)
            .filter(|(_, &a)| a == c)
            .map(|(u, _)| u.as_str())
            .collect()
    }

    /// Same assignment over a renamed unit set of equal length.
    pub fn with_units(&self, units: Vec<String>) -> Result<Self> {
        Partition::new(units, &self.assignment)
    }
}

/// Minimal decimal representation of a weight: integers without a
/// fractional part, everything else via the shortest round-trip form.
pub fn format_weight(w: f64) -> String {
    if w == libm::trunc(w) && w.abs() < 9.0e15 {
        format!("{}", w as i64)
    } else {
        format!("{w}")
    }
}

fn parse_error(line: usize, message: impl core::fmt::Display) -> Error {
    Error::Parse { line, message: message.to_string() }
}

/// Reads a directed network from Pajek `.net` text (`*Vertices` followed
/// by `*Arcs`). Unknown sections such as `*Edges` are rejected.
pub fn read_pajek_net(text: &str) -> Result<OneModeNetwork> {
    let mut lines = text.lines().enumerate();
    let (lno, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty input, expected *Vertices header"))?;
    let header = header.trim();
    let n: usize = header
        .strip_prefix("*Vertices")
        .or_else(|| header.strip_prefix("*vertices"))
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(lno + 1, format!("expected `*Vertices n`, got {header:?}")))?;

    let mut labels: Vec<Option<String>> = alloc::vec![None; n];
    let mut in_arcs = false;
    let mut arcs: Vec<(usize, usize, f64, usize)> = Vec::new();

    for (lno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('*') {
            let keyword = rest.split_whitespace().next().unwrap_or("");
            if keyword.eq_ignore_ascii_case("arcs") {
                in_arcs = true;
                continue;
            }
            return Err(parse_error(lno + 1, format!("unsupported section *{keyword}")));
        }
        if !in_arcs {
            // vertex line: `index "label"`
            let (idx_part, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_error(lno + 1, "vertex line needs `index \"label\"`"))?;
            let idx: usize = idx_part
                .parse()
                .map_err(|_| parse_error(lno + 1, format!("bad vertex index {idx_part:?}")))?;
            if idx == 0 || idx > n {
                return Err(parse_error(lno + 1, format!("vertex index {idx} out of range 1..={n}")));
            }
            let rest = rest.trim();
            let label = rest
                .strip_prefix('"')
                .and_then(|s| s.rfind('"').map(|end| &s[..end]))
                .ok_or_else(|| parse_error(lno + 1, "vertex label must be double-quoted"))?;
            if labels[idx - 1].is_some() {
                return Err(parse_error(lno + 1, format!("duplicate vertex index {idx}")));
            }
            labels[idx - 1] = Some(label.to_string());
        } else {
            let mut parts = line.split_whitespace();
            let (s, t, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(t), Some(w), None) => (s, t, w),
                _ => return Err(parse_error(lno + 1, "arc line needs `source target weight`")),
            };
            let s: usize =
                s.parse().map_err(|_| parse_error(lno + 1, format!("bad source index {s:?}")))?;
            let t: usize =
                t.parse().map_err(|_| parse_error(lno + 1, format!("bad target index {t:?}")))?;
            let w: f64 =
                w.parse().map_err(|_| parse_error(lno + 1, format!("bad weight {w:?}")))?;
            if s == 0 || s > n || t == 0 || t > n {
                return Err(parse_error(lno + 1, format!("arc endpoint out of range 1..={n}")));
            }
            if w.is_nan() || w <= 0.0 {
                return Err(parse_error(lno + 1, format!("nonpositive arc weight {w}")));
            }
            arcs.push((s, t, w, lno + 1));
        }
    }

    let actors: Vec<String> = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| parse_error(1, format!("vertex {} missing", i + 1))))
        .collect::<Result<_>>()?;
    let mut net = OneModeNetwork::new(actors)?;
    for (s, t, w, lno) in arcs {
        let (src, dst) = (net.actors[s - 1].clone(), net.actors[t - 1].clone());
        if net.weight(&src, &dst) != 0.0 {
            return Err(parse_error(lno, format!("duplicate arc {s} -> {t}")));
        }
        net.add_arc(&src, &dst, w).map_err(|e| parse_error(lno, e))?;
    }
    Ok(net)
}

/// Serializes a network as Pajek `.net` text. Output is deterministic:
/// vertices in actor order, arcs sorted by (source, target) index.
pub fn write_pajek_net(net: &OneModeNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", net.n_actors());
    for (i, a) in net.actors().iter().enumerate() {
        let _ = writeln!(out, "{} \"{}\"", i + 1, a);
    }
    if net.n_actors() > 0 {
        let _ = writeln!(out, "*Arcs");
        for (s, t, w) in net.arc_indices() {
            let _ = writeln!(out, "{} {} {}", s + 1, t + 1, format_weight(w));
        }
    }
    out
}

/// Reads a Pajek `.clu` partition. The file carries no labels, so units
/// are named positionally (`"1"`, `"2"`, ...); use
/// [`Partition::with_units`] to attach real actor ids.
pub fn read_partition_clu(text: &str) -> Result<Partition> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (lno, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty input, expected *Vertices header"))?;
    let header = header.trim();
    let n: usize = header
        .strip_prefix("*Vertices")
        .or_else(|| header.strip_prefix("*vertices"))
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_error(lno + 1, format!("expected `*Vertices n`, got {header:?}")))?;
    let mut clusters = Vec::with_capacity(n);
    for (lno, line) in lines {
        let c: usize = line
            .trim()
            .parse()
            .map_err(|_| parse_error(lno + 1, format!("non-integer cluster id {:?}", line.trim())))?;
        clusters.push(c);
    }
    if clusters.len() != n {
        return Err(parse_error(
            1,
            format!("header declares {n} vertices but {} cluster lines found", clusters.len()),
        ));
    }
    let units = (1..=n).map(|i| i.to_string()).collect();
    Partition::new(units, &clusters)
}

/// Serializes a partition as Pajek `.clu` text, one cluster id per unit
/// in unit order.
pub fn write_partition_clu(partition: &Partition) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", partition.n_units());
    for &c in partition.assignment() {
        let _ = writeln!(out, "{c}");
    }
    out
}
