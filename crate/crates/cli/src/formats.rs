//! Readers and writers for the file formats around the core types:
//! activity-log CSV, blockmodel JSON, trajectory/flow/stats CSV and the
//! block-density heatmap SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use copnet_core::blockmodel::{BlockModel, BlockType, Position, Structure};
use copnet_core::ingest::{
    ActivityLog, ActivityRecord, DanglingPolicy, RecordKind, StatsTable,
};
use copnet_core::netmodel::Partition;
use copnet_core::trajectory::{FlowTable, State, TrajectoryRecord};

/// Canonical column names; the schema mapping renames them to whatever
/// the export uses.
pub const CANONICAL_COLUMNS: [&str; 6] =
    ["record_id", "kind", "parent_id", "author_id", "timestamp", "reaction_kind"];

pub fn parse_timestamp(s: &str) -> Result<DateTime<FixedOffset>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t);
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Ok(t.and_utc().fixed_offset());
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().fixed_offset());
    }
    bail!("unparseable timestamp {s:?} (expected ISO-8601)");
}

fn parse_kind(s: &str) -> Result<RecordKind> {
    match s.to_ascii_lowercase().as_str() {
        "post" => Ok(RecordKind::Post),
        "comment" | "comment_to_post" | "comment_to_comment" => Ok(RecordKind::Comment),
        "reaction" | "like" | "love" | "wow" | "haha" | "sad" | "angry" | "thankful" => {
            Ok(RecordKind::Reaction)
        }
        _ => bail!("unknown record kind {s:?}"),
    }
}

/// Parses a delimited activity export (comma or tab, header row) into a
/// validated log. `schema` maps canonical column names to the export's
/// header names; unmapped columns keep the canonical name.
pub fn parse_activity_csv(
    text: &str,
    schema: &BTreeMap<String, String>,
    merge_reactions: bool,
    policy: DanglingPolicy,
) -> Result<ActivityLog> {
    let delimiter = if text.lines().next().is_some_and(|l| l.contains('\t')) {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();

    let mut col = BTreeMap::new();
    for canonical in CANONICAL_COLUMNS {
        let wanted = schema.get(canonical).map(String::as_str).unwrap_or(canonical);
        match headers.iter().position(|h| h == wanted) {
            Some(idx) => {
                col.insert(canonical, idx);
            }
            None if canonical == "reaction_kind" || canonical == "parent_id" => {}
            None => bail!("missing column {wanted:?} (for {canonical})"),
        }
    }

    let get = |row: &csv::StringRecord, name: &str| -> Option<String> {
        col.get(name)
            .and_then(|&i| row.get(i))
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(str::to_string)
    };

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("reading data row {}", i + 1))?;
        let record_id =
            get(&row, "record_id").with_context(|| format!("row {}: empty record_id", i + 1))?;
        let kind = parse_kind(
            &get(&row, "kind").with_context(|| format!("row {}: empty kind", i + 1))?,
        )?;
        let timestamp_raw =
            get(&row, "timestamp").with_context(|| format!("row {}: empty timestamp", i + 1))?;
        let timestamp = parse_timestamp(&timestamp_raw)
            .with_context(|| format!("row {} (record {record_id})", i + 1))?;
        let reaction_kind = if kind == RecordKind::Reaction {
            let raw = get(&row, "reaction_kind").unwrap_or_else(|| "reaction".to_string());
            Some(if merge_reactions { "reaction".to_string() } else { raw })
        } else {
            None
        };
        records.push(ActivityRecord {
            record_id,
            kind,
            parent_id: get(&row, "parent_id"),
            author_id: get(&row, "author_id")
                .with_context(|| format!("row {}: empty author_id", i + 1))?,
            timestamp,
            reaction_kind,
        });
    }
    Ok(ActivityLog::new(records, policy)?)
}

/// JSON shape of a fitted blockmodel (the `model.json` format).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockModelJson {
    pub actors: Vec<String>,
    /// Cluster id per actor, 1-based.
    pub assignment: Vec<usize>,
    pub k: usize,
    pub density: Vec<Vec<f64>>,
    pub block_types: Vec<Vec<BlockType>>,
    /// Position label of cluster `c` at index `c - 1`.
    pub positions: Vec<Position>,
    pub structure: Structure,
}

impl BlockModelJson {
    pub fn from_model(bm: &BlockModel) -> Self {
        Self {
            actors: bm.partition.units().to_vec(),
            assignment: bm.partition.assignment().to_vec(),
            k: bm.partition.k(),
            density: bm.density.clone(),
            block_types: bm.block_types.clone(),
            positions: bm.positions.clone(),
            structure: bm.structure,
        }
    }

    pub fn into_model(self) -> Result<BlockModel> {
        let partition = Partition::new(self.actors, &self.assignment)?;
        if partition.k() != self.k || self.positions.len() != self.k {
            bail!("inconsistent blockmodel JSON: k does not match assignment or positions");
        }
        Ok(BlockModel {
            partition,
            density: self.density,
            block_types: self.block_types,
            positions: self.positions,
            structure: self.structure,
        })
    }
}

pub fn write_stats_csv(stats: &StatsTable) -> String {
    let mut out = String::from(
        "period,months,posts_comments,posts_comments_per_month,\
         commenting_actors,commenting_actors_per_month,reacting_actors,reacting_actors_per_month\n",
    );
    for row in &stats.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.label,
            row.n_months,
            row.n_posts_and_comments,
            row.posts_and_comments_per_month,
            row.n_commenting_actors,
            row.commenting_actors_per_month,
            row.n_reacting_actors,
            row.reacting_actors_per_month,
        );
    }
    let _ = writeln!(
        out,
        "average,,,{},,{},,{}",
        stats.avg_posts_and_comments_per_month,
        stats.avg_commenting_actors_per_month,
        stats.avg_reacting_actors_per_month,
    );
    let _ = writeln!(
        out,
        "total,{},{},,{},,{},",
        stats.total_months,
        stats.total_posts_and_comments,
        stats.total_commenting_actors,
        stats.total_reacting_actors,
    );
    out
}

pub fn write_traj_csv(records: &[TrajectoryRecord], period_labels: &[String]) -> String {
    let mut out = String::from("actor");
    for label in period_labels {
        let _ = write!(out, ",{label}");
    }
    out.push_str(",type,perspectives\n");
    for r in records {
        let _ = write!(out, "{}", r.actor);
        for s in &r.states {
            let _ = write!(out, ",{}", s.as_str());
        }
        let perspectives: Vec<&str> = r.perspectives.iter().map(|p| p.as_str()).collect();
        let _ = writeln!(out, ",{},{}", r.trajectory_type.as_str(), perspectives.join("+"));
    }
    out
}

pub fn write_flows_csv(flows: &FlowTable, period_labels: &[String]) -> String {
    let mut out = String::from("period_pair,from,to,count\n");
    for (i, pair) in flows.pairs.iter().enumerate() {
        let label = format!("{}-{}", period_labels[i], period_labels[i + 1]);
        for ((from, to), count) in pair {
            let _ = writeln!(out, "{label},{},{},{count}", from.as_str(), to.as_str());
        }
    }
    out
}

pub fn write_truth_csv(records: &[TrajectoryRecord], n_periods: usize) -> String {
    let labels: Vec<String> = (1..=n_periods).map(|i| format!("T{i}")).collect();
    write_traj_csv(records, &labels)
}

pub fn parse_states_row(fields: &[&str]) -> Result<Vec<State>> {
    fields.iter().map(|s| Ok(State::parse(s)?)).collect()
}

/// Self-contained SVG heatmap of a block-density matrix.
pub fn heatmap_svg(bm: &BlockModelJson, title: &str) -> String {
    let k = bm.k;
    let cell = 60;
    let margin = 70;
    let size = margin + k * cell + 20;
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n<text x=\"10\" y=\"20\" font-size=\"14\">{title}</text>\n"
    );
    for r in 0..k {
        for c in 0..k {
            let d = bm.density[r][c].clamp(0.0, 1.0);
            let shade = (255.0 * (1.0 - d)) as u8;
            let x = margin + c * cell;
            let y = margin + r * cell;
            let _ = write!(
                out,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"rgb({shade},{shade},255)\" stroke=\"black\"/>\n\
                 <text x=\"{tx}\" y=\"{ty}\" font-size=\"12\" text-anchor=\"middle\">{d:.2}</text>\n",
                tx = x + cell / 2,
                ty = y + cell / 2 + 4,
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"end\">{label}</text>",
            x = margin - 8,
            y = margin + r * cell + cell / 2 + 4,
            label = position_short(&bm.positions[r]),
        );
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>",
            x = margin + r * cell + cell / 2,
            y = margin - 8,
            label = position_short(&bm.positions[r]),
        );
    }
    out.push_str("</svg>\n");
    out
}

fn position_short(p: &Position) -> &'static str {
    match p {
        Position::Core => "core",
        Position::SemiPeriphery => "semi",
        Position::Periphery => "peri",
        Position::Bridge => "bridge",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "record_id,kind,parent_id,author_id,timestamp,reaction_kind\n\
        p1,post,,A,2015-01-01T10:00:00Z,\n\
        c1,comment,p1,B,2015-01-01T11:00:00Z,\n\
        r1,like,c1,C,2015-01-01T12:00:00Z,like\n";

    #[test]
    fn parses_sample_csv() {
        let log =
            parse_activity_csv(SAMPLE, &BTreeMap::new(), true, DanglingPolicy::Error).unwrap();
        assert_eq!(log.len(), 3);
        assert_eq!(log.records()[2].reaction_kind.as_deref(), Some("reaction"));
    }

    #[test]
    fn schema_mapping_renames_columns() {
        let text = "id,what,re,who,when\np1,post,,A,2015-01-01 10:00:00\n";
        let schema: BTreeMap<String, String> = [
            ("record_id", "id"),
            ("kind", "what"),
            ("parent_id", "re"),
            ("author_id", "who"),
            ("timestamp", "when"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        let log = parse_activity_csv(text, &schema, true, DanglingPolicy::Error).unwrap();
        assert_eq!(log.len(), 1);
    }

    #[test]
    fn missing_column_is_an_error() {
        let text = "record_id,kind,author_id\np1,post,A\n";
        let err = parse_activity_csv(text, &BTreeMap::new(), true, DanglingPolicy::Error)
            .unwrap_err()
            .to_string();
        assert!(err.contains("timestamp"), "{err}");
    }

    #[test]
    fn unparseable_timestamp_names_record() {
        let text = "record_id,kind,parent_id,author_id,timestamp\np1,post,,A,yesterday\n";
        let err = parse_activity_csv(text, &BTreeMap::new(), true, DanglingPolicy::Error)
            .unwrap_err();
        assert!(format!("{err:#}").contains("p1"));
    }

    #[test]
    fn blockmodel_json_round_trip() {
        let log =
            parse_activity_csv(SAMPLE, &BTreeMap::new(), true, DanglingPolicy::Error).unwrap();
        let net = copnet_core::transform::comment_network(&log).unwrap();
        let bm = copnet_core::blockmodel::fit_blockmodel(&net, 2, 0.5, 1).unwrap();
        let json = serde_json::to_string(&BlockModelJson::from_model(&bm)).unwrap();
        let back: BlockModelJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_model().unwrap(), bm);
    }
}
