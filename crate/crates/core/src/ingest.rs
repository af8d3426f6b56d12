//! Activity logs: validation, two-mode network construction, temporal
//! splitting, and per-period activity statistics.
//!
//! Unit ids in two-mode networks are namespaced by kind (`actor:`,
//! `pub:`, `com:`, `rea:`) so the row and column id spaces of
//! ingest-produced networks never collide.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{DateTime, Datelike, FixedOffset};

use crate::error::{Error, Result};
use crate::netmodel::TwoModeNetwork;

pub type Timestamp = DateTime<FixedOffset>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Post,
    Comment,
    Reaction,
}

/// One row of the exported activity table: a post, a comment (to a post
/// or to another comment), or a reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityRecord {
    pub record_id: String,
    pub kind: RecordKind,
    /// Id of the post or comment this record attaches to; absent for posts.
    pub parent_id: Option<String>,
    pub author_id: String,
    pub timestamp: Timestamp,
    /// Present iff `kind == Reaction` (like/love/wow/...).
    pub reaction_kind: Option<String>,
}

impl ActivityRecord {
    fn validate(&self) -> Result<()> {
        match self.kind {
            RecordKind::Post if self.parent_id.is_some() => Err(Error::InvalidInput(format!(
                "post {} must not have a parent",
                self.record_id
            ))),
            RecordKind::Comment | RecordKind::Reaction if self.parent_id.is_none() => {
                Err(Error::InvalidInput(format!(
                    "record {} needs a parent_id",
                    self.record_id
                )))
            }
            _ if (self.reaction_kind.is_some()) != (self.kind == RecordKind::Reaction) => {
                Err(Error::InvalidInput(format!(
                    "record {}: reaction_kind present iff kind is REACTION",
                    self.record_id
                )))
            }
            _ => Ok(()),
        }
    }
}

/// What to do with records whose parent is not in the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DanglingPolicy {
    /// Reject the whole log, naming the offending record.
    #[default]
    Error,
    /// Drop dangling records; the dropped ids are reported on the log.
    Drop,
    /// Keep dangling records as-is. Used for period slices, where a
    /// comment may attach to a parent from an earlier period.
    Allow,
}

/// Chronologically ordered, validated sequence of activity records.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityLog {
    records: Vec<ActivityRecord>,
    actor_index: BTreeSet<String>,
    dropped: Vec<String>,
}

impl ActivityLog {
    pub fn new(mut records: Vec<ActivityRecord>, policy: DanglingPolicy) -> Result<Self> {
        for r in &records {
            r.validate()?;
        }
        records.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.record_id.cmp(&b.record_id)));

        let mut by_id: BTreeMap<&str, &ActivityRecord> = BTreeMap::new();
        for r in &records {
            if by_id.insert(&r.record_id, r).is_some() {
                return Err(Error::InvalidInput(format!("duplicate record_id {}", r.record_id)));
            }
        }

        let mut dropped = Vec::new();
        for r in &records {
            let Some(parent_id) = &r.parent_id else { continue };
            match by_id.get(parent_id.as_str()) {
                Some(parent) => {
                    if parent.timestamp > r.timestamp {
                        return Err(Error::InvalidInput(format!(
                            "record {} precedes its parent {parent_id}",
                            r.record_id
                        )));
                    }
                }
                None => match policy {
                    DanglingPolicy::Error => {
                        return Err(Error::DanglingParent {
                            record_id: r.record_id.clone(),
                            parent_id: parent_id.clone(),
                        })
                    }
                    DanglingPolicy::Drop => dropped.push(r.record_id.clone()),
                    DanglingPolicy::Allow => {}
                },
            }
        }
        if !dropped.is_empty() {
            records.retain(|r| !dropped.contains(&r.record_id));
        }

        let actor_index = records.iter().map(|r| r.author_id.clone()).collect();
        Ok(Self { records, actor_index, dropped })
    }

    pub fn records(&self) -> &[ActivityRecord] {
        &self.records
    }

    pub fn actors(&self) -> &BTreeSet<String> {
        &self.actor_index
    }

    /// Record ids dropped under [`DanglingPolicy::Drop`].
    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn get(&self, record_id: &str) -> Option<&ActivityRecord> {
        self.records.iter().find(|r| r.record_id == record_id)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

/// Two-mode relations extractable from a log. Posts and comments both
/// count as publications an author owns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// Author wrote publication.
    AuthorPublication,
    /// Publication received comment.
    PublicationComment,
    /// Publication received reaction.
    PublicationReaction,
    /// Comment back to its author.
    CommentAuthor,
    /// Reaction back to its author.
    ReactionAuthor,
}

impl Relation {
    pub fn parse(label: &str) -> Result<Self> {
        match label.to_uppercase().as_str() {
            "AP" => Ok(Self::AuthorPublication),
            "PC" => Ok(Self::PublicationComment),
            "PR" => Ok(Self::PublicationReaction),
            "CA" => Ok(Self::CommentAuthor),
            "RA" => Ok(Self::ReactionAuthor),
            _ => Err(Error::UnknownRelation(label.to_string())),
        }
    }
}

fn actor_unit(id: &str) -> String {
    format!("actor:{id}")
}

fn pub_unit(id: &str) -> String {
    format!("pub:{id}")
}

fn com_unit(id: &str) -> String {
    format!("com:{id}")
}

fn rea_unit(id: &str) -> String {
    format!("rea:{id}")
}

/// Builds one of the two-mode incidence networks (AP, PC, PR, CA, RA)
/// from a log. Weights are occurrence counts.
pub fn build_two_mode(log: &ActivityLog, relation: Relation) -> Result<TwoModeNetwork> {
    let actors: Vec<String> = log.actors().iter().map(|a| actor_unit(a)).collect();
    let pubs: Vec<String> = log
        .records()
        .iter()
        .filter(|r| r.kind != RecordKind::Reaction)
        .map(|r| pub_unit(&r.record_id))
        .collect();
    let comments: Vec<String> = log
        .records()
        .iter()
        .filter(|r| r.kind == RecordKind::Comment)
        .map(|r| com_unit(&r.record_id))
        .collect();
    let reactions: Vec<String> = log
        .records()
        .iter()
        .filter(|r| r.kind == RecordKind::Reaction)
        .map(|r| rea_unit(&r.record_id))
        .collect();

    let mut net = match relation {
        Relation::AuthorPublication => TwoModeNetwork::new(actors, pubs)?,
        Relation::PublicationComment => TwoModeNetwork::new(pubs, comments)?,
        Relation::PublicationReaction => TwoModeNetwork::new(pubs, reactions)?,
        Relation::CommentAuthor => TwoModeNetwork::new(comments, actors)?,
        Relation::ReactionAuthor => TwoModeNetwork::new(reactions, actors)?,
    };

    for r in log.records() {
        match relation {
            Relation::AuthorPublication => {
                if r.kind != RecordKind::Reaction {
                    net.add_count(&actor_unit(&r.author_id), &pub_unit(&r.record_id), 1)?;
                }
            }
            Relation::PublicationComment => {
                if r.kind == RecordKind::Comment {
                    if let Some(parent) = &r.parent_id {
                        if log.get(parent).is_some() {
                            net.add_count(&pub_unit(parent), &com_unit(&r.record_id), 1)?;
                        }
                    }
                }
            }
            Relation::PublicationReaction => {
                if r.kind == RecordKind::Reaction {
                    if let Some(parent) = &r.parent_id {
                        if log.get(parent).is_some() {
                            net.add_count(&pub_unit(parent), &rea_unit(&r.record_id), 1)?;
                        }
                    }
                }
            }
            Relation::CommentAuthor => {
                if r.kind == RecordKind::Comment {
                    net.add_count(&com_unit(&r.record_id), &actor_unit(&r.author_id), 1)?;
                }
            }
            Relation::ReactionAuthor => {
                if r.kind == RecordKind::Reaction {
                    net.add_count(&rea_unit(&r.record_id), &actor_unit(&r.author_id), 1)?;
                }
            }
        }
    }
    Ok(net)
}

/// One labeled, inclusive time interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Period {
    pub label: String,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Calendar months spanned, inclusive of first and last.
    pub months: u32,
}

/// Ordered, non-overlapping sequence of periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSpec {
    periods: Vec<Period>,
}

/// Calendar months spanned by `[start, end]`, inclusive of both end months.
pub fn calendar_months(start: &Timestamp, end: &Timestamp) -> u32 {
    let span = (end.year() - start.year()) * 12 + end.month() as i32 - start.month() as i32 + 1;
    span.max(0) as u32
}

impl PeriodSpec {
    pub fn new(boundaries: Vec<(String, Timestamp, Timestamp)>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidInput("period spec needs at least one period".into()));
        }
        let mut periods = Vec::with_capacity(boundaries.len());
        let mut prev_end: Option<Timestamp> = None;
        for (label, start, end) in boundaries {
            if end < start {
                return Err(Error::InvalidInput(format!("period {label:?} ends before it starts")));
            }
            if let Some(pe) = prev_end {
                if start <= pe {
                    return Err(Error::InvalidInput(format!(
                        "period {label:?} overlaps or precedes the previous period"
                    )));
                }
            }
            let months = calendar_months(&start, &end).max(1);
            prev_end = Some(end);
            periods.push(Period { label, start, end, months });
        }
        Ok(Self { periods })
    }

    /// Overrides the computed month counts (for published tables that
    /// count months differently than the calendar span).
    pub fn with_month_counts(mut self, counts: &[u32]) -> Result<Self> {
        if counts.len() != self.periods.len() {
            return Err(Error::InvalidInput(format!(
                "{} month counts for {} periods",
                counts.len(),
                self.periods.len()
            )));
        }
        for (p, &m) in self.periods.iter_mut().zip(counts) {
            if m == 0 {
                return Err(Error::InvalidInput("each period must span at least one month".into()));
            }
            p.months = m;
        }
        Ok(self)
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Index of the period containing `t`, if any.
    pub fn period_of(&self, t: &Timestamp) -> Option<usize> {
        self.periods.iter().position(|p| *t >= p.start && *t <= p.end)
    }
}

/// Splits a log into one slice per period by record timestamp. Comments
/// and reactions stay with their own timestamp even when the parent
/// belongs to an earlier period.
pub fn slice_periods(log: &ActivityLog, spec: &PeriodSpec) -> Result<Vec<ActivityLog>> {
    let mut buckets: Vec<Vec<ActivityRecord>> = (0..spec.len()).map(|_| Vec::new()).collect();
    for r in log.records() {
        match spec.period_of(&r.timestamp) {
            Some(i) => buckets[i].push(r.clone()),
            None => {
                return Err(Error::OutsidePeriods {
                    record_id: r.record_id.clone(),
                    timestamp: r.timestamp.to_rfc3339(),
                })
            }
        }
    }
    buckets.into_iter().map(|b| ActivityLog::new(b, DanglingPolicy::Allow)).collect()
}

/// Integer division rounding half away from zero.
pub fn round_half_away(count: u64, divisor: u64) -> u64 {
    (2 * count + divisor) / (2 * divisor)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodStats {
    pub label: String,
    pub n_months: u32,
    pub n_posts_and_comments: u64,
    pub posts_and_comments_per_month: u64,
    pub n_commenting_actors: u64,
    pub commenting_actors_per_month: u64,
    pub n_reacting_actors: u64,
    pub reacting_actors_per_month: u64,
}

/// Per-period activity statistics plus union totals and the
/// per-month averages over the whole span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsTable {
    pub rows: Vec<PeriodStats>,
    pub total_months: u32,
    pub total_posts_and_comments: u64,
    /// Distinct commenting actors over all periods combined.
    pub total_commenting_actors: u64,
    /// Distinct reacting actors over all periods combined.
    pub total_reacting_actors: u64,
    pub avg_posts_and_comments_per_month: u64,
    pub avg_commenting_actors_per_month: u64,
    pub avg_reacting_actors_per_month: u64,
}

/// Computes the per-period activity table. Per-month values are
/// round-to-nearest (half away from zero) of count / months.
pub fn activity_stats(slices: &[ActivityLog], spec: &PeriodSpec) -> Result<StatsTable> {
    if slices.len() != spec.len() {
        return Err(Error::InvalidInput(format!(
            "{} slices for {} periods",
            slices.len(),
            spec.len()
        )));
    }
    let mut rows = Vec::with_capacity(slices.len());
    let mut all_commenters: BTreeSet<&str> = BTreeSet::new();
    let mut all_reactors: BTreeSet<&str> = BTreeSet::new();
    for (slice, period) in slices.iter().zip(spec.periods()) {
        let months = period.months as u64;
        let n_pc = slice
            .records()
            .iter()
            .filter(|r| r.kind != RecordKind::Reaction)
            .count() as u64;
        let commenters: BTreeSet<&str> = slice
            .records()
            .iter()
            .filter(|r| r.kind == RecordKind::Comment)
            .map(|r| r.author_id.as_str())
            .collect();
        let reactors: BTreeSet<&str> = slice
            .records()
            .iter()
            .filter(|r| r.kind == RecordKind::Reaction)
            .map(|r| r.author_id.as_str())
            .collect();
        all_commenters.extend(commenters.iter());
        all_reactors.extend(reactors.iter());
        rows.push(PeriodStats {
            label: period.label.clone(),
            n_months: period.months,
            n_posts_and_comments: n_pc,
            posts_and_comments_per_month: round_half_away(n_pc, months),
            n_commenting_actors: commenters.len() as u64,
            commenting_actors_per_month: round_half_away(commenters.len() as u64, months),
            n_reacting_actors: reactors.len() as u64,
            reacting_actors_per_month: round_half_away(reactors.len() as u64, months),
        });
    }
    let total_months: u32 = rows.iter().map(|r| r.n_months).sum();
    let total_pc: u64 = rows.iter().map(|r| r.n_posts_and_comments).sum();
    let tm = total_months as u64;
    Ok(StatsTable {
        avg_posts_and_comments_per_month: round_half_away(total_pc, tm),
        avg_commenting_actors_per_month: round_half_away(all_commenters.len() as u64, tm),
        avg_reacting_actors_per_month: round_half_away(all_reactors.len() as u64, tm),
        total_months,
        total_posts_and_comments: total_pc,
        total_commenting_actors: all_commenters.len() as u64,
        total_reacting_actors: all_reactors.len() as u64,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn ts(s: &str) -> Timestamp {
        DateTime::parse_from_rfc3339(s).unwrap()
    }

    pub(crate) fn rec(
        id: &str,
        kind: RecordKind,
        parent: Option<&str>,
        author: &str,
        when: &str,
    ) -> ActivityRecord {
        ActivityRecord {
            record_id: id.into(),
            kind,
            parent_id: parent.map(Into::into),
            author_id: author.into(),
            timestamp: ts(when),
            reaction_kind: (kind == RecordKind::Reaction).then(|| "like".into()),
        }
    }

    fn small_log() -> ActivityLog {
        ActivityLog::new(
            vec![
                rec("p1", RecordKind::Post, None, "A", "2015-01-01T10:00:00Z"),
                rec("c1", RecordKind::Comment, Some("p1"), "B", "2015-01-01T11:00:00Z"),
                rec("r1", RecordKind::Reaction, Some("c1"), "C", "2015-01-01T12:00:00Z"),
            ],
            DanglingPolicy::Error,
        )
        .unwrap()
    }

    #[test]
    fn three_row_log_parses() {
        let log = small_log();
        assert_eq!(log.len(), 3);
        assert_eq!(log.actors().len(), 3);
    }

    #[test]
    fn dangling_parent_rejected() {
        let err = ActivityLog::new(
            vec![rec("c1", RecordKind::Comment, Some("nope"), "B", "2015-01-01T11:00:00Z")],
            DanglingPolicy::Error,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::DanglingParent { record_id: "c1".into(), parent_id: "nope".into() }
        );
    }

    #[test]
    fn dangling_parent_dropped_with_report() {
        let log = ActivityLog::new(
            vec![
                rec("p1", RecordKind::Post, None, "A", "2015-01-01T10:00:00Z"),
                rec("c1", RecordKind::Comment, Some("nope"), "B", "2015-01-01T11:00:00Z"),
            ],
            DanglingPolicy::Drop,
        )
        .unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log.dropped(), ["c1".to_string()]);
    }

    #[test]
    fn child_before_parent_rejected() {
        let err = ActivityLog::new(
            vec![
                rec("p1", RecordKind::Post, None, "A", "2015-01-02T00:00:00Z"),
                rec("c1", RecordKind::Comment, Some("p1"), "B", "2015-01-01T00:00:00Z"),
            ],
            DanglingPolicy::Error,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn two_mode_ap_single_post() {
        let log = ActivityLog::new(
            vec![rec("p1", RecordKind::Post, None, "A", "2015-01-01T00:00:00Z")],
            DanglingPolicy::Error,
        )
        .unwrap();
        let ap = build_two_mode(&log, Relation::AuthorPublication).unwrap();
        assert_eq!(ap.weight("actor:A", "pub:p1"), 1);
        assert_eq!(ap.n_entries(), 1);
    }

    #[test]
    fn two_mode_pc_two_comments() {
        let log = ActivityLog::new(
            vec![
                rec("p1", RecordKind::Post, None, "A", "2015-01-01T00:00:00Z"),
                rec("c1", RecordKind::Comment, Some("p1"), "B", "2015-01-01T01:00:00Z"),
                rec("c2", RecordKind::Comment, Some("p1"), "B", "2015-01-01T02:00:00Z"),
            ],
            DanglingPolicy::Error,
        )
        .unwrap();
        let pc = build_two_mode(&log, Relation::PublicationComment).unwrap();
        assert_eq!(pc.weight("pub:p1", "com:c1"), 1);
        assert_eq!(pc.weight("pub:p1", "com:c2"), 1);
        assert_eq!(pc.n_entries(), 2);
    }

    #[test]
    fn unknown_relation_label() {
        assert_eq!(Relation::parse("XX"), Err(Error::UnknownRelation("XX".into())));
        assert_eq!(Relation::parse("ap"), Ok(Relation::AuthorPublication));
    }

    fn four_period_spec() -> PeriodSpec {
        PeriodSpec::new(vec![
            ("T1".into(), ts("2011-09-01T00:00:00Z"), ts("2014-12-31T23:59:59Z")),
            ("T2".into(), ts("2015-01-01T00:00:00Z"), ts("2015-11-30T23:59:59Z")),
            ("T3".into(), ts("2015-12-01T00:00:00Z"), ts("2016-05-31T23:59:59Z")),
            ("T4".into(), ts("2016-06-01T00:00:00Z"), ts("2018-01-31T23:59:59Z")),
        ])
        .unwrap()
    }

    #[test]
    fn calendar_month_counts() {
        let spec = four_period_spec();
        let months: Vec<u32> = spec.periods().iter().map(|p| p.months).collect();
        assert_eq!(months, vec![40, 11, 6, 20]);
        let spec = spec.with_month_counts(&[39, 11, 6, 20]).unwrap();
        let months: Vec<u32> = spec.periods().iter().map(|p| p.months).collect();
        assert_eq!(months, vec![39, 11, 6, 20]);
    }

    #[test]
    fn slices_partition_records() {
        let spec = four_period_spec();
        let log = small_log();
        let slices = slice_periods(&log, &spec).unwrap();
        assert_eq!(slices.len(), 4);
        assert_eq!(slices[1].len(), 3);
        assert!(slices[0].is_empty() && slices[2].is_empty() && slices[3].is_empty());
    }

    #[test]
    fn record_outside_periods_named() {
        let spec = four_period_spec();
        let log = ActivityLog::new(
            vec![rec("p9", RecordKind::Post, None, "A", "2020-01-01T00:00:00Z")],
            DanglingPolicy::Error,
        )
        .unwrap();
        let err = slice_periods(&log, &spec).unwrap_err();
        assert!(matches!(err, Error::OutsidePeriods { ref record_id, .. } if record_id == "p9"));
    }

    #[test]
    fn published_norm_column() {
        assert_eq!(round_half_away(12_600, 39), 323);
        assert_eq!(round_half_away(6_112, 11), 556);
        assert_eq!(round_half_away(5_765, 6), 961);
        assert_eq!(round_half_away(9_828, 20), 491);
        assert_eq!(round_half_away(34_305, 76), 451);
    }

    #[test]
    fn zero_activity_period_stats() {
        let spec = four_period_spec();
        let slices = slice_periods(&small_log(), &spec).unwrap();
        let stats = activity_stats(&slices, &spec).unwrap();
        assert_eq!(stats.rows[0].n_posts_and_comments, 0);
        assert_eq!(stats.rows[0].posts_and_comments_per_month, 0);
        assert_eq!(stats.rows[1].n_posts_and_comments, 2);
        assert_eq!(stats.rows[1].n_commenting_actors, 1);
        assert_eq!(stats.rows[1].n_reacting_actors, 1);
        assert_eq!(stats.total_posts_and_comments, 2);
    }
}
