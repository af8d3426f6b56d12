//! Pipeline configuration, read from a JSON file. One config drives a
//! whole run, from ingest (or synthesis) to the final report.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use copnet_core::ingest::{DanglingPolicy, PeriodSpec};
use copnet_core::stability::Aggregate;
use copnet_core::synth::SynthConfig;
use copnet_core::trajectory::StateMapping;

use crate::formats::parse_timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ingest,
    Synth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Comment,
    Reaction,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Comment => "comment",
            RelationKind::Reaction => "reaction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodConfig {
    pub label: String,
    /// Inclusive start, ISO-8601 (date or datetime).
    pub start: String,
    /// Inclusive end.
    pub end: String,
    /// Overrides the calendar month count for per-month statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub months: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,

    /// Activity CSV path, required in ingest mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Maps canonical column names to the export's header names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub schema: BTreeMap<String, String>,
    #[serde(default = "default_true")]
    pub merge_reactions: bool,
    #[serde(default)]
    pub dangling: Dangling,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periods: Vec<PeriodConfig>,

    /// Synthetic generator settings, required in synth mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,

    #[serde(default = "default_relations")]
    pub relations: Vec<RelationKind>,
    /// Keep the `top_n` strongest actors per period network.
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "default_true")]
    pub log_normalize: bool,
    /// Cluster count per relation, e.g. {"comment": 2}.
    #[serde(default = "default_k")]
    pub k: BTreeMap<String, usize>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Reciprocal-correction weight of the dissimilarity (0, 1 or 2).
    #[serde(default = "default_p")]
    pub p: u8,
    #[serde(default)]
    pub state_mapping: StateMapping,
    #[serde(default = "default_aggregate")]
    pub aggregate: Aggregate,

    pub output_dir: String,
    #[serde(default)]
    pub heatmaps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dangling {
    #[default]
    Error,
    Drop,
    Allow,
}

impl From<Dangling> for DanglingPolicy {
    fn from(d: Dangling) -> Self {
        match d {
            Dangling::Error => DanglingPolicy::Error,
            Dangling::Drop => DanglingPolicy::Drop,
            Dangling::Allow => DanglingPolicy::Allow,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_relations() -> Vec<RelationKind> {
    vec![RelationKind::Comment, RelationKind::Reaction]
}

fn default_top_n() -> usize {
    80
}

fn default_k() -> BTreeMap<String, usize> {
    [("comment".to_string(), 2), ("reaction".to_string(), 2)].into()
}

fn default_alpha() -> f64 {
    0.5
}

fn default_p() -> u8 {
    1
}

fn default_aggregate() -> Aggregate {
    Aggregate::ConsecutiveMean
}

impl PipelineConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Ingest => {
                if self.input.is_none() {
                    bail!("ingest mode needs an \"input\" CSV path");
                }
                if self.periods.is_empty() {
                    bail!("ingest mode needs at least one period");
                }
                for r in &self.relations {
                    if !self.k.contains_key(r.as_str()) {
                        bail!("no cluster count \"k\" given for relation {:?}", r.as_str());
                    }
                }
            }
            Mode::Synth => {
                let synth =
                    self.synth.as_ref().context("synth mode needs a \"synth\" section")?;
                synth.validate().map_err(|e| anyhow::anyhow!("synth config: {e}"))?;
            }
        }
        if self.relations.is_empty() {
            bail!("at least one relation must be selected");
        }
        Ok(())
    }

    pub fn period_spec(&self) -> Result<PeriodSpec> {
        let mut bounds = Vec::with_capacity(self.periods.len());
        for p in &self.periods {
            let start = parse_timestamp(&p.start)
                .with_context(|| format!("period {:?} start", p.label))?;
            let end =
                parse_timestamp(&p.end).with_context(|| format!("period {:?} end", p.label))?;
            bounds.push((p.label.clone(), start, end));
        }
        let spec = PeriodSpec::new(bounds)?;
        if self.periods.iter().any(|p| p.months.is_some()) {
            let counts: Result<Vec<u32>> = self
                .periods
                .iter()
                .map(|p| p.months.context("either all periods override months or none"))
                .collect();
            return Ok(spec.with_month_counts(&counts?)?);
        }
        Ok(spec)
    }

    pub fn k_for(&self, relation: RelationKind) -> usize {
        self.k[relation.as_str()]
    }
}
