//! Config-driven end-to-end run: ingest or synthesize, project, slice,
//! reduce, normalize, blockmodel, stability, trajectories, report. All
//! results are computed in memory first; files are only written once
//! every stage has succeeded, so a failed run leaves no partial output.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use copnet_core::blockmodel::{fit_blockmodel, BlockModel, Position, Structure};
use copnet_core::ingest::{activity_stats, slice_periods, StatsTable};
use copnet_core::netmodel::{write_pajek_net, write_partition_clu, OneModeNetwork, Partition};
use copnet_core::stability::{contingency, modified_rand, stability_series, AdjustedRand, Aggregate};
use copnet_core::trajectory::{build_trajectories, flow_counts, TrajectoryRecord};
use copnet_core::transform::{
    comment_network_with_context, log_normalize, reaction_network_with_context, reduce_network,
};

use crate::config::{Mode, PipelineConfig, RelationKind};
use crate::formats::{
    heatmap_svg, parse_activity_csv, write_flows_csv, write_stats_csv, write_traj_csv,
    BlockModelJson,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 6 significant digits so serialized numbers are stable.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor();
    let factor = 10f64.powf(5.0 - magnitude);
    (x * factor).round() / factor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config_sha256: String,
    pub mode: Mode,
    pub periods: Vec<String>,
    pub stats: StatsSection,
    pub relations: Vec<RelationReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSection {
    /// "ok" or "skipped".
    pub status: String,
    pub rows: Vec<StatsRow>,
    pub total_months: u32,
    pub total_posts_and_comments: u64,
    pub total_commenting_actors: u64,
    pub total_reacting_actors: u64,
    pub avg_posts_and_comments_per_month: u64,
    pub avg_commenting_actors_per_month: u64,
    pub avg_reacting_actors_per_month: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub period: String,
    pub months: u32,
    pub posts_and_comments: u64,
    pub posts_and_comments_per_month: u64,
    pub commenting_actors: u64,
    pub commenting_actors_per_month: u64,
    pub reacting_actors: u64,
    pub reacting_actors_per_month: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: String,
    pub periods: Vec<PeriodModelReport>,
    pub stability: StabilitySection,
    pub trajectories: TrajectorySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodModelReport {
    pub label: String,
    pub n_actors: usize,
    pub n_arcs: usize,
    /// True when the actor set was cut down to the strongest `top_n`.
    pub reduced: bool,
    pub k: usize,
    pub structure: Structure,
    pub positions: Vec<Position>,
    pub density: Vec<Vec<f64>>,
    /// Rand agreement between the fitted and the planted partition;
    /// null outside synth mode.
    pub truth_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySection {
    /// "ok" or "skipped" (single-period runs have nothing to compare).
    pub status: String,
    pub aggregate: Aggregate,
    pub scores: Vec<Vec<f64>>,
    pub series: Option<f64>,
    pub consecutive: Vec<PairDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDetail {
    pub pair: String,
    pub score: f64,
    pub degenerate: bool,
    pub incomers: usize,
    pub outgoers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySection {
    pub status: String,
    pub n_actors: usize,
    pub type_counts: BTreeMap<String, u64>,
    pub perspective_counts: BTreeMap<String, u64>,
}

/// Everything a run produces: the report plus the full artifact set,
/// keyed by file name relative to the output directory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: Report,
    pub files: BTreeMap<String, String>,
}

struct RelationRun {
    name: String,
    networks: Vec<OneModeNetwork>,
    models: Vec<BlockModel>,
    reduced_flags: Vec<bool>,
    truth_agreement: Vec<Option<f64>>,
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate().context("config validation")?;
    let config_sha256 = {
        let canonical = serde_json::to_string(cfg).context("serializing config")?;
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        format!("{:x}", hasher.finalize())
    };

    let mut warnings = Vec::new();
    let (period_labels, stats, runs) = match cfg.mode {
        Mode::Ingest => run_ingest(cfg, &mut warnings)?,
        Mode::Synth => run_synth(cfg, &mut warnings)?,
    };

    let mut relations = Vec::new();
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    for run in &runs {
        relations.push(summarize_relation(cfg, run, &period_labels)?);
        for (i, (net, model)) in run.networks.iter().zip(&run.models).enumerate() {
            let base = format!("{}_{}", run.name, period_labels[i]);
            files.insert(format!("{base}.net"), write_pajek_net(net));
            files.insert(format!("{base}.clu"), write_partition_clu(&model.partition));
            let model_json = BlockModelJson::from_model(model);
            files.insert(
                format!("model_{base}.json"),
                serde_json::to_string_pretty(&model_json).context("serializing model")? + "\n",
            );
            if cfg.heatmaps {
                files.insert(format!("heatmap_{base}.svg"), heatmap_svg(&model_json, &base));
            }
        }
        let universe = trajectory_universe(&run.models);
        let records = build_trajectories(&run.models, &universe, cfg.state_mapping)
            .context("trajectory stage")?;
        files.insert(format!("traj_{}.csv", run.name), write_traj_csv(&records, &period_labels));
        files.insert(
            format!("flows_{}.csv", run.name),
            write_flows_csv(&flow_counts(&records), &period_labels),
        );
    }

    if let Some(stats) = &stats {
        files.insert("stats.csv".to_string(), write_stats_csv(stats));
    }

    let report = Report {
        tool_version: TOOL_VERSION.to_string(),
        config_sha256,
        mode: cfg.mode,
        periods: period_labels,
        stats: stats_section(stats.as_ref()),
        relations,
        warnings,
    };
    files.insert(
        "report.json".to_string(),
        serde_json::to_string_pretty(&report).context("serializing report")? + "\n",
    );
    files.insert("report.schema.json".to_string(), REPORT_SCHEMA.to_string());
    Ok(PipelineOutput { report, files })
}

type StageData = (Vec<String>, Option<StatsTable>, Vec<RelationRun>);

fn run_ingest(cfg: &PipelineConfig, warnings: &mut Vec<String>) -> Result<StageData> {
    let input = cfg.input.as_ref().expect("validated");
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("ingest stage: reading {input}"))?;
    let log = parse_activity_csv(&text, &cfg.schema, cfg.merge_reactions, cfg.dangling.into())
        .context("ingest stage")?;
    for id in log.dropped() {
        warnings.push(format!("dropped dangling record {id}"));
    }
    let spec = cfg.period_spec().context("ingest stage: periods")?;
    let labels: Vec<String> = spec.periods().iter().map(|p| p.label.clone()).collect();
    let slices = slice_periods(&log, &spec).context("ingest stage: slicing")?;
    let stats = activity_stats(&slices, &spec).context("ingest stage: statistics")?;

    let mut runs = Vec::new();
    for relation in &cfg.relations {
        let mut networks = Vec::new();
        let mut models = Vec::new();
        let mut reduced_flags = Vec::new();
        for (slice, label) in slices.iter().zip(&labels) {
            let raw = match relation {
                RelationKind::Comment => comment_network_with_context(slice, &log),
                RelationKind::Reaction => reaction_network_with_context(slice, &log),
            }
            .with_context(|| format!("project stage: {} {label}", relation.as_str()))?;
            let (net, model, reduced) = prepare_and_fit(
                cfg,
                &raw,
                cfg.k_for(*relation),
                &format!("{} {label}", relation.as_str()),
            )?;
            networks.push(net);
            models.push(model);
            reduced_flags.push(reduced);
        }
        let truth_agreement = vec![None; networks.len()];
        runs.push(RelationRun {
            name: relation.as_str().to_string(),
            networks,
            models,
            reduced_flags,
            truth_agreement,
        });
    }
    Ok((labels, Some(stats), runs))
}

fn run_synth(cfg: &PipelineConfig, _warnings: &mut Vec<String>) -> Result<StageData> {
    let synth = cfg.synth.as_ref().expect("validated");
    let truth = copnet_core::synth::generate_temporal(synth).context("synth stage")?;
    let labels: Vec<String> = (1..=truth.networks.len()).map(|i| format!("T{i}")).collect();
    let k = cfg.k.get("synthetic").copied().unwrap_or(2);

    let mut networks = Vec::new();
    let mut models = Vec::new();
    let mut reduced_flags = Vec::new();
    let mut truth_agreement = Vec::new();
    for (i, raw) in truth.networks.iter().enumerate() {
        let (net, model, reduced) =
            prepare_and_fit(cfg, raw, k, &format!("synthetic {}", labels[i]))?;
        let agreement = modified_rand(&model.partition, &truth.partitions[i])
            .context("synth stage: truth agreement")?;
        truth_agreement.push(Some(round_sig(agreement.value)));
        networks.push(net);
        models.push(model);
        reduced_flags.push(reduced);
    }
    let runs = vec![RelationRun {
        name: "synthetic".to_string(),
        networks,
        models,
        reduced_flags,
        truth_agreement,
    }];
    Ok((labels, None, runs))
}

fn prepare_and_fit(
    cfg: &PipelineConfig,
    raw: &OneModeNetwork,
    k: usize,
    stage: &str,
) -> Result<(OneModeNetwork, BlockModel, bool)> {
    let (reduced_net, _over) =
        reduce_network(raw, cfg.top_n).with_context(|| format!("reduce stage: {stage}"))?;
    let reduced = reduced_net.n_actors() < raw.n_actors();
    let net = if cfg.log_normalize {
        log_normalize(&reduced_net).with_context(|| format!("normalize stage: {stage}"))?
    } else {
        reduced_net
    };
    let model = fit_blockmodel(&net, k, cfg.alpha, cfg.p)
        .with_context(|| format!("blockmodel stage: {stage}"))?;
    Ok((net, model, reduced))
}

fn trajectory_universe(models: &[BlockModel]) -> Vec<String> {
    let set: BTreeSet<String> = models
        .iter()
        .flat_map(|m| m.partition.units().iter().cloned())
        .collect();
    set.into_iter().collect()
}

fn summarize_relation(
    cfg: &PipelineConfig,
    run: &RelationRun,
    labels: &[String],
) -> Result<RelationReport> {
    let mut periods = Vec::new();
    for (i, model) in run.models.iter().enumerate() {
        periods.push(PeriodModelReport {
            label: labels[i].clone(),
            n_actors: run.networks[i].n_actors(),
            n_arcs: run.networks[i].n_arcs(),
            reduced: run.reduced_flags[i],
            k: model.partition.k(),
            structure: model.structure,
            positions: model.positions.clone(),
            density: model
                .density
                .iter()
                .map(|row| row.iter().map(|&d| round_sig(d)).collect())
                .collect(),
            truth_agreement: run.truth_agreement[i],
        });
    }

    let partitions: Vec<Partition> =
        run.models.iter().map(|m| m.partition.clone()).collect();
    let stability = if partitions.len() < 2 {
        StabilitySection {
            status: "skipped".to_string(),
            aggregate: cfg.aggregate,
            scores: Vec::new(),
            series: None,
            consecutive: Vec::new(),
        }
    } else {
        let series = stability_series(&partitions, cfg.aggregate, &AdjustedRand)
            .with_context(|| format!("stability stage: {}", run.name))?;
        let mut consecutive = Vec::new();
        for w in 0..partitions.len() - 1 {
            let score = modified_rand(&partitions[w], &partitions[w + 1])?;
            let table = contingency(&partitions[w], &partitions[w + 1])?;
            consecutive.push(PairDetail {
                pair: format!("{}-{}", labels[w], labels[w + 1]),
                score: round_sig(score.value),
                degenerate: score.degenerate,
                incomers: table.incomers.len(),
                outgoers: table.outgoers.len(),
            });
        }
        StabilitySection {
            status: "ok".to_string(),
            aggregate: cfg.aggregate,
            scores: series
                .scores
                .iter()
                .map(|row| row.iter().map(|&s| round_sig(s)).collect())
                .collect(),
            series: Some(round_sig(series.series)),
            consecutive,
        }
    };

    let universe = trajectory_universe(&run.models);
    let records = build_trajectories(&run.models, &universe, cfg.state_mapping)
        .with_context(|| format!("trajectory stage: {}", run.name))?;
    let trajectories = trajectory_section(&records);

    Ok(RelationReport { relation: run.name.clone(), periods, stability, trajectories })
}

fn trajectory_section(records: &[TrajectoryRecord]) -> TrajectorySection {
    let mut type_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut perspective_counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        *type_counts.entry(r.trajectory_type.as_str().to_string()).or_insert(0) += 1;
        for p in &r.perspectives {
            *perspective_counts.entry(p.as_str().to_string()).or_insert(0) += 1;
        }
    }
    TrajectorySection {
        status: "ok".to_string(),
        n_actors: records.len(),
        type_counts,
        perspective_counts,
    }
}

fn stats_section(stats: Option<&StatsTable>) -> StatsSection {
    match stats {
        None => StatsSection {
            status: "skipped".to_string(),
            rows: Vec::new(),
            total_months: 0,
            total_posts_and_comments: 0,
            total_commenting_actors: 0,
            total_reacting_actors: 0,
            avg_posts_and_comments_per_month: 0,
            avg_commenting_actors_per_month: 0,
            avg_reacting_actors_per_month: 0,
        },
        Some(t) => StatsSection {
            status: "ok".to_string(),
            rows: t
                .rows
                .iter()
                .map(|r| StatsRow {
                    period: r.label.clone(),
                    months: r.n_months,
                    posts_and_comments: r.n_posts_and_comments,
                    posts_and_comments_per_month: r.posts_and_comments_per_month,
                    commenting_actors: r.n_commenting_actors,
                    commenting_actors_per_month: r.commenting_actors_per_month,
                    reacting_actors: r.n_reacting_actors,
                    reacting_actors_per_month: r.reacting_actors_per_month,
                })
                .collect(),
            total_months: t.total_months,
            total_posts_and_comments: t.total_posts_and_comments,
            total_commenting_actors: t.total_commenting_actors,
            total_reacting_actors: t.total_reacting_actors,
            avg_posts_and_comments_per_month: t.avg_posts_and_comments_per_month,
            avg_commenting_actors_per_month: t.avg_commenting_actors_per_month,
            avg_reacting_actors_per_month: t.avg_reacting_actors_per_month,
        },
    }
}

/// Writes every artifact under `dir`. On any write failure the files
/// already written by this call are removed again.
pub fn emit_output(out: &PipelineOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut written = Vec::new();
    for (name, contents) in &out.files {
        let path = dir.join(name);
        match std::fs::write(&path, contents) {
            Ok(()) => written.push(path),
            Err(e) => {
                for p in written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(anyhow::Error::new(e))
                    .with_context(|| format!("writing {}", path.display()));
            }
        }
    }
    Ok(())
}

/// Structural JSON schema of `report.json`, bundled with every run.
/// The trailing `csv_files` block documents the CSV artifact columns.
pub const REPORT_SCHEMA: &str = include_str!("report.schema.json");

/// Validates a JSON value against the subset of JSON Schema used by
/// [`REPORT_SCHEMA`]: type, properties, required, additionalProperties,
/// items, enum and nullable type lists.
pub fn validate_schema(schema: &Value, instance: &Value, path: &str) -> Result<()> {
    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            bail!("{path}: {instance} not in enum {allowed:?}");
        }
    }
    let Some(ty) = schema.get("type") else { return Ok(()) };
    let names: Vec<&str> = match ty {
        Value::String(s) => vec![s.as_str()],
        Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
        _ => bail!("{path}: malformed schema type"),
    };
    let matches = |name: &str| match name {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "number" => instance.is_number(),
        "integer" => instance.is_u64() || instance.is_i64(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        _ => false,
    };
    if !names.iter().any(|n| matches(n)) {
        bail!("{path}: expected type {names:?}, got {instance}");
    }

    if let Some(obj) = instance.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    bail!("{path}: missing required key {key:?}");
                }
            }
        }
        for (key, value) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => validate_schema(sub, value, &format!("{path}/{key}"))?,
                None => {
                    let extra = schema
                        .get("additionalProperties")
                        .cloned()
                        .unwrap_or(Value::Bool(true));
                    match extra {
                        Value::Bool(true) => {}
                        Value::Bool(false) => bail!("{path}: unexpected key {key:?}"),
                        sub => validate_schema(&sub, value, &format!("{path}/{key}"))?,
                    }
                }
            }
        }
    }
    if let (Some(arr), Some(items)) = (instance.as_array(), schema.get("items")) {
        for (i, value) in arr.iter().enumerate() {
            validate_schema(items, value, &format!("{path}/{i}"))?;
        }
    }
    Ok(())
}

/// Validates a serialized report against the bundled schema.
pub fn validate_report_json(text: &str) -> Result<()> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).context("parsing bundled schema")?;
    let report: Value = serde_json::from_str(text).context("parsing report")?;
    validate_schema(&schema["report"], &report, "report")
}
