use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use copnet_core::blockmodel::fit_blockmodel;
use copnet_core::ingest::{activity_stats, slice_periods, ActivityLog, DanglingPolicy, PeriodSpec};
use copnet_core::netmodel::{
    read_pajek_net, read_partition_clu, write_pajek_net, write_partition_clu,
};
use copnet_core::stability::{stability_series, AdjustedRand, Aggregate};
use copnet_core::synth::{generate_temporal, SynthConfig};
use copnet_core::trajectory::{build_trajectories, flow_counts, StateMapping};
use copnet_core::transform::{comment_network, log_normalize, reaction_network, reduce_network};

use copnet_cli::config::PipelineConfig;
use copnet_cli::formats::{
    heatmap_svg, parse_activity_csv, parse_timestamp, write_flows_csv, write_stats_csv,
    write_traj_csv, write_truth_csv, BlockModelJson,
};
use copnet_cli::pipeline::{emit_output, run_pipeline, Report};

/// Community activity networks: projection, blockmodeling, stability
/// and trajectory analysis.
#[derive(Parser)]
#[command(name = "copnet", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelationArg {
    Comment,
    Reaction,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DanglingArg {
    Error,
    Drop,
}

impl From<DanglingArg> for DanglingPolicy {
    fn from(d: DanglingArg) -> Self {
        match d {
            DanglingArg::Error => DanglingPolicy::Error,
            DanglingArg::Drop => DanglingPolicy::Drop,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregateArg {
    ConsecutiveMean,
    AllPairsMean,
    Min,
}

impl From<AggregateArg> for Aggregate {
    fn from(a: AggregateArg) -> Self {
        match a {
            AggregateArg::ConsecutiveMean => Aggregate::ConsecutiveMean,
            AggregateArg::AllPairsMean => Aggregate::AllPairsMean,
            AggregateArg::Min => Aggregate::Min,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MappingArg {
    TwoState,
    ThreeState,
}

impl From<MappingArg> for StateMapping {
    fn from(m: MappingArg) -> Self {
        match m {
            MappingArg::TwoState => StateMapping::TwoState,
            MappingArg::ThreeState => StateMapping::ThreeState,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an activity CSV, slice it into periods and write the
    /// per-period activity statistics table.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Column mapping entries, canonical=actual (e.g. record_id=id).
        #[arg(long)]
        schema: Vec<String>,
        /// Period triples label:YYYY-MM-DD:YYYY-MM-DD (inclusive dates).
        #[arg(long, required = true)]
        periods: Vec<String>,
        /// Collapse all reaction kinds into one.
        #[arg(long, default_value_t = true)]
        merge_reactions: bool,
        #[arg(long, value_enum, default_value = "error")]
        on_dangling: DanglingArg,
        /// Output stats CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a one-mode commenter-to-owner or reactor-to-owner network
    /// from an activity CSV and write it as a Pajek .net file.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        relation: RelationArg,
        #[arg(long)]
        schema: Vec<String>,
        #[arg(long, default_value_t = true)]
        merge_reactions: bool,
        #[arg(long, value_enum, default_value = "error")]
        on_dangling: DanglingArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep only the top-N actors by total arc strength.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 80)]
        top_n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replace each arc weight w by ln(1 + w).
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a structural-equivalence blockmodel to a .net file.
    Blockmodel {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Reciprocal-correction weight of the dissimilarity (0, 1 or 2).
        #[arg(long, default_value_t = 1)]
        p: u8,
        #[arg(long = "in")]
        input: PathBuf,
        /// Blockmodel JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Partition .clu output.
        #[arg(long)]
        clu: PathBuf,
    },
    /// Score partition agreement across a period sequence of .clu files
    /// (units are positional: line i is unit i in every file).
    Stability {
        #[arg(long = "clu", required = true, num_args = 2..)]
        clus: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "consecutive-mean")]
        aggregate: AggregateArg,
    },
    /// Classify actor trajectories over a sequence of blockmodel JSON
    /// files and write the trajectory and flow tables.
    Trajectories {
        #[arg(long = "models", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "two-state")]
        mapping: MappingArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        flows: PathBuf,
        /// Also write a block-density heatmap SVG per model into this directory.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Generate synthetic planted core-periphery data with churn.
    Synth {
        /// Generator config JSON (actors, densities, periods, churn, seed).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the full configured pipeline and write all artifacts.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the synth seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Print a human-readable summary of a report.json.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn parse_schema(entries: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for e in entries {
        let (canonical, actual) =
            e.split_once('=').with_context(|| format!("schema entry {e:?} is not key=value"))?;
        map.insert(canonical.trim().to_string(), actual.trim().to_string());
    }
    Ok(map)
}

fn parse_periods(entries: &[String]) -> Result<PeriodSpec> {
    let mut bounds = Vec::new();
    for e in entries {
        let parts: Vec<&str> = e.splitn(3, ':').collect();
        let [label, start, end] = parts[..] else {
            bail!("period {e:?} is not label:start:end");
        };
        let start = parse_timestamp(start).with_context(|| format!("period {label} start"))?;
        let mut end = parse_timestamp(end).with_context(|| format!("period {label} end"))?;
        // a bare end date means the whole day
        if end.time() == chrono::NaiveTime::MIN {
            end += chrono::Duration::seconds(86_399);
        }
        bounds.push((label.to_string(), start, end));
    }
    Ok(PeriodSpec::new(bounds)?)
}

fn load_log(
    input: &Path,
    schema: &[String],
    merge_reactions: bool,
    on_dangling: DanglingArg,
) -> Result<ActivityLog> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    parse_activity_csv(&text, &parse_schema(schema)?, merge_reactions, on_dangling.into())
}

fn read_net(path: &Path) -> Result<copnet_core::netmodel::OneModeNetwork> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_pajek_net(&text)?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Ingest { input, schema, periods, merge_reactions, on_dangling, out } => {
            let log = load_log(&input, &schema, merge_reactions, on_dangling)?;
            let spec = parse_periods(&periods)?;
            let slices = slice_periods(&log, &spec)?;
            let stats = activity_stats(&slices, &spec)?;
            write_file(&out, &write_stats_csv(&stats))?;
            eprintln!("{} records across {} periods", log.len(), spec.len());
        }
        Cmd::Project { input, relation, schema, merge_reactions, on_dangling, out } => {
            let log = load_log(&input, &schema, merge_reactions, on_dangling)?;
            let net = match relation {
                RelationArg::Comment => comment_network(&log)?,
                RelationArg::Reaction => reaction_network(&log)?,
            };
            write_file(&out, &write_pajek_net(&net))?;
        }
        Cmd::Reduce { input, top_n, out } => {
            let net = read_net(&input)?;
            let (reduced, over) = reduce_network(&net, top_n)?;
            if over {
                eprintln!(
                    "warning: top_n {top_n} exceeds the {} actors present",
                    net.n_actors()
                );
            }
            write_file(&out, &write_pajek_net(&reduced))?;
        }
        Cmd::Normalize { input, out } => {
            let net = read_net(&input)?;
            write_file(&out, &write_pajek_net(&log_normalize(&net)?))?;
        }
        Cmd::Blockmodel { k, alpha, p, input, out, clu } => {
            let net = read_net(&input)?;
            let model = fit_blockmodel(&net, k, alpha, p)?;
            let json = BlockModelJson::from_model(&model);
            write_file(&out, &(serde_json::to_string_pretty(&json)? + "\n"))?;
            write_file(&clu, &write_partition_clu(&model.partition))?;
        }
        Cmd::Stability { clus, aggregate } => {
            let mut partitions = Vec::new();
            for path in &clus {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                partitions.push(read_partition_clu(&text)?);
            }
            let series = stability_series(&partitions, aggregate.into(), &AdjustedRand)?;
            let out = serde_json::json!({
                "scores": series.scores,
                "series": series.series,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::Trajectories { models, mapping, out, flows, svg } => {
            let mut fitted = Vec::new();
            for path in &models {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let json: BlockModelJson = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                fitted.push(json.into_model()?);
            }
            let universe: Vec<String> = fitted
                .iter()
                .flat_map(|m| m.partition.units().iter().cloned())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let records = build_trajectories(&fitted, &universe, mapping.into())?;
            let labels: Vec<String> = (1..=fitted.len()).map(|i| format!("T{i}")).collect();
            write_file(&out, &write_traj_csv(&records, &labels))?;
            write_file(&flows, &write_flows_csv(&flow_counts(&records), &labels))?;
            if let Some(dir) = svg {
                for (i, model) in fitted.iter().enumerate() {
                    let json = BlockModelJson::from_model(model);
                    write_file(
                        &dir.join(format!("heatmap_{}.svg", labels[i])),
                        &heatmap_svg(&json, &labels[i]),
                    )?;
                }
            }
        }
        Cmd::Synth { config, out_dir } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let cfg: SynthConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", config.display()))?;
            let truth = generate_temporal(&cfg)?;
            for (i, (net, part)) in truth.networks.iter().zip(&truth.partitions).enumerate() {
                write_file(&out_dir.join(format!("T{}.net", i + 1)), &write_pajek_net(net))?;
                write_file(&out_dir.join(format!("T{}.clu", i + 1)), &write_partition_clu(part))?;
            }
            write_file(
                &out_dir.join("truth.csv"),
                &write_truth_csv(&truth.trajectories, truth.networks.len()),
            )?;
        }
        Cmd::Pipeline { config, out_dir, seed, top_n, alpha } => {
            let mut cfg = PipelineConfig::from_path(&config)?;
            if let Some(dir) = &out_dir {
                cfg.output_dir = dir.to_string_lossy().into_owned();
            }
            if let Some(seed) = seed {
                let synth = cfg
                    .synth
                    .as_mut()
                    .context("--seed only applies to synth-mode configs")?;
                synth.seed = seed;
            }
            if let Some(top_n) = top_n {
                cfg.top_n = top_n;
            }
            if let Some(alpha) = alpha {
                cfg.alpha = alpha;
            }
            let output = run_pipeline(&cfg)?;
            emit_output(&output, Path::new(&cfg.output_dir))?;
            eprintln!("wrote {} files to {}", output.files.len(), cfg.output_dir);
        }
        Cmd::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let report: Report = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", input.display()))?;
            print_report(&report);
        }
    }
    Ok(())
}

fn print_report(r: &Report) {
    println!("tool {}  config {}", r.tool_version, &r.config_sha256[..12]);
    println!("periods: {}", r.periods.join(", "));
    if r.stats.status == "ok" {
        println!(
            "activity: {} posts+comments over {} months",
            r.stats.total_posts_and_comments, r.stats.total_months
        );
    }
    for rel in &r.relations {
        println!("relation {}:", rel.relation);
        for p in &rel.periods {
            let agreement = p
                .truth_agreement
                .map(|a| format!(", truth agreement {a:.3}"))
                .unwrap_or_default();
            println!(
                "  {}: {} actors, {} arcs, k={}, {:?}{agreement}",
                p.label, p.n_actors, p.n_arcs, p.k, p.structure
            );
        }
        match rel.stability.series {
            Some(series) => println!("  stability series: {series:.3}"),
            None => println!("  stability: skipped"),
        }
        let types: Vec<String> = rel
            .trajectories
            .type_counts
            .iter()
            .map(|(t, n)| format!("{t} {n}"))
            .collect();
        println!("  trajectories ({} actors): {}", rel.trajectories.n_actors, types.join(", "));
    }
    if !r.warnings.is_empty() {
        println!("warnings: {}", r.warnings.len());
    }
}
