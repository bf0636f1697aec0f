//! `leas` — lockstep engagement-fraud seed expansion, end to end.
//!
//! Subcommands cover the full flow: `synth` generates ground-truthed
//! fixtures, `build-graph` projects an event log into the weighted
//! co-engagement graph, `expand`/`pipeline` run seed expansion (the latter
//! adding tier classification), and `metrics`/`validate` re-measure
//! existing cluster files.  Every run echoes its resolved configuration to
//! stdout and into the output directory, writes files atomically, and
//! exits 0 on success, 1 on input errors, 2 on internal errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use leas_core::config::RunConfig;
use leas_core::error::Error;
use leas_core::fsio::atomic_write_str;
use leas_core::graph::{apply_owner_penalty, build_graph_with_cap, EngagementGraph};
use leas_core::ingest::{parse_events, EngagementBipartite, ParseReport};
use leas_core::metrics::{flake_odf, internal_density};
use leas_core::pipeline::{
    render_clusters_jsonl, render_timings_csv, run_pipeline, ClusterRecord, PipelineOutput,
};
use leas_core::sampler::sample_subgraph;
use leas_core::synth::{
    events_jsonl, generate_campaign_log, generate_planted_graph, labels_tsv, PlantedSpec,
    SpamCampaignSpec, RNG_ALGORITHM,
};
use leas_core::validate::validate_tabc;
use leas_core::NodeId;

#[derive(Parser)]
#[command(
    name = "leas",
    version,
    about = "Seed expansion for lockstep fake-engagement detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project an engagement event log into the weighted co-engagement
    /// graph (owner penalty applied when owner data is present).
    BuildGraph(BuildGraphArgs),
    /// Expand seeds into accomplice clusters (no tier classification).
    Expand(RunArgs),
    /// Expand seeds and classify detections into tiers.
    Pipeline(PipelineArgs),
    /// Generate ground-truthed synthetic data.
    Synth(SynthArgs),
    /// Re-measure density and Flake-ODF of clusters on the full graph.
    Metrics(MetricsArgs),
    /// Re-validate clusters against thresholds and the event log.
    Validate(ValidateArgs),
}

/// Expansion parameters; defaults < config file < explicit flags.
#[derive(Args, Clone)]
struct ParamFlags {
    /// Config file of `key = value` lines; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subspace iteration rounds.
    #[arg(long)]
    k: Option<usize>,
    /// Requested subspace dimension parameter.
    #[arg(long)]
    l: Option<usize>,
    /// Minimum cluster size the sweep may return.
    #[arg(long)]
    n_min: Option<usize>,
    /// Per-seed sample-size cap.
    #[arg(long)]
    cap_n: Option<usize>,
    /// Degree threshold for sampling and seed skipping.
    #[arg(long)]
    d_max: Option<usize>,
    /// Minimum edge weight retained during sampling.
    #[arg(long)]
    m: Option<f64>,
    /// Temporal half-window in seconds.
    #[arg(long)]
    delta_t: Option<u64>,
    /// Density threshold for validation.
    #[arg(long)]
    rho_min: Option<f64>,
    /// Worker pool size.
    #[arg(long)]
    workers: Option<usize>,
    /// Skip targets engaged by more actors than this during graph builds.
    #[arg(long)]
    hot_target_cap: Option<usize>,
    /// Initial Krylov basis size rule: "l" or "l+1".
    #[arg(long)]
    krylov_order: Option<String>,
    /// Drop edge weights before the spectral stage (ablation).
    #[arg(long, default_value_t = false)]
    binary_adjacency: bool,
}

impl ParamFlags {
    /// Resolve the effective config: defaults, then the config file, then
    /// explicit flags.
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.l {
            cfg.l = v;
        }
        if let Some(v) = self.n_min {
            cfg.n_min = v;
        }
        if let Some(v) = self.cap_n {
            cfg.cap_n = v;
        }
        if let Some(v) = self.d_max {
            cfg.d_max = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.delta_t {
            cfg.delta_t = v;
        }
        if let Some(v) = self.rho_min {
            cfg.rho_min = v;
        }
        if let Some(v) = self.workers {
            cfg.worker_count = v;
        }
        if let Some(v) = self.hot_target_cap {
            cfg.hot_target_cap = v;
        }
        if let Some(v) = &self.krylov_order {
            cfg.krylov_order = v.parse()?;
        }
        if self.binary_adjacency {
            cfg.binary_adjacency = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Engagement event log, one JSON object per line.
    #[arg(long)]
    bipartite: PathBuf,
    /// Extra `page_id<TAB>owner_id` assignments merged over the log's own
    /// owner annotations.
    #[arg(long)]
    owners: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args)]
struct RunArgs {
    /// Co-engagement graph TSV (`a<TAB>b<TAB>weight`).
    #[arg(long)]
    graph: PathBuf,
    /// Owner map TSV (`page_id<TAB>owner_id`).
    #[arg(long)]
    owners: Option<PathBuf>,
    /// Engagement event log for temporal validation; without it the
    /// temporal check is vacuous and verdicts are structural only.
    #[arg(long)]
    bipartite: Option<PathBuf>,
    /// Seed account ids, one per line.
    #[arg(long)]
    seeds: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write a review list of Tier II accounts whose cluster density
    /// exceeds this threshold.
    #[arg(long)]
    tier2_density_min: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthModel {
    /// Planted-group relationship graph.
    Planted,
    /// Spam campaign injected into organic engagement events.
    Campaign,
}

#[derive(Args)]
struct SynthArgs {
    /// Which generator to run.
    #[arg(long, value_enum)]
    model: SynthModel,
    /// Generator spec as a JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec's RNG seed.
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Co-engagement graph TSV.
    #[arg(long)]
    graph: PathBuf,
    /// Clusters JSONL produced by expand/pipeline.
    #[arg(long)]
    clusters: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Co-engagement graph TSV.
    #[arg(long)]
    graph: PathBuf,
    /// Engagement event log for temporal validation; optional as in
    /// expand.
    #[arg(long)]
    bipartite: Option<PathBuf>,
    /// Clusters JSONL produced by expand/pipeline.
    #[arg(long)]
    clusters: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    params: ParamFlags,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("LEAS_LOG_LEVEL", "info"),
    )
    .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Input trouble exits 1; algorithmic or environmental breakdowns exit 2.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Io(_)
        | Error::Parse(_)
        | Error::Config(_)
        | Error::SeedMissing(_)
        | Error::NodeMissing(_)
        | Error::EmptyCoherence
        | Error::TooFewMembers(_)
        | Error::ImproperSubset => 1,
        Error::Asymmetric(_)
        | Error::LpInfeasible { .. }
        | Error::LpDegenerate(_)
        | Error::Internal(_) => 2,
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::BuildGraph(args) => cmd_build_graph(args),
        Command::Expand(args) => cmd_run(args, false, None),
        Command::Pipeline(args) => cmd_run(args.run, true, args.tier2_density_min),
        Command::Synth(args) => cmd_synth(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn open_reader(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path, owners: Option<&Path>) -> Result<EngagementGraph, Error> {
    let mut g = EngagementGraph::from_tsv(open_reader(path)?)?;
    if let Some(owners) = owners {
        g.load_owners(open_reader(owners)?)?;
    }
    Ok(g)
}

fn load_bipartite(path: &Path) -> Result<(EngagementBipartite, ParseReport), Error> {
    parse_events(open_reader(path)?, (0, u64::MAX))
}

fn load_optional_bipartite(path: Option<&Path>) -> Result<EngagementBipartite, Error> {
    match path {
        Some(path) => {
            let (b, report) = load_bipartite(path)?;
            if !report.rejects.is_empty() {
                log::warn!("{} malformed event lines rejected", report.rejects.len());
            }
            Ok(b)
        }
        None => {
            log::warn!(
                "no --bipartite given: temporal coherence is unverifiable, verdicts are structural only"
            );
            Ok(EngagementBipartite::empty((0, u64::MAX)))
        }
    }
}

fn load_seeds(path: &Path) -> Result<BTreeSet<NodeId>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut seeds = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let id: NodeId = line
            .parse()
            .map_err(|e| Error::Parse(format!("seeds line {}: {e}", idx + 1)))?;
        if id == 0 {
            return Err(Error::Parse(format!("seeds line {}: zero id", idx + 1)));
        }
        seeds.insert(id);
    }
    if seeds.is_empty() {
        return Err(Error::Parse(format!("{}: no seeds", path.display())));
    }
    Ok(seeds)
}

fn load_cluster_records(path: &Path) -> Result<Vec<ClusterRecord>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ClusterRecord = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("clusters line {}: {e}", idx + 1)))?;
        records.push(rec);
    }
    Ok(records)
}

/// Echo the resolved run configuration to stdout and into the output
/// directory, so any run can be reproduced from its artifacts.
fn echo_resolved(out_dir: &Path, header: &[(&str, String)], cfg: Option<&RunConfig>) -> Result<(), Error> {
    let mut text = String::from("# resolved configuration\n");
    for (key, value) in header {
        let _ = writeln!(text, "{key} = {value}");
    }
    if let Some(cfg) = cfg {
        text.push_str(&cfg.to_kv_string());
    }
    print!("{text}");
    atomic_write_str(&out_dir.join("resolved_config.txt"), &text)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn opt_path_str(p: Option<&PathBuf>) -> String {
    p.map(|p| path_str(p)).unwrap_or_else(|| "none".to_string())
}

fn cmd_build_graph(args: BuildGraphArgs) -> Result<(), Error> {
    let cfg = args.params.resolve()?;
    ensure_out_dir(&args.out_dir)?;
    // Coherence filtering is opt-in: it applies only when --delta-t is
    // given explicitly on this command line.
    let coherence = args.params.delta_t;
    echo_resolved(
        &args.out_dir,
        &[
            ("command", "build-graph".to_string()),
            ("bipartite", path_str(&args.bipartite)),
            ("owners", opt_path_str(args.owners.as_ref())),
            ("out_dir", path_str(&args.out_dir)),
            (
                "coherence_delta_t",
                coherence.map_or("none".to_string(), |v| v.to_string()),
            ),
        ],
        Some(&cfg),
    )?;

    let (mut b, report) = load_bipartite(&args.bipartite)?;
    if let Some(owners) = &args.owners {
        let text = std::fs::read_to_string(owners)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(p), Some(o), None) => {
                    let page = p.parse::<NodeId>().map_err(|e| {
                        Error::Parse(format!("owners line {}: {e}", idx + 1))
                    })?;
                    let owner = o.parse::<NodeId>().map_err(|e| {
                        Error::Parse(format!("owners line {}: {e}", idx + 1))
                    })?;
                    b.owners.insert(page, owner);
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "owners line {}: expected `page_id<TAB>owner_id`",
                        idx + 1
                    )))
                }
            }
        }
    }
    let g = build_graph_with_cap(&b, coherence, cfg.hot_target_cap);
    let g = apply_owner_penalty(g);

    atomic_write_str(&args.out_dir.join("graph.tsv"), &g.to_tsv())?;
    atomic_write_str(&args.out_dir.join("owners.tsv"), &g.owners_tsv())?;
    let mut parse_summary = format!(
        "parsed = {}\ndropped_by_window = {}\ndeduplicated = {}\nrejects = {}\n",
        report.parsed,
        report.dropped_by_window,
        report.deduplicated,
        report.rejects.len()
    );
    parse_summary.push_str(&report.reject_lines());
    atomic_write_str(&args.out_dir.join("parse_report.txt"), &parse_summary)?;
    println!(
        "graph: {} nodes, {} edges ({} events parsed)",
        g.node_count(),
        g.edge_count(),
        report.parsed
    );
    Ok(())
}

fn cmd_run(args: RunArgs, with_tier: bool, tier2_density_min: Option<f64>) -> Result<(), Error> {
    let cfg = args.params.resolve()?;
    ensure_out_dir(&args.out_dir)?;
    let mut header = vec![
        (
            "command",
            if with_tier { "pipeline" } else { "expand" }.to_string(),
        ),
        ("graph", path_str(&args.graph)),
        ("owners", opt_path_str(args.owners.as_ref())),
        ("bipartite", opt_path_str(args.bipartite.as_ref())),
        ("seeds", path_str(&args.seeds)),
        ("out_dir", path_str(&args.out_dir)),
    ];
    if let Some(threshold) = tier2_density_min {
        header.push(("tier2_density_min", threshold.to_string()));
    }
    echo_resolved(&args.out_dir, &header, Some(&cfg))?;

    let g = load_graph(&args.graph, args.owners.as_deref())?;
    let b = load_optional_bipartite(args.bipartite.as_deref())?;
    let seeds = load_seeds(&args.seeds)?;
    let out: PipelineOutput = run_pipeline(&g, &b, &seeds, &cfg)?;

    atomic_write_str(
        &args.out_dir.join("clusters.jsonl"),
        &render_clusters_jsonl(&out.records)?,
    )?;
    atomic_write_str(
        &args.out_dir.join("timing.csv"),
        &render_timings_csv(&out.timings),
    )?;
    let mut skip_log = String::new();
    for (seed, reason) in &out.skips {
        let _ = writeln!(skip_log, "{seed}\t{reason}");
    }
    atomic_write_str(&args.out_dir.join("skips.txt"), &skip_log)?;

    if with_tier {
        let tier_json = serde_json::to_string_pretty(&out.tier)
            .map_err(|e| Error::Internal(format!("serialize tier report: {e}")))?;
        atomic_write_str(&args.out_dir.join("tier.json"), &tier_json)?;
        if let Some(threshold) = tier2_density_min {
            let mut review = String::new();
            for &acct in &out.tier.tier2 {
                let passes = out
                    .records
                    .iter()
                    .any(|r| r.density > threshold && r.members.contains(&acct));
                if passes {
                    let _ = writeln!(review, "{acct}");
                }
            }
            atomic_write_str(&args.out_dir.join("tier2_review.txt"), &review)?;
        }
    }
    println!("{}", out.summary);
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    ensure_out_dir(&args.out_dir)?;
    let spec_text = std::fs::read_to_string(&args.spec)?;
    let model_name = match args.model {
        SynthModel::Planted => "planted",
        SynthModel::Campaign => "campaign",
    };

    match args.model {
        SynthModel::Planted => {
            let mut spec: PlantedSpec = serde_json::from_str(&spec_text)
                .map_err(|e| Error::Parse(format!("{}: {e}", args.spec.display())))?;
            if let Some(seed) = args.rng_seed {
                spec.rng_seed = seed;
            }
            echo_synth(&args, model_name, spec.rng_seed)?;
            let (g, labels) = generate_planted_graph(&spec)?;
            atomic_write_str(&args.out_dir.join("graph.tsv"), &g.to_tsv())?;
            atomic_write_str(&args.out_dir.join("labels.tsv"), &labels_tsv(&labels))?;
            let spec_json = serde_json::to_string_pretty(&spec)
                .map_err(|e| Error::Internal(format!("serialize spec: {e}")))?;
            write_spec_and_meta(&args.out_dir, model_name, &spec_json)?;
            println!(
                "planted graph: {} nodes, {} edges",
                g.node_count(),
                g.edge_count()
            );
        }
        SynthModel::Campaign => {
            let mut spec: SpamCampaignSpec = serde_json::from_str(&spec_text)
                .map_err(|e| Error::Parse(format!("{}: {e}", args.spec.display())))?;
            if let Some(seed) = args.rng_seed {
                spec.rng_seed = seed;
            }
            echo_synth(&args, model_name, spec.rng_seed)?;
            let (events, labels) = generate_campaign_log(&spec)?;
            atomic_write_str(&args.out_dir.join("events.jsonl"), &events_jsonl(&events)?)?;
            atomic_write_str(&args.out_dir.join("labels.tsv"), &labels_tsv(&labels))?;
            let spec_json = serde_json::to_string_pretty(&spec)
                .map_err(|e| Error::Internal(format!("serialize spec: {e}")))?;
            write_spec_and_meta(&args.out_dir, model_name, &spec_json)?;
            println!("campaign log: {} events", events.len());
        }
    }
    Ok(())
}

fn echo_synth(args: &SynthArgs, model: &str, effective_seed: u64) -> Result<(), Error> {
    echo_resolved(
        &args.out_dir,
        &[
            ("command", "synth".to_string()),
            ("model", model.to_string()),
            ("spec", path_str(&args.spec)),
            ("rng_seed", effective_seed.to_string()),
            ("out_dir", path_str(&args.out_dir)),
        ],
        None,
    )
}

fn write_spec_and_meta(out_dir: &Path, model: &str, spec_json: &str) -> Result<(), Error> {
    atomic_write_str(&out_dir.join("spec.json"), spec_json)?;
    let meta = serde_json::json!({
        "model": model,
        "rng_algorithm": RNG_ALGORITHM,
        "notes": [
            "background probability applies to every pair not covered by a group",
            "reproduce with identical spec.json: outputs are byte-identical",
        ],
    });
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Internal(format!("serialize meta: {e}")))?;
    atomic_write_str(&out_dir.join("meta.json"), &meta_json)
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), Error> {
    ensure_out_dir(&args.out_dir)?;
    echo_resolved(
        &args.out_dir,
        &[
            ("command", "metrics".to_string()),
            ("graph", path_str(&args.graph)),
            ("clusters", path_str(&args.clusters)),
            ("out_dir", path_str(&args.out_dir)),
        ],
        None,
    )?;
    let g = load_graph(&args.graph, None)?;
    let records = load_cluster_records(&args.clusters)?;
    let mut out = String::from("seed\tsize\tdensity\tflake_odf\n");
    for rec in &records {
        let members: BTreeSet<NodeId> = rec.members.iter().copied().collect();
        let density = internal_density(&g, &members)?;
        let odf = flake_odf(&g, &members)?;
        let _ = writeln!(out, "{}\t{}\t{}\t{}", rec.seed, members.len(), density, odf);
    }
    atomic_write_str(&args.out_dir.join("metrics.tsv"), &out)?;
    println!("measured {} clusters", records.len());
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let cfg = args.params.resolve()?;
    ensure_out_dir(&args.out_dir)?;
    echo_resolved(
        &args.out_dir,
        &[
            ("command", "validate".to_string()),
            ("graph", path_str(&args.graph)),
            ("bipartite", opt_path_str(args.bipartite.as_ref())),
            ("clusters", path_str(&args.clusters)),
            ("out_dir", path_str(&args.out_dir)),
        ],
        Some(&cfg),
    )?;
    let g = load_graph(&args.graph, None)?;
    let b = load_optional_bipartite(args.bipartite.as_deref())?;
    let records = load_cluster_records(&args.clusters)?;
    let mut out = String::new();
    let mut passing = 0usize;
    for rec in &records {
        let sg = sample_subgraph(&g, rec.seed, cfg.d_max, cfg.cap_n, cfg.m)?;
        let cluster = leas_core::cluster::AccompliceCluster {
            seed: rec.seed,
            members: rec.members.iter().copied().collect(),
            conductance: rec.conductance,
            internal_density: rec.density,
            edge_count: 0,
            tabc_params: None,
            temporal_coherent: false,
            warnings: rec.warnings.clone(),
        };
        let report = validate_tabc(
            &cluster,
            &sg,
            &b,
            cfg.n_min,
            cfg.m,
            cfg.rho_min,
            cfg.delta_t,
        )?;
        if report.verdict {
            passing += 1;
        }
        let line = serde_json::json!({ "seed": rec.seed, "tabc": report });
        out.push_str(
            &serde_json::to_string(&line)
                .map_err(|e| Error::Internal(format!("serialize: {e}")))?,
        );
        out.push('\n');
    }
    atomic_write_str(&args.out_dir.join("validation.jsonl"), &out)?;
    println!("{passing} of {} clusters pass validation", records.len());
    Ok(())
}
