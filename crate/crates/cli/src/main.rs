//! `agids` — attack-graph / IDS integration toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 path-enumeration
//! limit exceeded.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use agids_core::anova::{anova_f, select_features, SelectionDirection};
use agids_core::corpus;
use agids_core::error::Error as CoreError;
use agids_core::experiment::{
    build_variant, parse_variant, render_report, rows_from_csv, run_ag_gen_compare, run_sweep,
    run_victim_risk, victim_risk_chart, write_ag_compare_csv, write_victim_risk_csv, CorpusSource,
    ExperimentConfig, ExperimentRow, IntegrationMode, SweepKind,
};
use agids_core::flow::{load_flows, split, to_matrix, Dataset, LabelMap};
use agids_core::graph::{
    compute_stats_capped, generate_classical, generate_from_alerts, inject_noise, AttackGraph,
};
use agids_core::integrate::{
    gain, refine_predictions, selected_matrix, train_ids_ag, RefinedRoute,
};
use agids_core::lifecycle::{initialize, run as run_lifecycle, LifecycleConfig};
use agids_core::threat::{load_rules, match_rules, NetworkInventory, SignatureRule};
use agids_core::tree::{predict, train_tree, TreeHyperparams};

#[derive(Parser)]
#[command(
    name = "agids",
    version,
    about = "Attack-graph / IDS integration lifecycle toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphOpts {
    /// Attack-graph variant to build.
    #[arg(long, default_value = "et")]
    variant: String,
    /// Probability of injecting a synthetic edge per missing node pair.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Maximum path length (edges) for enumeration.
    #[arg(long, default_value_t = 4)]
    l_max: usize,
    /// Abort enumeration past this many paths instead of truncating.
    #[arg(long, default_value_t = agids_core::graph::DEFAULT_PATH_CAP)]
    path_cap: usize,
}

#[derive(Args)]
struct TrainOpts {
    #[arg(long, default_value_t = 0.6)]
    train_fraction: f64,
    /// Features kept by ANOVA-F selection.
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    max_depth: usize,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Load a labeled flow CSV and emit the load report
    Ingest {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an attack graph and export JSON/DOT plus path stats
    GenAg {
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        flows: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the baseline decision-tree detector
    Train {
        #[arg(long)]
        flows: PathBuf,
        #[command(flatten)]
        train: TrainOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Couple the detector with a graph and report the gain
    Integrate {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// ids-ag injects the path feature; ids-to-ag applies the flip rule.
        #[arg(long, default_value = "ids-ag")]
        mode: String,
        #[command(flatten)]
        graph: GraphOpts,
        #[command(flatten)]
        train: TrainOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flip attack predictions without a supporting path back to benign
    Refine {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        graph: GraphOpts,
        #[command(flatten)]
        train: TrainOpts,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterate the AG/IDS pools over flow batches
    Lifecycle {
        #[arg(long)]
        flows: PathBuf,
        #[arg(long)]
        inventory: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Lifecycle steps; the flows are cut into this many batches plus
        /// one initial training slice.
        #[arg(long, default_value_t = 3)]
        batches: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        graph: GraphOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured experiment sweeps into CSV/SVG reports
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Re-render charts from an existing report.csv
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Core(CoreError),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 1,
        CliError::Core(CoreError::LimitExceeded(_)) => 3,
        CliError::Core(_) => 2,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { flows, out } => cmd_ingest(&flows, out.as_deref()),
        Command::GenAg {
            inventory,
            rules,
            flows,
            graph,
            seed,
            out,
        } => cmd_gen_ag(
            &inventory,
            rules.as_deref(),
            flows.as_deref(),
            &graph,
            seed,
            &out,
        ),
        Command::Train {
            flows,
            train,
            seed,
            out,
        } => cmd_train(&flows, &train, seed, &out),
        Command::Integrate {
            flows,
            inventory,
            rules,
            mode,
            graph,
            train,
            seed,
            out,
        } => {
            let mode = parse_mode(&mode)?;
            cmd_integrate(&flows, &inventory, &rules, mode, &graph, &train, seed, &out)
        }
        Command::Refine {
            flows,
            inventory,
            rules,
            graph,
            train,
            seed,
            out,
        } => cmd_integrate(
            &flows,
            &inventory,
            &rules,
            IntegrationMode::IdsToAg,
            &graph,
            &train,
            seed,
            &out,
        ),
        Command::Lifecycle {
            flows,
            inventory,
            rules,
            batches,
            seed,
            graph,
            out,
        } => cmd_lifecycle(&flows, &inventory, &rules, batches, seed, &graph, &out),
        Command::Experiment { config, out } => cmd_experiment(&config, &out),
        Command::Report { report, out } => cmd_report(&report, &out),
    }
}

fn parse_mode(raw: &str) -> Result<IntegrationMode, CliError> {
    match raw {
        "ids-ag" => Ok(IntegrationMode::IdsAg),
        "ids-to-ag" => Ok(IntegrationMode::IdsToAg),
        other => Err(CliError::Usage(format!(
            "unknown mode {other}; expected ids-ag or ids-to-ag"
        ))),
    }
}

/// Load one CSV, or every *.csv in a directory (sorted) sharing one schema.
fn load_flow_source(path: &Path) -> Result<Dataset, CliError> {
    let label_map = LabelMap::default();
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(CoreError::from)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(CliError::Usage(format!(
                "no .csv files under {}",
                path.display()
            )));
        }
        let mut merged: Option<Dataset> = None;
        for f in files {
            let (ds, _) = load_flows(&f, &label_map)?;
            merged = Some(match merged {
                None => ds,
                Some(mut acc) => {
                    if acc.feature_names != ds.feature_names {
                        return Err(CliError::Usage(format!(
                            "{} has a different feature schema than earlier files",
                            f.display()
                        )));
                    }
                    acc.records.extend(ds.records);
                    Dataset::new(acc.records, acc.feature_names)
                }
            });
        }
        Ok(merged.expect("at least one file"))
    } else {
        Ok(load_flows(path, &label_map)?.0)
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(CoreError::from)?;
    }
    std::fs::write(path, contents).map_err(CoreError::from)?;
    Ok(())
}

fn cmd_ingest(flows: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let (dataset, report) = load_flows(flows, &LabelMap::default())?;
    let report_json = serde_json::to_string_pretty(&report).map_err(CoreError::from)?;
    match out {
        Some(dir) => {
            write(&dir.join("load_report.json"), &report_json)?;
            println!("wrote {}", dir.join("load_report.json").display());
        }
        None => println!("{report_json}"),
    }
    println!(
        "kept {} of {} rows ({} features, classes: {})",
        report.rows_kept,
        report.rows_read,
        dataset.feature_count(),
        dataset
            .class_set
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn build_graph_from_args(
    inventory: &NetworkInventory,
    rules: Option<&[SignatureRule]>,
    flows: Option<&Dataset>,
    graph: &GraphOpts,
    seed: u64,
) -> Result<AttackGraph, CliError> {
    let kind = parse_variant(&graph.variant)?;
    let scrape = generate_classical(inventory);
    let needs_alerts = kind != agids_core::experiment::AgVariantKind::Scrape;
    let et = if needs_alerts {
        let (rules, flows) = match (rules, flows) {
            (Some(r), Some(f)) => (r, f),
            _ => {
                return Err(CliError::Usage(format!(
                    "variant {} needs --rules and --flows to derive alerts",
                    graph.variant
                )))
            }
        };
        let alerts = match_rules(rules, &flows.records);
        generate_from_alerts(inventory, &alerts)?
    } else {
        AttackGraph::new("ET", Default::default(), Vec::new())
    };
    let mut ag = build_variant(kind, &scrape, &et, seed);
    if graph.p > 0.0 {
        ag = inject_noise(&ag, graph.p, seed);
    }
    Ok(ag)
}

fn cmd_gen_ag(
    inventory_path: &Path,
    rules_path: Option<&Path>,
    flows_path: Option<&Path>,
    graph: &GraphOpts,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let inventory = NetworkInventory::from_path(inventory_path)?;
    let rules = match rules_path {
        Some(p) => Some(load_rules(p, &inventory)?),
        None => None,
    };
    let flows = match flows_path {
        Some(p) => Some(load_flow_source(p)?),
        None => None,
    };

    let started = Instant::now();
    let ag = build_graph_from_args(&inventory, rules.as_deref(), flows.as_ref(), graph, seed)?;
    let sources = inventory.external_ips().into_iter().collect();
    let targets = inventory.internal_ips().into_iter().collect();
    let stats = compute_stats_capped(
        &ag,
        &sources,
        &targets,
        graph.l_max,
        started.elapsed().as_secs_f64(),
        graph.path_cap,
    )?;

    write(&out.join("ag.json"), &ag.to_json()?)?;
    write(&out.join("ag.dot"), &ag.to_dot())?;
    write(
        &out.join("ag_stats.json"),
        &serde_json::to_string_pretty(&stats).map_err(CoreError::from)?,
    )?;
    if let (Some(rules), Some(flows)) = (&rules, &flows) {
        let alerts = match_rules(rules, &flows.records);
        let mut buf = Vec::new();
        agids_core::threat::write_alerts_csv(&alerts, &mut buf).map_err(CoreError::from)?;
        write(&out.join("alerts.csv"), &String::from_utf8_lossy(&buf))?;
    }
    println!(
        "{}: {} nodes, {} edges, {} paths (<= {} hops), avg risk {:.4}",
        stats.variant_tag,
        stats.node_count,
        stats.edge_count,
        stats.path_count,
        graph.l_max,
        stats.avg_risk
    );
    Ok(())
}

fn hyperparams(train: &TrainOpts) -> TreeHyperparams {
    TreeHyperparams::new(
        train.max_depth,
        train.min_samples_split,
        train.min_samples_leaf,
    )
}

fn cmd_train(flows: &Path, train_opts: &TrainOpts, seed: u64, out: &Path) -> Result<(), CliError> {
    let dataset = load_flow_source(flows)?;
    let (train, test) = split(&dataset, train_opts.train_fraction, seed)?;
    let (matrix, labels) = to_matrix(&train);
    let scores = anova_f(&matrix, &labels)?;
    let selection = select_features(&scores, train_opts.k, SelectionDirection::BestK);

    let (train_matrix, train_labels) = selected_matrix(&train, &selection);
    let model = train_tree(&train_matrix, &train_labels, hyperparams(train_opts), seed)?;
    let (test_matrix, truth) = selected_matrix(&test, &selection);
    let metrics = agids_core::metrics::evaluate(&predict(&model, &test_matrix)?, &truth)?;

    write(&out.join("model.json"), &model.to_json()?)?;
    write(
        &out.join("selection.json"),
        &serde_json::to_string_pretty(&selection).map_err(CoreError::from)?,
    )?;
    write(
        &out.join("metrics.json"),
        &serde_json::to_string_pretty(&metrics).map_err(CoreError::from)?,
    )?;
    println!(
        "test accuracy {:.4}, macro F1 {:.4}, FPR {:.4} ({} leaves, depth {})",
        metrics.accuracy,
        metrics.f1_macro,
        metrics.fpr,
        model.leaf_count(),
        model.depth()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_integrate(
    flows: &Path,
    inventory_path: &Path,
    rules_path: &Path,
    mode: IntegrationMode,
    graph: &GraphOpts,
    train_opts: &TrainOpts,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let dataset = load_flow_source(flows)?;
    let inventory = NetworkInventory::from_path(inventory_path)?;
    let rules = load_rules(rules_path, &inventory)?;
    let ag = build_graph_from_args(&inventory, Some(&rules), Some(&dataset), graph, seed)?;

    let (train, test) = split(&dataset, train_opts.train_fraction, seed)?;
    let (matrix, labels) = to_matrix(&train);
    let scores = anova_f(&matrix, &labels)?;
    let selection = select_features(&scores, train_opts.k, SelectionDirection::BestK);
    let hp = hyperparams(train_opts);
    let (train_matrix, train_labels) = selected_matrix(&train, &selection);
    let baseline = train_tree(&train_matrix, &train_labels, hp, seed)?;

    let (base_m, refined_m, d) = match mode {
        IntegrationMode::IdsAg => {
            let augmented = train_ids_ag(&train, &ag, &selection, hp)?;
            gain(
                &baseline,
                &selection,
                RefinedRoute::Augmented(&augmented),
                &test,
                &ag,
            )?
        }
        IntegrationMode::IdsToAg => {
            let (test_matrix, _) = selected_matrix(&test, &selection);
            let pred = predict(&baseline, &test_matrix)?;
            let (_, report) = refine_predictions(&pred, &test.records, &ag)?;
            write(
                &out.join("refinement_report.json"),
                &serde_json::to_string_pretty(&report).map_err(CoreError::from)?,
            )?;
            gain(&baseline, &selection, RefinedRoute::FlipRule, &test, &ag)?
        }
    };

    write(
        &out.join("baseline_metrics.json"),
        &serde_json::to_string_pretty(&base_m).map_err(CoreError::from)?,
    )?;
    write(
        &out.join("refined_metrics.json"),
        &serde_json::to_string_pretty(&refined_m).map_err(CoreError::from)?,
    )?;
    write(
        &out.join("delta.json"),
        &serde_json::to_string_pretty(&d).map_err(CoreError::from)?,
    )?;
    println!(
        "baseline acc {:.4} f1 {:.4} fpr {:.4} | refined acc {:.4} f1 {:.4} fpr {:.4}",
        base_m.accuracy,
        base_m.f1_macro,
        base_m.fpr,
        refined_m.accuracy,
        refined_m.f1_macro,
        refined_m.fpr
    );
    println!(
        "delta: accuracy {:+.4}, f1 {:+.4}, fpr {:+.4}",
        d.d_accuracy, d.d_f1, d.d_fpr
    );
    Ok(())
}

fn cmd_lifecycle(
    flows: &Path,
    inventory_path: &Path,
    rules_path: &Path,
    batches: usize,
    seed: u64,
    graph: &GraphOpts,
    out: &Path,
) -> Result<(), CliError> {
    if batches == 0 {
        return Err(CliError::Usage("--batches must be at least 1".into()));
    }
    let dataset = load_flow_source(flows)?;
    let inventory = NetworkInventory::from_path(inventory_path)?;
    let rules = load_rules(rules_path, &inventory)?;

    let chunks = batches + 1; // one extra slice seeds the initial detector
    let per = dataset.len() / chunks;
    if per < 10 {
        return Err(CliError::Usage(format!(
            "{} flows are too few for {batches} lifecycle batches",
            dataset.len()
        )));
    }
    let slices: Vec<Dataset> = (0..chunks)
        .map(|i| {
            let hi = if i == chunks - 1 {
                dataset.len()
            } else {
                (i + 1) * per
            };
            Dataset::new(
                dataset.records[i * per..hi].to_vec(),
                dataset.feature_names.clone(),
            )
        })
        .collect();

    let config = LifecycleConfig {
        l_max: graph.l_max,
        noise_p: graph.p,
        ..LifecycleConfig::default()
    };
    let state = initialize(&slices[0], &inventory, &config, seed)?;
    let finished = run_lifecycle(state, &slices[1..], &rules, &inventory, &config)?;

    write(&out.join("checkpoint.json"), &finished.checkpoint_json()?)?;
    write(&out.join("history.csv"), &finished.history_csv())?;
    for r in &finished.history {
        println!(
            "iter {}: {} alerts, {} confirmed vulns, {} paths, f1 {:.4} (refined {:+.4})",
            r.iteration,
            r.alerts_seen,
            r.confirmed_vulns,
            r.path_count,
            r.val_metrics.f1_macro,
            r.deltas.d_f1
        );
    }
    println!("wrote {}", out.join("history.csv").display());
    Ok(())
}

fn load_corpus(
    source: &CorpusSource,
) -> Result<(Dataset, NetworkInventory, Vec<SignatureRule>), CliError> {
    match source {
        CorpusSource::Synthetic(config) => {
            let c = corpus::generate(config);
            Ok((c.dataset, c.inventory, c.rules))
        }
        CorpusSource::Paths {
            flows,
            inventory,
            rules,
        } => {
            let inventory = NetworkInventory::from_path(inventory)?;
            let rules = load_rules(rules, &inventory)?;
            let dataset = load_flow_source(flows)?;
            Ok((dataset, inventory, rules))
        }
    }
}

fn cmd_experiment(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let config = ExperimentConfig::from_path(config_path)?;
    let defaults = config.defaults.unwrap_or_default();
    let (dataset, inventory, rules) = load_corpus(&config.corpus)?;

    let mut rows: Vec<ExperimentRow> = Vec::new();
    for spec in &config.experiments {
        match spec.sweep {
            SweepKind::AgGenCompare => {
                let (classical, alert_based) =
                    run_ag_gen_compare(&inventory, &rules, &dataset, defaults.l_max)?;
                write(
                    &out.join("ag_compare.csv"),
                    &write_ag_compare_csv(&classical, &alert_based),
                )?;
                println!(
                    "[{}] paths {} -> {} ({:.3}s -> {:.3}s)",
                    spec.name,
                    classical.path_count,
                    alert_based.path_count,
                    classical.generation_seconds,
                    alert_based.generation_seconds
                );
            }
            SweepKind::VictimRisk => {
                let fractions: Vec<f64> = spec
                    .values
                    .iter()
                    .filter_map(|v| match v {
                        agids_core::experiment::SweepValue::Real(f) => Some(*f),
                        agids_core::experiment::SweepValue::Int(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                let fractions = if fractions.is_empty() {
                    vec![0.5, 1.0]
                } else {
                    fractions
                };
                let table = run_victim_risk(
                    &inventory,
                    &rules,
                    &dataset,
                    &fractions,
                    config.seed.wrapping_add(spec.seed_base),
                    defaults.l_max,
                )?;
                write(&out.join("victim_risk.csv"), &write_victim_risk_csv(&table))?;
                write(
                    &out.join("victim_risk.svg"),
                    &agids_core::chart::render_grouped_bars(&victim_risk_chart(&table)),
                )?;
                println!("[{}] victim risk table: {} rows", spec.name, table.len());
            }
            _ => {
                let start = Instant::now();
                let sweep_rows = run_sweep(spec, &dataset, &inventory, &rules, &defaults)?;
                println!(
                    "[{}] {} rows in {:.1}s",
                    spec.name,
                    sweep_rows.len(),
                    start.elapsed().as_secs_f64()
                );
                rows.extend(sweep_rows);
            }
        }
    }
    if !rows.is_empty() {
        let files = render_report(&rows, out)?;
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn cmd_report(report: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(report).map_err(CoreError::from)?;
    let rows = rows_from_csv(&text)?;
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{} holds no experiment rows",
            report.display()
        )));
    }
    let files = render_report(&rows, out)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
