//! Named, configurable experiment sweeps: noise probability, graph variants,
//! training fraction, best/worst-K features, tree hyperparameters, plus the
//! generation comparison and per-victim risk tables. Each sweep cell builds a
//! baseline pipeline and its integrated counterpart on identical splits and
//! reports metric deltas; results land in CSV reports and SVG charts.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anova::{anova_f, select_features, SelectionDirection};
use crate::chart::{render_grouped_bars, BarChart, Series};
use crate::corpus::CorpusConfig;
use crate::error::{Error, Result};
use crate::flow::{split, Dataset};
use crate::graph::{
    combine, compute_stats, generate_classical, generate_from_alerts, inject_noise, subset,
    victim_risk, AgStats, AttackGraph,
};
use crate::integrate::{gain, selected_matrix, train_ids_ag, RefinedRoute};
use crate::rng::fnv1a64;
use crate::threat::{limit_alerts, match_rules, NetworkInventory, SignatureRule};
use crate::tree::{train_tree, TreeHyperparams};

/// Edge fraction kept by the Sub(ET) variant.
pub const SUB_ET_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    NoiseP,
    AgVariant,
    TrainFraction,
    WorstK,
    BestK,
    TreeHyperparams,
    AgGenCompare,
    VictimRisk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(u64),
    Real(f64),
    Hyper {
        max_depth: usize,
        min_samples_split: usize,
        min_samples_leaf: usize,
    },
    Variant(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Real(v) => write!(f, "{v}"),
            SweepValue::Int(v) => write!(f, "{v}"),
            SweepValue::Hyper {
                max_depth,
                min_samples_split,
                min_samples_leaf,
            } => {
                write!(
                    f,
                    "depth={max_depth};split={min_samples_split};leaf={min_samples_leaf}"
                )
            }
            SweepValue::Variant(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationMode {
    IdsAg,
    IdsToAg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub sweep: SweepKind,
    /// Sweep points; when empty the figure-mirroring default grid applies.
    #[serde(default)]
    pub values: Vec<SweepValue>,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    #[serde(default)]
    pub seed_base: u64,
    /// Which integration the refined pipeline uses; defaults to IdsAg.
    #[serde(default)]
    pub mode: Option<IntegrationMode>,
}

fn default_repeats() -> u32 {
    1
}

/// Default grids mirroring the reported figures.
pub fn default_values(kind: SweepKind) -> Vec<SweepValue> {
    match kind {
        SweepKind::NoiseP => [0.0, 0.05, 0.1, 0.2]
            .iter()
            .map(|&v| SweepValue::Real(v))
            .collect(),
        SweepKind::AgVariant => ["scrape", "et", "sub-et", "scrape+et", "scrape+sub-et"]
            .iter()
            .map(|v| SweepValue::Variant(v.to_string()))
            .collect(),
        SweepKind::TrainFraction => [0.2, 0.4, 0.6, 0.8]
            .iter()
            .map(|&v| SweepValue::Real(v))
            .collect(),
        SweepKind::WorstK | SweepKind::BestK => [10u64, 20, 40, 60, 80]
            .iter()
            .map(|&v| SweepValue::Int(v))
            .collect(),
        SweepKind::TreeHyperparams => vec![
            SweepValue::Hyper {
                max_depth: 5,
                min_samples_split: 2,
                min_samples_leaf: 1,
            },
            SweepValue::Hyper {
                max_depth: 10,
                min_samples_split: 2,
                min_samples_leaf: 1,
            },
            SweepValue::Hyper {
                max_depth: 20,
                min_samples_split: 2,
                min_samples_leaf: 1,
            },
            SweepValue::Hyper {
                max_depth: 20,
                min_samples_split: 10,
                min_samples_leaf: 1,
            },
            SweepValue::Hyper {
                max_depth: 20,
                min_samples_split: 2,
                min_samples_leaf: 5,
            },
        ],
        SweepKind::AgGenCompare => vec![SweepValue::Variant("compare".into())],
        SweepKind::VictimRisk => [0.5, 1.0].iter().map(|&v| SweepValue::Real(v)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub experiment: String,
    pub sweep_value: String,
    pub repeat: u32,
    pub metric_name: String,
    pub baseline: Option<f64>,
    pub refined: Option<f64>,
    pub delta: Option<f64>,
}

/// Shared pipeline defaults a sweep perturbs one knob of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineDefaults {
    pub train_fraction: f64,
    pub feature_k: usize,
    pub l_max: usize,
}

impl Default for PipelineDefaults {
    fn default() -> Self {
        PipelineDefaults {
            train_fraction: 0.6,
            feature_k: 20,
            l_max: crate::graph::DEFAULT_L_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgVariantKind {
    Scrape,
    Et,
    SubEt,
    ScrapePlusEt,
    ScrapePlusSubEt,
}

pub fn parse_variant(raw: &str) -> Result<AgVariantKind> {
    match raw.to_ascii_lowercase().as_str() {
        "scrape" => Ok(AgVariantKind::Scrape),
        "et" => Ok(AgVariantKind::Et),
        "sub-et" | "sub(et)" => Ok(AgVariantKind::SubEt),
        "scrape+et" => Ok(AgVariantKind::ScrapePlusEt),
        "scrape+sub-et" | "scrape+sub(et)" => Ok(AgVariantKind::ScrapePlusSubEt),
        other => Err(Error::InvalidConfig(format!("unknown AG variant: {other}"))),
    }
}

/// Build the requested graph variant from the classical and alert-derived
/// graphs.
pub fn build_variant(
    kind: AgVariantKind,
    scrape: &AttackGraph,
    et: &AttackGraph,
    seed: u64,
) -> AttackGraph {
    match kind {
        AgVariantKind::Scrape => scrape.clone(),
        AgVariantKind::Et => et.clone(),
        AgVariantKind::SubEt => subset(et, SUB_ET_FRACTION, seed),
        AgVariantKind::ScrapePlusEt => combine(scrape, et, "Scrape+ET"),
        AgVariantKind::ScrapePlusSubEt => {
            combine(scrape, &subset(et, SUB_ET_FRACTION, seed), "Scrape+Sub(ET)")
        }
    }
}

fn error_code(err: &Error) -> &'static str {
    match err {
        Error::LimitExceeded(_) => "error:limit_exceeded",
        Error::SingleClass => "error:single_class",
        Error::EmptyTraining => "error:empty_training",
        Error::InvalidFraction(_) => "error:invalid_fraction",
        Error::EmptyDataset => "error:empty_dataset",
        _ => "error:failed",
    }
}

struct CellSettings {
    train_fraction: f64,
    k: usize,
    direction: SelectionDirection,
    hp: TreeHyperparams,
    noise_p: f64,
    variant: AgVariantKind,
}

fn cell_settings(
    spec: &ExperimentSpec,
    defaults: &PipelineDefaults,
    value: &SweepValue,
) -> Result<CellSettings> {
    let mut s = CellSettings {
        train_fraction: defaults.train_fraction,
        k: defaults.feature_k,
        direction: SelectionDirection::BestK,
        hp: TreeHyperparams::default(),
        noise_p: 0.0,
        variant: AgVariantKind::Et,
    };
    let bad = |what: &str| Error::InvalidConfig(format!("sweep value {value} is not a {what}"));
    match spec.sweep {
        SweepKind::NoiseP => match value {
            SweepValue::Real(p) if (0.0..=1.0).contains(p) => s.noise_p = *p,
            SweepValue::Int(0) => s.noise_p = 0.0,
            _ => return Err(bad("probability in [0,1]")),
        },
        SweepKind::AgVariant => match value {
            SweepValue::Variant(v) => s.variant = parse_variant(v)?,
            _ => return Err(bad("variant name")),
        },
        SweepKind::TrainFraction => match value {
            SweepValue::Real(f) if *f > 0.0 && *f < 1.0 => s.train_fraction = *f,
            _ => return Err(bad("fraction in (0,1)")),
        },
        SweepKind::WorstK | SweepKind::BestK => match value {
            SweepValue::Int(k) if *k >= 1 => {
                s.k = *k as usize;
                s.direction = if spec.sweep == SweepKind::WorstK {
                    SelectionDirection::WorstK
                } else {
                    SelectionDirection::BestK
                };
            }
            _ => return Err(bad("positive feature count")),
        },
        SweepKind::TreeHyperparams => match value {
            SweepValue::Hyper {
                max_depth,
                min_samples_split,
                min_samples_leaf,
            } => {
                s.hp = TreeHyperparams::new(*max_depth, *min_samples_split, *min_samples_leaf);
            }
            _ => return Err(bad("hyperparameter triple")),
        },
        SweepKind::AgGenCompare | SweepKind::VictimRisk => {
            return Err(Error::InvalidConfig(format!(
                "{:?} runs through its dedicated operation, not run_sweep",
                spec.sweep
            )));
        }
    }
    Ok(s)
}

/// Per-cell seed: a function of the experiment definition alone.
fn cell_seed(seed_base: u64, value: &SweepValue, repeat: u32) -> u64 {
    let key = format!("{value}|{repeat}");
    seed_base.wrapping_add(fnv1a64(key.as_bytes()))
}

/// Run one metric sweep. Every (value, repeat) cell emits rows for accuracy,
/// macro F1, and FPR; a failed cell emits one error row instead.
pub fn run_sweep(
    spec: &ExperimentSpec,
    dataset: &Dataset,
    inventory: &NetworkInventory,
    rules: &[SignatureRule],
    defaults: &PipelineDefaults,
) -> Result<Vec<ExperimentRow>> {
    let values = if spec.values.is_empty() {
        default_values(spec.sweep)
    } else {
        spec.values.clone()
    };
    if values.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "experiment {} has no sweep values",
            spec.name
        )));
    }
    let mode = spec.mode.unwrap_or(IntegrationMode::IdsAg);

    // variant inputs are seed-independent; build them once
    let alerts = match_rules(rules, &dataset.records);
    let scrape = generate_classical(inventory);
    let et = generate_from_alerts(inventory, &alerts)?;

    let mut rows = Vec::new();
    for value in &values {
        for repeat in 0..spec.repeats.max(1) {
            let seed = cell_seed(spec.seed_base, value, repeat);
            match run_cell(
                spec, defaults, value, repeat, seed, mode, dataset, &scrape, &et,
            ) {
                Ok(cell_rows) => rows.extend(cell_rows),
                Err(err) => rows.push(ExperimentRow {
                    experiment: spec.name.clone(),
                    sweep_value: value.to_string(),
                    repeat,
                    metric_name: error_code(&err).to_string(),
                    baseline: None,
                    refined: None,
                    delta: None,
                }),
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    spec: &ExperimentSpec,
    defaults: &PipelineDefaults,
    value: &SweepValue,
    repeat: u32,
    seed: u64,
    mode: IntegrationMode,
    dataset: &Dataset,
    scrape: &AttackGraph,
    et: &AttackGraph,
) -> Result<Vec<ExperimentRow>> {
    let s = cell_settings(spec, defaults, value)?;

    let (train, test) = split(dataset, s.train_fraction, seed)?;
    let (train_matrix, train_labels) = crate::flow::to_matrix(&train);
    let scores = anova_f(&train_matrix, &train_labels)?;
    let selection = select_features(&scores, s.k, s.direction);

    let baseline = {
        let (m, l) = selected_matrix(&train, &selection);
        train_tree(&m, &l, s.hp, seed)?
    };

    let mut ag = build_variant(s.variant, scrape, et, seed);
    if s.noise_p > 0.0 {
        ag = inject_noise(&ag, s.noise_p, seed);
    }

    let (base_m, refined_m, d) = match mode {
        IntegrationMode::IdsAg => {
            let augmented = train_ids_ag(&train, &ag, &selection, s.hp)?;
            gain(
                &baseline,
                &selection,
                RefinedRoute::Augmented(&augmented),
                &test,
                &ag,
            )?
        }
        IntegrationMode::IdsToAg => {
            gain(&baseline, &selection, RefinedRoute::FlipRule, &test, &ag)?
        }
    };

    let row = |metric: &str, b: f64, r: f64, dl: f64| ExperimentRow {
        experiment: spec.name.clone(),
        sweep_value: value.to_string(),
        repeat,
        metric_name: metric.to_string(),
        baseline: Some(b),
        refined: Some(r),
        delta: Some(dl),
    };
    Ok(vec![
        row(
            "accuracy",
            base_m.accuracy,
            refined_m.accuracy,
            d.d_accuracy,
        ),
        row("f1_macro", base_m.f1_macro, refined_m.f1_macro, d.d_f1),
        row("fpr", base_m.fpr, refined_m.fpr, d.d_fpr),
    ])
}

/// Time classical generation against alert-derived generation on identical
/// sources/targets/l_max. The alert log is prepared beforehand (it is the
/// detector's output, assumed already collected); each timer covers graph
/// construction plus path enumeration.
pub fn run_ag_gen_compare(
    inventory: &NetworkInventory,
    rules: &[SignatureRule],
    flows: &Dataset,
    l_max: usize,
) -> Result<(AgStats, AgStats)> {
    let alerts = match_rules(rules, &flows.records);
    let sources: BTreeSet<String> = inventory.external_ips().into_iter().collect();
    let targets: BTreeSet<String> = inventory.internal_ips().into_iter().collect();

    let t0 = Instant::now();
    let classical = generate_classical(inventory);
    let classical_stats =
        compute_stats(&classical, &sources, &targets, l_max, 0.0).map(|mut s| {
            s.generation_seconds = t0.elapsed().as_secs_f64();
            s
        })?;

    let t1 = Instant::now();
    let alert_based = generate_from_alerts(inventory, &alerts)?;
    let alert_stats =
        compute_stats(&alert_based, &sources, &targets, l_max, 0.0).map(|mut s| {
            s.generation_seconds = t1.elapsed().as_secs_f64();
            s
        })?;

    Ok((classical_stats, alert_stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VictimRiskRow {
    pub victim_ip: String,
    pub variant: String,
    pub avg_risk: f64,
}

/// Per-victim average risk for the classical graph and alert-derived graphs
/// at each alert fraction. Partial logs reuse the same seed, so a larger
/// fraction always extends a smaller one.
pub fn run_victim_risk(
    inventory: &NetworkInventory,
    rules: &[SignatureRule],
    flows: &Dataset,
    fractions: &[f64],
    seed: u64,
    l_max: usize,
) -> Result<Vec<VictimRiskRow>> {
    let alerts = match_rules(rules, &flows.records);
    let sources: BTreeSet<String> = inventory.external_ips().into_iter().collect();
    let victims = inventory.internal_ips();

    let mut graphs: Vec<(String, AttackGraph)> =
        vec![("Scrape".to_string(), generate_classical(inventory))];
    for &fraction in fractions {
        let label = if fraction >= 1.0 {
            "AG|IDS full".to_string()
        } else {
            format!("AG|IDS partial {:.0}%", fraction * 100.0)
        };
        let limited = limit_alerts(&alerts, fraction, seed);
        graphs.push((label, generate_from_alerts(inventory, &limited)?));
    }

    let mut rows = Vec::new();
    for victim in &victims {
        for (variant, ag) in &graphs {
            rows.push(VictimRiskRow {
                victim_ip: victim.clone(),
                variant: variant.clone(),
                avg_risk: victim_risk(ag, victim, &sources, l_max)?,
            });
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "experiment",
        "sweep_value",
        "repeat",
        "metric",
        "baseline",
        "refined",
        "delta",
    ])?;
    for r in rows {
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        wtr.write_record([
            r.experiment.as_str(),
            r.sweep_value.as_str(),
            &r.repeat.to_string(),
            r.metric_name.as_str(),
            &fmt(r.baseline),
            &fmt(r.refined),
            &fmt(r.delta),
        ])?;
    }
    Ok(String::from_utf8(wtr.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let parse = |s: Option<&str>| -> Option<f64> {
            s.filter(|s| !s.is_empty()).and_then(|s| s.parse().ok())
        };
        rows.push(ExperimentRow {
            experiment: record.get(0).unwrap_or_default().to_string(),
            sweep_value: record.get(1).unwrap_or_default().to_string(),
            repeat: record.get(2).and_then(|s| s.parse().ok()).unwrap_or(0),
            metric_name: record.get(3).unwrap_or_default().to_string(),
            baseline: parse(record.get(4)),
            refined: parse(record.get(5)),
            delta: parse(record.get(6)),
        });
    }
    Ok(rows)
}

fn sanitize_filename(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Mean and stddev of the deltas per (metric, sweep value) for one
/// experiment's rows.
fn delta_summary(rows: &[&ExperimentRow], metric: &str, groups: &[String]) -> Vec<(f64, f64)> {
    groups
        .iter()
        .map(|g| {
            let deltas: Vec<f64> = rows
                .iter()
                .filter(|r| r.metric_name == metric && &r.sweep_value == g)
                .filter_map(|r| r.delta)
                .collect();
            if deltas.is_empty() {
                return (0.0, 0.0);
            }
            let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
            let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / deltas.len() as f64;
            (mean, var.sqrt())
        })
        .collect()
}

/// Write report.csv plus one grouped-bar delta chart per experiment.
/// Returns the created file paths.
pub fn render_report(rows: &[ExperimentRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no experiment rows to report".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let mut ordered: Vec<&ExperimentRow> = rows.iter().collect();
    // stable: keeps (value, repeat, metric) generation order within experiments
    ordered.sort_by(|a, b| a.experiment.cmp(&b.experiment));
    let owned: Vec<ExperimentRow> = ordered.iter().map(|r| (*r).clone()).collect();

    let csv_path = out_dir.join("report.csv");
    std::fs::write(&csv_path, rows_to_csv(&owned)?)?;
    written.push(csv_path);

    let mut experiments: Vec<String> = Vec::new();
    for r in &owned {
        if !experiments.contains(&r.experiment) {
            experiments.push(r.experiment.clone());
        }
    }
    for name in experiments {
        let exp_rows: Vec<&ExperimentRow> = owned.iter().filter(|r| r.experiment == name).collect();
        let mut groups: Vec<String> = Vec::new();
        for r in &exp_rows {
            if !groups.contains(&r.sweep_value) {
                groups.push(r.sweep_value.clone());
            }
        }
        let chart = BarChart {
            title: format!("{name}: refined minus baseline"),
            y_label: "delta".to_string(),
            groups: groups.clone(),
            series: vec![
                Series {
                    label: "d_accuracy".into(),
                    points: delta_summary(&exp_rows, "accuracy", &groups),
                },
                Series {
                    label: "d_f1".into(),
                    points: delta_summary(&exp_rows, "f1_macro", &groups),
                },
                Series {
                    label: "d_fpr".into(),
                    points: delta_summary(&exp_rows, "fpr", &groups),
                },
            ],
        };
        let path = out_dir.join(format!("{}.svg", sanitize_filename(&name)));
        std::fs::write(&path, render_grouped_bars(&chart))?;
        written.push(path);
    }
    Ok(written)
}

/// Seconds formatted to 3 decimals; the one timing column reports carry.
pub fn write_ag_compare_csv(classical: &AgStats, alert_based: &AgStats) -> String {
    let mut out = String::from("generator,nodes,edges,paths,avg_risk,seconds\n");
    for s in [classical, alert_based] {
        out.push_str(&format!(
            "{},{},{},{},{},{:.3}\n",
            s.variant_tag,
            s.node_count,
            s.edge_count,
            s.path_count,
            s.avg_risk,
            s.generation_seconds
        ));
    }
    out
}

pub fn write_victim_risk_csv(rows: &[VictimRiskRow]) -> String {
    let mut out = String::from("victim_ip,variant,avg_risk\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.victim_ip, r.variant, r.avg_risk));
    }
    out
}

/// Grouped bars of per-victim risk, one series per variant.
pub fn victim_risk_chart(rows: &[VictimRiskRow]) -> BarChart {
    let mut victims: Vec<String> = Vec::new();
    let mut variants: Vec<String> = Vec::new();
    for r in rows {
        if !victims.contains(&r.victim_ip) {
            victims.push(r.victim_ip.clone());
        }
        if !variants.contains(&r.variant) {
            variants.push(r.variant.clone());
        }
    }
    let series = variants
        .iter()
        .map(|variant| Series {
            label: variant.clone(),
            points: victims
                .iter()
                .map(|v| {
                    let risk = rows
                        .iter()
                        .find(|r| &r.victim_ip == v && &r.variant == variant)
                        .map_or(0.0, |r| r.avg_risk);
                    (risk, 0.0)
                })
                .collect(),
        })
        .collect();
    BarChart {
        title: "average victim risk per generation mode".to_string(),
        y_label: "avg risk".to_string(),
        groups: victims,
        series,
    }
}

/// How the experiment runner obtains its corpus: generate the bundled
/// synthetic one, or load operator-supplied files (e.g. CIC-IDS2017 CSVs
/// with a matching inventory/rule mapping).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Synthetic(CorpusConfig),
    Paths {
        flows: PathBuf,
        inventory: PathBuf,
        rules: PathBuf,
    },
}

/// Top-level config for `agids experiment --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    #[serde(default)]
    pub defaults: Option<PipelineDefaults>,
    pub experiments: Vec<ExperimentSpec>,
    /// Seed for alert limiting in victim-risk tables.
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
