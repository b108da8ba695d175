//! The iterative feedback loop: AG pool, IDS pool, vulnerability database,
//! and Sample/Add actions over discrete iterations.
//!
//! Each step gates on its inputs (rule matching needs both a flow batch and
//! a rule set), confirms alerted vulnerabilities, regenerates the
//! alert-derived graph from the accumulated alert log, trains an
//! AG-integrated detector on the fresh batch, and scores the flip-rule
//! refinement on a held-out validation slice. Steps are all-or-nothing and
//! deterministic for a fixed seed.

use serde::{Deserialize, Serialize};

use crate::anova::{anova_f, select_features, FeatureSelection, SelectionDirection};
use crate::error::{Error, Result};
use crate::flow::{split, to_matrix, ClassLabel, Dataset};
use crate::graph::{
    compute_stats, enumerate_paths, generate_classical, generate_from_alerts, inject_noise,
    AgStats, AttackGraph, EdgeProvenance,
};
use crate::integrate::{augmented_matrix, refine_predictions, selected_matrix, train_ids_ag};
use crate::metrics::{delta, evaluate, Metrics, MetricsDelta};
use crate::threat::{
    confirm_vulns, match_rules, Alert, NetworkInventory, SignatureRule, VulnDatabase,
};
use crate::tree::{predict, train_tree, DecisionTreeModel, TreeHyperparams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdsSampleStrategy {
    Latest,
    BestValF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgSampleStrategy {
    Latest,
    MostSpecific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdsKind {
    Baseline,
    AgIntegrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgPoolEntry {
    pub ag: AttackGraph,
    pub stats: AgStats,
    pub created_iteration: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AgPool {
    pub entries: Vec<AgPoolEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsPoolEntry {
    pub model: DecisionTreeModel,
    pub selection: FeatureSelection,
    pub val_metrics: Metrics,
    pub created_iteration: u64,
    pub kind: IdsKind,
    /// For AG-integrated models: index of the pool graph used for the
    /// injected column, needed to rebuild the augmented input at inference.
    pub ag_index: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdsPool {
    pub entries: Vec<IdsPoolEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleConfig {
    pub l_max: usize,
    pub noise_p: f64,
    /// Per-batch training slice; the rest is the validation slice for
    /// step metrics.
    pub train_fraction: f64,
    pub feature_k: usize,
    pub hyperparams: TreeHyperparams,
    pub ids_strategy: IdsSampleStrategy,
    pub ag_strategy: AgSampleStrategy,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        LifecycleConfig {
            l_max: crate::graph::DEFAULT_L_MAX,
            noise_p: 0.0,
            train_fraction: 0.8,
            feature_k: 20,
            hyperparams: TreeHyperparams::default(),
            ids_strategy: IdsSampleStrategy::Latest,
            ag_strategy: AgSampleStrategy::Latest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    /// Alerts raised by the rule set on this step's batch.
    pub alerts_seen: usize,
    /// Attack predictions of the sampled detector over the batch.
    pub predicted_attacks: usize,
    /// Cumulative confirmed vulnerabilities after this step.
    pub confirmed_vulns: usize,
    /// Paths of the graph added this step.
    pub path_count: usize,
    /// New model on the held-out validation slice, before refinement.
    pub val_metrics: Metrics,
    /// Same predictions after the flip rule.
    pub refined_metrics: Metrics,
    pub deltas: MetricsDelta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleState {
    pub ag_pool: AgPool,
    pub ids_pool: IdsPool,
    pub vuln_db: VulnDatabase,
    pub iteration: u64,
    pub seed: u64,
    /// Full alert log; alert-derived graphs regenerate from it each step so
    /// their edge sets grow monotonically.
    pub alert_log: Vec<Alert>,
    pub history: Vec<IterationRecord>,
}

/// Pick a detector from the pool. Latest prefers the highest creation
/// iteration (insertion order breaks ties, last wins); BestValF1 the highest
/// validation macro F1 (ties resolve to the latest entry).
pub fn sample_ids(pool: &IdsPool, strategy: IdsSampleStrategy) -> Result<(usize, &IdsPoolEntry)> {
    if pool.entries.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut best = 0;
    for (i, e) in pool.entries.iter().enumerate() {
        let better = match strategy {
            IdsSampleStrategy::Latest => {
                e.created_iteration >= pool.entries[best].created_iteration
            }
            IdsSampleStrategy::BestValF1 => {
                let (b, c) = (&pool.entries[best], e);
                c.val_metrics.f1_macro > b.val_metrics.f1_macro
                    || (c.val_metrics.f1_macro == b.val_metrics.f1_macro
                        && c.created_iteration >= b.created_iteration)
            }
        };
        if better {
            best = i;
        }
    }
    Ok((best, &pool.entries[best]))
}

/// Pick a graph from the pool. MostSpecific prefers the fewest real
/// (non-synthetic) edges among entries that have any; an all-empty pool
/// falls back to Latest.
pub fn sample_ag(pool: &AgPool, strategy: AgSampleStrategy) -> Result<(usize, &AgPoolEntry)> {
    if pool.entries.is_empty() {
        return Err(Error::EmptyPool);
    }
    let latest = |entries: &[AgPoolEntry]| {
        let mut best = 0;
        for (i, e) in entries.iter().enumerate() {
            if e.created_iteration >= entries[best].created_iteration {
                best = i;
            }
        }
        best
    };
    let best = match strategy {
        AgSampleStrategy::Latest => latest(&pool.entries),
        AgSampleStrategy::MostSpecific => {
            let mut best: Option<usize> = None;
            for (i, e) in pool.entries.iter().enumerate() {
                let edges = e.ag.real_edge_count();
                if edges == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let be = pool.entries[b].ag.real_edge_count();
                        edges < be
                            || (edges == be
                                && e.created_iteration >= pool.entries[b].created_iteration)
                    }
                };
                if better {
                    best = Some(i);
                }
            }
            best.unwrap_or_else(|| latest(&pool.entries))
        }
    };
    Ok((best, &pool.entries[best]))
}

fn predict_with_entry(
    entry: &IdsPoolEntry,
    ag_pool: &AgPool,
    dataset: &Dataset,
) -> Result<Vec<ClassLabel>> {
    let matrix = match entry.kind {
        IdsKind::Baseline => selected_matrix(dataset, &entry.selection).0,
        IdsKind::AgIntegrated => {
            let idx = entry.ag_index.ok_or_else(|| {
                Error::InvalidConfig("AG-integrated pool entry lacks its graph index".into())
            })?;
            augmented_matrix(dataset, &ag_pool.entries[idx].ag, &entry.selection).0
        }
    };
    predict(&entry.model, &matrix)
}

fn default_sources_targets(
    inventory: &NetworkInventory,
) -> (
    std::collections::BTreeSet<String>,
    std::collections::BTreeSet<String>,
) {
    let sources = inventory.external_ips().into_iter().collect();
    let targets = inventory.internal_ips().into_iter().collect();
    (sources, targets)
}

/// Path-count stats for a pool graph. Lifecycle stats are untimed
/// (generation_seconds 0) so checkpoints replay byte-identically.
fn pool_stats(ag: &AttackGraph, inventory: &NetworkInventory, l_max: usize) -> Result<AgStats> {
    let (sources, targets) = default_sources_targets(inventory);
    compute_stats(ag, &sources, &targets, l_max, 0.0)
}

fn train_and_validate(
    batch: &Dataset,
    config: &LifecycleConfig,
    split_seed: u64,
) -> Result<(Dataset, Dataset, FeatureSelection)> {
    let (train, val) = split(batch, config.train_fraction, split_seed)?;
    let (matrix, labels) = to_matrix(&train);
    let scores = anova_f(&matrix, &labels)?;
    let selection = select_features(&scores, config.feature_k, SelectionDirection::BestK);
    Ok((train, val, selection))
}

/// Seed the lifecycle: a baseline detector trained on the initial data and
/// the classical graph in the AG pool.
pub fn initialize(
    initial: &Dataset,
    inventory: &NetworkInventory,
    config: &LifecycleConfig,
    seed: u64,
) -> Result<LifecycleState> {
    let (train, val, selection) = train_and_validate(initial, config, seed)?;
    let (train_matrix, train_labels) = selected_matrix(&train, &selection);
    debug_assert_eq!(train_labels.len(), train.len());
    let model = train_tree(&train_matrix, &train_labels, config.hyperparams, seed)?;
    let (val_matrix, val_truth) = selected_matrix(&val, &selection);
    let val_metrics = evaluate(&predict(&model, &val_matrix)?, &val_truth)?;

    let scrape = generate_classical(inventory);
    let stats = pool_stats(&scrape, inventory, config.l_max)?;

    Ok(LifecycleState {
        ag_pool: AgPool {
            entries: vec![AgPoolEntry {
                ag: scrape,
                stats,
                created_iteration: 0,
            }],
        },
        ids_pool: IdsPool {
            entries: vec![IdsPoolEntry {
                model,
                selection,
                val_metrics,
                created_iteration: 0,
                kind: IdsKind::Baseline,
                ag_index: None,
            }],
        },
        vuln_db: VulnDatabase::from_inventory(inventory),
        iteration: 0,
        seed,
        alert_log: Vec::new(),
        history: Vec::new(),
    })
}

/// One lifecycle iteration over a fresh batch. Never partially mutates the
/// input state: the new state is built aside and returned whole.
pub fn step(
    state: &LifecycleState,
    batch: &Dataset,
    rules: &[SignatureRule],
    inventory: &NetworkInventory,
    config: &LifecycleConfig,
) -> Result<LifecycleState> {
    let iteration = state.iteration + 1;

    // (1) sampled detector predicts over the batch; rules fire. The rule
    // matcher is AND-gated: it runs only when both the batch and the rule
    // set are present.
    let (_, sampled_ids) = sample_ids(&state.ids_pool, config.ids_strategy)?;
    let predictions = predict_with_entry(sampled_ids, &state.ag_pool, batch)?;
    let predicted_attacks = predictions.iter().filter(|p| p.is_attack()).count();
    let alerts = if batch.is_empty() || rules.is_empty() {
        Vec::new()
    } else {
        match_rules(rules, &batch.records)
    };

    // (2) confirm alerted vulnerabilities
    let vuln_db = confirm_vulns(&state.vuln_db, &alerts, iteration)?;

    // (3) regenerate the alert-derived graph over the whole log
    let mut alert_log = state.alert_log.clone();
    alert_log.extend(alerts.iter().cloned());
    let mut new_ag = generate_from_alerts(inventory, &alert_log)?;
    if config.noise_p > 0.0 {
        new_ag = inject_noise(&new_ag, config.noise_p, state.seed.wrapping_add(iteration));
    }
    let stats = pool_stats(&new_ag, inventory, config.l_max)?;
    let path_count = stats.path_count;

    let mut ag_pool = state.ag_pool.clone();
    ag_pool.entries.push(AgPoolEntry {
        ag: new_ag,
        stats,
        created_iteration: iteration,
    });

    // (4) train the AG-integrated detector on the batch's training slice
    let (ag_index, sampled_ag) = sample_ag(&ag_pool, config.ag_strategy)?;
    let (train, val, selection) =
        train_and_validate(batch, config, state.seed.wrapping_add(iteration))?;
    let model = train_ids_ag(&train, &sampled_ag.ag, &selection, config.hyperparams)?;

    // (5) validation metrics, refined through the sampled graph
    let (val_matrix, val_truth) = augmented_matrix(&val, &sampled_ag.ag, &selection);
    let val_pred = predict(&model, &val_matrix)?;
    let val_metrics = evaluate(&val_pred, &val_truth)?;
    let (refined_pred, _) = refine_predictions(&val_pred, &val.records, &sampled_ag.ag)?;
    let refined_metrics = evaluate(&refined_pred, &val_truth)?;
    let deltas = delta(&val_metrics, &refined_metrics);

    let mut ids_pool = state.ids_pool.clone();
    ids_pool.entries.push(IdsPoolEntry {
        model,
        selection,
        val_metrics: val_metrics.clone(),
        created_iteration: iteration,
        kind: IdsKind::AgIntegrated,
        ag_index: Some(ag_index),
    });

    let mut history = state.history.clone();
    history.push(IterationRecord {
        iteration,
        alerts_seen: alerts.len(),
        predicted_attacks,
        confirmed_vulns: vuln_db.confirmed_ids().len(),
        path_count,
        val_metrics,
        refined_metrics,
        deltas,
    });

    Ok(LifecycleState {
        ag_pool,
        ids_pool,
        vuln_db,
        iteration,
        seed: state.seed,
        alert_log,
        history,
    })
}

/// Fold `step` over a batch sequence.
pub fn run(
    initial: LifecycleState,
    batches: &[Dataset],
    rules: &[SignatureRule],
    inventory: &NetworkInventory,
    config: &LifecycleConfig,
) -> Result<LifecycleState> {
    if batches.is_empty() {
        return Err(Error::EmptyBatches);
    }
    let mut state = initial;
    for batch in batches {
        state = step(&state, batch, rules, inventory, config)?;
    }
    Ok(state)
}

impl LifecycleState {
    pub fn checkpoint_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_checkpoint_json(text: &str) -> Result<LifecycleState> {
        Ok(serde_json::from_str(text)?)
    }

    /// History CSV: one row per iteration, no timing columns.
    pub fn history_csv(&self) -> String {
        let mut out = String::from(
            "iteration,alerts,confirmed_vulns,path_count,accuracy,f1,fpr,d_accuracy,d_f1,d_fpr\n",
        );
        for r in &self.history {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.iteration,
                r.alerts_seen,
                r.confirmed_vulns,
                r.path_count,
                r.val_metrics.accuracy,
                r.val_metrics.f1_macro,
                r.val_metrics.fpr,
                r.deltas.d_accuracy,
                r.deltas.d_f1,
                r.deltas.d_fpr,
            ));
        }
        out
    }

    /// AlertDerived edge count of the graph added at each iteration; used by
    /// monotonicity checks.
    pub fn alert_edge_counts(&self) -> Vec<usize> {
        self.ag_pool
            .entries
            .iter()
            .filter(|e| e.created_iteration > 0)
            .map(|e| {
                e.ag.edges()
                    .iter()
                    .filter(|edge| edge.provenance == EdgeProvenance::AlertDerived)
                    .count()
            })
            .collect()
    }
}

/// Paths of a pool graph with the default source/target policy; exposed for
/// reporting.
pub fn pool_paths(
    ag: &AttackGraph,
    inventory: &NetworkInventory,
    l_max: usize,
) -> Result<Vec<crate::graph::AttackPath>> {
    let (sources, targets) = default_sources_targets(inventory);
    enumerate_paths(ag, &sources, &targets, l_max)
}
