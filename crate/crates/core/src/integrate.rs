//! Runtime couplings between the attack graph and the detector: path-existence
//! feature injection for training, post-hoc prediction refinement against the
//! graph, and the baseline-vs-refined gain computation.

use serde::{Deserialize, Serialize};

use crate::anova::FeatureSelection;
use crate::error::{Error, Result};
use crate::flow::{to_matrix, ClassLabel, Dataset, FlowRecord};
use crate::graph::{AttackGraph, ReachabilityIndex};
use crate::matrix::Matrix;
use crate::metrics::{delta, evaluate, Metrics, MetricsDelta};
use crate::tree::{predict, train_tree, DecisionTreeModel, TreeHyperparams};

/// Name of the injected binary column.
pub const AG_FEATURE_NAME: &str = "ag_path_exists";

/// A dataset plus the binary attack-path column: entry i is 1.0 exactly when
/// the graph connects record i's source to its destination.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDataset<'a> {
    pub base: &'a Dataset,
    pub ag_feature: Vec<f64>,
}

impl<'a> AugmentedDataset<'a> {
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.base.feature_names.clone();
        names.push(AG_FEATURE_NAME.to_string());
        names
    }
}

/// Compute the path-existence column for every record. Unknown ips score 0.
pub fn inject_ag_feature<'a>(dataset: &'a Dataset, ag: &AttackGraph) -> AugmentedDataset<'a> {
    let index = ReachabilityIndex::build(ag);
    let ag_feature = dataset
        .records
        .iter()
        .map(|r| {
            if index.query(&r.src_ip, &r.dst_ip) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    AugmentedDataset {
        base: dataset,
        ag_feature,
    }
}

/// Matrix of the selected base features with the attack-path column appended.
/// The injected column always rides along; it is never subject to selection.
pub fn augmented_matrix(
    dataset: &Dataset,
    ag: &AttackGraph,
    selection: &FeatureSelection,
) -> (Matrix, Vec<ClassLabel>) {
    let aug = inject_ag_feature(dataset, ag);
    let (base, labels) = to_matrix(dataset);
    (
        base.select_columns(&selection.selected, Some(&aug.ag_feature)),
        labels,
    )
}

/// Matrix of the selected base features only.
pub fn selected_matrix(
    dataset: &Dataset,
    selection: &FeatureSelection,
) -> (Matrix, Vec<ClassLabel>) {
    let (base, labels) = to_matrix(dataset);
    (base.select_columns(&selection.selected, None), labels)
}

/// Train the AG-integrated detector: selected base features plus the injected
/// path column. The returned model expects the augmented width.
pub fn train_ids_ag(
    train: &Dataset,
    ag: &AttackGraph,
    selection: &FeatureSelection,
    hp: TreeHyperparams,
) -> Result<DecisionTreeModel> {
    let (matrix, labels) = augmented_matrix(train, ag, selection);
    train_tree(&matrix, &labels, hp, 0)
}

/// Exactly which predictions the flip rule touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub flipped_indices: Vec<usize>,
    pub flipped_count: usize,
    pub original: Vec<ClassLabel>,
    pub refined: Vec<ClassLabel>,
}

/// Flip attack predictions to benign when the graph offers no path from the
/// flow's source to its destination. Benign predictions are never touched.
pub fn refine_predictions(
    pred: &[ClassLabel],
    flows: &[FlowRecord],
    ag: &AttackGraph,
) -> Result<(Vec<ClassLabel>, RefinementReport)> {
    if pred.len() != flows.len() {
        return Err(Error::LengthMismatch(pred.len(), flows.len()));
    }
    let index = ReachabilityIndex::build(ag);
    let mut refined = pred.to_vec();
    let mut flipped_indices = Vec::new();
    for (i, (p, flow)) in pred.iter().zip(flows).enumerate() {
        if p.is_attack() && !index.query(&flow.src_ip, &flow.dst_ip) {
            refined[i] = ClassLabel::Benign;
            flipped_indices.push(i);
        }
    }
    let report = RefinementReport {
        flipped_count: flipped_indices.len(),
        flipped_indices,
        original: pred.to_vec(),
        refined: refined.clone(),
    };
    Ok((refined, report))
}

/// The refined side of a gain comparison: either an AG-integrated model or
/// the flip rule applied to the baseline's predictions.
pub enum RefinedRoute<'a> {
    Augmented(&'a DecisionTreeModel),
    FlipRule,
}

/// Evaluate baseline and refined pipelines on the identical test split and
/// return both metric sets plus their delta.
pub fn gain(
    baseline: &DecisionTreeModel,
    selection: &FeatureSelection,
    route: RefinedRoute<'_>,
    test: &Dataset,
    ag: &AttackGraph,
) -> Result<(Metrics, Metrics, MetricsDelta)> {
    let (base_matrix, truth) = selected_matrix(test, selection);
    let base_pred = predict(baseline, &base_matrix)?;
    let refined_pred = match route {
        RefinedRoute::Augmented(model) => {
            let (aug_matrix, _) = augmented_matrix(test, ag, selection);
            predict(model, &aug_matrix)?
        }
        RefinedRoute::FlipRule => refine_predictions(&base_pred, &test.records, ag)?.0,
    };
    let base_metrics = evaluate(&base_pred, &truth)?;
    let refined_metrics = evaluate(&refined_pred, &truth)?;
    let d = delta(&base_metrics, &refined_metrics);
    Ok((base_metrics, refined_metrics, d))
}
