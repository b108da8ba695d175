//! CART decision tree with Gini impurity.
//!
//! Greedy growth: at every node, scan all (feature, midpoint-threshold)
//! candidates and take the split minimizing the weighted child impurity.
//! Ties resolve to the lowest feature index, then the lowest threshold.
//! Rows with value <= threshold go left. Training is fully deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::ClassLabel;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeHyperparams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeHyperparams {
    fn default() -> Self {
        TreeHyperparams {
            max_depth: 20,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

impl TreeHyperparams {
    pub fn new(max_depth: usize, min_samples_split: usize, min_samples_leaf: usize) -> Self {
        assert!(max_depth >= 1 && min_samples_split >= 2 && min_samples_leaf >= 1);
        TreeHyperparams {
            max_depth,
            min_samples_split,
            min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        class_counts: Vec<u64>,
        predicted: ClassLabel,
    },
    Internal {
        feature_idx: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub root: TreeNode,
    pub hyperparams: TreeHyperparams,
    /// Expected input width for prediction.
    pub n_features: usize,
}

impl DecisionTreeModel {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<DecisionTreeModel> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Best split for one node: (weighted child Gini, feature index, threshold,
/// left row set, right row set).
struct Split {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

fn gini(counts: &[u64], total: u64) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn class_counts(rows: &[usize], labels: &[ClassLabel]) -> Vec<u64> {
    let mut counts = vec![0u64; ClassLabel::ALL.len()];
    for &i in rows {
        counts[labels[i].index()] += 1;
    }
    counts
}

fn majority(counts: &[u64]) -> ClassLabel {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i; // ties keep the earlier class in declaration order
        }
    }
    ClassLabel::from_index(best)
}

fn best_split(
    matrix: &Matrix,
    labels: &[ClassLabel],
    rows: &[usize],
    hp: &TreeHyperparams,
) -> Option<Split> {
    let n = rows.len();
    let n_f = n as f64;
    let mut best: Option<Split> = None;

    let mut sorted: Vec<usize> = Vec::with_capacity(n);
    for feature in 0..matrix.cols() {
        sorted.clear();
        sorted.extend_from_slice(rows);
        sorted.sort_unstable_by(|&a, &b| matrix.get(a, feature).total_cmp(&matrix.get(b, feature)));

        let total = class_counts(rows, labels);
        let mut left = vec![0u64; total.len()];
        for pos in 0..n - 1 {
            left[labels[sorted[pos]].index()] += 1;
            let v = matrix.get(sorted[pos], feature);
            let next = matrix.get(sorted[pos + 1], feature);
            if v == next {
                continue; // thresholds only between distinct values
            }
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < hp.min_samples_leaf || n_right < hp.min_samples_leaf {
                continue;
            }
            let right: Vec<u64> = total.iter().zip(&left).map(|(&t, &l)| t - l).collect();
            let weighted = (n_left as f64 * gini(&left, n_left as u64)
                + n_right as f64 * gini(&right, n_right as u64))
                / n_f;
            // strict < keeps the lowest (feature, threshold) on ties because
            // features and thresholds are scanned in ascending order
            if best.as_ref().is_none_or(|b| weighted < b.impurity) {
                best = Some(Split {
                    impurity: weighted,
                    feature,
                    threshold: (v + next) / 2.0,
                });
            }
        }
    }
    best
}

fn grow(
    matrix: &Matrix,
    labels: &[ClassLabel],
    rows: Vec<usize>,
    depth: usize,
    hp: &TreeHyperparams,
) -> TreeNode {
    let counts = class_counts(&rows, labels);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let leaf = |counts: Vec<u64>| TreeNode::Leaf {
        predicted: majority(&counts),
        class_counts: counts,
    };

    if pure || depth >= hp.max_depth || rows.len() < hp.min_samples_split {
        return leaf(counts);
    }
    let Some(split) = best_split(matrix, labels, &rows, hp) else {
        return leaf(counts); // no admissible split (constant features)
    };

    let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
    for i in rows {
        if matrix.get(i, split.feature) <= split.threshold {
            left_rows.push(i);
        } else {
            right_rows.push(i);
        }
    }
    TreeNode::Internal {
        feature_idx: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(matrix, labels, left_rows, depth + 1, hp)),
        right: Box::new(grow(matrix, labels, right_rows, depth + 1, hp)),
    }
}

/// Train a CART classifier. `_seed` is reserved for sampling extensions and
/// unused by the deterministic default growth.
pub fn train_tree(
    matrix: &Matrix,
    labels: &[ClassLabel],
    hp: TreeHyperparams,
    _seed: u64,
) -> Result<DecisionTreeModel> {
    if matrix.rows() == 0 {
        return Err(Error::EmptyTraining);
    }
    assert_eq!(
        matrix.rows(),
        labels.len(),
        "matrix rows must match label count"
    );
    let rows: Vec<usize> = (0..matrix.rows()).collect();
    let root = grow(matrix, labels, rows, 0, &hp);
    Ok(DecisionTreeModel {
        root,
        hyperparams: hp,
        n_features: matrix.cols(),
    })
}

/// Route every row through the tree; value <= threshold goes left.
pub fn predict(model: &DecisionTreeModel, matrix: &Matrix) -> Result<Vec<ClassLabel>> {
    if matrix.rows() > 0 && matrix.cols() != model.n_features {
        return Err(Error::WidthMismatch {
            expected: model.n_features,
            got: matrix.cols(),
        });
    }
    let mut out = Vec::with_capacity(matrix.rows());
    for row in matrix.iter_rows().take(matrix.rows()) {
        let mut node = &model.root;
        loop {
            match node {
                TreeNode::Leaf { predicted, .. } => {
                    out.push(*predicted);
                    break;
                }
                TreeNode::Internal {
                    feature_idx,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature_idx] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(values: &[f64]) -> Matrix {
        Matrix::from_rows(values.iter().map(|&v| vec![v]).collect())
    }

    #[test]
    fn separable_1d_gets_perfect_training_accuracy() {
        let m = col(&[0.0, 1.0]);
        let labels = vec![ClassLabel::Benign, ClassLabel::Dos];
        let model = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        assert_eq!(model.depth(), 1);
        assert_eq!(predict(&model, &m).unwrap(), labels);
        // single split at the midpoint
        match &model.root {
            TreeNode::Internal {
                feature_idx,
                threshold,
                ..
            } => {
                assert_eq!(*feature_idx, 0);
                assert_eq!(*threshold, 0.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn pure_input_yields_depth_zero_leaf() {
        let m = col(&[1.0, 2.0, 3.0]);
        let labels = vec![ClassLabel::Dos; 3];
        let model = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        assert_eq!(model.depth(), 0);
        assert_eq!(predict(&model, &m).unwrap(), labels);
    }

    #[test]
    fn empty_training_is_an_error() {
        let m = Matrix::zeros(0, 2);
        assert!(matches!(
            train_tree(&m, &[], TreeHyperparams::default(), 0),
            Err(Error::EmptyTraining)
        ));
    }

    #[test]
    fn value_exactly_at_threshold_goes_left() {
        let m = col(&[0.0, 1.0]);
        let labels = vec![ClassLabel::Benign, ClassLabel::Dos];
        let model = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        // threshold is 0.5; a probe exactly there must take the left branch
        let probe = col(&[0.5]);
        assert_eq!(predict(&model, &probe).unwrap(), vec![ClassLabel::Benign]);
    }

    #[test]
    fn width_mismatch_is_rejected_and_empty_input_is_fine() {
        let m = col(&[0.0, 1.0]);
        let labels = vec![ClassLabel::Benign, ClassLabel::Dos];
        let model = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        let wide = Matrix::zeros(1, 2);
        assert!(matches!(
            predict(&model, &wide),
            Err(Error::WidthMismatch { .. })
        ));
        let empty = Matrix::zeros(0, 0);
        assert!(predict(&model, &empty).unwrap().is_empty());
    }

    #[test]
    fn depth_and_leaf_constraints_hold() {
        // alternating labels force deep growth when unconstrained
        let values: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let labels: Vec<ClassLabel> = (0..32)
            .map(|i| {
                if i % 2 == 0 {
                    ClassLabel::Benign
                } else {
                    ClassLabel::Dos
                }
            })
            .collect();
        let m = col(&values);

        let shallow = train_tree(&m, &labels, TreeHyperparams::new(3, 2, 1), 0).unwrap();
        assert!(shallow.depth() <= 3);

        let chunky = train_tree(&m, &labels, TreeHyperparams::new(50, 2, 8), 0).unwrap();
        fn min_leaf_count(node: &TreeNode) -> u64 {
            match node {
                TreeNode::Leaf { class_counts, .. } => class_counts.iter().sum(),
                TreeNode::Internal { left, right, .. } => {
                    min_leaf_count(left).min(min_leaf_count(right))
                }
            }
        }
        assert!(min_leaf_count(&chunky.root) >= 8);
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(5);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..4).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<ClassLabel> = (0..60).map(|i| ClassLabel::from_index(i % 3)).collect();
        let m = Matrix::from_rows(rows);
        let a = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        let b = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn model_json_round_trip() {
        let m = col(&[0.0, 1.0, 2.0, 3.0]);
        let labels = vec![
            ClassLabel::Benign,
            ClassLabel::Dos,
            ClassLabel::Benign,
            ClassLabel::Dos,
        ];
        let model = train_tree(&m, &labels, TreeHyperparams::default(), 0).unwrap();
        let back = DecisionTreeModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn leaf_tie_breaks_to_class_declaration_order() {
        let counts = vec![2u64, 2, 1];
        assert_eq!(majority(&counts), ClassLabel::Benign);
        let counts = vec![0u64, 3, 3];
        assert_eq!(majority(&counts), ClassLabel::FtpPatator);
    }
}
