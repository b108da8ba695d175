//! One-way ANOVA F-scores per feature and K-best / K-worst selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::ClassLabel;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionDirection {
    BestK,
    WorstK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    /// Chosen feature indices, sorted by score (descending for BestK,
    /// ascending for WorstK), ties broken by lower index.
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
    pub direction: SelectionDirection,
    pub k: usize,
}

/// Per-feature F-statistic: between-class mean square over within-class mean
/// square. A feature with zero within-class variance but separated class
/// means scores +inf (ranked above every finite score); a feature with no
/// variance at all scores 0.
pub fn anova_f(matrix: &Matrix, labels: &[ClassLabel]) -> Result<Vec<f64>> {
    let n = matrix.rows();
    assert_eq!(n, labels.len(), "matrix rows must match label count");
    assert!(n >= 2, "ANOVA needs at least two samples");

    let mut class_rows: Vec<Vec<usize>> = vec![Vec::new(); ClassLabel::ALL.len()];
    for (i, l) in labels.iter().enumerate() {
        class_rows[l.index()].push(i);
    }
    let present: Vec<&Vec<usize>> = class_rows.iter().filter(|r| !r.is_empty()).collect();
    let c = present.len();
    if c < 2 {
        return Err(Error::SingleClass);
    }

    let f_count = matrix.cols();
    let mut scores = Vec::with_capacity(f_count);
    for j in 0..f_count {
        let grand_mean: f64 = (0..n).map(|i| matrix.get(i, j)).sum::<f64>() / n as f64;

        let mut between_ss = 0.0;
        let mut within_ss = 0.0;
        for rows in &present {
            let nc = rows.len() as f64;
            let class_mean = rows.iter().map(|&i| matrix.get(i, j)).sum::<f64>() / nc;
            between_ss += nc * (class_mean - grand_mean).powi(2);
            within_ss += rows
                .iter()
                .map(|&i| (matrix.get(i, j) - class_mean).powi(2))
                .sum::<f64>();
        }

        let score = if within_ss == 0.0 {
            if between_ss > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            (between_ss / (c as f64 - 1.0)) / (within_ss / (n - c) as f64)
        };
        scores.push(score);
    }
    Ok(scores)
}

/// Deterministic K-best or K-worst index selection; k is clamped to the
/// feature count.
pub fn select_features(
    scores: &[f64],
    k: usize,
    direction: SelectionDirection,
) -> FeatureSelection {
    assert!(k >= 1, "k must be at least 1");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    match direction {
        SelectionDirection::BestK => {
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)))
        }
        SelectionDirection::WorstK => {
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
        }
    }
    order.truncate(k.min(scores.len()));
    FeatureSelection {
        selected: order,
        scores: scores.to_vec(),
        direction,
        k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(spec: &[(ClassLabel, usize)]) -> Vec<ClassLabel> {
        spec.iter()
            .flat_map(|&(l, n)| std::iter::repeat_n(l, n))
            .collect()
    }

    #[test]
    fn constant_feature_scores_zero() {
        let m = Matrix::from_rows(vec![vec![5.0], vec![5.0], vec![5.0], vec![5.0]]);
        let l = labels(&[(ClassLabel::Benign, 2), (ClassLabel::Dos, 2)]);
        assert_eq!(anova_f(&m, &l).unwrap(), vec![0.0]);
    }

    #[test]
    fn perfect_separation_scores_infinity() {
        let m = Matrix::from_rows(vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]]);
        let l = labels(&[(ClassLabel::Benign, 2), (ClassLabel::Dos, 2)]);
        assert_eq!(anova_f(&m, &l).unwrap(), vec![f64::INFINITY]);
    }

    #[test]
    fn six_sample_toy_matches_hand_computed_f() {
        // class means 2 and 16/3; between SS = 50/3, within SS = 20/3,
        // dof (1, 4) => F = (50/3) / (20/3 / 4) = 10
        let m = Matrix::from_rows(vec![
            vec![1.0],
            vec![2.0],
            vec![3.0],
            vec![4.0],
            vec![5.0],
            vec![7.0],
        ]);
        let l = labels(&[(ClassLabel::Benign, 3), (ClassLabel::FtpPatator, 3)]);
        let f = anova_f(&m, &l).unwrap()[0];
        assert!((f - 10.0).abs() < 1e-9, "F = {f}");
    }

    #[test]
    fn single_class_is_an_error() {
        let m = Matrix::from_rows(vec![vec![1.0], vec![2.0]]);
        let l = labels(&[(ClassLabel::Benign, 2)]);
        assert!(matches!(anova_f(&m, &l), Err(Error::SingleClass)));
    }

    #[test]
    fn affine_shift_and_scale_invariance() {
        let base = [1.3, 0.2, 4.5, 2.2, 9.1, 5.5, 0.7, 3.3];
        let l = labels(&[(ClassLabel::Benign, 4), (ClassLabel::Dos, 4)]);
        let m0 = Matrix::from_rows(base.iter().map(|&v| vec![v]).collect());
        let f0 = anova_f(&m0, &l).unwrap()[0];

        let shifted = Matrix::from_rows(base.iter().map(|&v| vec![v + 1000.0]).collect());
        let fs = anova_f(&shifted, &l).unwrap()[0];
        assert!((f0 - fs).abs() < 1e-6 * f0.abs().max(1.0), "{f0} vs {fs}");

        let scaled = Matrix::from_rows(base.iter().map(|&v| vec![v * -3.5]).collect());
        let fc = anova_f(&scaled, &l).unwrap()[0];
        assert!((f0 - fc).abs() < 1e-9 * f0.abs().max(1.0), "{f0} vs {fc}");
    }

    #[test]
    fn selection_orders_and_clamps() {
        let scores = [3.0, 1.0, 2.0];
        let best = select_features(&scores, 2, SelectionDirection::BestK);
        assert_eq!(best.selected, vec![0, 2]);
        let worst = select_features(&scores, 2, SelectionDirection::WorstK);
        assert_eq!(worst.selected, vec![1, 2]);

        let all = select_features(&scores, 10, SelectionDirection::BestK);
        assert_eq!(all.selected, vec![0, 2, 1]); // clamped to F

        // infinity ranks above every finite score; ties break on lower index
        let scores = [1.0, f64::INFINITY, 1.0, f64::INFINITY];
        let best = select_features(&scores, 3, SelectionDirection::BestK);
        assert_eq!(best.selected, vec![1, 3, 0]);
    }
}
