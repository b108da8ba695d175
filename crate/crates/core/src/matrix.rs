//! Row-major feature matrix.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            data.extend_from_slice(&row);
        }
        Matrix {
            data,
            rows: n,
            cols,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }

    /// New matrix keeping `selected` columns in the given order, optionally
    /// appending one extra column on the right.
    pub fn select_columns(&self, selected: &[usize], extra: Option<&[f64]>) -> Matrix {
        if let Some(col) = extra {
            assert_eq!(
                col.len(),
                self.rows,
                "extra column length must match row count"
            );
        }
        let cols = selected.len() + extra.map_or(0, |_| 1);
        let mut out = Matrix::zeros(self.rows, cols);
        for i in 0..self.rows {
            for (jj, &j) in selected.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
            if let Some(col) = extra {
                out.set(i, selected.len(), col[i]);
            }
        }
        out
    }
}
