//! Core table types: counts, probability tables, weight vectors, and
//! indicator coding.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// A two-way table of nonnegative counts with row and column labels.
///
/// Every row and column must have a positive sum; zero cells are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    values: DMatrix<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl CountTable {
    pub fn new(
        values: DMatrix<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let (n_rows, n_cols) = values.shape();
        if n_rows < 2 || n_cols < 2 {
            return Err(Error::InvalidTable(format!(
                "table must be at least 2x2, got {n_rows}x{n_cols}"
            )));
        }
        if row_labels.len() != n_rows || col_labels.len() != n_cols {
            return Err(Error::InvalidTable(format!(
                "label counts ({}, {}) do not match table shape {n_rows}x{n_cols}",
                row_labels.len(),
                col_labels.len()
            )));
        }
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = values[(i, j)];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidTable(format!(
                        "negative or non-finite count {v} at ({}, {})",
                        row_labels[i], col_labels[j]
                    )));
                }
            }
        }
        for i in 0..n_rows {
            if values.row(i).sum() <= 0.0 {
                return Err(Error::InvalidTable(format!(
                    "row '{}' sums to zero",
                    row_labels[i]
                )));
            }
        }
        for j in 0..n_cols {
            if values.column(j).sum() <= 0.0 {
                return Err(Error::InvalidTable(format!(
                    "column '{}' sums to zero",
                    col_labels[j]
                )));
            }
        }
        Ok(Self {
            values,
            row_labels,
            col_labels,
        })
    }

    /// Build from nested rows with auto-generated labels "R1..", "C1..".
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidTable("empty table".into()));
        }
        let n_cols = rows[0].len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidTable("ragged rows".into()));
        }
        let values = DMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i][j]);
        let row_labels = default_labels("R", rows.len());
        let col_labels = default_labels("C", n_cols);
        Self::new(values, row_labels, col_labels)
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    /// Rescale counts by positive row and column factors (n_ij -> a_i n_ij b_j).
    pub fn scaled(&self, row_scales: &[f64], col_scales: &[f64]) -> Result<Self> {
        if row_scales.len() != self.n_rows() || col_scales.len() != self.n_cols() {
            return Err(Error::InvalidTable("scale vector length mismatch".into()));
        }
        if row_scales.iter().chain(col_scales).any(|&s| s <= 0.0) {
            return Err(Error::InvalidTable("scales must be positive".into()));
        }
        let values = DMatrix::from_fn(self.n_rows(), self.n_cols(), |i, j| {
            row_scales[i] * self.values[(i, j)] * col_scales[j]
        });
        Self::new(values, self.row_labels.clone(), self.col_labels.clone())
    }
}

pub(crate) fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

/// Correspondence matrix P = N / n with its margins.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    p: DMatrix<f64>,
    r: DVector<f64>,
    c: DVector<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ProbTable {
    /// Normalize a count table into a probability table.
    pub fn from_counts(table: &CountTable) -> Result<Self> {
        let total = table.total();
        if total <= 0.0 {
            return Err(Error::InvalidTable("zero total count".into()));
        }
        let p = table.values() / total;
        Self::from_matrix(p, table.row_labels().to_vec(), table.col_labels().to_vec())
    }

    /// Wrap a matrix already summing to one (within 1e-12).
    pub fn from_matrix(
        p: DMatrix<f64>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self> {
        let total = p.sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidTable(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        if p.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidTable("negative or non-finite entry".into()));
        }
        let r = DVector::from_iterator(p.nrows(), p.row_iter().map(|row| row.sum()));
        let c = DVector::from_iterator(p.ncols(), p.column_iter().map(|col| col.sum()));
        for i in 0..p.nrows() {
            if r[i] <= 0.0 {
                return Err(Error::InvalidTable(format!(
                    "row '{}' has zero margin",
                    row_labels[i]
                )));
            }
        }
        for j in 0..p.ncols() {
            if c[j] <= 0.0 {
                return Err(Error::InvalidTable(format!(
                    "column '{}' has zero margin",
                    col_labels[j]
                )));
            }
        }
        Ok(Self {
            p,
            r,
            c,
            row_labels,
            col_labels,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.p.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.p.ncols()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Row margins p_i+.
    pub fn row_margins(&self) -> &DVector<f64> {
        &self.r
    }

    /// Column margins p_+j.
    pub fn col_margins(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }
}

/// A pair of strictly positive probability weight vectors over rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    w_row: DVector<f64>,
    w_col: DVector<f64>,
}

impl WeightPair {
    pub fn new(w_row: DVector<f64>, w_col: DVector<f64>) -> Result<Self> {
        for (name, w) in [("row", &w_row), ("column", &w_col)] {
            if w.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
                return Err(Error::InvalidWeights(format!(
                    "{name} weights must be strictly positive"
                )));
            }
            let s = w.sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidWeights(format!(
                    "{name} weights sum to {s}, expected 1"
                )));
            }
        }
        Ok(Self { w_row, w_col })
    }

    /// Uniform weights 1/I and 1/J.
    pub fn uniform(n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows < 2 || n_cols < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least 2 rows and columns, got {n_rows}x{n_cols}"
            )));
        }
        Ok(Self {
            w_row: DVector::from_element(n_rows, 1.0 / n_rows as f64),
            w_col: DVector::from_element(n_cols, 1.0 / n_cols as f64),
        })
    }

    /// The table's own margins as weights.
    pub fn marginal(p: &ProbTable) -> Result<Self> {
        Self::new(p.row_margins().clone(), p.col_margins().clone())
    }

    pub fn rows(&self) -> &DVector<f64> {
        &self.w_row
    }

    pub fn cols(&self) -> &DVector<f64> {
        &self.w_col
    }
}

/// Indicator (one-hot) coding of a count table: n rows, one per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPair {
    z_row: DMatrix<f64>,
    z_col: DMatrix<f64>,
}

impl IndicatorPair {
    /// Expand integer counts into indicator matrices with n_ij copies of the
    /// (i, j) pattern, i-major then j.
    pub fn from_counts(table: &CountTable) -> Result<Self> {
        let mut cells = Vec::new();
        for i in 0..table.n_rows() {
            for j in 0..table.n_cols() {
                let v = table.values()[(i, j)];
                if (v - v.round()).abs() > 1e-9 {
                    return Err(Error::InvalidTable(format!(
                        "non-integer count {v} at ({}, {}); indicator coding needs integers",
                        table.row_labels()[i],
                        table.col_labels()[j]
                    )));
                }
                for _ in 0..v.round() as usize {
                    cells.push((i, j));
                }
            }
        }
        let n = cells.len();
        let mut z_row = DMatrix::zeros(n, table.n_rows());
        let mut z_col = DMatrix::zeros(n, table.n_cols());
        for (alpha, &(i, j)) in cells.iter().enumerate() {
            z_row[(alpha, i)] = 1.0;
            z_col[(alpha, j)] = 1.0;
        }
        Ok(Self { z_row, z_col })
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.z_row
    }

    pub fn cols(&self) -> &DMatrix<f64> {
        &self.z_col
    }

    /// Recover the count table as (Z^I)' Z^J.
    pub fn cross_product(&self) -> DMatrix<f64> {
        self.z_row.transpose() * &self.z_col
    }
}
