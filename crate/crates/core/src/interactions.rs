//! Interaction indices of a two-way table: the covariance residual, the
//! Pearson contrast, the weighted log-linear association index, and its
//! Box-Cox power generalization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tables::{ProbTable, WeightPair};

/// Which index an [`InteractionMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionKind {
    /// sigma_ij = p_ij - p_i+ p_+j
    Covariance,
    /// Delta_ij = p_ij / (p_i+ p_+j) - 1
    PearsonContrast,
    /// lambda_ij, the weighted double-centered log table
    Loglinear,
    /// Box-Cox power index at the given exponent
    BoxCox(f64),
    /// First-order expansion of lambda around independence
    FirstOrder,
}

/// A double-centered interaction matrix together with the row and column
/// metric weights it is meant to be factorized under.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    x: DMatrix<f64>,
    kind: InteractionKind,
    m_row: DVector<f64>,
    m_col: DVector<f64>,
}

impl InteractionMatrix {
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn kind(&self) -> InteractionKind {
        self.kind
    }

    pub fn row_metric(&self) -> &DVector<f64> {
        &self.m_row
    }

    pub fn col_metric(&self) -> &DVector<f64> {
        &self.m_col
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Assemble from parts; metric weights must be strictly positive.
    pub fn new(
        x: DMatrix<f64>,
        kind: InteractionKind,
        m_row: DVector<f64>,
        m_col: DVector<f64>,
    ) -> Result<Self> {
        if m_row.len() != x.nrows() || m_col.len() != x.ncols() {
            return Err(Error::InvalidWeights("metric length mismatch".into()));
        }
        if m_row.iter().chain(m_col.iter()).any(|&v| v <= 0.0) {
            return Err(Error::InvalidWeights(
                "metric weights must be strictly positive".into(),
            ));
        }
        Ok(Self {
            x,
            kind,
            m_row,
            m_col,
        })
    }
}

/// Residual against the independence model: sigma_ij = p_ij - p_i+ p_+j,
/// paired with uniform metrics.
pub fn covariance_residual(p: &ProbTable) -> InteractionMatrix {
    let r = p.row_margins();
    let c = p.col_margins();
    let x = DMatrix::from_fn(p.n_rows(), p.n_cols(), |i, j| p.p()[(i, j)] - r[i] * c[j]);
    InteractionMatrix {
        x,
        kind: InteractionKind::Covariance,
        m_row: DVector::from_element(p.n_rows(), 1.0 / p.n_rows() as f64),
        m_col: DVector::from_element(p.n_cols(), 1.0 / p.n_cols() as f64),
    }
}

/// Pearson contrast Delta_ij = p_ij / (p_i+ p_+j) - 1, paired with the
/// marginal metrics used by correspondence analysis.
pub fn pearson_contrast(p: &ProbTable) -> InteractionMatrix {
    let r = p.row_margins();
    let c = p.col_margins();
    let x = DMatrix::from_fn(p.n_rows(), p.n_cols(), |i, j| {
        p.p()[(i, j)] / (r[i] * c[j]) - 1.0
    });
    InteractionMatrix {
        x,
        kind: InteractionKind::PearsonContrast,
        m_row: r.clone(),
        m_col: c.clone(),
    }
}

fn check_positive(x: &DMatrix<f64>) -> Result<()> {
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            if x[(i, j)] <= 0.0 || !x[(i, j)].is_finite() {
                return Err(Error::NonPositiveCell {
                    row: format!("{}", i + 1),
                    col: format!("{}", j + 1),
                });
            }
        }
    }
    Ok(())
}

/// Double-center a matrix with respect to the weight pair:
/// g_ij - g_i. - g_.j + g_.. with weighted dot-means.
fn double_center(g: &DMatrix<f64>, w: &WeightPair) -> DMatrix<f64> {
    let row_means = g * w.cols(); // g_i. = sum_j g_ij wC_j
    let col_means = g.transpose() * w.rows(); // g_.j
    let grand = row_means.dot(w.rows());
    DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| {
        g[(i, j)] - row_means[i] - col_means[j] + grand
    })
}

/// Weighted log-linear association index lambda_ij of a strictly positive
/// matrix, with the weight pair doubling as the metric.
pub fn loglinear_interaction(x: &DMatrix<f64>, w: &WeightPair) -> Result<InteractionMatrix> {
    check_positive(x)?;
    let logs = x.map(f64::ln);
    Ok(InteractionMatrix {
        x: double_center(&logs, w),
        kind: InteractionKind::Loglinear,
        m_row: w.rows().clone(),
        m_col: w.cols().clone(),
    })
}

/// Box-Cox power index: x_ij^alpha / alpha, double-centered. Converges to the
/// log-linear index as alpha -> 0 (use [`loglinear_interaction`] for the limit).
pub fn boxcox_interaction(
    x: &DMatrix<f64>,
    alpha: f64,
    w: &WeightPair,
) -> Result<InteractionMatrix> {
    if alpha <= 0.0 {
        return Err(Error::InvalidPower(alpha));
    }
    check_positive(x)?;
    let powered = x.map(|v| v.powf(alpha) / alpha);
    Ok(InteractionMatrix {
        x: double_center(&powered, w),
        kind: InteractionKind::BoxCox(alpha),
        m_row: w.rows().clone(),
        m_col: w.cols().clone(),
    })
}

/// Power-dependent weights wC_j(alpha) = sum_i x_ij^alpha / sum_ij x_ij^alpha
/// (and the row analogue); tends to uniform weights as alpha -> 0.
pub fn boxcox_adaptive_weights(x: &DMatrix<f64>, alpha: f64) -> Result<WeightPair> {
    if alpha <= 0.0 {
        return Err(Error::InvalidPower(alpha));
    }
    check_positive(x)?;
    let powered = x.map(|v| v.powf(alpha));
    let total = powered.sum();
    let w_row = DVector::from_iterator(x.nrows(), powered.row_iter().map(|r| r.sum() / total));
    let w_col = DVector::from_iterator(x.ncols(), powered.column_iter().map(|c| c.sum() / total));
    WeightPair::new(w_row, w_col)
}

/// First-order expansion of lambda around independence:
/// p_ij/(wR_i wC_j) - p_i+/wR_i - p_+j/wC_j + 1.
pub fn first_order_lambda(p: &ProbTable, w: &WeightPair) -> InteractionMatrix {
    let r = p.row_margins();
    let c = p.col_margins();
    let x = DMatrix::from_fn(p.n_rows(), p.n_cols(), |i, j| {
        p.p()[(i, j)] / (w.rows()[i] * w.cols()[j]) - r[i] / w.rows()[i] - c[j] / w.cols()[j] + 1.0
    });
    InteractionMatrix {
        x,
        kind: InteractionKind::FirstOrder,
        m_row: w.rows().clone(),
        m_col: w.cols().clone(),
    }
}

/// log(p_ij p_i1j1 / (p_ij1 p_i1j)) for a quadruple of strictly positive cells.
pub fn log_odds(p: &ProbTable, i: usize, i1: usize, j: usize, j1: usize) -> Result<f64> {
    for &(a, b) in &[(i, j), (i1, j1), (i, j1), (i1, j)] {
        if p.p()[(a, b)] <= 0.0 {
            return Err(Error::NonPositiveCell {
                row: p.row_labels()[a].clone(),
                col: p.col_labels()[b].clone(),
            });
        }
    }
    Ok((p.p()[(i, j)] * p.p()[(i1, j1)] / (p.p()[(i, j1)] * p.p()[(i1, j)])).ln())
}
