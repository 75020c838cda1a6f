//! Iterative proportional fitting: rescale a probability table to prescribed
//! margins while preserving every odds ratio.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tables::ProbTable;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Outcome of a converged margin fit: Q = diag(a) P diag(b), renormalized to
/// sum to one.
#[derive(Debug, Clone)]
pub struct MarginFitResult {
    pub q: ProbTable,
    pub row_scales: DVector<f64>,
    pub col_scales: DVector<f64>,
    pub iterations: usize,
    pub max_margin_error: f64,
}

/// Constant target margins 1/I and 1/J.
pub fn uniform_targets(n_rows: usize, n_cols: usize) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_element(n_rows, 1.0 / n_rows as f64),
        DVector::from_element(n_cols, 1.0 / n_cols as f64),
    )
}

fn check_targets(name: &str, t: &DVector<f64>, len: usize) -> Result<()> {
    if t.len() != len {
        return Err(Error::InvalidTargets(format!(
            "{name} target length {} does not match table dimension {len}",
            t.len()
        )));
    }
    if t.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidTargets(format!(
            "{name} targets must be strictly positive"
        )));
    }
    if (t.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidTargets(format!(
            "{name} targets sum to {}, expected 1",
            t.sum()
        )));
    }
    Ok(())
}

/// Alternate row and column rescaling (rows first) until both margin errors
/// fall below `tol`. Zero cells are structural and never perturbed; if the
/// zero pattern makes the targets infeasible the fit reports nonconvergence.
pub fn ipf_fit(
    p: &ProbTable,
    target_r: &DVector<f64>,
    target_c: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<MarginFitResult> {
    check_targets("row", target_r, p.n_rows())?;
    check_targets("column", target_c, p.n_cols())?;
    if tol <= 0.0 {
        return Err(Error::InvalidTargets("tolerance must be positive".into()));
    }

    let mut q = p.p().clone();
    let mut a = DVector::from_element(p.n_rows(), 1.0);
    let mut b = DVector::from_element(p.n_cols(), 1.0);
    let mut err = f64::INFINITY;
    let mut iterations = 0;

    for sweep in 1..=max_iter {
        // Row pass
        for i in 0..q.nrows() {
            let s = q.row(i).sum();
            let factor = target_r[i] / s;
            a[i] *= factor;
            q.row_mut(i).scale_mut(factor);
        }
        // Column pass
        for j in 0..q.ncols() {
            let s = q.column(j).sum();
            let factor = target_c[j] / s;
            b[j] *= factor;
            q.column_mut(j).scale_mut(factor);
        }
        // Keep the total at one; fold any residual factor into the row scales
        let total = q.sum();
        q /= total;
        a /= total;

        iterations = sweep;
        err = margin_error(&q, target_r, target_c);
        if err <= tol {
            break;
        }
    }

    if err > tol {
        return Err(Error::NonConvergence {
            iterations,
            achieved: err,
        });
    }

    let q = ProbTable::from_matrix(
        normalize_exact(q),
        p.row_labels().to_vec(),
        p.col_labels().to_vec(),
    )?;
    Ok(MarginFitResult {
        q,
        row_scales: a,
        col_scales: b,
        iterations,
        max_margin_error: err,
    })
}

fn margin_error(q: &DMatrix<f64>, target_r: &DVector<f64>, target_c: &DVector<f64>) -> f64 {
    let row_err = q
        .row_iter()
        .zip(target_r.iter())
        .map(|(row, &t)| (row.sum() - t).abs())
        .fold(0.0, f64::max);
    let col_err = q
        .column_iter()
        .zip(target_c.iter())
        .map(|(col, &t)| (col.sum() - t).abs())
        .fold(0.0, f64::max);
    row_err.max(col_err)
}

fn normalize_exact(mut q: DMatrix<f64>) -> DMatrix<f64> {
    let total = q.sum();
    q /= total;
    q
}
