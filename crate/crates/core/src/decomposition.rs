//! Bilinear factorization of an interaction matrix: x_ij = sum_a f_a(i) g_a(j) / delta_a,
//! either under weighted L2 conditions (SVD engine) or weighted L1 conditions
//! (taxicab engine, extracted axis by axis with deflation).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interactions::InteractionMatrix;

/// Axes with a dispersion below this are treated as numerically zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Largest min(I, J) accepted by the exhaustive sign enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 25;

const ASCENT_SEED: u64 = 0x7a_c1_ca_b0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Svd,
    Tsvd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsvdStrategy {
    /// Enumerate every sign vector over the smaller dimension (global optimum).
    Exhaustive,
    /// Alternating sign ascent from random starts plus the all-ones start.
    Iterative,
}

/// One extracted axis: dispersion delta with row factors f and column factors g.
#[derive(Debug, Clone)]
pub struct Axis {
    pub delta: f64,
    pub row_factors: DVector<f64>,
    pub col_factors: DVector<f64>,
}

/// An ordered set of axes plus the residual left after extracting them.
#[derive(Debug, Clone)]
pub struct Decomposition {
    engine: Engine,
    axes: Vec<Axis>,
    m_row: DVector<f64>,
    m_col: DVector<f64>,
    residual: DMatrix<f64>,
}

impl Decomposition {
    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn row_metric(&self) -> &DVector<f64> {
        &self.m_row
    }

    pub fn col_metric(&self) -> &DVector<f64> {
        &self.m_col
    }

    pub fn residual(&self) -> &DMatrix<f64> {
        &self.residual
    }

    /// Dispersion values delta_1 >= delta_2 >= ...
    pub fn dispersion(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.delta).collect()
    }
}

/// Partial reconstruction sum_{a <= upto} f_a(i) g_a(j) / delta_a.
pub fn reconstruct(d: &Decomposition, upto: usize) -> DMatrix<f64> {
    assert!(upto <= d.axes.len(), "upto exceeds extracted axes");
    let (n_rows, n_cols) = (d.m_row.len(), d.m_col.len());
    let mut out = DMatrix::zeros(n_rows, n_cols);
    for axis in &d.axes[..upto] {
        out += &axis.row_factors * axis.col_factors.transpose() / axis.delta;
    }
    out
}

/// Factorize under the L2 condition set via the metric-scaled matrix
/// sqrt(mI) X sqrt(mJ); axes below [`RANK_CUTOFF`] are dropped.
pub fn weighted_svd(x: &InteractionMatrix, k: usize) -> Result<Decomposition> {
    let (n_rows, n_cols) = (x.n_rows(), x.n_cols());
    let max_k = n_rows.min(n_cols);
    if k > max_k {
        return Err(Error::TooManyAxes {
            requested: k,
            available: max_k,
        });
    }
    let sqrt_r: Vec<f64> = x.row_metric().iter().map(|v| v.sqrt()).collect();
    let sqrt_c: Vec<f64> = x.col_metric().iter().map(|v| v.sqrt()).collect();
    let scaled = DMatrix::from_fn(n_rows, n_cols, |i, j| sqrt_r[i] * x.x()[(i, j)] * sqrt_c[j]);

    let svd = scaled.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });

    let mut axes = Vec::new();
    for &idx in order.iter().take(k) {
        let delta = svd.singular_values[idx];
        if delta < RANK_CUTOFF {
            break;
        }
        let mut f = DVector::from_fn(n_rows, |i, _| delta * u[(i, idx)] / sqrt_r[i]);
        let mut g = DVector::from_fn(n_cols, |j, _| delta * v_t[(idx, j)] / sqrt_c[j]);
        orient_axis(&mut f, &mut g);
        axes.push(Axis {
            delta,
            row_factors: f,
            col_factors: g,
        });
    }

    let mut residual = x.x().clone();
    for axis in &axes {
        residual -= &axis.row_factors * axis.col_factors.transpose() / axis.delta;
    }
    Ok(Decomposition {
        engine: Engine::Svd,
        axes,
        m_row: x.row_metric().clone(),
        m_col: x.col_metric().clone(),
        residual,
    })
}

/// Orient one axis so the g-coordinate of largest absolute value is positive
/// (ties broken by lowest column index).
fn orient_axis(f: &mut DVector<f64>, g: &mut DVector<f64>) {
    let mut best = 0;
    for j in 1..g.len() {
        if g[j].abs() > g[best].abs() {
            best = j;
        }
    }
    if g[best] < 0.0 {
        f.neg_mut();
        g.neg_mut();
    }
}

/// The taxicab objective D(u) = sum_i mI_i |sum_j x_ij mJ_j u_j|.
fn taxicab_objective(x: &DMatrix<f64>, m_row: &DVector<f64>, weighted_u: &DVector<f64>) -> f64 {
    let f = x * weighted_u;
    f.iter().zip(m_row.iter()).map(|(fi, mi)| mi * fi.abs()).sum()
}

fn weighted(u: &DVector<f64>, m: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(u.len(), |j, _| u[j] * m[j])
}

fn sign_or_one(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Enumerate sign vectors with u_1 = +1 in lexicographic order (-1 before +1)
/// and return the first global maximizer of D(u).
fn exhaustive_sign_search(
    x: &DMatrix<f64>,
    m_row: &DVector<f64>,
    m_col: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n_cols = x.ncols();
    if n_cols > EXHAUSTIVE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: n_cols,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut best_u = DVector::from_element(n_cols, 1.0);
    let mut best_d = taxicab_objective(x, m_row, &weighted(&best_u, m_col));
    let free = n_cols - 1;
    for code in 0..(1u64 << free) {
        let mut u = DVector::from_element(n_cols, 1.0);
        for t in 0..free {
            if (code >> (free - 1 - t)) & 1 == 0 {
                u[t + 1] = -1.0;
            }
        }
        let d = taxicab_objective(x, m_row, &weighted(&u, m_col));
        if d > best_d {
            best_d = d;
            best_u = u;
        }
    }
    Ok(best_u)
}

/// Alternating sign ascent for the taxicab inner problem: best local maximizer
/// over `starts` random starts plus the all-ones start. D(u) never decreases
/// across alternations, and the result never exceeds the exhaustive optimum.
pub fn iterative_ascent(
    x: &DMatrix<f64>,
    m_row: &DVector<f64>,
    m_col: &DVector<f64>,
    starts: usize,
) -> DVector<f64> {
    let n_cols = x.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(ASCENT_SEED);
    let mut best: Option<(f64, DVector<f64>)> = None;

    for start in 0..=starts {
        let mut u = if start == 0 {
            DVector::from_element(n_cols, 1.0)
        } else {
            DVector::from_fn(n_cols, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 })
        };
        let mut d = taxicab_objective(x, m_row, &weighted(&u, m_col));
        loop {
            let f = x * weighted(&u, m_col);
            let v = f.map(sign_or_one);
            let g = x.transpose() * weighted(&v, m_row);
            let u_next = g.map(sign_or_one);
            let d_next = taxicab_objective(x, m_row, &weighted(&u_next, m_col));
            if d_next <= d + 1e-14 {
                break;
            }
            u = u_next;
            d = d_next;
        }
        if best.as_ref().map_or(true, |(bd, _)| d > *bd) {
            best = Some((d, u));
        }
    }

    let (_, mut u) = best.unwrap();
    if u[0] < 0.0 {
        u.neg_mut();
    }
    u
}

/// Factorize under the taxicab condition set: per axis, maximize D(u) over
/// sign vectors on the current residual, then deflate. Enumeration runs over
/// the smaller of the two dimensions (the input is transposed when I < J).
pub fn taxicab_svd(
    x: &InteractionMatrix,
    k: usize,
    strategy: TsvdStrategy,
) -> Result<Decomposition> {
    let max_k = x.n_rows().min(x.n_cols());
    if k > max_k {
        return Err(Error::TooManyAxes {
            requested: k,
            available: max_k,
        });
    }
    let transposed = x.n_rows() < x.n_cols();
    let (mut work, m_row, m_col) = if transposed {
        (
            x.x().transpose(),
            x.col_metric().clone(),
            x.row_metric().clone(),
        )
    } else {
        (x.x().clone(), x.row_metric().clone(), x.col_metric().clone())
    };
    if strategy == TsvdStrategy::Exhaustive && work.ncols() > EXHAUSTIVE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: work.ncols(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }

    let mut axes = Vec::new();
    for _ in 0..k {
        let u = match strategy {
            TsvdStrategy::Exhaustive => exhaustive_sign_search(&work, &m_row, &m_col)?,
            TsvdStrategy::Iterative => iterative_ascent(&work, &m_row, &m_col, 16),
        };
        let f = &work * weighted(&u, &m_col);
        let delta: f64 = f
            .iter()
            .zip(m_row.iter())
            .map(|(fi, mi)| mi * fi.abs())
            .sum();
        if delta < RANK_CUTOFF {
            break;
        }
        let v = f.map(sign_or_one);
        let g = work.transpose() * weighted(&v, &m_row);
        work -= &f * g.transpose() / delta;
        axes.push(Axis {
            delta,
            row_factors: f,
            col_factors: g,
        });
    }

    let (axes, m_row, m_col) = if transposed {
        (
            axes.into_iter()
                .map(|a| Axis {
                    delta: a.delta,
                    row_factors: a.col_factors,
                    col_factors: a.row_factors,
                })
                .collect(),
            m_col,
            m_row,
        )
    } else {
        (axes, m_row, m_col)
    };
    let residual = if transposed { work.transpose() } else { work };
    Ok(Decomposition {
        engine: Engine::Tsvd,
        axes,
        m_row,
        m_col,
        residual,
    })
}
