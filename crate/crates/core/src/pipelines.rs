//! End-to-end methods: CA, TCA, their marginal-free variants on the
//! IPF-adjusted table, covariance (interbattery) analysis, and the four
//! log-ratio variants, with dispersion reporting.

use std::fmt::Write as _;

use crate::decomposition::{taxicab_svd, weighted_svd, Decomposition, TsvdStrategy};
use crate::error::{Error, Result};
use crate::interactions::{
    covariance_residual, loglinear_interaction, pearson_contrast, InteractionMatrix,
};
use crate::margin_fit::{ipf_fit, uniform_targets, MarginFitResult};
use crate::tables::{CountTable, ProbTable, WeightPair};

pub const DEFAULT_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ca,
    Mfca,
    Tca,
    Mftca,
    Cov,
    LraMw,
    LraUw,
    TlraMw,
    TlraUw,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Ca,
        Method::Mfca,
        Method::Tca,
        Method::Mftca,
        Method::Cov,
        Method::LraMw,
        Method::LraUw,
        Method::TlraMw,
        Method::TlraUw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ca => "ca",
            Method::Mfca => "mfca",
            Method::Tca => "tca",
            Method::Mftca => "mftca",
            Method::Cov => "cov",
            Method::LraMw => "lra-mw",
            Method::LraUw => "lra-uw",
            Method::TlraMw => "tlra-mw",
            Method::TlraUw => "tlra-uw",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        // accept both lra-mw and lra_mw spellings
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == norm)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }

    fn uses_taxicab(&self) -> bool {
        matches!(
            self,
            Method::Tca | Method::Mftca | Method::TlraMw | Method::TlraUw
        )
    }

    fn needs_positive_cells(&self) -> bool {
        matches!(
            self,
            Method::LraMw | Method::LraUw | Method::TlraMw | Method::TlraUw
        )
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MethodOptions {
    pub ipf_tol: f64,
    pub ipf_max_iter: usize,
    pub tsvd_strategy: TsvdStrategy,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            ipf_tol: crate::margin_fit::DEFAULT_TOL,
            ipf_max_iter: crate::margin_fit::DEFAULT_MAX_ITER,
            tsvd_strategy: TsvdStrategy::Exhaustive,
        }
    }
}

/// A computed method: the decomposition plus the fitted table for the
/// marginal-free variants.
#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub decomposition: Decomposition,
    pub q_table: Option<MarginFitResult>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl MethodResult {
    pub fn dispersion(&self) -> Vec<f64> {
        self.decomposition.dispersion()
    }

    /// Row coordinates: one (f_1(i), ..., f_k(i)) tuple per row.
    pub fn row_coords(&self) -> Vec<Vec<f64>> {
        (0..self.row_labels.len())
            .map(|i| {
                self.decomposition
                    .axes()
                    .iter()
                    .map(|a| a.row_factors[i])
                    .collect()
            })
            .collect()
    }

    pub fn col_coords(&self) -> Vec<Vec<f64>> {
        (0..self.col_labels.len())
            .map(|j| {
                self.decomposition
                    .axes()
                    .iter()
                    .map(|a| a.col_factors[j])
                    .collect()
            })
            .collect()
    }
}

fn check_positive_counts(t: &CountTable) -> Result<()> {
    for i in 0..t.n_rows() {
        for j in 0..t.n_cols() {
            if t.values()[(i, j)] <= 0.0 {
                return Err(Error::NonPositiveCell {
                    row: t.row_labels()[i].clone(),
                    col: t.col_labels()[j].clone(),
                });
            }
        }
    }
    Ok(())
}

fn decompose(
    x: &InteractionMatrix,
    k: usize,
    method: Method,
    opts: &MethodOptions,
) -> Result<Decomposition> {
    if method.uses_taxicab() {
        taxicab_svd(x, k, opts.tsvd_strategy)
    } else {
        weighted_svd(x, k)
    }
}

/// Run one method on a count table, extracting up to `n_axes` axes
/// (capped at rank - 1 = min(I, J) - 1).
pub fn run_method(
    t: &CountTable,
    method: Method,
    n_axes: usize,
    opts: &MethodOptions,
) -> Result<MethodResult> {
    if method.needs_positive_cells() {
        check_positive_counts(t)?;
    }
    let p = ProbTable::from_counts(t)?;
    let k = n_axes.max(1).min(t.n_rows().min(t.n_cols()) - 1);

    let (decomposition, q_table) = match method {
        Method::Ca | Method::Tca => {
            let x = pearson_contrast(&p);
            (decompose(&x, k, method, opts)?, None)
        }
        Method::Mfca | Method::Mftca => {
            let (tr, tc) = uniform_targets(p.n_rows(), p.n_cols());
            let fit = ipf_fit(&p, &tr, &tc, opts.ipf_tol, opts.ipf_max_iter)?;
            let x = pearson_contrast(&fit.q);
            (decompose(&x, k, method, opts)?, Some(fit))
        }
        Method::Cov => {
            let x = covariance_residual(&p);
            (decompose(&x, k, method, opts)?, None)
        }
        Method::LraMw | Method::TlraMw => {
            let w = WeightPair::marginal(&p)?;
            let x = loglinear_interaction(p.p(), &w)?;
            (decompose(&x, k, method, opts)?, None)
        }
        Method::LraUw | Method::TlraUw => {
            let w = WeightPair::uniform(p.n_rows(), p.n_cols())?;
            let x = loglinear_interaction(p.p(), &w)?;
            (decompose(&x, k, method, opts)?, None)
        }
    };

    Ok(MethodResult {
        method,
        decomposition,
        q_table,
        row_labels: t.row_labels().to_vec(),
        col_labels: t.col_labels().to_vec(),
    })
}

/// Render a dispersion comparison: one row per method, delta values to three
/// decimals, ragged cells left empty.
pub fn dispersion_table(results: &[MethodResult]) -> String {
    let n_axes = results
        .iter()
        .map(|r| r.dispersion().len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    write!(out, "{:<8}", "method").unwrap();
    for a in 1..=n_axes {
        write!(out, " {:>8}", format!("delta{a}")).unwrap();
    }
    out.push('\n');
    for r in results {
        write!(out, "{:<8}", r.method.name()).unwrap();
        let deltas = r.dispersion();
        for a in 0..n_axes {
            match deltas.get(a) {
                Some(d) => write!(out, " {:>8.3}", d).unwrap(),
                None => write!(out, " {:>8}", "").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

/// Count the axes carrying at least 1e-6 of the leading dispersion, for
/// uniform-weight LRA versus CA.
pub fn goodman_rank_check(t: &CountTable) -> Result<(usize, usize)> {
    let opts = MethodOptions::default();
    let full = t.n_rows().min(t.n_cols()) - 1;
    let lra = run_method(t, Method::LraUw, full, &opts)?;
    let ca = run_method(t, Method::Ca, full, &opts)?;
    Ok((significant_axes(&lra), significant_axes(&ca)))
}

fn significant_axes(r: &MethodResult) -> usize {
    let deltas = r.dispersion();
    match deltas.first() {
        None => 0,
        Some(&d1) if d1 <= 0.0 => 0,
        Some(&d1) => deltas.iter().filter(|&&d| d >= 1e-6 * d1).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{goodman, goodman_prob, independence_counts};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn opts() -> MethodOptions {
        MethodOptions::default()
    }

    #[test]
    fn goodman_golden_dispersion() {
        // expected values recomputed independently at full IPF convergence;
        // mfTCA delta1 settles at 0.284489, slightly below the 0.285 printed
        // from an under-converged margin fit
        let t = goodman();
        let cases = [
            (Method::Ca, 0.2, 1.0 / 21.0),
            (Method::Mfca, 0.41002513, 0.05012563),
            (Method::Tca, 0.07, 0.24 / 7.0),
            (Method::Mftca, 0.28448911, 0.04281154),
        ];
        for (method, d1, d2) in cases {
            let r = run_method(&t, method, 2, &opts()).unwrap();
            let deltas = r.dispersion();
            assert_abs_diff_eq!(deltas[0], d1, epsilon = 1e-7);
            assert_abs_diff_eq!(deltas[1], d2, epsilon = 1e-7);
        }
    }

    #[test]
    fn mf_methods_carry_uniform_q() {
        let r = run_method(&goodman(), Method::Mfca, 2, &opts()).unwrap();
        let fit = r.q_table.expect("marginal-free method has a fitted table");
        for m in fit.q.row_margins().iter().chain(fit.q.col_margins().iter()) {
            assert_abs_diff_eq!(*m, 1.0 / 3.0, epsilon = 1e-9);
        }
        assert!(run_method(&goodman(), Method::Ca, 2, &opts())
            .unwrap()
            .q_table
            .is_none());
    }

    #[test]
    fn lra_rejects_zero_cells() {
        let t = crate::tables::CountTable::from_rows(&[vec![1.0, 0.0], vec![2.0, 3.0]]).unwrap();
        for m in [Method::LraMw, Method::LraUw, Method::TlraMw, Method::TlraUw] {
            let err = run_method(&t, m, 1, &opts()).unwrap_err();
            assert!(err.to_string().contains("C2"), "{m}: {err}");
        }
        // CA-family methods accept the same table
        assert!(run_method(&t, Method::Ca, 1, &opts()).is_ok());
    }

    #[test]
    fn rank_check_goodman() {
        assert_eq!(goodman_rank_check(&goodman()).unwrap(), (1, 2));
    }

    #[test]
    fn rank_check_independence() {
        assert_eq!(
            goodman_rank_check(&independence_counts()).unwrap(),
            (0, 0)
        );
    }

    #[test]
    fn ca_axes_bounded_by_rank() {
        // random positive 3x3: at most 2 principal axes
        let t = crate::tables::CountTable::from_rows(&[
            vec![3.0, 7.0, 2.0],
            vec![5.0, 1.0, 8.0],
            vec![2.0, 4.0, 6.0],
        ])
        .unwrap();
        let (_, ca_axes) = goodman_rank_check(&t).unwrap();
        assert!(ca_axes <= 2);
    }

    #[test]
    fn dispersion_table_rendering() {
        let t = goodman();
        let results: Vec<_> = [Method::Ca, Method::Mfca, Method::Tca, Method::Mftca]
            .iter()
            .map(|&m| run_method(&t, m, 2, &opts()).unwrap())
            .collect();
        let table = dispersion_table(&results);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].contains("0.200") && lines[1].contains("0.048"));
        assert!(lines[2].contains("0.410") && lines[2].contains("0.050"));
        assert!(lines[3].contains("0.070") && lines[3].contains("0.034"));
        assert!(lines[4].contains("0.284") && lines[4].contains("0.043"));

        let single = dispersion_table(&results[..1]);
        assert_eq!(single.lines().count(), 2);
    }

    #[test]
    fn mfca_first_order_bridge() {
        // on the fitted Q with uniform margins, Delta_ij = IJ q_ij - 1
        let r = run_method(&goodman(), Method::Mfca, 2, &opts()).unwrap();
        let q = &r.q_table.unwrap().q;
        let delta = pearson_contrast(q);
        let bridge = DMatrix::from_fn(3, 3, |i, j| 9.0 * q.p()[(i, j)] - 1.0);
        assert!((delta.x() - bridge).abs().max() < 1e-9);
    }

    #[test]
    fn mfca_is_marginal_free() {
        let t = goodman();
        let scaled = t.scaled(&[3.0, 1.0, 0.5], &[1.0, 2.0, 4.0]).unwrap();
        for method in [Method::Mfca, Method::Mftca] {
            let d0 = run_method(&t, method, 2, &opts()).unwrap().dispersion();
            let d1 = run_method(&scaled, method, 2, &opts()).unwrap().dispersion();
            for (a, b) in d0.iter().zip(d1.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn ca_approximates_mw_lra_near_independence() {
        // blend toward independence; delta discrepancy should be O(eps)
        let p = goodman_prob();
        let discrepancy = |eps: f64| {
            let blend = DMatrix::from_fn(3, 3, |i, j| {
                (1.0 - eps) * p.row_margins()[i] * p.col_margins()[j] + eps * p.p()[(i, j)]
            });
            let total = blend.sum();
            let t = crate::tables::CountTable::new(
                blend * (1000.0 / total),
                p.row_labels().to_vec(),
                p.col_labels().to_vec(),
            )
            .unwrap();
            let ca = run_method(&t, Method::Ca, 2, &opts()).unwrap().dispersion();
            let lra = run_method(&t, Method::LraMw, 2, &opts()).unwrap().dispersion();
            ca.iter()
                .zip(lra.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        // with marginal weights the Pearson contrast IS the first-order
        // expansion of lambda, so the delta gap shrinks quadratically
        let eps = 0.01;
        assert!(discrepancy(eps) < eps, "agreement is at least O(eps)");
        let ratio = discrepancy(eps) / discrepancy(eps / 2.0);
        assert!((ratio - 4.0).abs() / 4.0 < 0.3, "ratio = {ratio}");
    }

    #[test]
    fn lra_dispersion_scale_invariant() {
        let t = goodman();
        let scaled = t.scaled(&[2.0, 5.0, 1.0], &[1.0, 0.5, 3.0]).unwrap();
        // uniform weights are fixed a priori, so lra-uw is invariant outright
        let d0 = run_method(&t, Method::LraUw, 2, &opts()).unwrap().dispersion();
        let d1 = run_method(&scaled, Method::LraUw, 2, &opts())
            .unwrap()
            .dispersion();
        for (a, b) in d0.iter().zip(d1.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
        // marginal weights held fixed from the unscaled table
        let p0 = goodman_prob();
        let w = WeightPair::marginal(&p0).unwrap();
        let p1 = ProbTable::from_counts(&scaled).unwrap();
        let m0 = loglinear_interaction(p0.p(), &w).unwrap();
        let m1 = loglinear_interaction(p1.p(), &w).unwrap();
        let d0 = weighted_svd(&m0, 2).unwrap().dispersion();
        let d1 = weighted_svd(&m1, 2).unwrap().dispersion();
        for (a, b) in d0.iter().zip(d1.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn method_parse_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()).unwrap(), m);
        }
        assert_eq!(Method::parse("LRA_MW").unwrap(), Method::LraMw);
        assert!(matches!(
            Method::parse("nosuch"),
            Err(Error::UnknownMethod(_))
        ));
    }
}
