//! Slow, definition-level reference implementations used to cross-check the
//! fast estimators, plus the plug-in population approximations behind the
//! leading-term comparisons. These paths favor transparency over speed and
//! are excluded from benchmarks.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grouped::SampleMatrix;
use crate::metrics::{rho_eval_raw, ResolvedMetric};
use crate::numeric::ksum;

/// Plug-in second-moment estimates of the metric between and within samples:
/// `tau_x_sq` and `tau_y_sq` average the squared metric over distinct pairs
/// within each sample, `tau_sq` over all cross pairs.
#[derive(Debug, Clone, Copy)]
pub struct PluginTaus {
    pub tau_x_sq: f64,
    pub tau_y_sq: f64,
    pub tau_sq: f64,
}

impl PluginTaus {
    pub fn tau_x(&self) -> f64 {
        self.tau_x_sq.sqrt()
    }

    pub fn tau_y(&self) -> f64 {
        self.tau_y_sq.sqrt()
    }

    pub fn tau(&self) -> f64 {
        self.tau_sq.sqrt()
    }
}

/// Empirical `tau` quantities of two samples under one metric.
pub fn plugin_taus(
    x: &SampleMatrix,
    y: &SampleMatrix,
    g: &ResolvedMetric,
) -> Result<PluginTaus> {
    if x.dim() != g.total_dim() || y.dim() != g.total_dim() {
        return Err(Error::Dimension(
            "samples do not conform to the metric".into(),
        ));
    }
    let (n, m) = (x.n(), y.n());
    if n < 2 || m < 2 {
        return Err(Error::SampleSize {
            needed: 2,
            got: n.min(m),
        });
    }
    let within = |s: &SampleMatrix| -> f64 {
        let n = s.n();
        let mut acc = 0.0;
        for k in 0..n {
            for l in (k + 1)..n {
                acc += g.distance_sq_unchecked(s.row(k), s.row(l));
            }
        }
        2.0 * acc / (n as f64 * (n as f64 - 1.0))
    };
    let mut cross = 0.0;
    for k in 0..n {
        for l in 0..m {
            cross += g.distance_sq_unchecked(x.row(k), y.row(l));
        }
    }
    Ok(PluginTaus {
        tau_x_sq: within(x),
        tau_y_sq: within(y),
        tau_sq: cross / (n as f64 * m as f64),
    })
}

/// Plug-in leading term of the energy statistic for growing dimension:
/// `2 tau - tau_X - tau_Y`.
pub fn leading_term_homogeneity(
    x: &SampleMatrix,
    y: &SampleMatrix,
    g: &ResolvedMetric,
) -> Result<f64> {
    let taus = plugin_taus(x, y, g)?;
    Ok(2.0 * taus.tau() - taus.tau_x() - taus.tau_y())
}

/// Fourth-order U-statistic form of the unbiased squared distance
/// covariance, evaluated literally: the mean over all `C(n,4)` index
/// quadruples of the symmetrized kernel
/// `h = mean over permutations (s,t,u,v) of a_st b_st + a_st b_uv - 2 a_st b_su`.
///
/// Cost is `O(n^4)`; restricted to `4 <= n <= 10`.
pub fn dcov_sq_bruteforce(
    x: &SampleMatrix,
    y: &SampleMatrix,
    gx: &ResolvedMetric,
    gy: &ResolvedMetric,
) -> Result<f64> {
    let n = x.n();
    if y.n() != n {
        return Err(Error::Dimension(
            "paired samples must share the row count".into(),
        ));
    }
    if !(4..=10).contains(&n) {
        return Err(Error::Config(format!(
            "brute-force estimator supports 4 <= n <= 10, got {n}"
        )));
    }
    let a = full_matrix(x, gx);
    let b = full_matrix(y, gy);

    let mut total = 0.0;
    let mut count = 0u64;
    for quad in (0..n).combinations(4) {
        let mut h = 0.0;
        for perm in quad.iter().copied().permutations(4) {
            let (s, t, u, v) = (perm[0], perm[1], perm[2], perm[3]);
            h += a[s][t] * b[s][t] + a[s][t] * b[u][v] - 2.0 * a[s][t] * b[s][u];
        }
        total += h / 24.0;
        count += 1;
    }
    Ok(total / count as f64)
}

/// Two-sample kernel average form of the energy statistic, evaluated
/// literally over all pairs of within-sample pairs:
///
/// ```text
/// h(X_i, X_j; Y_k, Y_l) = (K(X_i,Y_k) + K(X_i,Y_l) + K(X_j,Y_k) + K(X_j,Y_l))/2
///                          - K(X_i,X_j) - K(Y_k,Y_l)
/// ```
pub fn energy_bruteforce(
    x: &SampleMatrix,
    y: &SampleMatrix,
    g: &ResolvedMetric,
) -> Result<f64> {
    let (n, m) = (x.n(), y.n());
    if n < 2 || m < 2 {
        return Err(Error::SampleSize {
            needed: 2,
            got: n.min(m),
        });
    }
    if n > 20 || m > 20 {
        return Err(Error::Config(format!(
            "brute-force energy supports n, m <= 20, got {n}, {m}"
        )));
    }
    let axy = cross_matrix(x, y, g);
    let axx = full_matrix(x, g);
    let ayy = full_matrix(y, g);

    let mut total = 0.0;
    let mut count = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..m {
                for l in (k + 1)..m {
                    total += 0.5 * (axy[i][k] + axy[i][l] + axy[j][k] + axy[j][l])
                        - axx[i][j]
                        - ayy[k][l];
                    count += 1;
                }
            }
        }
    }
    Ok(total / count as f64)
}

#[allow(clippy::needless_range_loop)] // symmetric two-sided fill
fn full_matrix(s: &SampleMatrix, g: &ResolvedMetric) -> Vec<Vec<f64>> {
    let n = s.n();
    let mut out = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in (k + 1)..n {
            let d = g.distance_unchecked(s.row(k), s.row(l));
            out[k][l] = d;
            out[l][k] = d;
        }
    }
    out
}

fn cross_matrix(x: &SampleMatrix, y: &SampleMatrix, g: &ResolvedMetric) -> Vec<Vec<f64>> {
    (0..x.n())
        .map(|k| {
            (0..y.n())
                .map(|l| g.distance_unchecked(x.row(k), y.row(l)))
                .collect()
        })
        .collect()
}

/// Group-wise aggregation that the dependence statistic approaches in high
/// dimension:
///
/// ```text
/// (1 / (4 tau_X tau_Y)) sum_i sum_j  D^2_{rho_i, rho_j}(X_(i), Y_(j))
/// ```
///
/// with plug-in `tau` estimates and each group-pair term the unbiased
/// U-statistic inner product of the per-group semimetric matrices. Cost is
/// `O(n^2 p q)`; intended for validation, not production use.
pub fn leading_term_dependence(
    x: &SampleMatrix,
    y: &SampleMatrix,
    gx: &ResolvedMetric,
    gy: &ResolvedMetric,
) -> Result<f64> {
    let n = x.n();
    if y.n() != n {
        return Err(Error::Dimension(
            "paired samples must share the row count".into(),
        ));
    }
    if n < 4 {
        return Err(Error::SampleSize { needed: 4, got: n });
    }
    if x.dim() != gx.total_dim() || y.dim() != gy.total_dim() {
        return Err(Error::Dimension(
            "samples do not conform to the metrics".into(),
        ));
    }

    // Plug-in tau of each side's aggregate metric over its own sample.
    let tau_of = |s: &SampleMatrix, g: &ResolvedMetric| -> f64 {
        let n = s.n();
        let mut acc = 0.0;
        for k in 0..n {
            for l in (k + 1)..n {
                acc += g.distance_sq_unchecked(s.row(k), s.row(l));
            }
        }
        (2.0 * acc / (n as f64 * (n as f64 - 1.0))).sqrt()
    };
    let tau_x = tau_of(x, gx);
    let tau_y = tau_of(y, gy);
    if tau_x == 0.0 || tau_y == 0.0 {
        // A constant side makes every group-pair term exactly zero.
        return Ok(0.0);
    }

    // Row sums and totals of every Y-group semimetric matrix, computed once.
    let q = gy.group_count();
    let y_sums: Vec<(Vec<f64>, f64)> = (0..q)
        .into_par_iter()
        .map(|j| group_row_sums(y, gy, j))
        .collect();

    // For each X-group, materialize its matrix once and pair it with every
    // Y-group through the U-centered inner-product identity.
    let p = gx.group_count();
    let per_group: Vec<f64> = (0..p)
        .into_par_iter()
        .map(|i| {
            let range = gx.group_range(i);
            let kind = gx.group_kind(i);
            let mut a = vec![0.0; n * n];
            let mut rs_a = vec![0.0; n];
            for k in 0..n {
                let xk = &x.row(k)[range.clone()];
                for l in (k + 1)..n {
                    let d = rho_eval_raw(kind, xk, &x.row(l)[range.clone()]);
                    a[k * n + l] = d;
                    a[l * n + k] = d;
                    rs_a[k] += d;
                    rs_a[l] += d;
                }
            }
            let tot_a: f64 = rs_a.iter().sum();

            let mut acc = 0.0;
            for (j, b_sums) in y_sums.iter().enumerate() {
                acc += pair_inner(y, gy, j, &a, &rs_a, tot_a, b_sums);
            }
            acc
        })
        .collect();

    Ok(ksum(&per_group) / (4.0 * tau_x * tau_y))
}

fn group_row_sums(s: &SampleMatrix, g: &ResolvedMetric, j: usize) -> (Vec<f64>, f64) {
    let n = s.n();
    let range = g.group_range(j);
    let kind = g.group_kind(j);
    let mut rs = vec![0.0; n];
    for k in 0..n {
        let sk = &s.row(k)[range.clone()];
        for l in (k + 1)..n {
            let d = rho_eval_raw(kind, sk, &s.row(l)[range.clone()]);
            rs[k] += d;
            rs[l] += d;
        }
    }
    let total = rs.iter().sum();
    (rs, total)
}

/// One `(Ã(i) · B̃(j))` term expanded so only the raw entrywise product needs
/// a second pass over the pairs:
///
/// ```text
/// n(n-3) (Ã·B̃) = T1 + G_a G_b / ((n-1)(n-2)) - 2 T3 / (n-2),
/// T1 = sum_{k != l} a_kl b_kl,  T3 = sum_k R_a(k) R_b(k),
/// ```
///
/// with `R` the row sums and `G` the grand sums of the zero-diagonal inputs.
#[allow(clippy::needless_range_loop)]
fn pair_inner(
    y: &SampleMatrix,
    gy: &ResolvedMetric,
    j: usize,
    a: &[f64],
    rs_a: &[f64],
    tot_a: f64,
    (rs_b, tot_b): &(Vec<f64>, f64),
) -> f64 {
    let n = rs_a.len();
    let range = gy.group_range(j);
    let kind = gy.group_kind(j);
    let mut t1 = 0.0;
    for k in 0..n {
        let yk = &y.row(k)[range.clone()];
        let arow = &a[k * n..(k + 1) * n];
        for l in (k + 1)..n {
            t1 += arow[l] * rho_eval_raw(kind, yk, &y.row(l)[range.clone()]);
        }
    }
    t1 *= 2.0;
    let t3: f64 = rs_a.iter().zip(rs_b).map(|(ra, rb)| ra * rb).sum();
    let nf = n as f64;
    (t1 + tot_a * tot_b / ((nf - 1.0) * (nf - 2.0)) - 2.0 * t3 / (nf - 2.0)) / (nf * (nf - 3.0))
}
