//! Distance matrices, U-centering, double centering, and the unbiased
//! U-statistic estimators: the energy statistic, the generalized
//! distance-covariance inner product, and the cross distance covariance.
//!
//! All reductions use compensated summation and a fixed order, so results do
//! not depend on the number of worker threads.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grouped::SampleMatrix;
use crate::metrics::ResolvedMetric;
use crate::numeric::{ksum, KahanSum};

/// Work threshold (pair count times row length) above which pairwise
/// evaluation fans out to the thread pool.
const PAR_MIN_WORK: usize = 1 << 22;

/// Symmetric pairwise-distance matrix with zero diagonal and nonnegative
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    entries: Array2<f64>,
}

impl DistanceMatrix {
    /// Validates an externally built matrix.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::Dimension(format!(
                "distance matrix must be square, got {n} x {}",
                entries.ncols()
            )));
        }
        for k in 0..n {
            if entries[(k, k)] != 0.0 {
                return Err(Error::Dimension(format!(
                    "nonzero diagonal entry at ({k},{k})"
                )));
            }
            for l in 0..k {
                let a = entries[(k, l)];
                if a != entries[(l, k)] {
                    return Err(Error::Dimension(format!(
                        "asymmetric entries at ({k},{l})"
                    )));
                }
                if !(a >= 0.0) {
                    return Err(Error::Dimension(format!(
                        "negative or non-finite entry at ({k},{l})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Builds the matrix from a pairwise function evaluated on the upper
    /// triangle and mirrored. `work_per_pair` guides the parallel cutover.
    pub fn from_pairwise<F>(n: usize, work_per_pair: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut entries = Array2::zeros((n, n));
        {
            let flat = entries.as_slice_mut().expect("standard layout");
            let parallel = n * n / 2 * work_per_pair.max(1) >= PAR_MIN_WORK;
            let fill_row = |k: usize, row: &mut [f64]| {
                for (l, cell) in row.iter_mut().enumerate().skip(k + 1) {
                    *cell = f(k, l);
                }
            };
            if parallel {
                flat.par_chunks_mut(n)
                    .enumerate()
                    .for_each(|(k, row)| fill_row(k, row));
            } else {
                for (k, row) in flat.chunks_mut(n).enumerate() {
                    fill_row(k, row);
                }
            }
        }
        for k in 0..n {
            for l in (k + 1)..n {
                entries[(l, k)] = entries[(k, l)];
            }
        }
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// U-centered matrix: zero diagonal, all row sums zero for symmetric input.
#[derive(Debug, Clone, PartialEq)]
pub struct UCenteredMatrix {
    entries: Array2<f64>,
}

impl UCenteredMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// Doubly centered cross matrix: all row means and column means are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCenteredMatrix {
    entries: Array2<f64>,
}

impl CrossCenteredMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.entries.nrows(), self.entries.ncols())
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }
}

/// Distance matrix of a sample under a resolved group-wise metric:
/// entry `(k, l)` is the metric between rows `k` and `l`.
pub fn pairwise_distances(s: &SampleMatrix, g: &ResolvedMetric) -> Result<DistanceMatrix> {
    if s.dim() != g.total_dim() {
        return Err(Error::Dimension(format!(
            "sample has {} columns but the metric covers {}",
            s.dim(),
            g.total_dim()
        )));
    }
    if s.n() < 2 {
        return Err(Error::SampleSize {
            needed: 2,
            got: s.n(),
        });
    }
    Ok(DistanceMatrix::from_pairwise(s.n(), s.dim(), |k, l| {
        g.distance_unchecked(s.row(k), s.row(l))
    }))
}

/// Cross-distance matrix between two samples: entry `(k, l)` is the metric
/// between row `k` of `x` and row `l` of `y`.
pub fn cross_distances(
    x: &SampleMatrix,
    y: &SampleMatrix,
    g: &ResolvedMetric,
) -> Result<Array2<f64>> {
    if x.dim() != g.total_dim() || y.dim() != g.total_dim() {
        return Err(Error::Dimension(format!(
            "samples have {} and {} columns but the metric covers {}",
            x.dim(),
            y.dim(),
            g.total_dim()
        )));
    }
    let (n, m) = (x.n(), y.n());
    let mut out = Array2::zeros((n, m));
    {
        let flat = out.as_slice_mut().expect("standard layout");
        let fill_row = |k: usize, row: &mut [f64]| {
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = g.distance_unchecked(x.row(k), y.row(l));
            }
        };
        if n * m * x.dim() >= PAR_MIN_WORK {
            flat.par_chunks_mut(m)
                .enumerate()
                .for_each(|(k, row)| fill_row(k, row));
        } else {
            for (k, row) in flat.chunks_mut(m).enumerate() {
                fill_row(k, row);
            }
        }
    }
    Ok(out)
}

/// U-centering of a symmetric distance matrix (requires `n >= 4` so the
/// downstream `n(n-3)` normalizer is positive):
///
/// ```text
/// ã_kl = a_kl - r_k/(n-2) - r_l/(n-2) + g/((n-1)(n-2))   for k != l,
/// ã_kk = 0,
/// ```
///
/// with `r_k` the k-th row sum and `g` the grand sum.
pub fn u_center(a: &DistanceMatrix) -> Result<UCenteredMatrix> {
    let n = a.n();
    if n < 4 {
        return Err(Error::SampleSize { needed: 4, got: n });
    }
    let nf = n as f64;
    let flat = a.entries.as_slice().expect("standard layout");
    let row_sums: Vec<f64> = flat.chunks(n).map(ksum).collect();
    let grand = ksum(&row_sums);
    let row_term: Vec<f64> = row_sums.iter().map(|r| r / (nf - 2.0)).collect();
    let grand_term = grand / ((nf - 1.0) * (nf - 2.0));

    let mut out = Array2::zeros((n, n));
    {
        let dst = out.as_slice_mut().expect("standard layout");
        for (k, row) in dst.chunks_mut(n).enumerate() {
            let src = &flat[k * n..(k + 1) * n];
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = if l == k {
                    0.0
                } else {
                    src[l] - row_term[k] - row_term[l] + grand_term
                };
            }
        }
    }
    Ok(UCenteredMatrix { entries: out })
}

/// The U-statistic inner product `(1/(n(n-3))) sum_{k != l} ã_kl b̃_kl`.
pub fn u_inner(a: &UCenteredMatrix, b: &UCenteredMatrix) -> Result<f64> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::Dimension(format!(
            "U-centered matrices of sizes {n} and {} cannot be paired",
            b.n()
        )));
    }
    let av = a.entries.as_slice().expect("standard layout");
    let bv = b.entries.as_slice().expect("standard layout");
    let mut acc = KahanSum::new();
    for k in 0..n {
        for l in (k + 1)..n {
            acc.add(av[k * n + l] * bv[k * n + l]);
            acc.add(av[l * n + k] * bv[l * n + k]);
        }
    }
    Ok(acc.value() / (n as f64 * (n as f64 - 3.0)))
}

/// Unbiased squared generalized distance covariance
/// `(Ã · B̃)` of two distance matrices on the same observations.
///
/// May be negative for dependent small samples; `dcov_sq_unbiased(A, A)` is
/// always nonnegative.
pub fn dcov_sq_unbiased(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::Dimension(format!(
            "distance matrices of sizes {} and {} cannot be paired",
            a.n(),
            b.n()
        )));
    }
    u_inner(&u_center(a)?, &u_center(b)?)
}

/// Unbiased two-sample energy statistic from the cross distances and the two
/// within-sample distance matrices:
///
/// ```text
/// (2/nm) sum_{k,l} d(X_k, Y_l)
///   - (1/(n(n-1))) sum_{k != l} d(X_k, X_l)
///   - (1/(m(m-1))) sum_{k != l} d(Y_k, Y_l)
/// ```
pub fn energy_stat(
    axy: &Array2<f64>,
    axx: &DistanceMatrix,
    ayy: &DistanceMatrix,
) -> Result<f64> {
    let n = axx.n();
    let m = ayy.n();
    if axy.nrows() != n || axy.ncols() != m {
        return Err(Error::Dimension(format!(
            "cross matrix is {} x {}, expected {n} x {m}",
            axy.nrows(),
            axy.ncols()
        )));
    }
    if n < 2 || m < 2 {
        return Err(Error::SampleSize {
            needed: 2,
            got: n.min(m),
        });
    }
    let cross = ksum(axy.as_slice().expect("standard layout"));
    let within_x = ksum(axx.entries.as_slice().expect("standard layout"));
    let within_y = ksum(ayy.entries.as_slice().expect("standard layout"));
    let (nf, mf) = (n as f64, m as f64);
    Ok(2.0 * cross / (nf * mf) - within_x / (nf * (nf - 1.0)) - within_y / (mf * (mf - 1.0)))
}

/// Double centering of an `n x m` cross matrix: subtract row means and
/// column means, add back the grand mean. Every row and column of the result
/// has mean zero.
pub fn double_center_cross(kxy: &Array2<f64>) -> Result<CrossCenteredMatrix> {
    let (n, m) = (kxy.nrows(), kxy.ncols());
    if n < 2 || m < 2 {
        return Err(Error::SampleSize {
            needed: 2,
            got: n.min(m),
        });
    }
    let flat = kxy.as_slice().expect("standard layout");
    let row_means: Vec<f64> = flat.chunks(m).map(|r| ksum(r) / m as f64).collect();
    let mut col_sums = vec![KahanSum::new(); m];
    for row in flat.chunks(m) {
        for (acc, &v) in col_sums.iter_mut().zip(row) {
            acc.add(v);
        }
    }
    let col_means: Vec<f64> = col_sums.iter().map(|s| s.value() / n as f64).collect();
    let grand = ksum(&row_means) / n as f64;

    let mut out = Array2::zeros((n, m));
    {
        let dst = out.as_slice_mut().expect("standard layout");
        for (k, row) in dst.chunks_mut(m).enumerate() {
            let src = &flat[k * m..(k + 1) * m];
            for l in 0..m {
                row[l] = src[l] - row_means[k] - col_means[l] + grand;
            }
        }
    }
    Ok(CrossCenteredMatrix { entries: out })
}

/// Cross distance covariance: mean of the squared doubly centered cross
/// distances, `(1/((n-1)(m-1))) sum K̂_kl^2`. Always nonnegative.
pub fn cdcov_sq(kxy: &Array2<f64>) -> Result<f64> {
    let centered = double_center_cross(kxy)?;
    let (n, m) = centered.shape();
    let total = ksum_sq(centered.entries.as_slice().expect("standard layout"));
    Ok(total / ((n as f64 - 1.0) * (m as f64 - 1.0)))
}

fn ksum_sq(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v * v);
    }
    acc.value()
}
