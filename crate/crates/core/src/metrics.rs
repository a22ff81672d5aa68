//! Per-group semimetric evaluation, the aggregated group-wise distance, and
//! median-heuristic bandwidth resolution.

use crate::error::{Error, Result};
use crate::grouped::{Bandwidth, GroupSpec, SampleMatrix, SemimetricKind};

#[inline]
fn sumsq_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Evaluates one group semimetric between two subvectors of equal length.
///
/// - `SquaredEuclidean`: `||a-b||^2`
/// - `Euclidean`: `||a-b||`
/// - `LaplaceInduced`: `2 (1 - exp(-||a-b|| / gamma))`
/// - `GaussianInduced`: `2 (1 - exp(-||a-b||^2 / gamma^2))`
pub fn rho_eval(kind: &SemimetricKind, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "semimetric arguments have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    match kind.bandwidth() {
        Some(Bandwidth::Auto) => Err(Error::Config(
            "bandwidth not resolved; run resolve_bandwidths first".into(),
        )),
        Some(Bandwidth::Fixed(g)) if !(g > 0.0) => {
            Err(Error::Config(format!("bandwidth {g} must be positive")))
        }
        _ => Ok(rho_eval_unchecked(kind, a, b)),
    }
}

#[inline]
fn rho_eval_unchecked(kind: &SemimetricKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        SemimetricKind::SquaredEuclidean => sumsq_diff(a, b),
        SemimetricKind::Euclidean => sumsq_diff(a, b).sqrt(),
        SemimetricKind::LaplaceInduced { bandwidth } => {
            let g = fixed(bandwidth);
            // 2 (1 - e^{-t}) via expm1 to keep accuracy near zero.
            -2.0 * (-(sumsq_diff(a, b).sqrt()) / g).exp_m1()
        }
        SemimetricKind::GaussianInduced { bandwidth } => {
            let g = fixed(bandwidth);
            -2.0 * (-sumsq_diff(a, b) / (g * g)).exp_m1()
        }
    }
}

/// Unchecked semimetric evaluation for internal hot loops; callers guarantee
/// equal lengths and resolved bandwidths.
#[inline]
pub(crate) fn rho_eval_raw(kind: &SemimetricKind, a: &[f64], b: &[f64]) -> f64 {
    rho_eval_unchecked(kind, a, b)
}

#[inline]
fn fixed(b: &Bandwidth) -> f64 {
    match b {
        Bandwidth::Fixed(g) => *g,
        Bandwidth::Auto => panic!("unresolved bandwidth reached evaluation"),
    }
}

/// A [`GroupSpec`] whose induced-kernel bandwidths are all concrete positive
/// numbers; the form the distance evaluators consume.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedMetric {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    kinds: Vec<SemimetricKind>,
    exponent_r: f64,
}

impl ResolvedMetric {
    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0) + self.sizes.last().copied().unwrap_or(0)
    }

    pub fn exponent_r(&self) -> f64 {
        self.exponent_r
    }

    pub fn group_kind(&self, i: usize) -> &SemimetricKind {
        &self.kinds[i]
    }

    /// Coordinate range of group `i`.
    pub fn group_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.sizes[i]
    }

    /// Sum of the per-group semimetrics, before the exponent is applied.
    #[inline]
    pub fn aggregate(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.total_dim());
        debug_assert_eq!(y.len(), self.total_dim());
        let mut total = 0.0;
        for i in 0..self.sizes.len() {
            let r = self.group_range(i);
            total += rho_eval_unchecked(&self.kinds[i], &x[r.clone()], &y[r]);
        }
        total
    }

    /// The group-wise distance `(sum_i rho_i)^r` between two full rows.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.total_dim() || y.len() != self.total_dim() {
            return Err(Error::Dimension(format!(
                "rows of lengths {} and {} do not conform to a {}-coordinate metric",
                x.len(),
                y.len(),
                self.total_dim()
            )));
        }
        Ok(self.distance_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        apply_exponent(self.aggregate(x, y), self.exponent_r)
    }

    /// Squared distance `(sum_i rho_i)^{2r}`; exact (no square root) when
    /// `r = 1/2`.
    #[inline]
    pub(crate) fn distance_sq_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        apply_exponent(self.aggregate(x, y), 2.0 * self.exponent_r)
    }
}

#[inline]
fn apply_exponent(total: f64, r: f64) -> f64 {
    if r == 0.5 {
        total.sqrt()
    } else if r == 1.0 {
        total
    } else {
        total.powf(r)
    }
}

/// Resolves `Auto` bandwidths against a sample: for each induced-kernel
/// group, the bandwidth becomes the median of the pairwise Euclidean
/// distances among that group's subvectors. Even pair counts use the lower
/// median; zero-distance pairs stay in the pool; a group whose median is
/// zero is degenerate.
///
/// For the two-sample test pass the pooled sample; for the independence test
/// resolve each side against its own sample.
pub fn resolve_bandwidths(g: &GroupSpec, sample: &SampleMatrix) -> Result<ResolvedMetric> {
    g.check_dim(sample.dim())?;
    let sizes = g.sizes().to_vec();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for &d in &sizes {
        offsets.push(acc);
        acc += d;
    }

    let base = g.semimetric();
    let kinds: Vec<SemimetricKind> = if base.bandwidth() == Some(Bandwidth::Auto) {
        let n = sample.n();
        if n < 2 {
            return Err(Error::SampleSize { needed: 2, got: n });
        }
        let mut kinds = Vec::with_capacity(sizes.len());
        let mut pool = Vec::with_capacity(n * (n - 1) / 2);
        for (i, &off) in offsets.iter().enumerate() {
            pool.clear();
            let d = sizes[i];
            for k in 0..n {
                let xk = &sample.row(k)[off..off + d];
                for l in (k + 1)..n {
                    let xl = &sample.row(l)[off..off + d];
                    pool.push(sumsq_diff(xk, xl).sqrt());
                }
            }
            let gamma = lower_median(&mut pool);
            if !(gamma > 0.0) {
                return Err(Error::Degenerate(format!(
                    "median pairwise distance in group {} is zero; cannot set a bandwidth",
                    i + 1
                )));
            }
            kinds.push(base.with_bandwidth(gamma));
        }
        kinds
    } else {
        vec![base; sizes.len()]
    };

    Ok(ResolvedMetric {
        offsets,
        sizes,
        kinds,
        exponent_r: g.exponent_r(),
    })
}

/// Lower median: element at index (len-1)/2 of the sorted values.
fn lower_median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    let idx = (values.len() - 1) / 2;
    let (_, m, _) = values.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    *m
}
