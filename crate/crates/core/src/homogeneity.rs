//! Two-sample t-test for equality of distributions, with its exact and
//! large-sample power approximations.
//!
//! The statistic is the unbiased energy statistic divided by a pooled
//! variance estimate built from the cross distance covariance and the two
//! distance variances. Under the null and growing dimension it is
//! t-distributed with `(n-1)(m-1) + v_n + v_m` degrees of freedom, where
//! `v_s = s(s-3)/2`; the test rejects in the upper tail. When the sample
//! sizes also grow the null law is standard normal, which the t reference
//! distribution already approaches as its degrees of freedom blow up, so the
//! same p-value applies at every sample size.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grouped::{GroupSpec, SampleMatrix};
use crate::metrics::resolve_bandwidths;
use crate::report::fmt_float;
use crate::statdist::{chi2_sample, normal_cdf, t_sf, Rng};
use crate::ustat::{
    cdcov_sq, cross_distances, dcov_sq_unbiased, energy_stat, pairwise_distances,
};

/// Effective degrees-of-freedom contribution of one sample: `s(s-3)/2`.
pub fn v_of(s: usize) -> u64 {
    (s as u64) * (s as u64 - 3) / 2
}

/// Degrees of freedom of the two-sample statistic.
pub fn homogeneity_df(n: usize, m: usize) -> u64 {
    (n as u64 - 1) * (m as u64 - 1) + v_of(n) + v_of(m)
}

/// The `a_{nm}` scale factor of the two-sample statistic.
pub fn a_nm(n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    (1.0 / (nf * mf) + 1.0 / (2.0 * nf * (nf - 1.0)) + 1.0 / (2.0 * mf * (mf - 1.0))).sqrt()
}

/// Outcome of the two-sample test, including every intermediate estimate.
#[derive(Debug, Clone)]
pub struct HomogeneityResult {
    /// Unbiased energy statistic `E_{n,m}`.
    pub energy: f64,
    /// Cross distance covariance of the two samples.
    pub cdcov_sq: f64,
    /// Distance variance of the first sample.
    pub dvar_x: f64,
    /// Distance variance of the second sample.
    pub dvar_y: f64,
    /// Pooled variance estimate `S_{n,m}`.
    pub s_pool: f64,
    /// Scale factor `a_{nm}`.
    pub a_nm: f64,
    /// Studentized statistic `T_{n,m}`.
    pub statistic: f64,
    /// Degrees of freedom `(n-1)(m-1) + v_n + v_m`.
    pub df: u64,
    /// Upper-tail p-value.
    pub p_value: f64,
    /// Whether the test rejects at the requested level.
    pub reject: bool,
    /// The level used for `reject`.
    pub alpha: f64,
}

impl HomogeneityResult {
    /// Deterministic JSON rendering: keys sorted, floats with 12 significant
    /// digits.
    pub fn to_json(&self) -> String {
        format!(
            concat!(
                "{{\"components\":{{\"cdcov_sq\":{},\"dvar_x\":{},\"dvar_y\":{}}},",
                "\"df\":{},\"energy\":{},\"p_value\":{},\"reject\":{},",
                "\"s_pool\":{},\"statistic\":{}}}"
            ),
            fmt_float(self.cdcov_sq),
            fmt_float(self.dvar_x),
            fmt_float(self.dvar_y),
            self.df,
            fmt_float(self.energy),
            fmt_float(self.p_value),
            self.reject,
            fmt_float(self.s_pool),
            fmt_float(self.statistic),
        )
    }
}

/// Runs the two-sample test of equal distributions at level `alpha`.
///
/// Bandwidths of induced-kernel semimetrics are resolved on the pooled
/// sample. Requires `n, m >= 4` and matching column counts.
pub fn homogeneity_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    g: &GroupSpec,
    alpha: f64,
) -> Result<HomogeneityResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} not in (0,1)")));
    }
    let (n, m) = (x.n(), y.n());
    if n < 4 || m < 4 {
        return Err(Error::SampleSize {
            needed: 4,
            got: n.min(m),
        });
    }
    if x.dim() != y.dim() {
        return Err(Error::Dimension(format!(
            "samples have {} and {} columns",
            x.dim(),
            y.dim()
        )));
    }
    g.check_dim(x.dim())?;

    let pooled = x.vstack(y)?;
    let metric = resolve_bandwidths(g, &pooled)?;

    let axx = pairwise_distances(x, &metric)?;
    let ayy = pairwise_distances(y, &metric)?;
    let axy = cross_distances(x, y, &metric)?;

    let energy = energy_stat(&axy, &axx, &ayy)?;
    let cdcov = cdcov_sq(&axy)?;
    let dvar_x = dcov_sq_unbiased(&axx, &axx)?;
    let dvar_y = dcov_sq_unbiased(&ayy, &ayy)?;

    let (vn, vm) = (v_of(n), v_of(m));
    let df = homogeneity_df(n, m);
    let cross_weight = (n as f64 - 1.0) * (m as f64 - 1.0);
    let s_pool = (4.0 * cross_weight * cdcov + 4.0 * vn as f64 * dvar_x
        + 4.0 * vm as f64 * dvar_y)
        / df as f64;
    if !(s_pool > 0.0) {
        return Err(Error::Degenerate(
            "pooled variance estimate is zero; all pairwise distances coincide".into(),
        ));
    }

    let a = a_nm(n, m);
    let statistic = energy / (a * s_pool.sqrt());
    let p_value = t_sf(statistic, df as f64);
    Ok(HomogeneityResult {
        energy,
        cdcov_sq: cdcov,
        dvar_x,
        dvar_y,
        s_pool,
        a_nm: a,
        statistic,
        df,
        p_value,
        reject: p_value < alpha,
        alpha,
    })
}

/// Limiting variances of the three double-centered distance processes; the
/// inputs to the power tools (the test itself never needs them).
#[derive(Debug, Clone, Copy)]
pub struct PowerParams {
    pub sigma_sq: f64,
    pub sigma_x_sq: f64,
    pub sigma_y_sq: f64,
}

impl PowerParams {
    pub fn new(sigma_sq: f64, sigma_x_sq: f64, sigma_y_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_x_sq > 0.0 && sigma_y_sq > 0.0) {
            return Err(Error::Config(
                "all limiting variances must be positive".into(),
            ));
        }
        Ok(Self {
            sigma_sq,
            sigma_x_sq,
            sigma_y_sq,
        })
    }
}

/// Monte Carlo evaluation of the limiting acceptance probability
///
/// ```text
/// phi_{n,m}(t) = E[ Phi( (a_{nm} sqrt(M) t - delta) / sigma_{nm} ) ],
/// M = (s^2 X_1 + s_X^2 X_2 + s_Y^2 X_3) / ((n-1)(m-1) + v_n + v_m),
/// ```
///
/// with independent chi-squares `X_1, X_2, X_3` of `(n-1)(m-1)`, `v_n`, `v_m`
/// degrees of freedom. The asymptotic power of the level-`alpha` test at
/// `t = q_{alpha,df}` is `1 - phi_{n,m}(t)`. Deterministic given the seed,
/// independent of thread count.
pub fn exact_power_mc(
    pp: &PowerParams,
    delta: f64,
    n: usize,
    m: usize,
    t: f64,
    reps: u64,
    seed: u64,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if n < 4 || m < 4 {
        return Err(Error::SampleSize {
            needed: 4,
            got: n.min(m),
        });
    }
    let df_cross = (n as u64 - 1) * (m as u64 - 1);
    let (vn, vm) = (v_of(n), v_of(m));
    let df_total = (df_cross + vn + vm) as f64;
    let (nf, mf) = (n as f64, m as f64);
    let sigma_nm = (pp.sigma_sq / (nf * mf)
        + pp.sigma_x_sq / (2.0 * nf * (nf - 1.0))
        + pp.sigma_y_sq / (2.0 * mf * (mf - 1.0)))
    .sqrt();
    let a = a_nm(n, m);

    const CHUNK: u64 = 4096;
    let chunks = reps.div_ceil(CHUNK);
    let chunk_sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(reps);
            let mut acc = 0.0;
            for rep in lo..hi {
                let mut rng = Rng::with_stream(seed, rep);
                let mix = pp.sigma_sq * chi2_sample(df_cross, &mut rng)
                    + pp.sigma_x_sq * chi2_sample(vn, &mut rng)
                    + pp.sigma_y_sq * chi2_sample(vm, &mut rng);
                let m_draw = mix / df_total;
                acc += normal_cdf((a * m_draw.sqrt() * t - delta) / sigma_nm);
            }
            acc
        })
        .collect();
    Ok(chunk_sums.iter().sum::<f64>() / reps as f64)
}

/// Large-sample limit of `phi_{n,m}(t)` when `m/n -> alpha0` and
/// `delta = delta0 / sqrt(nm)`:
///
/// ```text
/// Phi( a0* sqrt(m0*) t - delta0* )
/// ```
///
/// with `m0*`, `a0*`, `delta0*` the closed-form limits of `m_0`,
/// `a_{nm}/sigma_{nm}` and `delta/sigma_{nm}`.
pub fn approx_power(pp: &PowerParams, delta0: f64, alpha0: f64, t: f64) -> Result<f64> {
    if !(alpha0 > 0.0) {
        return Err(Error::Config(format!(
            "sample-size ratio alpha0 = {alpha0} must be positive"
        )));
    }
    let (s, sx, sy) = (pp.sigma_sq, pp.sigma_x_sq, pp.sigma_y_sq);
    let m0 = (2.0 * alpha0 * s + sx + sy * alpha0 * alpha0)
        / (2.0 * alpha0 + 1.0 + alpha0 * alpha0);
    let a0 = ((2.0 * alpha0 + alpha0 * alpha0 + 1.0)
        / (2.0 * alpha0 * s + alpha0 * alpha0 * sx + sy))
        .sqrt();
    let d0 = delta0 * (2.0 * alpha0 / (2.0 * s * alpha0 + sx * alpha0 * alpha0 + sy)).sqrt();
    Ok(normal_cdf(a0 * m0.sqrt() * t - d0))
}
