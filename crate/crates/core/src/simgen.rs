//! Seeded generators for the synthetic two-sample and independence
//! scenarios, and the replication harness that turns them into rejection-rate
//! tables.
//!
//! Scenario codes follow the family.variant convention used throughout the
//! docs: `H1`-`H3` are two-sample (homogeneity) designs, `D1`-`D3` are
//! paired (independence) designs, and `R1` is the correlated
//! signal-plus-noise pair used by the population-ratio checks.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grouped::{Bandwidth, GroupSpec, SampleMatrix, SemimetricKind};
use crate::homogeneity::homogeneity_test;
use crate::independence::dependence_test;
use crate::report::fmt_float;
use crate::statdist::Rng;

/// The six test configurations compared in the rate tables.
///
/// `I`-`III` are the group-wise distances (Euclidean, Laplace-induced,
/// Gaussian-induced semimetrics, aggregation exponent 1/2). `IV` is the
/// plain Euclidean energy distance / distance covariance. `V` and `VI` are
/// the Laplace- and Gaussian-kernel MMD / HSIC tests, computed through the
/// induced distance on the whole vector so one numerical core serves all six.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestId {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl TestId {
    pub const ALL: [TestId; 6] = [
        TestId::I,
        TestId::II,
        TestId::III,
        TestId::IV,
        TestId::V,
        TestId::VI,
    ];

    /// Group spec this test uses on data whose natural layout is
    /// `base_sizes`. Tests IV-VI ignore the grouping and work on the whole
    /// vector.
    pub fn group_spec(&self, base_sizes: &[usize]) -> Result<GroupSpec> {
        let total: usize = base_sizes.iter().sum();
        let auto = Bandwidth::Auto;
        match self {
            TestId::I => GroupSpec::new(base_sizes.to_vec(), SemimetricKind::Euclidean, 0.5),
            TestId::II => GroupSpec::new(
                base_sizes.to_vec(),
                SemimetricKind::LaplaceInduced { bandwidth: auto },
                0.5,
            ),
            TestId::III => GroupSpec::new(
                base_sizes.to_vec(),
                SemimetricKind::GaussianInduced { bandwidth: auto },
                0.5,
            ),
            TestId::IV => GroupSpec::single_group(total, SemimetricKind::SquaredEuclidean, 0.5),
            TestId::V => GroupSpec::single_group(
                total,
                SemimetricKind::LaplaceInduced { bandwidth: auto },
                1.0,
            ),
            TestId::VI => GroupSpec::single_group(
                total,
                SemimetricKind::GaussianInduced { bandwidth: auto },
                1.0,
            ),
        }
    }
}

impl std::fmt::Display for TestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TestId::I => "I",
            TestId::II => "II",
            TestId::III => "III",
            TestId::IV => "IV",
            TestId::V => "V",
            TestId::VI => "VI",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(TestId::I),
            "II" | "2" => Ok(TestId::II),
            "III" | "3" => Ok(TestId::III),
            "IV" | "4" => Ok(TestId::IV),
            "V" | "5" => Ok(TestId::V),
            "VI" | "6" => Ok(TestId::VI),
            other => Err(Error::Config(format!("unknown test id {other:?}"))),
        }
    }
}

/// Scenario families. `H*` generate two independent samples, `D*` and `R`
/// generate one paired sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioFamily {
    H1,
    H2,
    H3,
    D1,
    D2,
    D3,
    R,
}

impl ScenarioFamily {
    fn variants(&self) -> u32 {
        match self {
            ScenarioFamily::H1 => 3,
            ScenarioFamily::H2 => 5,
            ScenarioFamily::H3 => 2,
            ScenarioFamily::D1 => 3,
            ScenarioFamily::D2 => 3,
            ScenarioFamily::D3 => 3,
            ScenarioFamily::R => 1,
        }
    }

    pub fn is_two_sample(&self) -> bool {
        matches!(
            self,
            ScenarioFamily::H1 | ScenarioFamily::H2 | ScenarioFamily::H3
        )
    }
}

impl std::fmt::Display for ScenarioFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScenarioFamily::H1 => "H1",
            ScenarioFamily::H2 => "H2",
            ScenarioFamily::H3 => "H3",
            ScenarioFamily::D1 => "D1",
            ScenarioFamily::D2 => "D2",
            ScenarioFamily::D3 => "D3",
            ScenarioFamily::R => "R",
        };
        f.write_str(s)
    }
}

/// A fully parameterized scenario: family, variant and sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioId {
    pub family: ScenarioFamily,
    pub variant: u32,
    /// Rows of the first sample.
    pub n: usize,
    /// Rows of the second sample; ignored by the paired families.
    pub m: usize,
    /// Number of groups (coordinates, except `H3` where groups are pairs).
    pub p: usize,
    /// Fraction of replaced coordinates in the mixed designs (default 1/2).
    pub beta: f64,
    /// Autoregression parameter for the serially correlated design.
    pub phi: f64,
}

impl ScenarioId {
    pub fn new(family: ScenarioFamily, variant: u32, n: usize, m: usize, p: usize) -> Result<Self> {
        let id = Self {
            family,
            variant,
            n,
            m,
            p,
            beta: 0.5,
            phi: 0.5,
        };
        id.validate()?;
        Ok(id)
    }

    /// Parses a `FAMILY.VARIANT` code such as `H2.1` or `D3.2`.
    pub fn parse_code(code: &str) -> Result<(ScenarioFamily, u32)> {
        let (fam, var) = code
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("scenario code {code:?} is not FAMILY.VARIANT")))?;
        let family = match fam.to_ascii_uppercase().as_str() {
            "H1" => ScenarioFamily::H1,
            "H2" => ScenarioFamily::H2,
            "H3" => ScenarioFamily::H3,
            "D1" => ScenarioFamily::D1,
            "D2" => ScenarioFamily::D2,
            "D3" => ScenarioFamily::D3,
            "R" | "R1" => ScenarioFamily::R,
            other => return Err(Error::Config(format!("unknown scenario family {other:?}"))),
        };
        let variant: u32 = var
            .parse()
            .map_err(|_| Error::Config(format!("bad scenario variant {var:?}")))?;
        Ok((family, variant))
    }

    pub fn code(&self) -> String {
        format!("{}.{}", self.family, self.variant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == 0 || self.variant > self.family.variants() {
            return Err(Error::Config(format!(
                "{} has variants 1..={}, got {}",
                self.family,
                self.family.variants(),
                self.variant
            )));
        }
        if self.p == 0 || self.n < 2 || (self.family.is_two_sample() && self.m < 2) {
            return Err(Error::Config("scenario sizes too small".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta {} not in (0,1)", self.beta)));
        }
        if !(self.phi > -1.0 && self.phi < 1.0) {
            return Err(Error::Config(format!("phi {} not in (-1,1)", self.phi)));
        }
        Ok(())
    }

    /// Column count of each generated sample.
    pub fn dim(&self) -> usize {
        match self.family {
            ScenarioFamily::H3 => 2 * self.p,
            _ => self.p,
        }
    }

    /// Natural group layout of the scenario's data for the group-wise tests.
    pub fn group_sizes(&self) -> Vec<usize> {
        match self.family {
            ScenarioFamily::H3 => vec![2; self.p],
            _ => vec![1; self.p],
        }
    }
}

/// Symmetric square root of a symmetric positive semidefinite matrix via
/// eigendecomposition. Eigenvalues below -1e-10 are a not-PSD error; small
/// negative values from roundoff clamp to zero.
pub fn sym_sqrt(r: &Array2<f64>) -> Result<Array2<f64>> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::Dimension("matrix must be square".into()));
    }
    let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Dimension("matrix is not symmetric".into()));
            }
        }
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| r[(i, j)]);
    let eig = nalgebra::SymmetricEigen::new(m);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| l < -1e-10) {
        return Err(Error::Config(format!(
            "matrix is not positive semidefinite (eigenvalue {bad})"
        )));
    }
    let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let v = eig.eigenvectors;
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut acc = 0.0;
            for (k, s) in sqrt_vals.iter().enumerate() {
                acc += v[(i, k)] * s * v[(j, k)];
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

fn banded_cov(p: usize) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(i, j)| {
        let d = i.abs_diff(j);
        if d == 0 {
            1.0
        } else if d <= 2 {
            0.25
        } else {
            0.0
        }
    })
}

fn toeplitz_cov(p: usize) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(i, j)| 0.7f64.powi(i.abs_diff(j) as i32))
}

/// A scenario with its covariance factors precomputed, ready for repeated
/// sampling.
#[derive(Debug, Clone)]
pub struct Scenario {
    id: ScenarioId,
    /// Square-root factor applied to the first sample's innovations.
    factor_x: Option<Array2<f64>>,
    /// Square-root factor applied to the second sample's innovations.
    factor_y: Option<Array2<f64>>,
}

impl Scenario {
    pub fn new(id: &ScenarioId) -> Result<Self> {
        id.validate()?;
        let p = id.p;
        let (factor_x, factor_y) = match (id.family, id.variant) {
            (ScenarioFamily::H1, 2) => {
                let s = sym_sqrt(&banded_cov(p))?;
                (Some(s.clone()), Some(s))
            }
            (ScenarioFamily::H1, 3) => {
                let s = sym_sqrt(&toeplitz_cov(p))?;
                (Some(s.clone()), Some(s))
            }
            (ScenarioFamily::H2, 5) => {
                let s = sym_sqrt(&banded_cov(p))?;
                (Some(s.clone()), Some(s))
            }
            (ScenarioFamily::H3, 1) => (
                Some(sym_sqrt(&ndarray::array![[1.0, 0.9], [0.9, 1.0]])?),
                Some(sym_sqrt(&ndarray::array![[1.0, 0.1], [0.1, 1.0]])?),
            ),
            (ScenarioFamily::H3, 2) => {
                (Some(sym_sqrt(&ndarray::array![[1.0, 0.7], [0.7, 1.0]])?), None)
            }
            (ScenarioFamily::D1, 3) | (ScenarioFamily::D2, 3) => {
                let s = sym_sqrt(&toeplitz_cov(p))?;
                (Some(s.clone()), Some(s))
            }
            _ => (None, None),
        };
        Ok(Self {
            id: id.clone(),
            factor_x,
            factor_y,
        })
    }

    pub fn id(&self) -> &ScenarioId {
        &self.id
    }

    /// Draws one dataset. Two-sample families return independent samples of
    /// `n` and `m` rows; paired families return two `n`-row matrices whose
    /// rows are coupled.
    pub fn sample(&self, rng: &mut Rng) -> (SampleMatrix, SampleMatrix) {
        let id = &self.id;
        let (n, m, p) = (id.n, id.m, id.p);
        let (x, y) = match (id.family, id.variant) {
            (ScenarioFamily::H1, 1) => (normal_matrix(n, p, 0.0, rng), normal_matrix(m, p, 0.0, rng)),
            (ScenarioFamily::H1, 2 | 3) => (
                factored_normal(n, self.factor_x.as_ref().unwrap(), rng),
                factored_normal(m, self.factor_y.as_ref().unwrap(), rng),
            ),
            (ScenarioFamily::H2, 1) => (
                normal_matrix(n, p, 1.0, rng),
                fill_matrix(m, p, rng, |r| r.poisson(1.0)),
            ),
            (ScenarioFamily::H2, 2) => (
                normal_matrix(n, p, 1.0, rng),
                fill_matrix(m, p, rng, |r| r.exp1()),
            ),
            (ScenarioFamily::H2, 3) => (
                normal_matrix(n, p, 0.0, rng),
                mixed_head_matrix(m, p, id.beta, rng, |r| r.rademacher()),
            ),
            (ScenarioFamily::H2, 4) => {
                let root3 = 3.0f64.sqrt();
                (
                    normal_matrix(n, p, 0.0, rng),
                    mixed_head_matrix(m, p, id.beta, rng, move |r| r.uniform(-root3, root3)),
                )
            }
            (ScenarioFamily::H2, 5) => {
                let f = self.factor_x.as_ref().unwrap();
                let x = factored_matrix(n, f, rng, |r| r.standard_normal());
                let y = factored_matrix(m, f, rng, |r| r.exp1() - 1.0);
                (x, y)
            }
            (ScenarioFamily::H3, 1) => (
                paired_groups(n, p, self.factor_x.as_ref().unwrap(), rng),
                paired_groups(m, p, self.factor_y.as_ref().unwrap(), rng),
            ),
            (ScenarioFamily::H3, 2) => (
                paired_groups(n, p, self.factor_x.as_ref().unwrap(), rng),
                fill_matrix(m, 2 * p, rng, |r| r.exp1()),
            ),
            (ScenarioFamily::D1, 1) => (normal_matrix(n, p, 0.0, rng), normal_matrix(n, p, 0.0, rng)),
            (ScenarioFamily::D1, 2) => (
                ar1_matrix(n, p, id.phi, rng),
                ar1_matrix(n, p, -id.phi, rng),
            ),
            (ScenarioFamily::D1, 3) => (
                factored_normal(n, self.factor_x.as_ref().unwrap(), rng),
                factored_normal(n, self.factor_y.as_ref().unwrap(), rng),
            ),
            (ScenarioFamily::D2, 1) => {
                let x = normal_matrix(n, p, 0.0, rng);
                let y = map_matrix(&x, |v| v * v);
                (x, y)
            }
            (ScenarioFamily::D2, 2) => {
                let x = normal_matrix(n, p, 0.0, rng);
                let y = map_matrix(&x, |v| v.abs().ln());
                (x, y)
            }
            (ScenarioFamily::D2, 3) => {
                let x = factored_normal(n, self.factor_x.as_ref().unwrap(), rng);
                let y = map_matrix(&x, |v| v * v);
                (x, y)
            }
            (ScenarioFamily::D3, 1) => {
                let x = fill_matrix(n, p, rng, |r| r.uniform(-1.0, 1.0));
                let y = map_matrix(&x, |v| v * v);
                (x, y)
            }
            (ScenarioFamily::D3, 2) => {
                let x = fill_matrix(n, p, rng, |r| r.uniform(0.0, 1.0));
                let y = map_matrix(&x, |v| 4.0 * v * v - 4.0 * v + 2.0);
                (x, y)
            }
            (ScenarioFamily::D3, 3) => {
                let tau = 2.0 * std::f64::consts::PI;
                let mut xv = Array2::zeros((n, p));
                let mut yv = Array2::zeros((n, p));
                for k in 0..n {
                    for j in 0..p {
                        let z = rng.uniform(0.0, tau);
                        xv[(k, j)] = z.sin();
                        yv[(k, j)] = z.cos();
                    }
                }
                (
                    SampleMatrix::new(xv).expect("finite"),
                    SampleMatrix::new(yv).expect("finite"),
                )
            }
            (ScenarioFamily::R, _) => {
                let x = normal_matrix(n, p, 0.0, rng);
                let noise = normal_matrix(n, p, 0.0, rng);
                let y = SampleMatrix::new(x.values() + noise.values()).expect("finite");
                (x, y)
            }
            _ => unreachable!("validated variant"),
        };
        (x, y)
    }
}

fn normal_matrix(n: usize, p: usize, mean: f64, rng: &mut Rng) -> SampleMatrix {
    fill_matrix(n, p, rng, move |r| mean + r.standard_normal())
}

fn fill_matrix(
    n: usize,
    p: usize,
    rng: &mut Rng,
    mut draw: impl FnMut(&mut Rng) -> f64,
) -> SampleMatrix {
    let mut v = Array2::zeros((n, p));
    for k in 0..n {
        for j in 0..p {
            v[(k, j)] = draw(rng);
        }
    }
    SampleMatrix::new(v).expect("finite draws")
}

/// First `floor(beta * p)` coordinates from `head`, the rest standard normal.
fn mixed_head_matrix(
    n: usize,
    p: usize,
    beta: f64,
    rng: &mut Rng,
    mut head: impl FnMut(&mut Rng) -> f64,
) -> SampleMatrix {
    let cut = ((beta * p as f64).floor() as usize).min(p);
    let mut v = Array2::zeros((n, p));
    for k in 0..n {
        for j in 0..p {
            v[(k, j)] = if j < cut {
                head(rng)
            } else {
                rng.standard_normal()
            };
        }
    }
    SampleMatrix::new(v).expect("finite draws")
}

/// Rows `factor * z` with iid innovations from `draw`.
fn factored_matrix(
    n: usize,
    factor: &Array2<f64>,
    rng: &mut Rng,
    mut draw: impl FnMut(&mut Rng) -> f64,
) -> SampleMatrix {
    let p = factor.nrows();
    let mut v = Array2::zeros((n, p));
    let mut z = vec![0.0; p];
    for k in 0..n {
        for zj in z.iter_mut() {
            *zj = draw(rng);
        }
        for i in 0..p {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += factor[(i, j)] * zj;
            }
            v[(k, i)] = acc;
        }
    }
    SampleMatrix::new(v).expect("finite draws")
}

fn factored_normal(n: usize, factor: &Array2<f64>, rng: &mut Rng) -> SampleMatrix {
    factored_matrix(n, factor, rng, |r| r.standard_normal())
}

/// Independent 2-d groups `mu + S z` with `mu = (1,1)` and `S` a 2x2 factor.
fn paired_groups(n: usize, p: usize, factor: &Array2<f64>, rng: &mut Rng) -> SampleMatrix {
    let mut v = Array2::zeros((n, 2 * p));
    for k in 0..n {
        for g in 0..p {
            let z0 = rng.standard_normal();
            let z1 = rng.standard_normal();
            v[(k, 2 * g)] = 1.0 + factor[(0, 0)] * z0 + factor[(0, 1)] * z1;
            v[(k, 2 * g + 1)] = 1.0 + factor[(1, 0)] * z0 + factor[(1, 1)] * z1;
        }
    }
    SampleMatrix::new(v).expect("finite draws")
}

/// Stationary AR(1) rows with unit marginal variance:
/// `x_1 ~ N(0,1)`, `x_j = phi x_{j-1} + sqrt(1-phi^2) eps_j`.
fn ar1_matrix(n: usize, p: usize, phi: f64, rng: &mut Rng) -> SampleMatrix {
    let scale = (1.0 - phi * phi).sqrt();
    let mut v = Array2::zeros((n, p));
    for k in 0..n {
        let mut prev = rng.standard_normal();
        v[(k, 0)] = prev;
        for j in 1..p {
            prev = phi * prev + scale * rng.standard_normal();
            v[(k, j)] = prev;
        }
    }
    SampleMatrix::new(v).expect("finite draws")
}

fn map_matrix(x: &SampleMatrix, f: impl Fn(f64) -> f64) -> SampleMatrix {
    SampleMatrix::new(x.values().mapv(&f)).expect("finite map")
}

/// One-shot convenience wrapper: compile the scenario and draw once.
pub fn generate(id: &ScenarioId, rng: &mut Rng) -> Result<(SampleMatrix, SampleMatrix)> {
    Ok(Scenario::new(id)?.sample(rng))
}

/// One row of a rejection-rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub scenario: String,
    pub test: TestId,
    pub alpha: f64,
    pub rate: f64,
    pub reps: u64,
    pub seed: u64,
}

/// Rejection rates keyed by (scenario, test, alpha), with CSV and JSON
/// renderings that are byte-stable across runs and thread counts.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,test,alpha,rate,reps,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.scenario,
                r.test,
                fmt_float(r.alpha),
                fmt_float(r.rate),
                r.reps,
                r.seed
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{{\"alpha\":{},\"rate\":{},\"reps\":{},\"scenario\":\"{}\",\"seed\":{},\"test\":\"{}\"}}",
                    fmt_float(r.alpha),
                    fmt_float(r.rate),
                    r.reps,
                    r.scenario,
                    r.seed,
                    r.test
                )
            })
            .collect();
        format!("[{}]", rows.join(","))
    }

    /// Rate for a (test, alpha) pair, if present.
    pub fn rate(&self, test: TestId, alpha: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.test == test && (r.alpha - alpha).abs() < 1e-12)
            .map(|r| r.rate)
    }
}

/// Runs `reps` seeded replications of a scenario and reports, for every
/// requested test and level, the fraction of replications that rejected.
///
/// Replication `r` draws from stream `r` of the seed, so the table is
/// identical for any thread count; all requested tests see the same data
/// within a replication.
pub fn empirical_rejection(
    id: &ScenarioId,
    tests: &[TestId],
    reps: u64,
    alphas: &[f64],
    seed: u64,
) -> Result<RateTable> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if tests.is_empty() || alphas.is_empty() {
        return Err(Error::Config("need at least one test and one alpha".into()));
    }
    for &a in alphas {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::Config(format!("alpha {a} not in (0,1)")));
        }
    }
    let scenario = Scenario::new(id)?;
    let sizes = id.group_sizes();
    let specs: Vec<GroupSpec> = tests
        .iter()
        .map(|t| t.group_spec(&sizes))
        .collect::<Result<_>>()?;

    let p_values: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = Rng::with_stream(seed, rep);
            let (x, y) = scenario.sample(&mut rng);
            specs
                .iter()
                .map(|g| {
                    if id.family.is_two_sample() {
                        Ok(homogeneity_test(&x, &y, g, 0.05)?.p_value)
                    } else {
                        Ok(dependence_test(&x, &y, g, g, 0.05)?.p_value)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(tests.len() * alphas.len());
    for (ti, test) in tests.iter().enumerate() {
        for &alpha in alphas {
            let hits = p_values.iter().filter(|pv| pv[ti] < alpha).count();
            rows.push(RateRow {
                scenario: id.code(),
                test: *test,
                alpha,
                rate: hits as f64 / reps as f64,
                reps,
                seed,
            });
        }
    }
    Ok(RateTable { rows })
}
