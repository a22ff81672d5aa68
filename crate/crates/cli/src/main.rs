//! Command-line front end: run the two-sample and independence tests on CSV
//! data, reproduce the reference simulation tables, and evaluate power
//! curves.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 statistical degeneracy
//! (too few observations, constant data, singular statistic). Replication
//! loops honor `RAYON_NUM_THREADS`; output is byte-identical for a fixed
//! seed regardless of thread count.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use hdmetrics::grouped::{GroupSpec, SemimetricKind};
use hdmetrics::homogeneity::{approx_power, exact_power_mc, homogeneity_df, PowerParams};
use hdmetrics::report::fmt_float;
use hdmetrics::simgen::{empirical_rejection, ScenarioId, TestId};
use hdmetrics::statdist::t_quantile;
use hdmetrics::{dependence_test, homogeneity_test, load_csv, Error};

#[derive(Parser)]
#[command(
    name = "hdmetrics",
    about = "Group-wise distance t-tests for high-dimensional two-sample and independence testing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-sample test of equal distributions on two CSV files.
    Test2(Test2Args),
    /// Independence test between the paired rows of two CSV files.
    Dep(DepArgs),
    /// Rejection-rate table for a named simulation scenario.
    Simulate(SimulateArgs),
    /// Exact (Monte Carlo) and large-sample power curves of the two-sample test.
    Power(PowerArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MetricChoice {
    /// Plain Euclidean energy distance / distance covariance.
    EuclidEnergy,
    /// Group-wise distance with Euclidean semimetrics.
    KdEuclid,
    /// Group-wise distance with Laplace-kernel-induced semimetrics.
    KdLaplace,
    /// Group-wise distance with Gaussian-kernel-induced semimetrics.
    KdGauss,
}

impl MetricChoice {
    /// Default group layout for data of width `dim`: unit groups for the
    /// group-wise metrics, one group for the whole-vector Euclidean metric.
    fn group_spec(&self, dim: usize) -> Result<GroupSpec, Error> {
        let auto = hdmetrics::Bandwidth::Auto;
        match self {
            MetricChoice::EuclidEnergy => {
                GroupSpec::single_group(dim, SemimetricKind::SquaredEuclidean, 0.5)
            }
            MetricChoice::KdEuclid => GroupSpec::unit_groups(dim, SemimetricKind::Euclidean),
            MetricChoice::KdLaplace => {
                GroupSpec::unit_groups(dim, SemimetricKind::LaplaceInduced { bandwidth: auto })
            }
            MetricChoice::KdGauss => {
                GroupSpec::unit_groups(dim, SemimetricKind::GaussianInduced { bandwidth: auto })
            }
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct Test2Args {
    /// First sample, one observation per row.
    #[arg(long, value_name = "CSV")]
    x: PathBuf,
    /// Second sample; must have the same column count.
    #[arg(long, value_name = "CSV")]
    y: PathBuf,
    /// Skip one header row in both files.
    #[arg(long)]
    header: bool,
    /// Metric used when no group file is given.
    #[arg(long, value_enum, default_value = "kd-euclid", conflicts_with = "groups")]
    metric: MetricChoice,
    /// Group spec JSON: {"sizes":[...], "metric":"...", "bandwidth":"auto"|number, "r":number}.
    #[arg(long, value_name = "JSON")]
    groups: Option<PathBuf>,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Also write the JSON result to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DepArgs {
    /// First side, one observation per row.
    #[arg(long, value_name = "CSV")]
    x: PathBuf,
    /// Second side, paired row-by-row with the first.
    #[arg(long, value_name = "CSV")]
    y: PathBuf,
    /// Skip one header row in both files.
    #[arg(long)]
    header: bool,
    /// Metric for both sides when no group files are given.
    #[arg(long, value_enum, default_value = "kd-euclid")]
    metric: MetricChoice,
    /// Group spec JSON for the first side.
    #[arg(long, value_name = "JSON", conflicts_with = "metric")]
    groups_x: Option<PathBuf>,
    /// Group spec JSON for the second side.
    #[arg(long, value_name = "JSON", conflicts_with = "metric")]
    groups_y: Option<PathBuf>,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Also write the JSON result to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario code FAMILY.VARIANT (H1.1-H3.2, D1.1-D3.3, R.1).
    #[arg(long, value_name = "CODE")]
    scenario: String,
    /// Rows of the first sample.
    #[arg(long)]
    n: usize,
    /// Rows of the second sample (two-sample scenarios only; defaults to n).
    #[arg(long)]
    m: Option<usize>,
    /// Number of groups (coordinates; pairs for the bivariate-group family).
    #[arg(long)]
    p: usize,
    /// Fraction of replaced coordinates in the mixed designs.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Autoregression parameter for the serial design.
    #[arg(long, default_value_t = 0.5)]
    phi: f64,
    /// Comma-separated test ids among I,II,III,IV,V,VI.
    #[arg(long, value_delimiter = ',', default_value = "I")]
    tests: Vec<String>,
    /// Comma-separated test levels.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    alphas: Vec<f64>,
    /// Number of replications.
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    /// Seed; replication r draws from stream r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Also write the table to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PowerArgs {
    /// First sample size.
    #[arg(long)]
    n: usize,
    /// Second sample size (defaults to n).
    #[arg(long)]
    m: Option<usize>,
    /// Limiting variance of the cross term.
    #[arg(long, default_value_t = 1.0)]
    sigma_sq: f64,
    /// Limiting variance of the first within term.
    #[arg(long, default_value_t = 1.0)]
    sigma_x_sq: f64,
    /// Limiting variance of the second within term.
    #[arg(long, default_value_t = 1.0)]
    sigma_y_sq: f64,
    /// Test level defining the rejection threshold t = q_{alpha,df}.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Evaluate at local alternatives delta = s/sqrt(nm) for s = 0..=s_max.
    #[arg(long, default_value_t = 10)]
    s_max: u64,
    /// Monte Carlo draws of the mixture variable per grid point.
    #[arg(long, default_value_t = 50_000)]
    reps: u64,
    /// Seed for the Monte Carlo draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Also write the curve to this file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // clap's own exit code for bad usage is 2, which this tool reserves for
    // statistical degeneracy; remap parse failures to 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_degeneracy() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Test2(args) => {
            let x = load_csv(&args.x, args.header)?;
            let y = load_csv(&args.y, args.header)?;
            let g = match &args.groups {
                Some(path) => GroupSpec::from_json_file(path)?,
                None => args.metric.group_spec(x.dim())?,
            };
            let result = homogeneity_test(&x, &y, &g, args.alpha)?;
            emit(result.to_json(), args.out.as_deref())
        }
        Command::Dep(args) => {
            let x = load_csv(&args.x, args.header)?;
            let y = load_csv(&args.y, args.header)?;
            let gx = match &args.groups_x {
                Some(path) => GroupSpec::from_json_file(path)?,
                None => args.metric.group_spec(x.dim())?,
            };
            let gy = match &args.groups_y {
                Some(path) => GroupSpec::from_json_file(path)?,
                None => args.metric.group_spec(y.dim())?,
            };
            let result = dependence_test(&x, &y, &gx, &gy, args.alpha)?;
            emit(result.to_json(), args.out.as_deref())
        }
        Command::Simulate(args) => {
            let (family, variant) = ScenarioId::parse_code(&args.scenario)?;
            let mut id =
                ScenarioId::new(family, variant, args.n, args.m.unwrap_or(args.n), args.p)?;
            id.beta = args.beta;
            id.phi = args.phi;
            id.validate()?;
            let tests: Vec<TestId> = args
                .tests
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_, _>>()?;
            let table = empirical_rejection(&id, &tests, args.reps, &args.alphas, args.seed)?;
            let rendered = match args.format {
                OutputFormat::Csv => table.to_csv(),
                OutputFormat::Json => table.to_json(),
            };
            emit(rendered, args.out.as_deref())
        }
        Command::Power(args) => {
            let n = args.n;
            let m = args.m.unwrap_or(n);
            if !(args.alpha > 0.0 && args.alpha < 1.0) {
                return Err(Error::Config(format!("alpha {} not in (0,1)", args.alpha)));
            }
            let pp = PowerParams::new(args.sigma_sq, args.sigma_x_sq, args.sigma_y_sq)?;
            if n < 4 || m < 4 {
                return Err(Error::SampleSize {
                    needed: 4,
                    got: n.min(m),
                });
            }
            let df = homogeneity_df(n, m) as f64;
            let t = t_quantile(1.0 - args.alpha, df)?;
            let alpha0 = m as f64 / n as f64;
            let mut rows = Vec::new();
            for s in 0..=args.s_max {
                let delta0 = s as f64;
                let delta = delta0 / ((n * m) as f64).sqrt();
                let phi_exact = exact_power_mc(&pp, delta, n, m, t, args.reps, args.seed)?;
                let phi_approx = approx_power(&pp, delta0, alpha0, t)?;
                rows.push((s, delta, 1.0 - phi_exact, 1.0 - phi_approx));
            }
            let rendered = match args.format {
                OutputFormat::Csv => {
                    let mut out = String::from("s,delta,power_exact,power_approx\n");
                    for (s, delta, pe, pa) in &rows {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            s,
                            fmt_float(*delta),
                            fmt_float(*pe),
                            fmt_float(*pa)
                        ));
                    }
                    out
                }
                OutputFormat::Json => {
                    let items: Vec<String> = rows
                        .iter()
                        .map(|(s, delta, pe, pa)| {
                            format!(
                                "{{\"delta\":{},\"power_approx\":{},\"power_exact\":{},\"s\":{}}}",
                                fmt_float(*delta),
                                fmt_float(*pa),
                                fmt_float(*pe),
                                s
                            )
                        })
                        .collect();
                    format!("[{}]", items.join(","))
                }
            };
            emit(rendered, args.out.as_deref())
        }
    }
}

fn emit(rendered: String, out: Option<&std::path::Path>) -> Result<(), Error> {
    if let Some(path) = out {
        std::fs::write(path, &rendered)?;
    }
    let trimmed = rendered.trim_end();
    println!("{trimmed}");
    Ok(())
}
