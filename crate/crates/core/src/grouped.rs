//! Data model for grouped high-dimensional observations: sample matrices,
//! group layouts with per-group semimetric configuration, and CSV ingestion.

use ndarray::Array2;
use serde::Deserialize;
use std::path::Path;

use crate::error::{Error, Result};

/// An `n x p̃` matrix of observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Array2<f64>,
}

impl SampleMatrix {
    /// Wraps a matrix after checking that every entry is finite.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Dimension(
                "sample matrix must have at least one row and one column".into(),
            ));
        }
        if let Some((idx, _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Ingestion {
                row: idx.0 + 1,
                col: idx.1 + 1,
                reason: "non-finite value".into(),
            });
        }
        Ok(Self { values })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Total coordinate count p̃.
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Row `k` as a contiguous slice.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.dim();
        &self.values.as_slice().expect("standard layout")[k * w..(k + 1) * w]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Stacks the rows of `self` on top of the rows of `other`.
    pub fn vstack(&self, other: &SampleMatrix) -> Result<SampleMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot pool samples with {} and {} columns",
                self.dim(),
                other.dim()
            )));
        }
        let stacked = ndarray::concatenate(
            ndarray::Axis(0),
            &[self.values.view(), other.values.view()],
        )
        .expect("conforming shapes");
        Ok(SampleMatrix { values: stacked })
    }
}

/// Bandwidth setting for kernel-induced semimetrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Resolve by the median heuristic on the relevant sample.
    Auto,
    /// Use this value as-is.
    Fixed(f64),
}

/// The per-group semimetric family.
///
/// `SquaredEuclidean` is the semimetric whose aggregate recovers the plain
/// Euclidean distance; the other three are metrics of strong negative type.
/// The induced kinds are the distances generated by the Laplace and Gaussian
/// kernels: `k(x,x) + k(y,y) - 2 k(x,y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemimetricKind {
    SquaredEuclidean,
    Euclidean,
    LaplaceInduced { bandwidth: Bandwidth },
    GaussianInduced { bandwidth: Bandwidth },
}

impl SemimetricKind {
    /// True for the kernel-induced kinds that carry a bandwidth.
    pub fn is_induced(&self) -> bool {
        matches!(
            self,
            SemimetricKind::LaplaceInduced { .. } | SemimetricKind::GaussianInduced { .. }
        )
    }

    pub fn bandwidth(&self) -> Option<Bandwidth> {
        match self {
            SemimetricKind::LaplaceInduced { bandwidth }
            | SemimetricKind::GaussianInduced { bandwidth } => Some(*bandwidth),
            _ => None,
        }
    }

    pub(crate) fn with_bandwidth(self, gamma: f64) -> SemimetricKind {
        match self {
            SemimetricKind::LaplaceInduced { .. } => SemimetricKind::LaplaceInduced {
                bandwidth: Bandwidth::Fixed(gamma),
            },
            SemimetricKind::GaussianInduced { .. } => SemimetricKind::GaussianInduced {
                bandwidth: Bandwidth::Fixed(gamma),
            },
            other => other,
        }
    }
}

/// Partition of the p̃ coordinates into contiguous groups, with the
/// semimetric applied to every group and the aggregation exponent.
///
/// One semimetric family applies to all groups of a spec; induced kinds get
/// their bandwidth resolved per group by the median heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    sizes: Vec<usize>,
    semimetric: SemimetricKind,
    exponent_r: f64,
}

impl GroupSpec {
    /// Builds a spec; `exponent_r` must lie in (0, 1].
    pub fn new(sizes: Vec<usize>, semimetric: SemimetricKind, exponent_r: f64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Config("group spec needs at least one group".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::Config("every group size must be at least 1".into()));
        }
        if !(exponent_r > 0.0 && exponent_r <= 1.0) {
            return Err(Error::Config(format!(
                "exponent r = {exponent_r} outside (0, 1]"
            )));
        }
        if let Some(Bandwidth::Fixed(g)) = semimetric.bandwidth() {
            if !(g > 0.0) {
                return Err(Error::Config(format!("bandwidth {g} must be positive")));
            }
        }
        Ok(Self {
            sizes,
            semimetric,
            exponent_r,
        })
    }

    /// Unit groups (every coordinate its own group), the default layout.
    pub fn unit_groups(dim: usize, semimetric: SemimetricKind) -> Result<Self> {
        Self::new(vec![1; dim], semimetric, 0.5)
    }

    /// A single group covering all coordinates.
    pub fn single_group(dim: usize, semimetric: SemimetricKind, exponent_r: f64) -> Result<Self> {
        Self::new(vec![dim], semimetric, exponent_r)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn semimetric(&self) -> SemimetricKind {
        self.semimetric
    }

    pub fn exponent_r(&self) -> f64 {
        self.exponent_r
    }

    /// Number of groups p.
    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    /// Total coordinate count p̃ = sum of group sizes.
    pub fn total_dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Checks that the groups cover exactly `dim` coordinates.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total_dim() != dim {
            return Err(Error::Dimension(format!(
                "group sizes cover {} coordinates but data has {}",
                self.total_dim(),
                dim
            )));
        }
        Ok(())
    }
}

/// Splits one observation into its per-group subvectors. Concatenating the
/// result reproduces the input.
pub fn split_observation<'a>(x: &'a [f64], g: &GroupSpec) -> Result<Vec<&'a [f64]>> {
    g.check_dim(x.len())?;
    let mut out = Vec::with_capacity(g.group_count());
    let mut offset = 0;
    for &d in g.sizes() {
        out.push(&x[offset..offset + d]);
        offset += d;
    }
    Ok(out)
}

/// Reads a rectangular numeric CSV file (comma-separated, UTF-8, optional
/// single header row) into a [`SampleMatrix`]. Errors name the offending
/// 1-based row and column.
pub fn load_csv<P: AsRef<Path>>(path: P, has_header: bool) -> Result<SampleMatrix> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_csv(&text, has_header)
}

fn parse_csv(text: &str, has_header: bool) -> Result<SampleMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line_idx, line) in text.lines().enumerate() {
        let row_no = line_idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            // A blank trailing line is tolerated; a blank line elsewhere is not.
            if text.lines().skip(line_idx + 1).any(|l| !l.trim().is_empty()) {
                return Err(Error::Ingestion {
                    row: row_no,
                    col: 1,
                    reason: "blank line inside data".into(),
                });
            }
            break;
        }
        if has_header && line_idx == 0 {
            continue;
        }
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::Ingestion {
                row: row_no,
                col: col_idx + 1,
                reason: format!("cannot parse {:?} as a number", cell.trim()),
            })?;
            if !value.is_finite() {
                return Err(Error::Ingestion {
                    row: row_no,
                    col: col_idx + 1,
                    reason: "non-finite value".into(),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Ingestion {
                    row: row_no,
                    col: row.len().min(w) + 1,
                    reason: format!("ragged row: expected {w} columns, found {}", row.len()),
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    let width = width.ok_or(Error::Ingestion {
        row: 1,
        col: 1,
        reason: "empty file".into(),
    })?;
    if rows.is_empty() {
        return Err(Error::Ingestion {
            row: 1,
            col: 1,
            reason: "no data rows".into(),
        });
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let n = flat.len() / width;
    SampleMatrix::new(Array2::from_shape_vec((n, width), flat).expect("rectangular"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BandwidthField {
    Auto(String),
    Value(f64),
}

#[derive(Deserialize)]
struct GroupSpecFile {
    sizes: Vec<usize>,
    metric: String,
    #[serde(default)]
    bandwidth: Option<BandwidthField>,
    #[serde(default)]
    r: Option<f64>,
}

impl GroupSpec {
    /// Parses the JSON group-spec document
    /// `{"sizes":[...], "metric":"...", "bandwidth":"auto"|number, "r":number}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: GroupSpecFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("group spec JSON: {e}")))?;
        let bandwidth = match file.bandwidth {
            None => Bandwidth::Auto,
            Some(BandwidthField::Auto(s)) if s.eq_ignore_ascii_case("auto") => Bandwidth::Auto,
            Some(BandwidthField::Auto(s)) => {
                return Err(Error::Config(format!("unknown bandwidth setting {s:?}")))
            }
            Some(BandwidthField::Value(v)) => Bandwidth::Fixed(v),
        };
        let semimetric = match file.metric.as_str() {
            "squared-euclidean" => SemimetricKind::SquaredEuclidean,
            "euclidean" => SemimetricKind::Euclidean,
            "laplace" => SemimetricKind::LaplaceInduced { bandwidth },
            "gaussian" => SemimetricKind::GaussianInduced { bandwidth },
            other => {
                return Err(Error::Config(format!(
                    "unknown metric {other:?}; expected squared-euclidean, euclidean, laplace or gaussian"
                )))
            }
        };
        GroupSpec::new(file.sizes, semimetric, file.r.unwrap_or(0.5))
    }

    /// Loads [`GroupSpec::from_json`] from a file.
    pub fn from_json_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_small_matrix() {
        let m = parse_csv("0,1\n1,0\n", false).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.dim(), 2);
        assert_eq!(m.row(0), &[0.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn header_is_skipped() {
        let m = parse_csv("a,b\n1,2\n3,4\n", true).unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.row(0), &[1.0, 2.0]);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let err = parse_csv("1,2\n3,4\nabc,6\n", false).unwrap_err();
        match err {
            Error::Ingestion { row, col, .. } => {
                assert_eq!(row, 3);
                assert_eq!(col, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        let err = parse_csv("1,2\n3\n", false).unwrap_err();
        match err {
            Error::Ingestion { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        assert!(parse_csv("", false).is_err());
        assert!(parse_csv("a,b\n", true).is_err());
    }

    #[test]
    fn crlf_and_trailing_newline_ok() {
        let m = parse_csv("1,2\r\n3,4\r\n\r\n", false).unwrap();
        assert_eq!(m.n(), 2);
    }

    #[test]
    fn split_matches_group_sizes() {
        let g = GroupSpec::new(vec![1, 2], SemimetricKind::Euclidean, 0.5).unwrap();
        let x = [1.0, 2.0, 3.0];
        let parts = split_observation(&x, &g).unwrap();
        assert_eq!(parts, vec![&x[0..1], &x[1..3]]);
    }

    #[test]
    fn split_single_group_is_identity() {
        let g = GroupSpec::new(vec![1], SemimetricKind::Euclidean, 0.5).unwrap();
        let x = [5.0];
        assert_eq!(split_observation(&x, &g).unwrap(), vec![&x[..]]);
    }

    #[test]
    fn split_rejects_length_mismatch() {
        let g = GroupSpec::new(vec![1, 2], SemimetricKind::Euclidean, 0.5).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            split_observation(&x, &g),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn exponent_range_enforced() {
        assert!(GroupSpec::new(vec![1], SemimetricKind::Euclidean, 0.0).is_err());
        assert!(GroupSpec::new(vec![1], SemimetricKind::Euclidean, 1.2).is_err());
        assert!(GroupSpec::new(vec![1], SemimetricKind::Euclidean, 1.0).is_ok());
    }

    #[test]
    fn group_spec_json_round_trips() {
        let g = GroupSpec::from_json(
            r#"{"sizes":[2,2], "metric":"laplace", "bandwidth":"auto", "r":0.5}"#,
        )
        .unwrap();
        assert_eq!(g.sizes(), &[2, 2]);
        assert!(g.semimetric().is_induced());

        let g = GroupSpec::from_json(r#"{"sizes":[3], "metric":"gaussian", "bandwidth":0.7}"#)
            .unwrap();
        assert_eq!(
            g.semimetric().bandwidth(),
            Some(Bandwidth::Fixed(0.7))
        );

        let g = GroupSpec::from_json(r#"{"sizes":[1,1], "metric":"euclidean"}"#).unwrap();
        assert_eq!(g.exponent_r(), 0.5);
        assert!(GroupSpec::from_json(r#"{"sizes":[1], "metric":"nope"}"#).is_err());
    }

    #[test]
    fn sample_matrix_rejects_non_finite() {
        let arr = ndarray::array![[1.0, f64::NAN]];
        assert!(SampleMatrix::new(arr).is_err());
    }
}
