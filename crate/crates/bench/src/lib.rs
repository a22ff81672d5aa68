//! Shared fixtures for the benchmark targets.

use hdmetrics::grouped::{GroupSpec, SampleMatrix, SemimetricKind};
use hdmetrics::metrics::{resolve_bandwidths, ResolvedMetric};
use hdmetrics::Rng;
use ndarray::Array2;

/// Standard-normal sample with a fixed seed.
pub fn normal_sample(n: usize, p: usize, seed: u64) -> SampleMatrix {
    let mut rng = Rng::new(seed);
    SampleMatrix::new(Array2::from_shape_fn((n, p), |_| rng.standard_normal())).unwrap()
}

/// Unit-group metric of the given kind, resolved against `sample`.
pub fn unit_metric(kind: SemimetricKind, sample: &SampleMatrix) -> ResolvedMetric {
    let g = GroupSpec::unit_groups(sample.dim(), kind).unwrap();
    resolve_bandwidths(&g, sample).unwrap()
}
