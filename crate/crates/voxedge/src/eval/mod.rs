//! Reconstruction quality metrics: bidirectional Chamfer means and
//! distance-thresholded completeness, with the standard subsampling protocol.

mod kdtree;

pub use kdtree::KdTree;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::PointCloud;

/// Coverage of the reference cloud at one distance threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessEntry {
    pub threshold_mm: f64,
    pub covered_count: usize,
    pub covered_percent: f64,
}

/// Full evaluation of a reconstruction against a reference cloud.
///
/// Distances are millimeters. `data_point_count` is the size of the original
/// reconstruction; when it exceeds `subsample_cap`, both metric directions
/// ran against the seeded subsample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub data_to_reference_mean: f64,
    pub reference_to_data_mean: f64,
    pub completeness: Vec<CompletenessEntry>,
    pub data_point_count: usize,
    pub reference_point_count: usize,
    pub subsample_cap: usize,
    pub seed: u64,
}

/// Exact nearest-neighbor distance in `to` for every point of `from`.
///
/// Backed by a kd-tree; queries run in parallel but land at their input index,
/// so the result is independent of worker count.
pub fn nn_distances(from: &PointCloud, to: &PointCloud) -> Result<Vec<f64>> {
    if to.is_empty() {
        return Err(Error::Eval("nearest-neighbor target cloud is empty".into()));
    }
    let tree = KdTree::build(to.points());
    Ok(from
        .points()
        .par_iter()
        .map(|p| tree.nearest_distance(*p))
        .collect())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Bidirectional Chamfer means: `(mean nn(data -> reference), mean
/// nn(reference -> data))`.
pub fn chamfer(data: &PointCloud, reference: &PointCloud) -> Result<(f64, f64)> {
    if data.is_empty() || reference.is_empty() {
        return Err(Error::Eval(
            "chamfer distance needs two non-empty clouds".into(),
        ));
    }
    let d2r = nn_distances(data, reference)?;
    let r2d = nn_distances(reference, data)?;
    Ok((mean(&d2r), mean(&r2d)))
}

/// Fraction of reference points lying within each threshold of the data.
///
/// An empty data cloud covers nothing and reports zero counts. Thresholds are
/// reported in ascending order.
pub fn completeness(
    data: &PointCloud,
    reference: &PointCloud,
    thresholds: &[f64],
) -> Result<Vec<CompletenessEntry>> {
    if reference.is_empty() {
        return Err(Error::Eval("completeness needs a reference cloud".into()));
    }
    if thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "completeness thresholds must be finite and > 0, got {thresholds:?}"
        )));
    }
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);

    let n = reference.len();
    if data.is_empty() {
        return Ok(sorted
            .into_iter()
            .map(|t| CompletenessEntry {
                threshold_mm: t,
                covered_count: 0,
                covered_percent: 0.0,
            })
            .collect());
    }
    let dists = nn_distances(reference, data)?;
    Ok(sorted
        .into_iter()
        .map(|t| {
            let covered_count = dists.iter().filter(|&&d| d <= t).count();
            CompletenessEntry {
                threshold_mm: t,
                covered_count,
                covered_percent: 100.0 * covered_count as f64 / n as f64,
            }
        })
        .collect())
}

/// Cap a cloud at `cap` points via a seeded uniform random permutation.
///
/// Clouds at or under the cap pass through unchanged; larger clouds keep the
/// first `cap` entries of a Fisher-Yates permutation of their points (colors
/// follow their points).
pub fn subsample(cloud: &PointCloud, cap: usize, seed: u64) -> Result<PointCloud> {
    if cap == 0 {
        return Err(Error::InvalidParameter("subsample cap must be > 0".into()));
    }
    if cloud.len() <= cap {
        return Ok(cloud.clone());
    }
    let n = cloud.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: only the first `cap` slots need settling.
    for i in 0..cap {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    let points = order[..cap].iter().map(|&i| cloud.points()[i]).collect();
    let colors = cloud
        .colors()
        .map(|c| order[..cap].iter().map(|&i| c[i]).collect());
    PointCloud::new(points, colors)
}

/// Run the full evaluation protocol.
///
/// The data cloud is subsampled once (cap, seed) and that subsample feeds
/// both Chamfer directions and the completeness counts, so every reported
/// number describes the same pair of clouds.
pub fn evaluate(
    data: &PointCloud,
    reference: &PointCloud,
    thresholds: &[f64],
    cap: usize,
    seed: u64,
) -> Result<EvalReport> {
    if data.is_empty() || reference.is_empty() {
        return Err(Error::Eval("evaluation needs two non-empty clouds".into()));
    }
    let sampled = subsample(data, cap, seed)?;
    let d2r = nn_distances(&sampled, reference)?;
    let r2d = nn_distances(reference, &sampled)?;
    let mut sorted = thresholds.to_vec();
    if sorted.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "completeness thresholds must be finite and > 0, got {thresholds:?}"
        )));
    }
    sorted.sort_by(f64::total_cmp);
    let completeness = sorted
        .into_iter()
        .map(|t| {
            let covered_count = r2d.iter().filter(|&&d| d <= t).count();
            CompletenessEntry {
                threshold_mm: t,
                covered_count,
                covered_percent: 100.0 * covered_count as f64 / reference.len() as f64,
            }
        })
        .collect();
    Ok(EvalReport {
        data_to_reference_mean: mean(&d2r),
        reference_to_data_mean: mean(&r2d),
        completeness,
        data_point_count: data.len(),
        reference_point_count: reference.len(),
        subsample_cap: cap,
        seed,
    })
}
