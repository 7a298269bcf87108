//! Histogram comparison of feature columns between two tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::FeatureTable;

pub const DEFAULT_FEATURES: [&str; 4] = [
    "SizeShape_MaxFeretDiameter",
    "SizeShape_Eccentricity",
    "SizeShape_Hu1",
    "Intensity_MeanIntensity",
];
pub const DEFAULT_BINS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureComparison {
    pub feature: String,
    /// Shared `[low, high]` range of both histograms.
    pub range: [f64; 2],
    /// Relative frequencies, summing to 1 unless the column has no finite value.
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub l1_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub bins: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub features: Vec<FeatureComparison>,
}

/// Equal-width histogram over `[lo, hi]`; the top edge belongs to the last
/// bin and non-finite values are left out.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0u64; bins];
    let mut n = 0u64;
    for &v in values.iter().filter(|v| v.is_finite()) {
        let b = if hi > lo {
            (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1)
        } else {
            0
        };
        counts[b] += 1;
        n += 1;
    }
    counts
        .into_iter()
        .map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect()
}

pub fn compare_feature(
    left: &FeatureTable,
    right: &FeatureTable,
    name: &str,
    bins: usize,
) -> Result<FeatureComparison> {
    let (a, b) = (left.column(name)?, right.column(name)?);
    let finite = || a.iter().chain(&b).copied().filter(|v| v.is_finite());
    let lo = finite().fold(f64::INFINITY, f64::min);
    let hi = finite().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let (ha, hb) = (histogram(&a, lo, hi, bins), histogram(&b, lo, hi, bins));
    let l1_distance = ha.iter().zip(&hb).map(|(x, y)| (x - y).abs()).sum();
    Ok(FeatureComparison {
        feature: name.to_string(),
        range: [lo, hi],
        left: ha,
        right: hb,
        l1_distance,
    })
}

/// Compares the named columns; a column missing from either table is a
/// [`Error::Table`] error.
pub fn compare_tables(
    left: &FeatureTable,
    right: &FeatureTable,
    features: &[String],
    bins: usize,
    tolerance: f64,
) -> Result<CompareReport> {
    if bins == 0 {
        return Err(Error::Table("histograms need at least one bin".into()));
    }
    let features = features
        .iter()
        .map(|f| compare_feature(left, right, f, bins))
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        bins,
        tolerance,
        passed: features.iter().all(|f| f.l1_distance <= tolerance),
        features,
    })
}
