//! Intensity family: 17 statistics of the masked intensities.

use super::moments::PowerSums;
use super::view::ObjectView;
use super::{median_sorted, quantile_sorted};

pub const INTENSITY_NAMES: [&str; 17] = [
    "IntegratedIntensity",
    "MeanIntensity",
    "StdIntensity",
    "MinIntensity",
    "MaxIntensity",
    "MedianIntensity",
    "MADIntensity",
    "LowerQuartileIntensity",
    "UpperQuartileIntensity",
    "MassDisplacement",
    "IntegratedEdgeIntensity",
    "MeanEdgeIntensity",
    "StdEdgeIntensity",
    "MinEdgeIntensity",
    "MaxEdgeIntensity",
    "CMX",
    "CMY",
];

/// True for set pixels with a 4-neighbor outside the mask.
pub fn is_edge(view: &ObjectView, x: usize, y: usize) -> bool {
    let (x, y) = (x as i64, y as i64);
    !(view.get_signed(x - 1, y) && view.get_signed(x + 1, y) && view.get_signed(x, y - 1) && view.get_signed(x, y + 1))
}

/// Sum, mean, population std, min and max; std is exactly 0 for constant
/// input.
fn moments(values: &[f64]) -> [f64; 5] {
    let n = values.len() as f64;
    let sum: f64 = values.iter().sum();
    let mean = sum / n;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ss = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        ss += (v - mean) * (v - mean);
    }
    let std = if lo == hi { 0.0 } else { (ss / n).sqrt() };
    [sum, mean, std, lo, hi]
}

pub fn intensity_into(view: &ObjectView, sums: &PowerSums, out: &mut Vec<f64>) {
    let n = sums.n as usize;
    let mut values = Vec::with_capacity(n);
    let mut edge = Vec::new();
    let (mut wx, mut wy) = (0.0, 0.0);
    for y in 0..view.height {
        let (mrow, vrow) = (view.mask_row(y), view.value_row(y));
        for x in 0..view.width {
            if mrow[x] {
                let v = vrow[x] as f64;
                values.push(v);
                wx += v * x as f64;
                wy += v * y as f64;
                if is_edge(view, x, y) {
                    edge.push(v);
                }
            }
        }
    }
    let [sum, mean, std, lo, hi] = moments(&values);
    let edge_stats = moments(&edge);

    let (bx, by) = sums.centroid();
    let (cx, cy) = if sum > 0.0 && lo != hi {
        (wx / sum, wy / sum)
    } else {
        (bx, by)
    };
    let displacement = ((cx - bx).powi(2) + (cy - by).powi(2)).sqrt();

    values.sort_by(f64::total_cmp);
    let median = median_sorted(&values);
    let mut dev: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    dev.sort_by(f64::total_cmp);

    out.extend_from_slice(&[
        sum,
        mean,
        std,
        lo,
        hi,
        median,
        median_sorted(&dev),
        quantile_sorted(&values, 0.25),
        quantile_sorted(&values, 0.75),
        displacement,
    ]);
    out.extend_from_slice(&edge_stats);
    out.push(view.origin.0 as f64 + cx);
    out.push(view.origin.1 as f64 + cy);
}
