//! The four feature families and the per-object entry point that
//! concatenates them in manifest order.

pub mod distribution;
pub mod edt;
pub mod hull;
pub mod intensity;
pub mod moments;
pub mod shape;
pub mod texture;
mod view;

pub use view::ObjectView;

use crate::error::Result;
use crate::region::{BoundingBox, IntensityPatch, ObjectMask};
use moments::PowerSums;

/// Relative threshold below which nearly cancelling quantities (ellipse
/// cross terms, texture variances, information-measure gaps) count as zero.
pub const SNAP: f64 = 1e-12;

pub const FEATURE_COUNT: usize = 247;

/// Median of ascending data (mean of the two middle values for even sizes).
pub fn median_sorted(v: &[f64]) -> f64 {
    quantile_sorted(v, 0.5)
}

/// Linear interpolation between closest ranks on ascending data.
pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// All 247 features of one object, in manifest order.
pub fn object_features(view: &ObjectView) -> Vec<f64> {
    let sums = PowerSums::of(view);
    let sq_edt = edt::squared_edt(view);
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    shape::shape_into(view, &sums, &sq_edt, &mut out);
    texture::texture_into(view, &mut out);
    intensity::intensity_into(view, &sums, &mut out);
    distribution::radial_into(view, &sums, &sq_edt, &mut out);
    distribution::zernike_into(view, &sums, &mut out);
    debug_assert_eq!(out.len(), FEATURE_COUNT);
    out
}

/// Size and shape family for an unpadded object.
pub fn shape_features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    let view = ObjectView::new(patch, mask, bbox)?;
    let sums = PowerSums::of(&view);
    let mut out = Vec::with_capacity(30);
    shape::shape_into(&view, &sums, &edt::squared_edt(&view), &mut out);
    Ok(out)
}

pub fn texture_features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    let view = ObjectView::new(patch, mask, bbox)?;
    let mut out = Vec::with_capacity(104);
    texture::texture_into(&view, &mut out);
    Ok(out)
}

pub fn intensity_features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    let view = ObjectView::new(patch, mask, bbox)?;
    let mut out = Vec::with_capacity(17);
    intensity::intensity_into(&view, &PowerSums::of(&view), &mut out);
    Ok(out)
}

pub fn distribution_features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    let view = ObjectView::new(patch, mask, bbox)?;
    let sums = PowerSums::of(&view);
    let mut out = Vec::with_capacity(96);
    distribution::radial_into(&view, &sums, &edt::squared_edt(&view), &mut out);
    distribution::zernike_into(&view, &sums, &mut out);
    Ok(out)
}

/// All 247 features for an unpadded object.
pub fn features(patch: &IntensityPatch, mask: &ObjectMask, bbox: &BoundingBox) -> Result<Vec<f64>> {
    Ok(object_features(&ObjectView::new(patch, mask, bbox)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median_sorted(&v), 2.5);
        assert_eq!(quantile_sorted(&v, 0.25), 1.75);
        assert_eq!(quantile_sorted(&v, 0.75), 3.25);
        assert_eq!(median_sorted(&[5.0]), 5.0);
    }

    #[test]
    fn full_vector_length() {
        let bbox = BoundingBox::new(2, 3, 6, 6).unwrap();
        let mask = ObjectMask::from_fn(4, 3, |x, y| x + y != 0).unwrap();
        let patch = IntensityPatch::from_fn(4, 3, |x, y| (x * 3 + y) as f32 / 12.0).unwrap();
        let f = features(&patch, &mask, &bbox).unwrap();
        assert_eq!(f.len(), FEATURE_COUNT);
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let bbox = BoundingBox::new(0, 0, 4, 3).unwrap();
        let mask = ObjectMask::from_fn(4, 3, |_, _| true).unwrap();
        let patch = IntensityPatch::from_fn(3, 3, |_, _| 0.5).unwrap();
        assert!(matches!(features(&patch, &mask, &bbox), Err(crate::Error::Shape(_))));
    }
}
