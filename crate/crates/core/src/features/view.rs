use crate::error::{Error, Result};
use crate::region::{BoundingBox, IntensityPatch, ObjectMask};

/// Borrowed window onto one object's mask and intensities.
///
/// Slab slots and standalone crops are both exposed through this type, so a
/// kernel visits exactly the same pixel sequence whichever storage it runs
/// over; only the row stride differs.
#[derive(Debug, Clone, Copy)]
pub struct ObjectView<'a> {
    pub width: usize,
    pub height: usize,
    stride: usize,
    mask: &'a [bool],
    values: &'a [f32],
    /// Slide coordinates of local pixel (0, 0).
    pub origin: (i64, i64),
}

impl<'a> ObjectView<'a> {
    pub(crate) fn strided(
        width: usize,
        height: usize,
        stride: usize,
        mask: &'a [bool],
        values: &'a [f32],
        origin: (i64, i64),
    ) -> Self {
        debug_assert!(width <= stride);
        debug_assert!(mask.len() >= (height - 1) * stride + width);
        debug_assert!(values.len() >= (height - 1) * stride + width);
        ObjectView {
            width,
            height,
            stride,
            mask,
            values,
            origin,
        }
    }

    /// View over an unpadded object crop.
    pub fn new(patch: &'a IntensityPatch, mask: &'a ObjectMask, bbox: &BoundingBox) -> Result<Self> {
        if (patch.width(), patch.height()) != (mask.width(), mask.height())
            || (mask.width(), mask.height()) != bbox.dims()
        {
            return Err(Error::Shape(format!(
                "patch {}x{}, mask {}x{}, box {}",
                patch.width(),
                patch.height(),
                mask.width(),
                mask.height(),
                bbox
            )));
        }
        Ok(Self::strided(
            mask.width(),
            mask.height(),
            mask.width(),
            mask.bits(),
            patch.values(),
            (bbox.min_x, bbox.min_y),
        ))
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.stride + x]
    }

    /// Mask lookup that treats everything outside the box as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.stride + x] as f64
    }

    #[inline]
    pub fn mask_row(&self, y: usize) -> &'a [bool] {
        &self.mask[y * self.stride..y * self.stride + self.width]
    }

    #[inline]
    pub fn value_row(&self, y: usize) -> &'a [f32] {
        &self.values[y * self.stride..y * self.stride + self.width]
    }

    /// Set pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |y| {
            self.mask_row(y)
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(x, _)| (x, y))
        })
    }
}
