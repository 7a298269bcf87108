//! Domain types shared by every stage: boxes, masks, object records and the
//! per-slide region set.
//!
//! Boxes are half-open (`min` inclusive, `max` exclusive) in integer slide
//! pixels. Masks are local to their box, row-major.

use std::fmt;

use crate::error::{Error, Result};

/// Half-open axis-aligned box in slide pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundingBox {
    pub min_x: i64,
    pub min_y: i64,
    pub max_x: i64,
    pub max_y: i64,
}

impl BoundingBox {
    pub fn new(min_x: i64, min_y: i64, max_x: i64, max_y: i64) -> Result<Self> {
        if max_x <= min_x || max_y <= min_y {
            return Err(Error::InvalidRegion(format!(
                "box ({min_x},{min_y},{max_x},{max_y}) has no extent"
            )));
        }
        Ok(BoundingBox {
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn from_origin(x: i64, y: i64, width: usize, height: usize) -> Result<Self> {
        Self::new(x, y, x + width as i64, y + height as i64)
    }

    pub fn width(&self) -> usize {
        (self.max_x - self.min_x) as usize
    }

    pub fn height(&self) -> usize {
        (self.max_y - self.min_y) as usize
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    /// True iff the two boxes share at least one pixel.
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min_x < other.max_x && other.min_x < self.max_x && self.min_y < other.max_y && other.min_y < self.max_y
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn contains(&self, other: &BoundingBox) -> bool {
        self.min_x <= other.min_x && self.min_y <= other.min_y && other.max_x <= self.max_x && other.max_y <= self.max_y
    }

    pub fn contains_pixel(&self, x: i64, y: i64) -> bool {
        self.min_x <= x && x < self.max_x && self.min_y <= y && y < self.max_y
    }

    /// Width and height as `(w, h)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.min_x, self.min_y, self.max_x, self.max_y)
    }
}

/// Binary occupancy grid local to an object's bounding box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ObjectMask {
    /// Builds a mask; rejects wrong lengths and masks with no set pixel.
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::Shape(format!(
                "mask of {} bits does not match {width}x{height}",
                bits.len()
            )));
        }
        if !bits.iter().any(|&b| b) {
            return Err(Error::InvalidRegion("mask has no set pixel".into()));
        }
        Ok(ObjectMask { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Number of set pixels.
    pub fn area(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Set pixel coordinates in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }
}

/// One annotated object on a slide.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRecord {
    pub object_id: u64,
    pub class_label: String,
    pub bbox: BoundingBox,
    pub mask: ObjectMask,
}

impl ObjectRecord {
    pub fn new(object_id: u64, class_label: impl Into<String>, bbox: BoundingBox, mask: ObjectMask) -> Result<Self> {
        if mask.width() != bbox.width() || mask.height() != bbox.height() {
            return Err(Error::Shape(format!(
                "object {object_id}: mask {}x{} does not match box {bbox}",
                mask.width(),
                mask.height()
            )));
        }
        Ok(ObjectRecord {
            object_id,
            class_label: class_label.into(),
            bbox,
            mask,
        })
    }
}

/// All objects of one slide, sorted by `object_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub slide_width: u32,
    pub slide_height: u32,
    pub source_id: String,
    objects: Vec<ObjectRecord>,
}

impl RegionSet {
    pub fn new(
        slide_width: u32,
        slide_height: u32,
        mut objects: Vec<ObjectRecord>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        objects.sort_by_key(|o| o.object_id);
        for pair in objects.windows(2) {
            if pair[0].object_id == pair[1].object_id {
                return Err(Error::InvalidRegion(format!(
                    "duplicate object id {}",
                    pair[0].object_id
                )));
            }
        }
        let slide = BoundingBox {
            min_x: 0,
            min_y: 0,
            max_x: slide_width as i64,
            max_y: slide_height as i64,
        };
        if let Some(o) = objects.iter().find(|o| !slide.contains(&o.bbox)) {
            return Err(Error::InvalidRegion(format!(
                "object {} box {} lies outside the {slide_width}x{slide_height} slide",
                o.object_id, o.bbox
            )));
        }
        Ok(RegionSet {
            slide_width,
            slide_height,
            source_id: source_id.into(),
            objects,
        })
    }

    pub fn objects(&self) -> &[ObjectRecord] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, object_id: u64) -> Option<&ObjectRecord> {
        self.objects
            .binary_search_by_key(&object_id, |o| o.object_id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.objects.iter().map(|o| o.object_id)
    }
}

/// Grayscale crop of one object's bounding box, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPatch {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl IntensityPatch {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Shape(format!(
                "patch of {} values does not match {width}x{height}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidRegion(format!("intensity {v} outside [0, 1]")));
        }
        Ok(IntensityPatch { width, height, values })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width + x]
    }
}
