//! Integer label masks and binary-mask component labelling.

use std::collections::{BTreeMap, VecDeque};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use tiff::decoder::{Decoder, DecodingResult};

use crate::error::{Error, Result};
use crate::region::{BoundingBox, ObjectMask, ObjectRecord, RegionSet};

/// Single-channel integer raster; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

impl LabelRaster {
    pub fn new(width: u32, height: u32, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width as usize * height as usize {
            return Err(Error::Shape(format!(
                "{} labels for a {width}x{height} raster",
                labels.len()
            )));
        }
        Ok(LabelRaster { width, height, labels })
    }

    /// Paints every object's mask back at its box.
    pub fn from_regions(regions: &RegionSet) -> LabelRaster {
        let (w, h) = (regions.slide_width, regions.slide_height);
        let mut labels = vec![0u32; w as usize * h as usize];
        for o in regions.objects() {
            for (x, y) in o.mask.set_pixels() {
                let sx = o.bbox.min_x as usize + x;
                let sy = o.bbox.min_y as usize + y;
                labels[sy * w as usize + sx] = o.object_id as u32;
            }
        }
        LabelRaster {
            width: w,
            height: h,
            labels,
        }
    }
}

/// Reads an 8/16/32-bit single-channel PNG or TIFF label image.
pub fn read_label_raster(path: &Path) -> Result<LabelRaster> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("tif") | Some("tiff") => {
            let mut dec = Decoder::new(BufReader::new(File::open(path)?))?;
            let (w, h) = dec.dimensions()?;
            match dec.colortype()? {
                tiff::ColorType::Gray(_) => {}
                other => {
                    return Err(Error::UnsupportedImage(format!(
                        "label mask must be single-channel, found {other:?}"
                    )))
                }
            }
            let labels: Vec<u32> = match dec.read_image()? {
                DecodingResult::U8(v) => v.into_iter().map(u32::from).collect(),
                DecodingResult::U16(v) => v.into_iter().map(u32::from).collect(),
                DecodingResult::U32(v) => v,
                _ => return Err(Error::UnsupportedImage("label mask must hold unsigned integers".into())),
            };
            LabelRaster::new(w, h, labels)
        }
        _ => {
            let img = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
            let (w, h) = (img.width(), img.height());
            let labels = match img {
                image::DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(u32::from).collect(),
                image::DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(u32::from).collect(),
                other => {
                    return Err(Error::UnsupportedImage(format!(
                        "label mask must be single-channel gray, found {:?}",
                        other.color()
                    )))
                }
            };
            LabelRaster::new(w, h, labels)
        }
    }
}

/// Reads a sidecar `{label: class_label}` JSON map.
pub fn read_class_map(path: &Path) -> Result<BTreeMap<u32, String>> {
    let text = std::fs::read_to_string(path)?;
    let raw: BTreeMap<String, String> = serde_json::from_str(&text)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<u32>()
                .map(|k| (k, v))
                .map_err(|_| Error::Parse(format!("class map key {k:?} is not a label")))
        })
        .collect()
}

/// One object per distinct nonzero label; label identity, not connectivity,
/// defines an object.
pub fn load_label_mask(
    raster: &LabelRaster,
    class_map: Option<&BTreeMap<u32, String>>,
    source_id: &str,
) -> Result<RegionSet> {
    let w = raster.width as usize;
    let mut extents: BTreeMap<u32, [usize; 4]> = BTreeMap::new();
    for (i, &label) in raster.labels.iter().enumerate() {
        if label == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        extents
            .entry(label)
            .and_modify(|e| {
                e[0] = e[0].min(x);
                e[1] = e[1].min(y);
                e[2] = e[2].max(x + 1);
                e[3] = e[3].max(y + 1);
            })
            .or_insert([x, y, x + 1, y + 1]);
    }
    if extents.is_empty() {
        return Err(Error::EmptyRegionSet);
    }

    let mut objects = Vec::with_capacity(extents.len());
    for (&label, e) in &extents {
        let bbox = BoundingBox::new(e[0] as i64, e[1] as i64, e[2] as i64, e[3] as i64)?;
        let mask = ObjectMask::from_fn(bbox.width(), bbox.height(), |x, y| {
            raster.labels[(e[1] + y) * w + e[0] + x] == label
        })?;
        let class = class_map
            .and_then(|m| m.get(&label).cloned())
            .unwrap_or_else(|| "unlabeled".to_string());
        objects.push(ObjectRecord::new(label as u64, class, bbox, mask)?);
    }
    RegionSet::new(raster.width, raster.height, objects, source_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Labels connected foreground components of a binary raster, numbered
/// 1..K in raster-scan order of each component's first pixel.
pub fn connected_components(width: u32, height: u32, bits: &[bool], connectivity: Connectivity) -> Result<RegionSet> {
    let (w, h) = (width as usize, height as usize);
    if bits.len() != w * h {
        return Err(Error::Shape(format!(
            "{} bits for a {width}x{height} raster",
            bits.len()
        )));
    }
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if bits[j] && labels[j] == 0 {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
    }
    load_label_mask(&LabelRaster::new(width, height, labels)?, None, "components")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_labels_two_objects() {
        // label 1: 2x2 blob, label 2: 3x3 blob
        let mut labels = vec![0u32; 10 * 10];
        for y in 0..2 {
            for x in 0..2 {
                labels[y * 10 + x] = 1;
            }
        }
        for y in 5..8 {
            for x in 5..8 {
                labels[y * 10 + x] = 2;
            }
        }
        let raster = LabelRaster::new(10, 10, labels).unwrap();
        let mut classes = BTreeMap::new();
        classes.insert(2, "artery".to_string());
        let set = load_label_mask(&raster, Some(&classes), "t").unwrap();
        let areas: Vec<_> = set.objects().iter().map(|o| o.mask.area()).collect();
        assert_eq!(areas, [4, 9]);
        assert_eq!(set.objects()[0].class_label, "unlabeled");
        assert_eq!(set.objects()[1].class_label, "artery");
    }

    #[test]
    fn all_zero_is_empty() {
        let raster = LabelRaster::new(4, 4, vec![0; 16]).unwrap();
        assert!(matches!(
            load_label_mask(&raster, None, "t"),
            Err(Error::EmptyRegionSet)
        ));
    }

    #[test]
    fn split_label_stays_one_object() {
        let mut labels = vec![0u32; 8 * 3];
        labels[0] = 3;
        labels[7] = 3;
        let set = load_label_mask(&LabelRaster::new(8, 3, labels).unwrap(), None, "t").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.objects()[0].mask.area(), 2);
        assert_eq!(set.objects()[0].bbox.width(), 8);
    }

    #[test]
    fn repaint_reconstructs_raster() {
        let labels: Vec<u32> = (0..64).map(|i| [0, 0, 4, 9, 9, 2][(i * 7 + i / 5) % 6]).collect();
        let raster = LabelRaster::new(8, 8, labels).unwrap();
        let set = load_label_mask(&raster, None, "t").unwrap();
        assert_eq!(LabelRaster::from_regions(&set), raster);
    }

    #[test]
    fn diagonal_blobs_depend_on_connectivity() {
        #[rustfmt::skip]
        let bits = [
            true,  true,  false, false,
            true,  true,  false, false,
            false, false, true,  true,
            false, false, true,  true,
        ];
        assert_eq!(connected_components(4, 4, &bits, Connectivity::Four).unwrap().len(), 2);
        assert_eq!(connected_components(4, 4, &bits, Connectivity::Eight).unwrap().len(), 1);
    }

    /// Independent recursive flood fill used to count components.
    fn flood_count(w: usize, h: usize, bits: &[bool], diag: bool) -> usize {
        fn fill(w: usize, h: usize, bits: &[bool], seen: &mut [bool], x: i64, y: i64, diag: bool) {
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                return;
            }
            let i = y as usize * w + x as usize;
            if !bits[i] || seen[i] {
                return;
            }
            seen[i] = true;
            for dy in -1..=1i64 {
                for dx in -1..=1i64 {
                    if (dx == 0 && dy == 0) || (!diag && dx != 0 && dy != 0) {
                        continue;
                    }
                    fill(w, h, bits, seen, x + dx, y + dy, diag);
                }
            }
        }
        let mut seen = vec![false; w * h];
        let mut n = 0;
        for i in 0..w * h {
            if bits[i] && !seen[i] {
                n += 1;
                fill(w, h, bits, &mut seen, (i % w) as i64, (i / w) as i64, diag);
            }
        }
        n
    }

    #[test]
    fn checkerboard_four_connected() {
        let bits: Vec<bool> = (0..16).map(|i| (i % 4 + i / 4) % 2 == 0).collect();
        let expected = flood_count(4, 4, &bits, false);
        assert_eq!(expected, 8);
        let set = connected_components(4, 4, &bits, Connectivity::Four).unwrap();
        assert_eq!(set.len(), expected);
        assert!(set.objects().iter().all(|o| o.mask.area() == 1));
    }

    #[test]
    fn numbering_follows_scan_order() {
        let mut bits = vec![false; 5 * 5];
        bits[4] = true; // (4,0)
        bits[10] = true; // (0,2)
        let set = connected_components(5, 5, &bits, Connectivity::Eight).unwrap();
        assert_eq!(set.get(1).unwrap().bbox.min_x, 4);
        assert_eq!(set.get(2).unwrap().bbox.min_y, 2);
        assert!(matches!(
            connected_components(2, 2, &[false; 4], Connectivity::Four),
            Err(Error::EmptyRegionSet)
        ));
    }
}
