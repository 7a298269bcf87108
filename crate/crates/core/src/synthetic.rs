//! Seeded synthetic slides with matching GeoJSON, label mask and class map.
//!
//! Objects are placed one per grid cell so boxes never touch. Each shape is
//! emitted as a polygon and rasterized by the ingestion rasterizer, so the
//! painted slide, the label mask and the annotations agree pixel for pixel.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ingest::{
    parse_geojson, rasterize_rings, regions_from_annotations, write_tiled_tiff_gray8, AnnotationSet, LabelRaster,
    RasterSlide,
};
use crate::region::{BoundingBox, ObjectMask, RegionSet};

/// Gray level of the slide outside every object.
pub const BACKGROUND: u8 = 16;
const POLYGON_SIDES: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    Ellipse,
    Rectangle,
    Blob,
    Ring,
    Line,
    Dot,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 6] = [
        ShapeKind::Ellipse,
        ShapeKind::Rectangle,
        ShapeKind::Blob,
        ShapeKind::Ring,
        ShapeKind::Line,
        ShapeKind::Dot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Blob => "blob",
            ShapeKind::Ring => "ring",
            ShapeKind::Line => "line",
            ShapeKind::Dot => "dot",
        }
    }

    /// Relative frequency in the default mix.
    fn weight(self) -> u32 {
        match self {
            ShapeKind::Ellipse | ShapeKind::Blob => 3,
            ShapeKind::Rectangle | ShapeKind::Ring => 2,
            ShapeKind::Line | ShapeKind::Dot => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntensityModel {
    Constant,
    Ramp,
    Gaussian,
    Noise,
}

impl IntensityModel {
    pub const ALL: [IntensityModel; 4] = [
        IntensityModel::Constant,
        IntensityModel::Ramp,
        IntensityModel::Gaussian,
        IntensityModel::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntensityModel::Constant => "constant",
            IntensityModel::Ramp => "ramp",
            IntensityModel::Gaussian => "gaussian",
            IntensityModel::Noise => "noise",
        }
    }
}

fn by_name<T: Copy>(all: &[T], name: &str, label: fn(T) -> &'static str, what: &str) -> Result<T> {
    all.iter()
        .copied()
        .find(|&t| label(t) == name)
        .ok_or_else(|| Error::Parse(format!("unknown {what} {name:?}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub objects: usize,
    /// Inclusive range of box edge lengths in pixels.
    pub size_range: (u32, u32),
    pub slide_size: (u32, u32),
    pub shapes: Vec<ShapeKind>,
    pub intensities: Vec<IntensityModel>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 1,
            objects: 100,
            size_range: (8, 32),
            slide_size: (2048, 2048),
            shapes: ShapeKind::ALL.to_vec(),
            intensities: IntensityModel::ALL.to_vec(),
        }
    }
}

fn parse_pair(s: &str, sep: &str) -> Option<(u32, u32)> {
    match s.split_once(sep) {
        Some((a, b)) => Some((a.trim().parse().ok()?, b.trim().parse().ok()?)),
        None => {
            let v = s.trim().parse().ok()?;
            Some((v, v))
        }
    }
}

/// `objects=5000,size=8..32,slide=4096x4096,seed=7[,shapes=dot|line][,intensity=noise]`;
/// omitted keys keep their defaults.
impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let bad = || Error::Parse(format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "seed" => spec.seed = value.trim().parse().map_err(|_| bad())?,
                "objects" => spec.objects = value.trim().parse().map_err(|_| bad())?,
                "size" => spec.size_range = parse_pair(value, "..").ok_or_else(bad)?,
                "slide" => spec.slide_size = parse_pair(value, "x").ok_or_else(bad)?,
                "shapes" => {
                    spec.shapes = value
                        .split('|')
                        .map(|n| by_name(&ShapeKind::ALL, n.trim(), ShapeKind::name, "shape"))
                        .collect::<Result<_>>()?
                }
                "intensity" => {
                    spec.intensities = value
                        .split('|')
                        .map(|n| by_name(&IntensityModel::ALL, n.trim(), IntensityModel::name, "intensity model"))
                        .collect::<Result<_>>()?
                }
                other => return Err(Error::Parse(format!("unknown synthetic key {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SyntheticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shapes: Vec<_> = self.shapes.iter().map(|s| s.name()).collect();
        let models: Vec<_> = self.intensities.iter().map(|m| m.name()).collect();
        write!(
            f,
            "objects={},size={}..{},slide={}x{},seed={},shapes={},intensity={}",
            self.objects,
            self.size_range.0,
            self.size_range.1,
            self.slide_size.0,
            self.slide_size.1,
            self.seed,
            shapes.join("|"),
            models.join("|")
        )
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.size_range;
        if a == 0 || a > b {
            return Err(Error::Parse(format!("size range {a}..{b} is empty")));
        }
        if self.slide_size.0 == 0 || self.slide_size.1 == 0 {
            return Err(Error::Parse("slide size must be positive".into()));
        }
        if self.shapes.is_empty() || self.intensities.is_empty() {
            return Err(Error::Parse("shape and intensity lists must be non-empty".into()));
        }
        Ok(())
    }
}

/// Everything `generate` writes, held in memory.
#[derive(Debug, Clone)]
pub struct SyntheticSlide {
    pub width: u32,
    pub height: u32,
    /// 8-bit gray pixels, row-major.
    pub pixels: Vec<u8>,
    pub geojson: Value,
    pub annotations: AnnotationSet,
    pub regions: RegionSet,
    pub labels: LabelRaster,
    pub classes: BTreeMap<u32, String>,
}

pub const SLIDE_PNG: &str = "slide.png";
pub const SLIDE_TIFF: &str = "slide.tif";
pub const ANNOTATIONS: &str = "annotations.geojson";
pub const LABELS: &str = "labels.tif";
pub const CLASSES: &str = "classes.json";

impl SyntheticSlide {
    pub fn slide(&self) -> RasterSlide {
        RasterSlide::from_gray8(self.width, self.height, &self.pixels).expect("pixels match dimensions")
    }

    pub fn geojson_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.geojson).expect("geojson serializes");
        out.push(b'\n');
        out
    }

    /// Writes slide, annotations, label mask and class map into `dir`. With
    /// `tiled` the slide is a 256-px tiled TIFF instead of a PNG.
    pub fn write_to_dir(&self, dir: &Path, tiled: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if tiled {
            write_tiled_tiff_gray8(&dir.join(SLIDE_TIFF), self.width, self.height, &self.pixels, 256)?;
        } else {
            image::save_buffer(
                dir.join(SLIDE_PNG),
                &self.pixels,
                self.width,
                self.height,
                image::ExtendedColorType::L8,
            )?;
        }
        std::fs::write(dir.join(ANNOTATIONS), self.geojson_bytes())?;

        let mut enc = tiff::encoder::TiffEncoder::new(BufWriter::new(File::create(dir.join(LABELS))?))?
            .with_compression(tiff::encoder::Compression::Lzw);
        enc.write_image::<tiff::encoder::colortype::Gray32>(self.width, self.height, &self.labels.labels)?;

        let classes: BTreeMap<String, &String> = self.classes.iter().map(|(k, v)| (k.to_string(), v)).collect();
        let mut text = serde_json::to_vec_pretty(&classes)?;
        text.push(b'\n');
        std::fs::write(dir.join(CLASSES), text)?;
        Ok(())
    }
}

type Ring = Vec<(f64, f64)>;

/// Rounds to 1/1024 px so coordinates print exactly and briefly.
fn q(v: f64) -> f64 {
    (v * 1024.0).round() / 1024.0
}

fn closed(mut ring: Ring) -> Ring {
    ring.push(ring[0]);
    ring
}

fn polar_ring(cx: f64, cy: f64, radius: impl Fn(f64) -> (f64, f64)) -> Ring {
    closed(
        (0..POLYGON_SIDES)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / POLYGON_SIDES as f64;
                let (dx, dy) = radius(t);
                (q(cx + dx), q(cy + dy))
            })
            .collect(),
    )
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> Ring {
    closed(vec![(x, y), (x + w, y), (x + w, y + h), (x, y + h)])
}

/// Polygon rings (outer first) for a shape inside the `w x h` box at `(x, y)`.
fn shape_rings(kind: ShapeKind, x: f64, y: f64, w: u32, h: u32, rng: &mut ChaCha8Rng) -> Vec<Ring> {
    let (wf, hf) = (w as f64, h as f64);
    let (cx, cy) = (x + wf / 2.0, y + hf / 2.0);
    let r = wf.min(hf) / 2.0;
    match kind {
        ShapeKind::Rectangle => vec![rect(x, y, wf, hf)],
        ShapeKind::Ellipse => {
            let (a, b) = (wf / 2.0, hf / 2.0 * rng.random_range(0.35..=1.0));
            let theta: f64 = rng.random_range(0.0..PI);
            // Scale so the rotated ellipse stays inside the box.
            let ex = (a * a * theta.cos().powi(2) + b * b * theta.sin().powi(2)).sqrt();
            let ey = (a * a * theta.sin().powi(2) + b * b * theta.cos().powi(2)).sqrt();
            let s = (wf / 2.0 / ex).min(hf / 2.0 / ey).min(1.0);
            vec![polar_ring(cx, cy, |t| {
                let (px, py) = (a * s * t.cos(), b * s * t.sin());
                (px * theta.cos() - py * theta.sin(), px * theta.sin() + py * theta.cos())
            })]
        }
        ShapeKind::Blob => {
            let harmonics: Vec<(f64, f64, f64)> = (2..=5)
                .map(|k| (k as f64, rng.random_range(0.0..0.12), rng.random_range(0.0..2.0 * PI)))
                .collect();
            vec![polar_ring(cx, cy, |t| {
                let f = 0.6
                    + harmonics
                        .iter()
                        .map(|(k, amp, ph)| amp * (k * t + ph).cos())
                        .sum::<f64>();
                (r * f * t.cos(), r * f * t.sin())
            })]
        }
        ShapeKind::Ring => {
            let inner = r * rng.random_range(0.3..0.55);
            vec![
                polar_ring(cx, cy, |t| (r * t.cos(), r * t.sin())),
                polar_ring(cx, cy, |t| (inner * t.cos(), inner * t.sin())),
            ]
        }
        ShapeKind::Line => {
            if rng.random_bool(0.5) {
                vec![rect(x, y + (h / 2) as f64, wf, 1.0)]
            } else {
                vec![rect(x + (w / 2) as f64, y, 1.0, hf)]
            }
        }
        ShapeKind::Dot => vec![rect(x + (w / 2) as f64, y + (h / 2) as f64, 1.0, 1.0)],
    }
}

fn paint(model: IntensityModel, mask: &ObjectMask, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    let level = |v: f64| v.round().clamp(0.0, 255.0) as u8;
    let cells = mask.width() * mask.height();
    match model {
        IntensityModel::Constant => vec![rng.random_range(60u8..=240); cells],
        IntensityModel::Ramp => {
            let base = rng.random_range(40.0..120.0);
            let span = rng.random_range(60.0..130.0);
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let (ux, uy) = (phi.cos(), phi.sin());
            let extent = (w * ux.abs() + h * uy.abs()).max(1.0);
            let offset = (if ux < 0.0 { w * -ux } else { 0.0 }) + (if uy < 0.0 { h * -uy } else { 0.0 });
            (0..cells)
                .map(|i| {
                    let (x, y) = ((i % mask.width()) as f64 + 0.5, (i / mask.width()) as f64 + 0.5);
                    level(base + span * (x * ux + y * uy + offset) / extent)
                })
                .collect()
        }
        IntensityModel::Gaussian => {
            let peak = rng.random_range(150.0..250.0);
            let floor = rng.random_range(30.0..80.0);
            let sigma = (w.max(h) / 2.0 * rng.random_range(0.3..0.8)).max(0.5);
            let (cx, cy) = (w / 2.0, h / 2.0);
            (0..cells)
                .map(|i| {
                    let (x, y) = ((i % mask.width()) as f64 + 0.5, (i / mask.width()) as f64 + 0.5);
                    let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                    level(floor + (peak - floor) * (-d2 / (2.0 * sigma * sigma)).exp())
                })
                .collect()
        }
        IntensityModel::Noise => {
            let lo = rng.random_range(20u8..120);
            let hi = rng.random_range(lo + 40..=255);
            (0..cells).map(|_| rng.random_range(lo..=hi)).collect()
        }
    }
}

fn pick<T: Copy>(items: &[T], weight: impl Fn(T) -> u32, rng: &mut ChaCha8Rng) -> T {
    let total: u32 = items.iter().map(|&t| weight(t)).sum();
    let mut r = rng.random_range(0..total);
    for &t in items {
        if r < weight(t) {
            return t;
        }
        r -= weight(t);
    }
    items[items.len() - 1]
}

/// Builds a synthetic slide. Fails with [`Error::Packing`] when the grid of
/// `(max size + 2)`-pixel cells cannot hold every object.
pub fn generate_synthetic_slide(spec: &SyntheticSpec) -> Result<SyntheticSlide> {
    spec.validate()?;
    let (width, height) = spec.slide_size;
    let (smin, smax) = spec.size_range;
    let cell = smax as u64 + 2;
    let (across, down) = (width as u64 / cell, height as u64 / cell);
    let capacity = across * down;
    if spec.objects as u64 > capacity {
        return Err(Error::Packing {
            requested: spec.objects,
            reason: format!("a {width}x{height} slide holds at most {capacity} objects of edge {smax} with a 2 px gap"),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut slots: Vec<u64> = if spec.objects == 0 {
        Vec::new()
    } else {
        sample(&mut rng, capacity as usize, spec.objects)
            .into_iter()
            .map(|i| i as u64)
            .collect()
    };
    slots.sort_unstable();

    let mut pixels = vec![BACKGROUND; width as usize * height as usize];
    let mut labels = vec![0u32; pixels.len()];
    let mut features = Vec::with_capacity(spec.objects);
    let mut classes = BTreeMap::new();
    for (k, slot) in slots.iter().enumerate() {
        let id = k as u64 + 1;
        let (w, h) = (rng.random_range(smin..=smax), rng.random_range(smin..=smax));
        let ox = (slot % across) * cell + 1 + rng.random_range(0..=(cell - 2 - w as u64));
        let oy = (slot / across) * cell + 1 + rng.random_range(0..=(cell - 2 - h as u64));
        let kind = pick(&spec.shapes, ShapeKind::weight, &mut rng);
        let model = spec.intensities[rng.random_range(0..spec.intensities.len())];

        let mut rings = shape_rings(kind, ox as f64, oy as f64, w, h, &mut rng);
        let raster = match rasterize_rings(&rings[0], &rings[1..], width, height) {
            Some(r) => r,
            None => {
                rings = vec![rect(ox as f64, oy as f64, 1.0, 1.0)];
                rasterize_rings(&rings[0], &[], width, height).expect("a unit square covers its center")
            }
        };
        let (bbox, mask): (BoundingBox, ObjectMask) = raster;
        let values = paint(model, &mask, &mut rng);
        for (x, y) in mask.set_pixels() {
            let i = (bbox.min_y as usize + y) * width as usize + bbox.min_x as usize + x;
            pixels[i] = values[y * mask.width() + x];
            labels[i] = id as u32;
        }

        classes.insert(id as u32, kind.name().to_string());
        let coords: Vec<Value> = rings
            .iter()
            .map(|r| Value::Array(r.iter().map(|&(x, y)| json!([x, y])).collect()))
            .collect();
        features.push(json!({
            "type": "Feature",
            "id": id.to_string(),
            "geometry": {"type": "Polygon", "coordinates": coords},
            "properties": {
                "objectType": "annotation",
                "classification": {"name": kind.name()},
                "intensityModel": model.name(),
            },
        }));
    }

    let geojson = json!({"type": "FeatureCollection", "features": features});
    let annotations = parse_geojson(&serde_json::to_vec(&geojson)?)?;
    let (regions, skipped) = regions_from_annotations(&annotations, width, height, "synthetic")?;
    debug_assert!(skipped.is_empty());
    Ok(SyntheticSlide {
        width,
        height,
        pixels,
        geojson,
        annotations,
        regions,
        labels: LabelRaster::new(width, height, labels)?,
        classes,
    })
}
