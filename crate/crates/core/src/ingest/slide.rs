//! Slide pixel sources with windowed grayscale reads.
//!
//! All sources normalize to `[0, 1]` grayscale: integer samples are divided
//! by their type maximum, color is reduced with Rec. 709 luminance weights.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use tiff::decoder::{Decoder, DecodingResult};
use tiff::ColorType;

use crate::error::{Error, Result};
use crate::region::{BoundingBox, IntensityPatch};

const LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

fn luminance(r: f64, g: f64, b: f64) -> f32 {
    ((LUMA[0] * r + LUMA[1] * g + LUMA[2] * b) as f32).clamp(0.0, 1.0)
}

/// Windowed read access to slide pixels. Implementations must tolerate
/// concurrent readers.
pub trait SlideSource: Send + Sync {
    fn width(&self) -> u32;
    fn height(&self) -> u32;

    /// Grayscale crop of exactly `bbox`'s dimensions.
    fn read_patch(&self, bbox: &BoundingBox) -> Result<IntensityPatch>;

    fn check_window(&self, bbox: &BoundingBox) -> Result<()> {
        if bbox.min_x < 0 || bbox.min_y < 0 || bbox.max_x > self.width() as i64 || bbox.max_y > self.height() as i64 {
            return Err(Error::Bounds {
                bbox: *bbox,
                width: self.width(),
                height: self.height(),
            });
        }
        Ok(())
    }
}

/// Fully decoded grayscale slide held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterSlide {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl RasterSlide {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        if values.len() != width as usize * height as usize {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} slide",
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidRegion("slide intensity outside [0, 1]".into()));
        }
        Ok(RasterSlide { width, height, values })
    }

    pub fn from_gray8(width: u32, height: u32, pixels: &[u8]) -> Result<Self> {
        Self::new(width, height, pixels.iter().map(|&p| p as f32 / 255.0).collect())
    }

    pub fn from_gray16(width: u32, height: u32, pixels: &[u16]) -> Result<Self> {
        Self::new(width, height, pixels.iter().map(|&p| p as f32 / 65535.0).collect())
    }

    pub fn from_image(img: image::DynamicImage) -> Result<Self> {
        let (w, h) = (img.width(), img.height());
        match img {
            image::DynamicImage::ImageLuma8(b) => Self::from_gray8(w, h, b.as_raw()),
            image::DynamicImage::ImageLuma16(b) => Self::from_gray16(w, h, b.as_raw()),
            other => {
                let rgb = other.to_rgb32f();
                let values = rgb
                    .pixels()
                    .map(|p| luminance(p[0] as f64, p[1] as f64, p[2] as f64))
                    .collect();
                Self::new(w, h, values)
            }
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

impl SlideSource for RasterSlide {
    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn read_patch(&self, bbox: &BoundingBox) -> Result<IntensityPatch> {
        self.check_window(bbox)?;
        let (w, h) = bbox.dims();
        let stride = self.width as usize;
        let mut values = Vec::with_capacity(w * h);
        for y in bbox.min_y as usize..bbox.max_y as usize {
            let start = y * stride + bbox.min_x as usize;
            values.extend_from_slice(&self.values[start..start + w]);
        }
        IntensityPatch::new(w, h, values)
    }
}

struct TiffState {
    decoder: Decoder<BufReader<File>>,
    cache: HashMap<u32, Arc<Vec<f32>>>,
}

/// TIFF-backed slide decoding only the strips or tiles a window touches.
/// Reads are serialized through an internal lock.
pub struct TiffSlide {
    width: u32,
    height: u32,
    chunk_width: u32,
    chunk_height: u32,
    chunks_across: u32,
    color: ColorType,
    state: Mutex<TiffState>,
}

const CHUNK_CACHE_LIMIT: usize = 256;

impl TiffSlide {
    pub fn open(path: &Path) -> Result<Self> {
        let mut decoder = Decoder::new(BufReader::new(File::open(path)?))?;
        let (width, height) = decoder.dimensions()?;
        let color = decoder.colortype()?;
        match color {
            ColorType::Gray(8 | 16) | ColorType::RGB(8 | 16) | ColorType::RGBA(8 | 16) => {}
            other => return Err(Error::UnsupportedImage(format!("slide color type {other:?}"))),
        }
        let (chunk_width, chunk_height) = decoder.chunk_dimensions();
        let chunks_across = width.div_ceil(chunk_width);
        Ok(TiffSlide {
            width,
            height,
            chunk_width,
            chunk_height,
            chunks_across,
            color,
            state: Mutex::new(TiffState {
                decoder,
                cache: HashMap::new(),
            }),
        })
    }

    fn chunk(&self, state: &mut TiffState, index: u32) -> Result<Arc<Vec<f32>>> {
        if let Some(c) = state.cache.get(&index) {
            return Ok(c.clone());
        }
        let samples = match self.color {
            ColorType::Gray(_) => 1,
            ColorType::RGB(_) => 3,
            _ => 4,
        };
        let gray: Vec<f32> = match state.decoder.read_chunk(index)? {
            DecodingResult::U8(v) => to_gray(&v, samples, 255.0),
            DecodingResult::U16(v) => to_gray(&v, samples, 65535.0),
            _ => return Err(Error::UnsupportedImage("slide sample format".into())),
        };
        if state.cache.len() >= CHUNK_CACHE_LIMIT {
            state.cache.clear();
        }
        let gray = Arc::new(gray);
        state.cache.insert(index, gray.clone());
        Ok(gray)
    }
}

fn to_gray<T: Copy + Into<f64>>(raw: &[T], samples: usize, max: f64) -> Vec<f32> {
    if samples == 1 {
        return raw.iter().map(|&v| (v.into() / max) as f32).collect();
    }
    raw.chunks_exact(samples)
        .map(|p| luminance(p[0].into() / max, p[1].into() / max, p[2].into() / max))
        .collect()
}

impl SlideSource for TiffSlide {
    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn read_patch(&self, bbox: &BoundingBox) -> Result<IntensityPatch> {
        self.check_window(bbox)?;
        let (w, h) = bbox.dims();
        let mut values = vec![0f32; w * h];
        let (cw, ch) = (self.chunk_width as i64, self.chunk_height as i64);
        let mut state = self.state.lock().expect("slide lock poisoned");
        for cy in bbox.min_y / ch..=(bbox.max_y - 1) / ch {
            for cx in bbox.min_x / cw..=(bbox.max_x - 1) / cw {
                let index = cy as u32 * self.chunks_across + cx as u32;
                let data = self.chunk(&mut state, index)?;
                let (dw, _) = state.decoder.chunk_data_dimensions(index);
                let (ox, oy) = (cx * cw, cy * ch);
                let x0 = bbox.min_x.max(ox);
                let x1 = bbox.max_x.min(ox + cw);
                let y0 = bbox.min_y.max(oy);
                let y1 = bbox.max_y.min(oy + ch);
                for y in y0..y1 {
                    let src = (y - oy) as usize * dw as usize + (x0 - ox) as usize;
                    let dst = (y - bbox.min_y) as usize * w + (x0 - bbox.min_x) as usize;
                    let n = (x1 - x0) as usize;
                    values[dst..dst + n].copy_from_slice(&data[src..src + n]);
                }
            }
        }
        IntensityPatch::new(w, h, values)
    }
}

/// Opens a slide by extension: TIFF is read lazily, anything else is decoded
/// into memory.
pub fn open_slide(path: &Path) -> Result<Box<dyn SlideSource>> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("tif") | Some("tiff") => Ok(Box::new(TiffSlide::open(path)?)),
        _ => {
            let img = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
            Ok(Box::new(RasterSlide::from_image(img)?))
        }
    }
}

/// Writes an uncompressed, tiled, 8-bit grayscale TIFF. Tile edges must be
/// multiples of 16.
pub fn write_tiled_tiff_gray8(path: &Path, width: u32, height: u32, pixels: &[u8], tile: u32) -> Result<()> {
    if tile == 0 || !tile.is_multiple_of(16) {
        return Err(Error::UnsupportedImage(format!(
            "tile edge {tile} is not a multiple of 16"
        )));
    }
    if pixels.len() != width as usize * height as usize {
        return Err(Error::Shape("pixel count does not match dimensions".into()));
    }
    let across = width.div_ceil(tile);
    let down = height.div_ceil(tile);
    let tiles = (across * down) as usize;
    let tile_bytes = (tile * tile) as usize;

    let mut out = BufWriter::new(File::create(path)?);
    let data_start = 8u32;
    let ifd_offset = data_start + (tiles * tile_bytes) as u32;
    out.write_all(b"II")?;
    out.write_all(&42u16.to_le_bytes())?;
    out.write_all(&ifd_offset.to_le_bytes())?;

    let mut buf = vec![0u8; tile_bytes];
    for ty in 0..down {
        for tx in 0..across {
            buf.fill(0);
            for y in 0..tile {
                let sy = ty * tile + y;
                if sy >= height {
                    break;
                }
                let sx0 = tx * tile;
                let n = tile.min(width - sx0) as usize;
                let src = sy as usize * width as usize + sx0 as usize;
                buf[(y * tile) as usize..(y * tile) as usize + n].copy_from_slice(&pixels[src..src + n]);
            }
            out.write_all(&buf)?;
        }
    }

    const SHORT: u16 = 3;
    const LONG: u16 = 4;
    let entries = 11u16;
    let arrays_start = ifd_offset + 2 + entries as u32 * 12 + 4;
    let offsets_at = arrays_start;
    let counts_at = arrays_start + 4 * tiles as u32;
    let single = tiles == 1;
    let tag = |out: &mut BufWriter<File>, tag: u16, kind: u16, count: u32, value: u32| {
        out.write_all(&tag.to_le_bytes())?;
        out.write_all(&kind.to_le_bytes())?;
        out.write_all(&count.to_le_bytes())?;
        out.write_all(&value.to_le_bytes())
    };
    out.write_all(&entries.to_le_bytes())?;
    tag(&mut out, 256, LONG, 1, width)?;
    tag(&mut out, 257, LONG, 1, height)?;
    tag(&mut out, 258, SHORT, 1, 8)?;
    tag(&mut out, 259, SHORT, 1, 1)?;
    tag(&mut out, 262, SHORT, 1, 1)?;
    tag(&mut out, 277, SHORT, 1, 1)?;
    tag(&mut out, 284, SHORT, 1, 1)?;
    tag(&mut out, 322, LONG, 1, tile)?;
    tag(&mut out, 323, LONG, 1, tile)?;
    tag(
        &mut out,
        324,
        LONG,
        tiles as u32,
        if single { data_start } else { offsets_at },
    )?;
    tag(
        &mut out,
        325,
        LONG,
        tiles as u32,
        if single { tile_bytes as u32 } else { counts_at },
    )?;
    out.write_all(&0u32.to_le_bytes())?;
    if !single {
        for i in 0..tiles {
            out.write_all(&(data_start + (i * tile_bytes) as u32).to_le_bytes())?;
        }
        for _ in 0..tiles {
            out.write_all(&(tile_bytes as u32).to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}
