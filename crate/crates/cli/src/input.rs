//! Loading slides and annotations from the command-line flags.

use std::path::Path;
use std::str::FromStr;

use pathex::ingest::{
    load_label_mask, open_slide, parse_geojson, read_class_map, read_label_raster, regions_from_annotations,
    AnnotationSet, SlideSource,
};
use pathex::{BoundingBox, RegionSet};

use crate::commands::Failure;

/// `a,b` integer pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair(pub u32, pub u32);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("expected two comma-separated integers")?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

/// `x,y,w,h` query window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window(pub BoundingBox);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err("expected x,y,w,h".into());
        }
        let x: i64 = parts[0].parse().map_err(|_| format!("bad x {:?}", parts[0]))?;
        let y: i64 = parts[1].parse().map_err(|_| format!("bad y {:?}", parts[1]))?;
        let w: usize = parts[2].parse().map_err(|_| format!("bad width {:?}", parts[2]))?;
        let h: usize = parts[3].parse().map_err(|_| format!("bad height {:?}", parts[3]))?;
        BoundingBox::from_origin(x, y, w, h)
            .map(Window)
            .map_err(|e| e.to_string())
    }
}

pub enum Annotations<'a> {
    GeoJson(&'a Path),
    LabelMask { path: &'a Path, classes: Option<&'a Path> },
}

pub struct Loaded {
    pub slide: Box<dyn SlideSource>,
    pub regions: RegionSet,
    /// Present for GeoJSON input.
    pub annotations: Option<AnnotationSet>,
}

fn at(path: &Path, e: impl Into<Failure>) -> Failure {
    let mut f = e.into();
    if let Some(m) = &f.message {
        f.message = Some(format!("{}: {m}", path.display()));
    }
    f
}

/// Reads the slide and the annotations; skipped annotations are reported
/// as JSON lines on stderr.
pub fn load(slide_path: &Path, annotations: Annotations) -> Result<Loaded, Failure> {
    let slide = open_slide(slide_path).map_err(|e| at(slide_path, e))?;
    let source_id = slide_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    match annotations {
        Annotations::GeoJson(path) => {
            let bytes = std::fs::read(path).map_err(|e| at(path, e))?;
            let set = parse_geojson(&bytes).map_err(|e| at(path, e))?;
            let (regions, skipped) = regions_from_annotations(&set, slide.width(), slide.height(), &source_id)?;
            for s in &skipped {
                eprintln!("{}", serde_json::to_string(s).expect("warning serializes"));
            }
            Ok(Loaded {
                slide,
                regions,
                annotations: Some(set),
            })
        }
        Annotations::LabelMask { path, classes } => {
            let raster = read_label_raster(path).map_err(|e| at(path, e))?;
            if (raster.width, raster.height) != (slide.width(), slide.height()) {
                return Err(Failure::io(format!(
                    "label mask is {}x{} but the slide is {}x{}",
                    raster.width,
                    raster.height,
                    slide.width(),
                    slide.height()
                )));
            }
            let classes = classes.map(|c| read_class_map(c).map_err(|e| at(c, e))).transpose()?;
            let regions = load_label_mask(&raster, classes.as_ref(), &source_id)?;
            Ok(Loaded {
                slide,
                regions,
                annotations: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_windows() {
        assert_eq!("8,32".parse::<Pair>().unwrap(), Pair(8, 32));
        assert!("8".parse::<Pair>().is_err());
        let w: Window = "10,20,5,6".parse().unwrap();
        assert_eq!(w.0, BoundingBox::new(10, 20, 15, 26).unwrap());
        assert!("1,2,0,3".parse::<Window>().is_err());
        assert!("1,2,3".parse::<Window>().is_err());
    }
}
