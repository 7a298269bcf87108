//! Annotation and pixel ingestion.

pub mod geojson;
pub mod labels;
pub mod raster;
pub mod slide;

pub use geojson::{parse_geojson, Annotation, AnnotationSet};
pub use labels::{connected_components, load_label_mask, read_class_map, read_label_raster, Connectivity, LabelRaster};
pub use raster::{rasterize_annotation, rasterize_rings, regions_from_annotations, SkippedAnnotation};
pub use slide::{open_slide, write_tiled_tiff_gray8, RasterSlide, SlideSource, TiffSlide};
