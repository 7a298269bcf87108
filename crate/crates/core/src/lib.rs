//! Region-direct pathomics feature extraction for very large images.
//!
//! Annotated objects are indexed with an R-tree, packed into memory-budgeted
//! slabs and reduced to a 247-value feature vector each. A deliberately naive
//! reference implementation lives in [`oracle`] for differential testing.

pub mod batch;
pub mod compare;
pub mod error;
pub mod features;
pub mod index;
pub mod ingest;
pub mod manifest;
pub mod oracle;
pub mod region;
pub mod synthetic;
pub mod table;
pub mod writeback;

pub use batch::{extract_all, ExtractOptions, ExtractStats, MemoryBudget, Mode};
pub use error::{Error, Result};
pub use index::{build_index, IndexConfig, SpatialIndex};
pub use manifest::{FeatureManifest, MANIFEST_VERSION};
pub use region::{BoundingBox, IntensityPatch, ObjectMask, ObjectRecord, RegionSet};
pub use synthetic::{generate_synthetic_slide, SyntheticSlide, SyntheticSpec};
pub use table::{FeatureRow, FeatureTable};
pub use writeback::write_back;
