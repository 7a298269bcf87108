use thiserror::Error;

use crate::region::BoundingBox;

/// Errors raised anywhere in the extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed annotation payload: {0}")]
    Parse(String),

    #[error("annotation {id}: unsupported geometry type {kind}")]
    UnsupportedGeometry { id: String, kind: String },

    #[error("annotation {id}: invalid ring ({reason})")]
    InvalidRing { id: String, reason: String },

    #[error("duplicate annotation id {0}")]
    DuplicateId(String),

    #[error("annotation {id} covers no pixel centers")]
    EmptyObject { id: String },

    #[error("region set is empty")]
    EmptyRegionSet,

    #[error("window {bbox} is outside the {width}x{height} slide")]
    Bounds { bbox: BoundingBox, width: u32, height: u32 },

    #[error("object {object_id}: {source}")]
    Object {
        object_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid region data: {0}")]
    InvalidRegion(String),

    #[error("cannot build spatial index: {0}")]
    IndexBuild(String),

    #[error("feature row for object {0} does not join onto the index")]
    Join(u64),

    #[error("invalid memory budget: {0}")]
    Budget(String),

    #[error("corrupt batch plan: {0}")]
    PlanCorrupt(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("cannot place {requested} objects: {reason}")]
    Packing { requested: usize, reason: String },

    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error("feature table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Tiff(#[from] tiff::TiffError),
}

impl Error {
    pub(crate) fn for_object(self, object_id: u64) -> Error {
        Error::Object {
            object_id,
            source: Box::new(self),
        }
    }

    /// Unwraps object context, returning the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Object { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
