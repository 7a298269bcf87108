//! Memory-budgeted batching and the extraction driver.
//!
//! Slab members are read into padded planes and reduced slot by slot; the
//! kernels see each slot through an [`ObjectView`] clipped to the object's
//! own box, so padding never enters a computation and a slot yields exactly
//! the values the per-object path produces for the same object.

mod budget;
mod plan;
mod slab;

pub use budget::{MemoryBudget, GIB, KIB, MIB};
pub use plan::{bucket_for, plan_batches, slab_footprint, BatchPlan, SlabPlan, BUCKET_EDGES, BYTES_PER_PIXEL};
pub use slab::{encode_slab, Slab};

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{object_features, ObjectView, FEATURE_COUNT};
use crate::ingest::SlideSource;
use crate::manifest::FeatureManifest;
use crate::region::{ObjectRecord, RegionSet};
use crate::table::{FeatureRow, FeatureTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Slab kernels for bucketed objects, per-object path for overflow.
    Batched,
    /// Every object through the per-object path.
    PerObject,
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    pub mode: Mode,
    pub budget: MemoryBudget,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            mode: Mode::Batched,
            budget: MemoryBudget::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractStats {
    pub objects: usize,
    pub slabs: usize,
    pub overflow: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

const CENTER_X: usize = 18;
const CENTER_Y: usize = 19;

fn make_row(record: &ObjectRecord, values: Vec<f64>) -> FeatureRow {
    FeatureRow {
        object_id: record.object_id,
        class_label: record.class_label.clone(),
        center_x: values[CENTER_X],
        center_y: values[CENTER_Y],
        values,
    }
}

/// Reads one object's crop and computes its features directly.
pub fn extract_object(record: &ObjectRecord, slide: &dyn SlideSource) -> Result<Vec<f64>> {
    let patch = slide
        .read_patch(&record.bbox)
        .map_err(|e| e.for_object(record.object_id))?;
    let view = ObjectView::new(&patch, &record.mask, &record.bbox).map_err(|e| e.for_object(record.object_id))?;
    Ok(object_features(&view))
}

fn run_plan(plan: &BatchPlan, regions: &RegionSet, slide: &dyn SlideSource) -> Result<Vec<FeatureRow>> {
    let mut rows = Vec::with_capacity(regions.len());
    // Slabs run one at a time so resident slab memory stays within the
    // budget; the slots of a slab are spread over the pool.
    for entry in &plan.slabs {
        let slab = encode_slab(entry, regions, slide)?;
        let values: Vec<Vec<f64>> = (0..slab.depth())
            .into_par_iter()
            .map(|slot| object_features(&slab.slot_view(slot)))
            .collect();
        for (id, v) in slab.id_map.iter().zip(values) {
            let record = regions
                .get(*id)
                .ok_or_else(|| Error::PlanCorrupt(format!("object {id} vanished")))?;
            rows.push(make_row(record, v));
        }
    }
    let overflow: Vec<FeatureRow> = plan
        .overflow
        .par_iter()
        .map(|&id| {
            let record = regions
                .get(id)
                .ok_or_else(|| Error::PlanCorrupt(format!("object {id} is not in the region set")))?;
            Ok(make_row(record, extract_object(record, slide)?))
        })
        .collect::<Result<_>>()?;
    rows.extend(overflow);
    rows.sort_by_key(|r| r.object_id);
    Ok(rows)
}

/// The kernels emit the v1 layout; any other manifest is refused.
pub fn check_manifest(manifest: &FeatureManifest) -> Result<()> {
    if manifest.version != crate::manifest::MANIFEST_VERSION || manifest.len() != FEATURE_COUNT {
        return Err(Error::Table(format!(
            "manifest {} with {} entries is not supported",
            manifest.version,
            manifest.len()
        )));
    }
    Ok(())
}

/// Computes the feature table for every object, rows sorted by object id.
pub fn extract_all(
    regions: &RegionSet,
    slide: &dyn SlideSource,
    manifest: &FeatureManifest,
    options: &ExtractOptions,
) -> Result<(FeatureTable, ExtractStats)> {
    let start = Instant::now();
    check_manifest(manifest)?;
    let plan = match options.mode {
        Mode::Batched => plan_batches(regions, &options.budget),
        Mode::PerObject => BatchPlan::all_overflow(regions),
    };
    log::debug!(
        "plan: {} slabs holding {} objects, {} on the per-object path",
        plan.slabs.len(),
        plan.slab_members(),
        plan.overflow.len()
    );
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let rows = pool.install(|| run_plan(&plan, regions, slide))?;

    let mut table = FeatureTable::new(manifest);
    table.rows = rows;
    let stats = ExtractStats {
        objects: table.rows.len(),
        slabs: plan.slabs.len(),
        overflow: plan.overflow.len(),
        elapsed: start.elapsed(),
    };
    Ok((table, stats))
}
