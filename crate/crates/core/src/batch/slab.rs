use rayon::prelude::*;

use super::plan::{slab_footprint, SlabPlan};
use crate::error::{Error, Result};
use crate::features::ObjectView;
use crate::ingest::SlideSource;
use crate::region::{ObjectRecord, RegionSet};

/// Padded stack of object crops. Slot `i` occupies the `edge x edge` plane
/// at offset `i * edge * edge` in both `patches` and `masks`, anchored at
/// the top-left; padding is zero intensity and mask-off.
#[derive(Debug, Clone)]
pub struct Slab {
    pub bucket_edge: usize,
    pub patches: Vec<f32>,
    pub masks: Vec<bool>,
    pub id_map: Vec<u64>,
    slots: Vec<SlotInfo>,
}

#[derive(Debug, Clone, Copy)]
struct SlotInfo {
    width: usize,
    height: usize,
    origin: (i64, i64),
}

impl Slab {
    pub fn depth(&self) -> usize {
        self.id_map.len()
    }

    pub fn footprint(&self) -> u64 {
        slab_footprint(self.bucket_edge, self.depth())
    }

    fn plane(&self) -> usize {
        self.bucket_edge * self.bucket_edge
    }

    /// Object view of one slot restricted to its own box.
    pub fn slot_view(&self, slot: usize) -> ObjectView<'_> {
        let info = self.slots[slot];
        let range = slot * self.plane()..(slot + 1) * self.plane();
        ObjectView::strided(
            info.width,
            info.height,
            self.bucket_edge,
            &self.masks[range.clone()],
            &self.patches[range],
            info.origin,
        )
    }
}

fn lookup<'a>(regions: &'a RegionSet, entry: &SlabPlan, id: u64) -> Result<&'a ObjectRecord> {
    let o = regions
        .get(id)
        .ok_or_else(|| Error::PlanCorrupt(format!("object {id} is not in the region set")))?;
    if o.bbox.width() > entry.bucket_edge || o.bbox.height() > entry.bucket_edge {
        return Err(Error::PlanCorrupt(format!(
            "object {id} ({}x{}) does not fit bucket {}",
            o.bbox.width(),
            o.bbox.height(),
            entry.bucket_edge
        )));
    }
    Ok(o)
}

/// Reads every member's pixels and mask into a padded slab. Slots are
/// filled concurrently on the current rayon pool.
pub fn encode_slab(entry: &SlabPlan, regions: &RegionSet, slide: &dyn SlideSource) -> Result<Slab> {
    if entry.object_ids.is_empty() {
        return Err(Error::PlanCorrupt("slab has no objects".into()));
    }
    let edge = entry.bucket_edge;
    let plane = edge * edge;
    let depth = entry.object_ids.len();
    let records: Vec<&ObjectRecord> = entry
        .object_ids
        .iter()
        .map(|&id| lookup(regions, entry, id))
        .collect::<Result<_>>()?;

    let mut patches = vec![0f32; plane * depth];
    let mut masks = vec![false; plane * depth];
    patches
        .par_chunks_mut(plane)
        .zip(masks.par_chunks_mut(plane))
        .zip(records.par_iter())
        .try_for_each(|((pslot, mslot), o)| -> Result<()> {
            let patch = slide.read_patch(&o.bbox).map_err(|e| e.for_object(o.object_id))?;
            let (w, h) = o.bbox.dims();
            for y in 0..h {
                pslot[y * edge..y * edge + w].copy_from_slice(&patch.values()[y * w..(y + 1) * w]);
                mslot[y * edge..y * edge + w].copy_from_slice(&o.mask.bits()[y * w..(y + 1) * w]);
            }
            Ok(())
        })?;

    let slots = records
        .iter()
        .map(|o| SlotInfo {
            width: o.bbox.width(),
            height: o.bbox.height(),
            origin: (o.bbox.min_x, o.bbox.min_y),
        })
        .collect();
    Ok(Slab {
        bucket_edge: edge,
        patches,
        masks,
        id_map: entry.object_ids.clone(),
        slots,
    })
}
