use std::collections::BTreeMap;

use serde::Serialize;

use super::budget::MemoryBudget;
use crate::region::RegionSet;

/// Slab edge lengths; larger objects take the per-object path.
pub const BUCKET_EDGES: [usize; 5] = [16, 32, 64, 128, 256];
/// Bytes per stored pixel in each of the patch and mask planes.
pub const BYTES_PER_PIXEL: u64 = 4;

/// Bytes of one slab: patch and mask planes of `depth` padded slots.
pub fn slab_footprint(bucket_edge: usize, depth: usize) -> u64 {
    (bucket_edge * bucket_edge) as u64 * depth as u64 * BYTES_PER_PIXEL * 2
}

/// Smallest bucket edge holding a `width x height` box, if any.
pub fn bucket_for(width: usize, height: usize) -> Option<usize> {
    let side = width.max(height);
    BUCKET_EDGES.iter().copied().find(|&e| side <= e)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlabPlan {
    pub bucket_edge: usize,
    pub object_ids: Vec<u64>,
}

impl SlabPlan {
    pub fn footprint(&self) -> u64 {
        slab_footprint(self.bucket_edge, self.object_ids.len())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BatchPlan {
    pub slabs: Vec<SlabPlan>,
    pub overflow: Vec<u64>,
}

impl BatchPlan {
    /// Every object on the per-object path.
    pub fn all_overflow(regions: &RegionSet) -> Self {
        BatchPlan {
            slabs: Vec::new(),
            overflow: regions.ids().collect(),
        }
    }

    pub fn slab_members(&self) -> usize {
        self.slabs.iter().map(|s| s.object_ids.len()).sum()
    }
}

/// Buckets objects by their longer box side and cuts each bucket into slabs
/// no larger than the budget. Objects over the largest bucket, or whose own
/// padded slot would exceed the budget, go to overflow.
pub fn plan_batches(regions: &RegionSet, budget: &MemoryBudget) -> BatchPlan {
    let mut buckets: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    let mut overflow = Vec::new();
    for o in regions.objects() {
        match bucket_for(o.bbox.width(), o.bbox.height()) {
            Some(edge) if slab_footprint(edge, 1) <= budget.bytes() => {
                buckets.entry(edge).or_default().push(o.object_id)
            }
            _ => overflow.push(o.object_id),
        }
    }
    let mut slabs = Vec::new();
    for (edge, ids) in buckets {
        let depth = (budget.bytes() / slab_footprint(edge, 1)) as usize;
        for chunk in ids.chunks(depth) {
            slabs.push(SlabPlan {
                bucket_edge: edge,
                object_ids: chunk.to_vec(),
            });
        }
    }
    BatchPlan { slabs, overflow }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::budget::GIB;
    use crate::region::{BoundingBox, ObjectMask, ObjectRecord};

    fn squares(sides: &[usize]) -> RegionSet {
        let mut x = 0i64;
        let objects = sides
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let b = BoundingBox::from_origin(x, 0, s, s).unwrap();
                x += s as i64;
                ObjectRecord::new(i as u64 + 1, "c", b, ObjectMask::from_fn(s, s, |_, _| true).unwrap()).unwrap()
            })
            .collect();
        RegionSet::new(x as u32, 4096, objects, "t").unwrap()
    }

    #[test]
    fn small_objects_share_one_slab() {
        let regions = squares(&[10; 100]);
        let plan = plan_batches(&regions, &MemoryBudget::new(GIB).unwrap());
        assert_eq!(plan.slabs.len(), 1);
        assert_eq!(plan.slabs[0].bucket_edge, 16);
        assert_eq!(plan.slabs[0].object_ids.len(), 100);
        assert!(plan.overflow.is_empty());
    }

    #[test]
    fn oversized_object_overflows() {
        let regions = squares(&[2048]);
        let plan = plan_batches(&regions, &MemoryBudget::new(GIB).unwrap());
        assert!(plan.slabs.is_empty());
        assert_eq!(plan.overflow, vec![1]);
    }

    #[test]
    fn buckets_by_longer_side() {
        assert_eq!(bucket_for(3, 17), Some(32));
        assert_eq!(bucket_for(16, 16), Some(16));
        assert_eq!(bucket_for(256, 1), Some(256));
        assert_eq!(bucket_for(257, 1), None);
        assert_eq!(slab_footprint(16, 1), 2048);
    }
}
