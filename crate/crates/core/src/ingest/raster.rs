//! Polygon rasterization at pixel centers with the even-odd rule.
//!
//! A pixel `(x, y)` is set iff its center `(x + 0.5, y + 0.5)` is inside the
//! outer ring and outside every hole. Edge crossings are counted on the
//! half-open interval `[y0, y1)` of each edge and a center lying exactly on a
//! crossing counts as past it, which gives the usual top-left fill rule.

use serde::Serialize;

use super::geojson::{Annotation, AnnotationSet};
use crate::error::{Error, Result};
use crate::region::{BoundingBox, ObjectMask, ObjectRecord, RegionSet};

/// Rasterizes a polygon with holes, clipped to the slide. Returns `None` when
/// no pixel center is covered.
pub fn rasterize_rings(
    outer: &[(f64, f64)],
    holes: &[Vec<(f64, f64)>],
    slide_width: u32,
    slide_height: u32,
) -> Option<(BoundingBox, ObjectMask)> {
    let rings = std::iter::once(outer).chain(holes.iter().map(Vec::as_slice));
    let edges: Vec<[(f64, f64); 2]> = rings
        .flat_map(|r| r.windows(2).map(|w| [w[0], w[1]]))
        .filter(|[a, b]| a.1 != b.1)
        .collect();
    if edges.is_empty() {
        return None;
    }

    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, y) in outer {
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    let y_start = (lo_y - 0.5).floor().max(0.0) as i64;
    let y_end = ((hi_y + 0.5).ceil() as i64).min(slide_height as i64);

    let mut spans: Vec<(i64, i64, i64)> = Vec::new();
    let mut crossings: Vec<f64> = Vec::new();
    for y in y_start..y_end {
        let yc = y as f64 + 0.5;
        crossings.clear();
        for &[(x0, y0), (x1, y1)] in &edges {
            if (y0 <= yc) != (y1 <= yc) {
                crossings.push(x0 + (yc - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut x = ((a - 0.5).floor() as i64).max(0);
            let limit = ((b + 0.5).ceil() as i64).min(slide_width as i64);
            let mut start = None;
            while x < limit {
                let xc = x as f64 + 0.5;
                let inside = a <= xc && xc < b;
                match (inside, start) {
                    (true, None) => start = Some(x),
                    (false, Some(s)) => {
                        spans.push((y, s, x));
                        start = None;
                    }
                    _ => {}
                }
                x += 1;
            }
            if let Some(s) = start {
                spans.push((y, s, limit));
            }
        }
    }
    if spans.is_empty() {
        return None;
    }

    let min_y = spans.iter().map(|s| s.0).min()?;
    let max_y = spans.iter().map(|s| s.0).max()? + 1;
    let min_x = spans.iter().map(|s| s.1).min()?;
    let max_x = spans.iter().map(|s| s.2).max()?;
    let bbox = BoundingBox::new(min_x, min_y, max_x, max_y).ok()?;
    let (w, h) = bbox.dims();
    let mut bits = vec![false; w * h];
    for (y, s, e) in spans {
        let row = (y - min_y) as usize * w;
        for x in s..e {
            bits[row + (x - min_x) as usize] = true;
        }
    }
    let mask = ObjectMask::new(w, h, bits).ok()?;
    Some((bbox, mask))
}

/// Rasterizes one annotation into an object record.
pub fn rasterize_annotation(annotation: &Annotation, slide_width: u32, slide_height: u32) -> Result<ObjectRecord> {
    let (bbox, mask) = rasterize_rings(&annotation.outer_ring, &annotation.holes, slide_width, slide_height)
        .ok_or_else(|| Error::EmptyObject {
            id: annotation.annotation_id.clone(),
        })?;
    ObjectRecord::new(annotation.object_id, annotation.class_label.clone(), bbox, mask)
}

/// Diagnostic record for an annotation that produced no object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedAnnotation {
    pub warning: &'static str,
    pub annotation_id: String,
    pub object_id: u64,
}

/// Rasterizes every annotation; empty ones are skipped and reported.
pub fn regions_from_annotations(
    set: &AnnotationSet,
    slide_width: u32,
    slide_height: u32,
    source_id: &str,
) -> Result<(RegionSet, Vec<SkippedAnnotation>)> {
    use rayon::prelude::*;

    let results: Vec<Result<ObjectRecord>> = set
        .annotations
        .par_iter()
        .map(|a| rasterize_annotation(a, slide_width, slide_height))
        .collect();
    let mut objects = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (a, r) in set.annotations.iter().zip(results) {
        match r {
            Ok(o) => objects.push(o),
            Err(Error::EmptyObject { id }) => skipped.push(SkippedAnnotation {
                warning: "EmptyObject",
                annotation_id: id,
                object_id: a.object_id,
            }),
            Err(e) => return Err(e),
        }
    }
    let regions = RegionSet::new(slide_width, slide_height, objects, source_id)?;
    Ok((regions, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut r = points.to_vec();
        r.push(points[0]);
        r
    }

    /// Classic crossing-number test at a single point.
    fn even_odd(rings: &[Vec<(f64, f64)>], px: f64, py: f64) -> bool {
        let mut inside = false;
        for r in rings {
            for w in r.windows(2) {
                let ((xi, yi), (xj, yj)) = (w[0], w[1]);
                if (yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn oracle_area(rings: &[Vec<(f64, f64)>], w: u32, h: u32) -> u64 {
        let mut n = 0;
        for y in 0..h {
            for x in 0..w {
                if even_odd(rings, x as f64 + 0.5, y as f64 + 0.5) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn square_covers_sixteen_centers() {
        let outer = ring(&[(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)]);
        let (bbox, mask) = rasterize_rings(&outer, &[], 20, 20).unwrap();
        assert_eq!(bbox, BoundingBox::new(0, 0, 4, 4).unwrap());
        assert_eq!(mask.area(), 16);
        assert_eq!(oracle_area(&[outer], 20, 20), 16);
    }

    #[test]
    fn hole_is_subtracted() {
        let outer = ring(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]);
        let hole = ring(&[(3.0, 3.0), (7.0, 3.0), (7.0, 7.0), (3.0, 7.0)]);
        let (_, mask) = rasterize_rings(&outer, std::slice::from_ref(&hole), 20, 20).unwrap();
        assert_eq!(mask.area(), 84);
        assert_eq!(oracle_area(&[outer, hole], 20, 20), 84);
    }

    #[test]
    fn collinear_ring_is_empty() {
        let outer = ring(&[(0.0, 0.0), (2.0, 2.0), (4.0, 4.0)]);
        assert!(rasterize_rings(&outer, &[], 20, 20).is_none());
    }

    #[test]
    fn clipped_to_slide() {
        let outer = ring(&[(-5.0, -5.0), (3.0, -5.0), (3.0, 3.0), (-5.0, 3.0)]);
        let (bbox, mask) = rasterize_rings(&outer, &[], 10, 10).unwrap();
        assert_eq!(bbox, BoundingBox::new(0, 0, 3, 3).unwrap());
        assert_eq!(mask.area(), 9);
    }

    #[test]
    fn center_on_edge_follows_top_left_rule() {
        // Edges at x = 0.5 and x = 2.5 pass exactly through pixel centers.
        let outer = ring(&[(0.5, 0.0), (2.5, 0.0), (2.5, 1.0), (0.5, 1.0)]);
        let (bbox, mask) = rasterize_rings(&outer, &[], 10, 10).unwrap();
        assert_eq!((bbox.min_x, bbox.max_x), (0, 2));
        assert_eq!(mask.area(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matches_even_odd_oracle(
            cx in 10.0f64..30.0, cy in 10.0f64..30.0,
            radii in proptest::collection::vec(2.0f64..9.0, 5..12),
            phase in 0.0f64..std::f64::consts::TAU,
        ) {
            let n = radii.len();
            let pts: Vec<(f64, f64)> = radii.iter().enumerate().map(|(i, r)| {
                let t = phase + i as f64 * std::f64::consts::TAU / n as f64;
                (cx + r * t.cos(), cy + r * t.sin())
            }).collect();
            let outer = ring(&pts);
            let area = rasterize_rings(&outer, &[], 40, 40).map(|(_, m)| m.area()).unwrap_or(0);
            prop_assert_eq!(area, oracle_area(&[outer], 40, 40));
        }
    }
}
