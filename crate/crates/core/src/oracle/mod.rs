//! Naive single-threaded reference path and the report comparing its
//! output against the engine.

mod features;

pub use features::oracle_features;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::SlideSource;
use crate::manifest::FeatureManifest;
use crate::region::{BoundingBox, RegionSet};
use crate::table::{FeatureRow, FeatureTable};

/// Relative tolerance between engine and reference values.
pub const REL_TOL: f64 = 1e-6;
/// Absolute floor for values near zero.
pub const ABS_TOL: f64 = 1e-9;

/// Ids of every object whose box meets the half-open window, by scanning.
pub fn oracle_query(regions: &RegionSet, window: &BoundingBox) -> Vec<u64> {
    regions
        .objects()
        .iter()
        .filter(|o| o.bbox.intersects(window))
        .map(|o| o.object_id)
        .collect()
}

/// Reference table for a whole slide, one object at a time.
pub fn oracle_table(regions: &RegionSet, slide: &dyn SlideSource, manifest: &FeatureManifest) -> Result<FeatureTable> {
    crate::batch::check_manifest(manifest)?;
    let mut table = FeatureTable::new(manifest);
    for o in regions.objects() {
        let patch = slide.read_patch(&o.bbox).map_err(|e| e.for_object(o.object_id))?;
        let values = oracle_features(&patch, &o.mask, &o.bbox).map_err(|e| e.for_object(o.object_id))?;
        table.rows.push(FeatureRow {
            object_id: o.object_id,
            class_label: o.class_label.clone(),
            center_x: values[18],
            center_y: values[19],
            values,
        });
    }
    Ok(table)
}

pub fn within_tolerance(value: f64, reference: f64) -> bool {
    if value == reference || (value.is_nan() && reference.is_nan()) {
        return true;
    }
    (value - reference).abs() <= (REL_TOL * reference.abs()).max(ABS_TOL)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDiscrepancy {
    pub feature: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Object with the largest absolute error.
    pub object_id: u64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub objects: usize,
    pub features: usize,
    pub passed: bool,
    /// Features with at least one out-of-tolerance value, worst first.
    pub discrepancies: Vec<FeatureDiscrepancy>,
}

impl OracleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compares two tables row by row. Both must list the same objects and
/// columns in the same order.
pub fn compare_tables(engine: &FeatureTable, reference: &FeatureTable) -> Result<OracleReport> {
    if engine.feature_names != reference.feature_names {
        return Err(Error::Table("tables have different feature columns".into()));
    }
    if engine.rows.len() != reference.rows.len()
        || engine
            .rows
            .iter()
            .zip(&reference.rows)
            .any(|(a, b)| a.object_id != b.object_id)
    {
        return Err(Error::Table("tables cover different objects".into()));
    }
    let mut discrepancies = Vec::new();
    for (j, name) in engine.feature_names.iter().enumerate() {
        let mut worst: Option<FeatureDiscrepancy> = None;
        for (a, b) in engine.rows.iter().zip(&reference.rows) {
            let (v, r) = (a.values[j], b.values[j]);
            if within_tolerance(v, r) {
                continue;
            }
            let abs = if v.is_nan() || r.is_nan() {
                f64::INFINITY
            } else {
                (v - r).abs()
            };
            let rel = if r == 0.0 { f64::INFINITY } else { abs / r.abs() };
            let d = worst.get_or_insert(FeatureDiscrepancy {
                feature: name.clone(),
                max_abs_error: 0.0,
                max_rel_error: 0.0,
                object_id: a.object_id,
                failures: 0,
            });
            d.failures += 1;
            if abs > d.max_abs_error {
                d.max_abs_error = abs;
                d.object_id = a.object_id;
            }
            d.max_rel_error = d.max_rel_error.max(rel);
        }
        discrepancies.extend(worst);
    }
    discrepancies.sort_by(|a, b| b.max_abs_error.total_cmp(&a.max_abs_error));
    Ok(OracleReport {
        objects: engine.rows.len(),
        features: engine.feature_names.len(),
        passed: discrepancies.is_empty(),
        discrepancies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(vals: &[f64]) -> FeatureTable {
        FeatureTable {
            feature_names: vec!["a".into()],
            rows: vals
                .iter()
                .enumerate()
                .map(|(i, &v)| FeatureRow {
                    object_id: i as u64,
                    class_label: String::new(),
                    center_x: 0.0,
                    center_y: 0.0,
                    values: vec![v],
                })
                .collect(),
        }
    }

    #[test]
    fn tolerance_rule() {
        assert!(within_tolerance(1.0 + 5e-7, 1.0));
        assert!(!within_tolerance(1.0 + 2e-6, 1.0));
        assert!(within_tolerance(5e-10, 0.0));
        assert!(within_tolerance(f64::NAN, f64::NAN));
        assert!(!within_tolerance(f64::NAN, 0.0));
    }

    #[test]
    fn report_names_worst_object() {
        let r = compare_tables(&table(&[1.0, 2.0, 3.5]), &table(&[1.0, 2.1, 3.0])).unwrap();
        assert!(!r.passed);
        let d = &r.discrepancies[0];
        assert_eq!((d.object_id, d.failures), (2, 2));
        assert_eq!(d.max_abs_error, 0.5);
        assert!(r.to_json().contains("\"feature\": \"a\""));
    }

    #[test]
    fn mismatched_objects_rejected() {
        assert!(compare_tables(&table(&[1.0]), &table(&[1.0, 2.0])).is_err());
    }
}
