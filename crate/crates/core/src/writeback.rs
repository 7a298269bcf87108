//! Joins feature rows back onto their annotations through the spatial index.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::index::SpatialIndex;
use crate::ingest::AnnotationSet;
use crate::table::FeatureTable;

/// Property key that carries the feature object on each output feature.
pub const PATHOMICS_KEY: &str = "pathomics";

fn number(v: f64) -> Value {
    Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

/// Annotated copy of the input collection. Every row is located through a
/// point query at its centroid pixel; a row the index cannot place is a
/// join error. Annotations without a row get a `null` feature object.
pub fn write_back(index: &SpatialIndex, table: &FeatureTable, annotations: &AnnotationSet) -> Result<Value> {
    let mut by_id = std::collections::HashMap::with_capacity(table.rows.len());
    for row in &table.rows {
        let hits = index.query_point(row.center_x.floor() as i64, row.center_y.floor() as i64);
        if hits.binary_search(&row.object_id).is_err() {
            return Err(Error::Join(row.object_id));
        }
        by_id.insert(row.object_id, row);
    }

    let features: Vec<Value> = annotations
        .annotations
        .iter()
        .map(|a| {
            let mut feature = a.feature.clone();
            let pathomics = match by_id.get(&a.object_id) {
                Some(row) => Value::Object(
                    table
                        .feature_names
                        .iter()
                        .zip(&row.values)
                        .map(|(name, &v)| (name.clone(), number(v)))
                        .collect::<Map<_, _>>(),
                ),
                None => Value::Null,
            };
            if let Value::Object(obj) = &mut feature {
                let props = obj.entry("properties").or_insert_with(|| Value::Object(Map::new()));
                if !props.is_object() {
                    *props = Value::Object(Map::new());
                }
                props
                    .as_object_mut()
                    .expect("properties is an object")
                    .insert(PATHOMICS_KEY.to_string(), pathomics);
            }
            feature
        })
        .collect();

    let mut out = Map::new();
    out.insert("type".into(), Value::String("FeatureCollection".into()));
    for (k, v) in &annotations.collection {
        if k != "type" {
            out.insert(k.clone(), v.clone());
        }
    }
    out.insert("features".into(), Value::Array(features));
    Ok(Value::Object(out))
}
