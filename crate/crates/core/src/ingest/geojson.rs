//! GeoJSON annotation parsing (pixel-space FeatureCollections as exported by
//! slide annotation tools).

use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub type Ring = Vec<(f64, f64)>;

/// One polygonal annotation. MultiPolygon features expand into one
/// annotation per part with ids suffixed `#0`, `#1`, ...
#[derive(Debug, Clone)]
pub struct Annotation {
    pub annotation_id: String,
    /// Integer identity used for the region set and the feature table.
    pub object_id: u64,
    pub class_label: String,
    pub outer_ring: Ring,
    pub holes: Vec<Ring>,
    /// The source feature with its geometry narrowed to this part.
    pub(crate) feature: Value,
}

/// Parsed annotations plus the surrounding document members needed to emit
/// an annotated copy later.
#[derive(Debug, Clone, Default)]
pub struct AnnotationSet {
    pub annotations: Vec<Annotation>,
    /// Top-level members of the collection other than `features`.
    pub(crate) collection: Map<String, Value>,
}

impl AnnotationSet {
    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn by_object_id(&self, object_id: u64) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.object_id == object_id)
    }
}

/// Parses a GeoJSON payload: a FeatureCollection, a single Feature, or a bare
/// array of Features.
pub fn parse_geojson(payload: &[u8]) -> Result<AnnotationSet> {
    let text = std::str::from_utf8(payload).map_err(|e| Error::Parse(e.to_string()))?;
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;

    let (features, collection) = match doc {
        Value::Array(items) => (items, Map::new()),
        Value::Object(mut obj) => match obj.get("type").and_then(Value::as_str) {
            Some("FeatureCollection") => {
                let features = match obj.remove("features") {
                    Some(Value::Array(items)) => items,
                    _ => return Err(Error::Parse("FeatureCollection without features".into())),
                };
                (features, obj)
            }
            Some("Feature") => (vec![Value::Object(obj)], Map::new()),
            other => {
                return Err(Error::Parse(format!(
                    "expected FeatureCollection or Feature, found {}",
                    other.unwrap_or("untyped object")
                )))
            }
        },
        _ => return Err(Error::Parse("top-level value is not an object".into())),
    };

    let mut annotations = Vec::with_capacity(features.len());
    for (index, feature) in features.into_iter().enumerate() {
        expand_feature(index, feature, &mut annotations)?;
    }

    let mut seen = std::collections::HashSet::new();
    for a in &annotations {
        if !seen.insert(a.annotation_id.as_str()) {
            return Err(Error::DuplicateId(a.annotation_id.clone()));
        }
    }

    // Numeric ids are kept as object ids so they survive the round trip;
    // anything else is numbered in document order.
    let numeric: Option<Vec<u64>> = annotations
        .iter()
        .map(|a| a.annotation_id.parse::<u64>().ok())
        .collect();
    match numeric {
        Some(ids) => {
            for (a, id) in annotations.iter_mut().zip(ids) {
                a.object_id = id;
            }
        }
        None => {
            for (i, a) in annotations.iter_mut().enumerate() {
                a.object_id = i as u64 + 1;
            }
        }
    }

    Ok(AnnotationSet {
        annotations,
        collection,
    })
}

fn feature_id(index: usize, feature: &Map<String, Value>) -> String {
    let from_value = |v: &Value| match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    };
    feature
        .get("id")
        .and_then(from_value)
        .or_else(|| feature.get("properties").and_then(|p| p.get("id")).and_then(from_value))
        .unwrap_or_else(|| index.to_string())
}

fn class_label(feature: &Map<String, Value>) -> String {
    let props = feature.get("properties");
    props
        .and_then(|p| p.get("classification"))
        .and_then(|c| c.get("name"))
        .and_then(Value::as_str)
        .or_else(|| props.and_then(|p| p.get("class")).and_then(Value::as_str))
        .unwrap_or("unlabeled")
        .to_string()
}

fn expand_feature(index: usize, feature: Value, out: &mut Vec<Annotation>) -> Result<()> {
    let Value::Object(obj) = feature else {
        return Err(Error::Parse(format!("feature {index} is not an object")));
    };
    let id = feature_id(index, &obj);
    let label = class_label(&obj);
    let geometry = obj.get("geometry").cloned().unwrap_or(Value::Null);
    let kind = geometry
        .get("type")
        .and_then(Value::as_str)
        .unwrap_or("null")
        .to_string();
    let coords = geometry.get("coordinates");

    match kind.as_str() {
        "Polygon" => {
            let rings = parse_polygon(&id, coords)?;
            let (outer, holes) = split_rings(rings);
            out.push(Annotation {
                annotation_id: id,
                object_id: 0,
                class_label: label,
                outer_ring: outer,
                holes,
                feature: Value::Object(obj),
            });
        }
        "MultiPolygon" => {
            let parts = coords
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("annotation {id}: MultiPolygon without coordinates")))?;
            for (k, part) in parts.iter().enumerate() {
                let part_id = format!("{id}#{k}");
                let rings = parse_polygon(&part_id, Some(part))?;
                let (outer, holes) = split_rings(rings);
                let mut narrowed = obj.clone();
                narrowed.insert("id".into(), Value::String(part_id.clone()));
                let mut geom = Map::new();
                geom.insert("type".into(), Value::String("Polygon".into()));
                geom.insert("coordinates".into(), part.clone());
                narrowed.insert("geometry".into(), Value::Object(geom));
                out.push(Annotation {
                    annotation_id: part_id,
                    object_id: 0,
                    class_label: label.clone(),
                    outer_ring: outer,
                    holes,
                    feature: Value::Object(narrowed),
                });
            }
        }
        _ => return Err(Error::UnsupportedGeometry { id, kind }),
    }
    Ok(())
}

fn split_rings(mut rings: Vec<Ring>) -> (Ring, Vec<Ring>) {
    let outer = rings.remove(0);
    (outer, rings)
}

fn parse_polygon(id: &str, coords: Option<&Value>) -> Result<Vec<Ring>> {
    let rings = coords
        .and_then(Value::as_array)
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::Parse(format!("annotation {id}: polygon without rings")))?;
    rings.iter().map(|r| parse_ring(id, r)).collect()
}

fn parse_ring(id: &str, ring: &Value) -> Result<Ring> {
    let points = ring
        .as_array()
        .ok_or_else(|| Error::Parse(format!("annotation {id}: ring is not an array")))?;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let xy = p
            .as_array()
            .filter(|c| c.len() >= 2)
            .and_then(|c| Some((c[0].as_f64()?, c[1].as_f64()?)))
            .ok_or_else(|| Error::Parse(format!("annotation {id}: bad position {p}")))?;
        if !xy.0.is_finite() || !xy.1.is_finite() {
            return Err(Error::Parse(format!("annotation {id}: non-finite position")));
        }
        out.push(xy);
    }
    if out.len() < 4 {
        return Err(Error::InvalidRing {
            id: id.to_string(),
            reason: format!("{} positions, need at least 4", out.len()),
        });
    }
    if out.first() != out.last() {
        return Err(Error::InvalidRing {
            id: id.to_string(),
            reason: "first and last positions differ".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{"type":"FeatureCollection","features":[
        {"type":"Feature","id":"a","properties":{"classification":{"name":"artery"}},
         "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]]]}}]}"#;

    #[test]
    fn single_square() {
        let set = parse_geojson(SQUARE.as_bytes()).unwrap();
        assert_eq!(set.len(), 1);
        let a = &set.annotations[0];
        assert_eq!(a.holes.len(), 0);
        assert_eq!(a.class_label, "artery");
        assert_eq!(a.object_id, 1);
    }

    #[test]
    fn square_with_hole() {
        let doc = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[
              [[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[3,1],[3,3],[1,3],[1,1]]]}}]}"#;
        let set = parse_geojson(doc.as_bytes()).unwrap();
        assert_eq!(set.annotations[0].holes.len(), 1);
        assert_eq!(set.annotations[0].class_label, "unlabeled");
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(parse_geojson(b"{"), Err(Error::Parse(_))));
    }

    #[test]
    fn point_geometry_names_feature() {
        let doc = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","id":"p1","properties":{},"geometry":{"type":"Point","coordinates":[1,2]}}]}"#;
        match parse_geojson(doc.as_bytes()) {
            Err(Error::UnsupportedGeometry { id, kind }) => {
                assert_eq!(id, "p1");
                assert_eq!(kind, "Point");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unclosed_ring() {
        let doc = r#"{"type":"Feature","id":"u","properties":{},"geometry":{"type":"Polygon",
            "coordinates":[[[0,0],[4,0],[4,4],[0,4]]]}}"#;
        assert!(matches!(parse_geojson(doc.as_bytes()), Err(Error::InvalidRing { .. })));
    }

    #[test]
    fn multipolygon_expands_with_suffixes() {
        let doc = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","id":"m","properties":{"class":"glom"},"geometry":{"type":"MultiPolygon","coordinates":[
              [[[0,0],[2,0],[2,2],[0,2],[0,0]]],
              [[[5,5],[7,5],[7,7],[5,7],[5,5]]]]}}]}"#;
        let set = parse_geojson(doc.as_bytes()).unwrap();
        let ids: Vec<_> = set.annotations.iter().map(|a| a.annotation_id.as_str()).collect();
        assert_eq!(ids, ["m#0", "m#1"]);
        assert_eq!(set.annotations[1].class_label, "glom");
        assert_eq!(set.annotations[1].feature["geometry"]["type"].as_str(), Some("Polygon"));
    }

    #[test]
    fn numeric_ids_become_object_ids() {
        let doc = r#"[
            {"type":"Feature","id":17,"properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[2,0],[2,2],[0,2],[0,0]]]}},
            {"type":"Feature","id":"4","properties":{},"geometry":{"type":"Polygon","coordinates":[[[3,0],[5,0],[5,2],[3,2],[3,0]]]}}]"#;
        let set = parse_geojson(doc.as_bytes()).unwrap();
        let ids: Vec<_> = set.annotations.iter().map(|a| a.object_id).collect();
        assert_eq!(ids, [17, 4]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let doc = r#"[
            {"type":"Feature","id":"x","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[2,0],[2,2],[0,2],[0,0]]]}},
            {"type":"Feature","id":"x","properties":{},"geometry":{"type":"Polygon","coordinates":[[[3,0],[5,0],[5,2],[3,2],[3,0]]]}}]"#;
        assert!(matches!(parse_geojson(doc.as_bytes()), Err(Error::DuplicateId(_))));
    }
}
