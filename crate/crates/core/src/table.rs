//! Per-object feature rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifest::FeatureManifest;

pub const META_COLUMNS: [&str; 4] = ["object_id", "class_label", "center_x", "center_y"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub object_id: u64,
    pub class_label: String,
    pub center_x: f64,
    pub center_y: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

/// Shortest round-trip decimal; non-finite values become `null`, and
/// negative zero is written as `0`.
pub fn format_value(v: f64) -> String {
    if !v.is_finite() {
        "null".to_string()
    } else if v == 0.0 {
        "0".to_string()
    } else {
        v.to_string()
    }
}

fn parse_value(s: &str) -> Result<f64> {
    if s == "null" || s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse().map_err(|_| Error::Table(format!("cannot parse value {s:?}")))
}

impl FeatureTable {
    pub fn new(manifest: &FeatureManifest) -> Self {
        FeatureTable {
            feature_names: manifest.names().map(str::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Values of one feature column in row order.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column_index(name)
            .ok_or_else(|| Error::Table(format!("no column {name}")))?;
        Ok(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn row(&self, object_id: u64) -> Option<&FeatureRow> {
        self.rows
            .binary_search_by_key(&object_id, |r| r.object_id)
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn header(&self) -> Vec<String> {
        META_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(self.feature_names.iter().cloned())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        let mut record: Vec<String> = Vec::with_capacity(4 + self.feature_names.len());
        for row in &self.rows {
            record.clear();
            record.push(row.object_id.to_string());
            record.push(row.class_label.clone());
            record.push(format_value(row.center_x));
            record.push(format_value(row.center_y));
            record.extend(row.values.iter().map(|&v| format_value(v)));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(file)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 4 || header[..4] != META_COLUMNS {
            return Err(Error::Table(format!(
                "header must start with {}",
                META_COLUMNS.join(",")
            )));
        }
        let feature_names = header[4..].to_vec();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::Table(format!(
                    "row has {} fields, header has {}",
                    record.len(),
                    header.len()
                )));
            }
            let object_id = record[0]
                .parse()
                .map_err(|_| Error::Table(format!("bad object_id {:?}", &record[0])))?;
            rows.push(FeatureRow {
                object_id,
                class_label: record[1].to_string(),
                center_x: parse_value(&record[2])?,
                center_y: parse_value(&record[3])?,
                values: record.iter().skip(4).map(parse_value).collect::<Result<_>>()?,
            });
        }
        Ok(FeatureTable { feature_names, rows })
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_value(100.0), "100");
        assert_eq!(format_value(-0.0), "0");
        assert_eq!(format_value(f64::NAN), "null");
        assert_eq!(format_value(0.1), "0.1");
        let x = 12.727922061357855;
        assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_round_trip() {
        let manifest = FeatureManifest::v1();
        let mut t = FeatureTable::new(&manifest);
        t.rows.push(FeatureRow {
            object_id: 3,
            class_label: "artery, small".into(),
            center_x: 4.5,
            center_y: 1.0 / 3.0,
            values: (0..247).map(|i| i as f64 / 7.0).collect(),
        });
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = FeatureTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.header().len(), 251);
    }

    #[test]
    fn header_only_table() {
        let t = FeatureTable::new(&FeatureManifest::v1());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end().split(',').count(), 251);
    }
}
