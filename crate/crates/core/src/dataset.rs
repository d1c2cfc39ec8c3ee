//! CSV ingestion and output of labeled streams.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DriftMemError, Result};
use crate::types::{Label, LabeledInstance};

/// Which columns of a CSV file hold the label and the features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: String,
    /// Raw label value that maps to [`Label::Positive`].
    pub positive_value: String,
    /// Raw label value that maps to [`Label::Negative`]. When `None`, every
    /// value other than `positive_value` is negative.
    #[serde(default)]
    pub negative_value: Option<String>,
    /// Feature columns in order; `None` takes every non-label column.
    #[serde(default)]
    pub feature_columns: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn new(label_column: impl Into<String>, positive_value: impl Into<String>) -> Self {
        CsvSchema {
            label_column: label_column.into(),
            positive_value: positive_value.into(),
            negative_value: None,
            feature_columns: None,
        }
    }

    /// Schema of the files written by [`write_csv_stream`].
    pub fn generated() -> Self {
        CsvSchema {
            negative_value: Some("-1".into()),
            ..CsvSchema::new("label", "1")
        }
    }

    fn map_label(&self, raw: &str) -> Option<Label> {
        if raw == self.positive_value {
            Some(Label::Positive)
        } else {
            match &self.negative_value {
                Some(neg) if raw != neg => None,
                _ => Some(Label::Negative),
            }
        }
    }
}

/// Reads a header-led, comma-separated file into a finite stream. Row
/// numbers (0-based, header excluded) become arrival indices.
pub fn load_csv_dataset(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<LabeledInstance>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(DriftMemError::Dataset {
            path: path.to_owned(),
            message: "empty file".into(),
        });
    }
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DriftMemError::Dataset {
                path: path.to_owned(),
                message: format!("missing column `{name}`"),
            })
    };
    let label_idx = find(&schema.label_column)?;
    let feature_idx: Vec<usize> = match &schema.feature_columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != label_idx).collect(),
    };
    if feature_idx.is_empty() {
        return Err(DriftMemError::Dataset {
            path: path.to_owned(),
            message: "no feature columns".into(),
        });
    }

    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse_err = |col: usize, message: String| DriftMemError::Parse {
            path: path.to_owned(),
            row: row + 1,
            column: headers.get(col).unwrap_or("?").to_owned(),
            message,
        };
        let mut features = Vec::with_capacity(feature_idx.len());
        for &c in &feature_idx {
            let cell = record.get(c).ok_or_else(|| parse_err(c, "missing cell".into()))?;
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(c, format!("non-numeric value `{cell}`")))?;
            if !v.is_finite() {
                return Err(parse_err(c, format!("non-finite value `{cell}`")));
            }
            features.push(v);
        }
        let raw = record
            .get(label_idx)
            .ok_or_else(|| parse_err(label_idx, "missing cell".into()))?;
        let label = schema
            .map_label(raw)
            .ok_or_else(|| parse_err(label_idx, format!("unmapped label `{raw}`")))?;
        out.push(LabeledInstance::new(features, label, row as u64));
    }
    if out.is_empty() {
        return Err(DriftMemError::Dataset {
            path: path.to_owned(),
            message: "no data rows".into(),
        });
    }
    Ok(out)
}

/// Writes `f1..fd,label` rows, labels as `1` / `-1`, features in shortest
/// round-trip form so reloading reproduces them bit for bit.
pub fn write_csv_stream(path: impl AsRef<Path>, instances: &[LabeledInstance]) -> Result<()> {
    let mut w = std::io::BufWriter::new(File::create(path)?);
    let d = instances.first().map_or(0, LabeledInstance::dim);
    let mut header: Vec<String> = (1..=d).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    writeln!(w, "{}", header.join(","))?;
    for inst in instances {
        for v in &inst.features {
            write!(w, "{v},")?;
        }
        writeln!(w, "{}", inst.label)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-feature min-max scaling to `[0, 1]`. Constant features map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxNormalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxNormalizer {
    pub fn fit(instances: &[LabeledInstance]) -> Option<Self> {
        let first = instances.first()?;
        let mut min = first.features.clone();
        let mut max = first.features.clone();
        for inst in instances {
            for (j, &v) in inst.features.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Some(MinMaxNormalizer { min, max })
    }

    pub fn apply(&self, features: &mut [f64]) {
        for (j, v) in features.iter_mut().enumerate() {
            let span = self.max[j] - self.min[j];
            *v = if span > 0.0 { (*v - self.min[j]) / span } else { 0.0 };
        }
    }

    pub fn apply_all(&self, instances: &mut [LabeledInstance]) {
        for inst in instances {
            self.apply(&mut inst.features);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_rows_bit_equal() {
        let f = write("a,b,y\n0.1,2.5,1\n-3e-5,7,-1\n1.7976931348623157e308,0,1\n");
        let rows = load_csv_dataset(f.path(), &CsvSchema::new("y", "1")).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].features, vec![0.1, 2.5]);
        assert_eq!(rows[1].features, vec![-3e-5, 7.0]);
        assert_eq!(rows[2].features[0], f64::MAX);
        assert_eq!(rows[1].label, Label::Negative);
        assert_eq!(
            rows.iter().map(|r| r.arrival_index).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn string_labels_and_eight_features() {
        let header = "t1,t2,t3,t4,t5,t6,t7,t8,weather";
        let f = write(&format!("{header}\n1,2,3,4,5,6,7,8,rain\n1,2,3,4,5,6,7,8,dry\n"));
        let rows = load_csv_dataset(f.path(), &CsvSchema::new("weather", "rain")).unwrap();
        assert_eq!(rows[0].dim(), 8);
        assert_eq!(rows[0].label, Label::Positive);
        assert_eq!(rows[1].label, Label::Negative);
    }

    #[test]
    fn errors_carry_location() {
        let f = write("a,y\n1,1\nx,1\n");
        let err = load_csv_dataset(f.path(), &CsvSchema::new("y", "1")).unwrap_err();
        match err {
            DriftMemError::Parse { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            e => panic!("unexpected {e}"),
        }
        let f = write("a,y\n1,1\n");
        assert!(matches!(
            load_csv_dataset(f.path(), &CsvSchema::new("label", "1")),
            Err(DriftMemError::Dataset { .. })
        ));
        let f = write("");
        assert!(load_csv_dataset(f.path(), &CsvSchema::new("y", "1")).is_err());
        let f = write("a,y\n");
        assert!(load_csv_dataset(f.path(), &CsvSchema::new("y", "1")).is_err());
    }

    #[test]
    fn write_then_load_round_trips() {
        let rows = vec![
            LabeledInstance::new(vec![0.1 + 0.2, 1.0 / 3.0], Label::Positive, 0),
            LabeledInstance::new(vec![-7.25, 1e-300], Label::Negative, 1),
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv_stream(f.path(), &rows).unwrap();
        let back = load_csv_dataset(f.path(), &CsvSchema::generated()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn min_max_scales_to_unit_range() {
        let mut rows = vec![
            LabeledInstance::new(vec![2.0, 5.0], Label::Positive, 0),
            LabeledInstance::new(vec![4.0, 5.0], Label::Negative, 1),
        ];
        let norm = MinMaxNormalizer::fit(&rows).unwrap();
        norm.apply_all(&mut rows);
        assert_eq!(rows[0].features, vec![0.0, 0.0]);
        assert_eq!(rows[1].features, vec![1.0, 0.0]);
    }
}
