use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::profile::{classify_column, parse_number, profile_numeric, ColumnProfile};
use crate::engine::Tensor;
use crate::error::{Error, Result};

/// Which CSV column holds the labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for LabelColumn {
    /// Header names win; otherwise a bare integer is read as a column index.
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

/// Tabular data split into a feature matrix and a label column.
///
/// Features are row-major; NaN marks a missing or non-numeric cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    features: Vec<f64>,
    rows: usize,
    label_name: String,
    raw_labels: Vec<String>,
    labels: Vec<f64>,
    profiles: Vec<ColumnProfile>,
    label_profile: ColumnProfile,
}

impl Dataset {
    /// Builds a dataset from raw string columns.
    pub fn from_raw_columns(
        names: Vec<String>,
        columns: &[Vec<String>],
        label_name: String,
        raw_labels: Vec<String>,
    ) -> Result<Self> {
        let rows = raw_labels.len();
        if names.len() != columns.len() {
            return Err(Error::shape("feature names", columns.len(), names.len()));
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(Error::shape(format!("column {}", names[i]), rows, c.len()));
        }
        let mut profiles = Vec::with_capacity(columns.len());
        let mut numeric_cols = Vec::with_capacity(columns.len());
        for (name, cells) in names.iter().zip(columns) {
            let (profile, values) = classify_column(name, cells);
            profiles.push(profile);
            numeric_cols.push(values);
        }
        let (label_profile, _) = classify_column(&label_name, &raw_labels);
        let labels = raw_labels
            .iter()
            .map(|c| {
                if super::is_missing_token(c) {
                    f64::NAN
                } else {
                    parse_number(c).unwrap_or(f64::NAN)
                }
            })
            .collect();
        Ok(Dataset {
            features: interleave(&numeric_cols, rows),
            feature_names: names,
            rows,
            label_name,
            raw_labels,
            labels,
            profiles,
            label_profile,
        })
    }

    /// Builds a dataset from numeric columns and numeric labels.
    pub fn from_numeric(
        names: Vec<String>,
        columns: &[Vec<f64>],
        label_name: String,
        labels: Vec<f64>,
    ) -> Result<Self> {
        let rows = labels.len();
        if names.len() != columns.len() {
            return Err(Error::shape("feature names", columns.len(), names.len()));
        }
        if let Some((i, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(Error::shape(format!("column {}", names[i]), rows, c.len()));
        }
        let raw_labels: Vec<String> = labels.iter().map(|v| format_cell(*v)).collect();
        let (label_profile, _) = classify_column(&label_name, &raw_labels);
        Ok(Dataset {
            features: interleave(columns, rows),
            profiles: names.iter().zip(columns).map(|(n, c)| profile_numeric(n, c)).collect(),
            feature_names: names,
            rows,
            label_name,
            raw_labels,
            labels,
            label_profile,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn raw_labels(&self) -> &[String] {
        &self.raw_labels
    }

    /// Parsed labels; NaN where the cell is missing or not a number.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn profiles(&self) -> &[ColumnProfile] {
        &self.profiles
    }

    pub fn label_profile(&self) -> &ColumnProfile {
        &self.label_profile
    }

    pub fn feature(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.num_features() + col]
    }

    pub fn feature_column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.feature(r, col)).collect()
    }

    pub fn feature_columns(&self) -> Vec<Vec<f64>> {
        (0..self.num_features()).map(|c| self.feature_column(c)).collect()
    }

    /// `(rows, num_features)` feature matrix.
    pub fn feature_tensor(&self) -> Tensor {
        Tensor::matrix(self.rows, self.num_features(), self.features.clone())
            .expect("dataset dimensions are consistent")
    }

    /// `(rows, 1)` label matrix for regression.
    pub fn label_tensor(&self) -> Tensor {
        Tensor::matrix(self.rows, 1, self.labels.clone()).expect("one label per row")
    }

    /// Labels as class ids; fails unless every label is a non-negative integer.
    pub fn class_labels(&self) -> Result<Vec<usize>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                as_class_id(v).ok_or_else(|| {
                    Error::contract(format!(
                        "label {:?} in row {i} is not a class id",
                        self.raw_labels[i]
                    ))
                })
            })
            .collect()
    }

    /// One-hot label matrix with `classes` columns. Rows whose label is not a
    /// class id below `classes` are all NaN.
    pub fn one_hot(&self, classes: usize) -> Result<Tensor> {
        if classes == 0 {
            return Err(Error::contract("one-hot encoding needs at least one class"));
        }
        let mut values = Vec::with_capacity(self.rows * classes);
        for &v in &self.labels {
            match as_class_id(v).filter(|&c| c < classes) {
                Some(c) => values.extend((0..classes).map(|j| if j == c { 1.0 } else { 0.0 })),
                None => values.extend(std::iter::repeat_n(f64::NAN, classes)),
            }
        }
        Tensor::matrix(self.rows, classes, values)
    }

    /// Same data with rows reordered: row `i` of the result is row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rows];
        if order.len() != self.rows || order.iter().any(|&i| i >= self.rows || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::contract("row order must be a permutation of all rows"));
        }
        let nf = self.num_features();
        let mut out = self.clone();
        out.features = order
            .iter()
            .flat_map(|&r| self.features[r * nf..(r + 1) * nf].iter().copied())
            .collect();
        out.raw_labels = order.iter().map(|&r| self.raw_labels[r].clone()).collect();
        out.labels = order.iter().map(|&r| self.labels[r]).collect();
        Ok(out)
    }

    /// Replaces the labels, keeping features.
    pub fn with_labels(&self, raw_labels: Vec<String>) -> Result<Self> {
        if raw_labels.len() != self.rows {
            return Err(Error::shape("labels", self.rows, raw_labels.len()));
        }
        let (label_profile, _) = classify_column(&self.label_name, &raw_labels);
        let labels = raw_labels
            .iter()
            .map(|c| {
                if super::is_missing_token(c) {
                    f64::NAN
                } else {
                    parse_number(c).unwrap_or(f64::NAN)
                }
            })
            .collect();
        Ok(Dataset {
            raw_labels,
            labels,
            label_profile,
            ..self.clone()
        })
    }

    /// Replaces the feature columns (NaN = missing), keeping labels.
    pub fn with_numeric_features(&self, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.len() != self.num_features() {
            return Err(Error::shape("feature columns", self.num_features(), columns.len()));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != self.rows) {
            return Err(Error::shape("feature column", self.rows, c.len()));
        }
        Ok(Dataset {
            features: interleave(columns, self.rows),
            profiles: self
                .feature_names
                .iter()
                .zip(columns)
                .map(|(n, c)| profile_numeric(n, c))
                .collect(),
            ..self.clone()
        })
    }

    /// Replaces the listed feature columns (NaN = missing) and re-profiles
    /// them as numeric; other columns keep their profiles.
    pub fn with_columns_replaced(&self, updates: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        let mut columns = self.feature_columns();
        let mut profiles = self.profiles.clone();
        for (idx, values) in updates {
            if idx >= columns.len() {
                return Err(Error::shape("feature column index", columns.len(), idx));
            }
            if values.len() != self.rows {
                return Err(Error::shape("feature column", self.rows, values.len()));
            }
            profiles[idx] = profile_numeric(&self.feature_names[idx], &values);
            columns[idx] = values;
        }
        Ok(Dataset {
            features: interleave(&columns, self.rows),
            profiles,
            ..self.clone()
        })
    }

    /// Writes features then the label column as CSV with a header row.
    /// Missing feature cells are written empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::parse(format!("writing CSV: {e}"));
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        w.write_record(&header).map_err(to_err)?;
        for r in 0..self.rows {
            let mut record: Vec<String> = (0..self.num_features())
                .map(|c| {
                    let v = self.feature(r, c);
                    if v.is_nan() {
                        String::new()
                    } else {
                        format_cell(v)
                    }
                })
                .collect();
            record.push(self.raw_labels[r].clone());
            w.write_record(&record).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::parse(format!("writing CSV: {e}")))?;
        Ok(())
    }
}

/// Shortest decimal text that parses back to the same value.
fn format_cell(v: f64) -> String {
    format!("{v}")
}

fn as_class_id(v: f64) -> Option<usize> {
    (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < u32::MAX as f64).then_some(v as usize)
}

fn interleave(columns: &[Vec<f64>], rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * columns.len());
    for r in 0..rows {
        out.extend(columns.iter().map(|c| c[r]));
    }
    out
}

/// Reads a CSV with a header row. Every column except the label column is a
/// feature.
pub fn read_dataset<R: Read>(input: R, label: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(format!("reading header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::parse("missing header row"));
    }
    let label_idx = match label {
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .or_else(|| name.parse::<usize>().ok().filter(|&i| i < header.len())),
        LabelColumn::Index(i) => Some(*i).filter(|&i| i < header.len()),
    }
    .ok_or_else(|| {
        Error::parse(format!(
            "label column {label:?} not found; columns are {header:?}"
        ))
    })?;

    let width = header.len();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); width];
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, len, .. } => Error::parse(format!(
                "row {} has {len} fields, expected {width}",
                pos.as_ref().map_or(n as u64 + 2, |p| p.line())
            )),
            _ => Error::parse(format!("row {}: {e}", n + 2)),
        })?;
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            col.push(cell.to_string());
        }
    }
    if columns[0].is_empty() {
        return Err(Error::parse("dataset has a header but no rows"));
    }
    let raw_labels = columns.remove(label_idx);
    let mut names = header;
    let label_name = names.remove(label_idx);
    Dataset::from_raw_columns(names, &columns, label_name, raw_labels)
}

pub fn load_dataset(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(file, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::DataKind;

    fn read(text: &str, label: &str) -> Result<Dataset> {
        read_dataset(text.as_bytes(), &LabelColumn::from(label))
    }

    #[test]
    fn empty_cell_counts_as_missing() {
        let ds = read("a,b,y\n1,2,0\n3,,1\n5,6,0\n", "y").unwrap();
        assert_eq!(ds.num_features(), 2);
        assert_eq!(ds.profiles()[1].missing_count, 1);
        assert!(ds.feature(1, 1).is_nan());
    }

    #[test]
    fn truck_shaped_file_has_seven_features() {
        let mut text = String::from("year,km,fuel,seller,transmission,owner,mileage,price\n");
        text.push_str("2014,50000,1,0,1,1,18.5,450000\n2012,70000,0,1,1,2,21.0,300000\n");
        let ds = read(&text, "price").unwrap();
        assert_eq!(ds.num_features(), 7);
        assert_eq!(ds.label_name(), "price");
        assert_eq!(ds.labels(), &[450000.0, 300000.0]);
    }

    #[test]
    fn categorical_column_detected() {
        let ds = read("color,y\nred,1\nblue,0\nred,1\n", "y").unwrap();
        let p = &ds.profiles()[0];
        assert_eq!(p.kind, DataKind::Categorical);
        assert_eq!(p.distinct_count, 2);
    }

    #[test]
    fn label_by_index() {
        let ds = read("a,b\n1,2\n3,4\n", "0").unwrap();
        assert_eq!(ds.label_name(), "a");
        assert_eq!(ds.feature_names(), &["b".to_string()]);
    }

    #[test]
    fn structural_errors() {
        assert!(read("", "y").unwrap_err().to_string().contains("header"));
        assert!(read("a,b\n1,2\n", "y").unwrap_err().to_string().contains("not found"));
        let ragged = read("a,y\n1,2\n3\n", "y").unwrap_err().to_string();
        assert!(ragged.contains("row 3"), "{ragged}");
        assert!(load_dataset(Path::new("/nonexistent/x.csv"), &"y".into()).is_err());
    }

    #[test]
    fn one_hot_and_class_ids() {
        let ds = read("a,y\n1,0\n2,2\n3,1\n", "y").unwrap();
        assert_eq!(ds.class_labels().unwrap(), vec![0, 2, 1]);
        let oh = ds.one_hot(3).unwrap();
        assert_eq!(oh.row(1), &[0.0, 0.0, 1.0]);
        let bad = read("a,y\n1,0.5\n", "y").unwrap();
        assert!(bad.class_labels().is_err());
        assert!(bad.one_hot(2).unwrap().row(0)[0].is_nan());
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let ds = Dataset::from_numeric(
            vec!["f0".into(), "f1".into()],
            &[vec![0.1, -2.5e-9, 3.0], vec![1.0 / 3.0, f64::NAN, 7.0]],
            "label".into(),
            vec![0.0, 1.0, 1.0],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = read_dataset(buf.as_slice(), &"label".into()).unwrap();
        for r in 0..3 {
            for c in 0..2 {
                assert_eq!(ds.feature(r, c).to_bits(), back.feature(r, c).to_bits());
            }
        }
        assert_eq!(back.labels(), ds.labels());
    }
}
