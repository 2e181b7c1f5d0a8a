//! CSV ingestion and output.
//!
//! Input files have a header row. The label column (default `label`) holds
//! integer classes `1..k`; every other column is a numeric feature, taken in
//! file order as features `1..p`.

use std::io::{Read, Write};

use crate::data::{DataMatrix, LabeledDataset};
use crate::error::{NdcError, Result};

pub const DEFAULT_LABEL_COL: &str = "label";

/// Parsed CSV: the original cells plus the numeric feature matrix.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub headers: Vec<String>,
    pub records: Vec<Vec<String>>,
    /// Position of the label column in `headers`, if present.
    pub label_index: Option<usize>,
    pub features: DataMatrix,
}

fn parse_cell(cell: &str, row: usize, col: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| {
        NdcError::Parse(format!("row {row}, column `{col}`: `{cell}` is not a number"))
    })?;
    if !v.is_finite() {
        return Err(NdcError::Parse(format!("row {row}, column `{col}`: non-finite value")));
    }
    Ok(v)
}

/// Reads every non-label column as a feature. A missing label column is fine.
pub fn read_features<R: Read>(reader: R, label_col: &str) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_index = headers.iter().position(|h| h == label_col);
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| Some(c) != label_index).collect();
    if feature_cols.is_empty() {
        return Err(NdcError::Parse("no feature columns".into()));
    }
    let mut records = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if cells.len() != headers.len() {
            return Err(NdcError::Parse(format!(
                "row {} has {} cells, header has {}",
                r + 1,
                cells.len(),
                headers.len()
            )));
        }
        for &c in &feature_cols {
            values.push(parse_cell(&cells[c], r + 1, &headers[c])?);
        }
        records.push(cells);
    }
    if records.is_empty() {
        return Err(NdcError::Parse("no data rows".into()));
    }
    let features = DataMatrix::new(records.len(), feature_cols.len(), values)?;
    Ok(FeatureTable {
        headers,
        records,
        label_index,
        features,
    })
}

/// Reads a labeled dataset; `k` defaults to the largest label.
pub fn read_labeled<R: Read>(reader: R, label_col: &str, k: Option<usize>) -> Result<LabeledDataset> {
    let table = read_features(reader, label_col)?;
    let li = table
        .label_index
        .ok_or_else(|| NdcError::Parse(format!("label column `{label_col}` not found")))?;
    let labels = table
        .records
        .iter()
        .enumerate()
        .map(|(r, rec)| {
            let v = parse_cell(&rec[li], r + 1, label_col)?;
            if v.fract() != 0.0 {
                return Err(NdcError::Parse(format!("row {}: label `{}` is not an integer", r + 1, rec[li])));
            }
            Ok(v as i64)
        })
        .collect::<Result<Vec<i64>>>()?;
    LabeledDataset::from_one_based(table.features, &labels, k)
}

pub fn read_labeled_path(path: &std::path::Path, label_col: &str, k: Option<usize>) -> Result<LabeledDataset> {
    read_labeled(std::fs::File::open(path)?, label_col, k)
}

/// Writes `label,f1..fp` with 1-based labels and shortest round-trip floats.
pub fn write_labeled<W: Write>(writer: W, ds: &LabeledDataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header = vec![DEFAULT_LABEL_COL.to_string()];
    header.extend((1..=ds.p()).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for (row, &y) in ds.matrix().rows().zip(ds.labels()) {
        let mut rec = Vec::with_capacity(ds.p() + 1);
        rec.push((y + 1).to_string());
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the original table with an appended `predicted` column (1-based).
pub fn write_predictions<W: Write>(writer: W, table: &FeatureTable, predicted: &[usize]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header = table.headers.clone();
    header.push("predicted".into());
    w.write_record(&header)?;
    for (rec, &y) in table.records.iter().zip(predicted) {
        let mut out = rec.clone();
        out.push((y + 1).to_string());
        w.write_record(&out)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_label_anywhere() {
        let text = "a,label,b\n0,1,5\n0,1,7\n4,2,6\n6,2,6\n";
        let ds = read_labeled(text.as_bytes(), "label", None).unwrap();
        assert_eq!(ds.k(), 2);
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
        assert_eq!(ds.matrix().row(1), &[0.0, 7.0]);
    }

    #[test]
    fn custom_label_column() {
        let text = "y,x1,x2\n2,1.5,2\n1,3,4e-1\n";
        let ds = read_labeled(text.as_bytes(), "y", None).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.matrix().row(1), &[3.0, 0.4]);
    }

    #[test]
    fn parse_failures() {
        assert!(matches!(
            read_labeled("label,a,b\n1,x,2\n".as_bytes(), "label", None),
            Err(NdcError::Parse(_))
        ));
        assert!(read_labeled("label,a\n1.5,2\n".as_bytes(), "label", None).is_err());
        assert!(read_labeled("a,b\n1,2\n".as_bytes(), "label", None).is_err());
        assert!(read_features("label,a\n".as_bytes(), "label").is_err());
        assert!(read_labeled("label,a,b\n0,1,2\n".as_bytes(), "label", None).is_err());
        assert!(read_labeled("label,a,b\n1,nan,2\n".as_bytes(), "label", None).is_err());
    }

    #[test]
    fn write_then_read() {
        let m = DataMatrix::from_rows(&[[0.1, -2.0], [1e-7, 3.25]]).unwrap();
        let ds = LabeledDataset::new(m, vec![1, 0], 2).unwrap();
        let mut buf = Vec::new();
        write_labeled(&mut buf, &ds).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("label,f1,f2\n2,0.1,-2\n"));
        assert_eq!(read_labeled(buf.as_slice(), "label", None).unwrap(), ds);
    }

    #[test]
    fn predictions_appended() {
        let table = read_features("a,b\n1,2\n3,4\n".as_bytes(), "label").unwrap();
        assert_eq!(table.label_index, None);
        let mut buf = Vec::new();
        write_predictions(&mut buf, &table, &[1, 0]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,predicted\n1,2,2\n3,4,1\n");
    }
}
