//! CSV ingestion and export.
//!
//! Input files need a header row; the label column (default `class`) must
//! parse to 0/1. Columns named `sample_weight` and `provenance` are treated
//! as row metadata rather than features, which makes `augment` output
//! re-loadable. All other columns are numeric features; a column whose
//! observed values are all 0/1 is inferred binary.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::dataset::{infer_kinds, Dataset, Provenance};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const WEIGHT_COLUMN: &str = "sample_weight";
pub const PROVENANCE_COLUMN: &str = "provenance";

/// Formats with 9 significant digits, printf `%.9g` style: plain decimal in
/// a human range, scientific otherwise, trailing zeros trimmed.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            let t = s.trim_end_matches('0').trim_end_matches('.');
            t.to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.8e}");
        // "1.20000000e5" -> "1.2e5"
        match s.split_once('e') {
            Some((mantissa, e)) => {
                let m = mantissa.trim_end_matches('0').trim_end_matches('.');
                format!("{m}e{e}")
            }
            None => s,
        }
    }
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = raw.trim();
    trimmed.parse::<f64>().map_err(|e| Error::CsvCell {
        row,
        column: column.to_string(),
        message: format!("'{trimmed}': {e}"),
    })
}

/// Loads a dataset, reporting row/column coordinates on parse failures.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::DataValidation(format!("cannot read header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();

    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let weight_idx = headers.iter().position(|h| h == WEIGHT_COLUMN);
    let prov_idx = headers.iter().position(|h| h == PROVENANCE_COLUMN);

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_idx && Some(j) != weight_idx && Some(j) != prov_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&j| headers[j].clone()).collect();

    let mut features = Matrix::with_cols(feature_cols.len());
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut provenance = Vec::new();
    let mut row_buf = vec![0.0; feature_cols.len()];

    for (ri, record) in reader.records().enumerate() {
        let row_no = ri + 1;
        let record = record.map_err(|e| Error::DataValidation(format!("row {row_no}: {e}")))?;

        let raw_label = record.get(label_idx).unwrap_or("");
        let lv = parse_cell(raw_label, row_no, &headers[label_idx])?;
        if lv != 0.0 && lv != 1.0 {
            return Err(Error::CsvCell {
                row: row_no,
                column: headers[label_idx].clone(),
                message: format!("label must be 0 or 1, got {lv}"),
            });
        }
        labels.push(lv as u8);

        for (k, &j) in feature_cols.iter().enumerate() {
            row_buf[k] = parse_cell(record.get(j).unwrap_or(""), row_no, &headers[j])?;
        }
        features.push_row(&row_buf);

        weights.push(match weight_idx {
            Some(j) => parse_cell(record.get(j).unwrap_or(""), row_no, WEIGHT_COLUMN)?,
            None => 1.0,
        });
        provenance.push(match prov_idx {
            Some(j) => match record.get(j).unwrap_or("").trim() {
                "real" => Provenance::Real,
                "synthetic" => Provenance::Synthetic,
                other => {
                    return Err(Error::CsvCell {
                        row: row_no,
                        column: PROVENANCE_COLUMN.to_string(),
                        message: format!("expected 'real' or 'synthetic', got '{other}'"),
                    })
                }
            },
            None => Provenance::Real,
        });
    }

    let kinds = infer_kinds(&features);
    let n = features.n_rows();
    let ds = Dataset {
        features,
        labels,
        kinds,
        column_names: feature_names,
        weights,
        provenance,
        row_ids: (0..n as u64).collect(),
    };
    ds.validate()?;
    let (zeros, ones) = ds.class_counts();
    log::info!(
        "loaded {} rows from {}: {zeros} of class 0, {ones} of class 1",
        ds.n_rows(),
        path.display()
    );
    Ok(ds)
}

/// Writes `features,...,class,sample_weight,provenance` with 9-significant-
/// digit values. The write is atomic (temp file + rename).
pub fn write_dataset_csv(path: &Path, data: &Dataset, label_column: &str) -> Result<()> {
    let mut out = String::new();
    for name in &data.column_names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str(label_column);
    out.push(',');
    out.push_str(WEIGHT_COLUMN);
    out.push(',');
    out.push_str(PROVENANCE_COLUMN);
    out.push('\n');

    for i in 0..data.n_rows() {
        for v in data.features.row(i) {
            out.push_str(&format_value(*v));
            out.push(',');
        }
        out.push_str(&data.labels[i].to_string());
        out.push(',');
        out.push_str(&format_value(data.weights[i]));
        out.push(',');
        out.push_str(match data.provenance[i] {
            Provenance::Real => "real",
            Provenance::Synthetic => "synthetic",
        });
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Plain feature matrix with a trailing label column.
pub fn write_matrix_csv(
    path: &Path,
    rows: &Matrix,
    names: &[String],
    label_column: &str,
    label: u8,
) -> Result<()> {
    let mut out = String::new();
    for name in names {
        out.push_str(name);
        out.push(',');
    }
    out.push_str(label_column);
    out.push('\n');
    for i in 0..rows.n_rows() {
        for v in rows.row(i) {
            out.push_str(&format_value(*v));
            out.push(',');
        }
        out.push_str(&label.to_string());
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Write-temp-then-rename so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        ))
        .to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::dataset::FeatureKind;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn three_row_file_counts() {
        let f = write_tmp("a,b,class\n1.5,0,0\n2.5,1,0\n3.5,1,1\n");
        let ds = load_csv(f.path(), "class").unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.class_counts(), (2, 1));
        assert_eq!(ds.minority_label().unwrap(), 1);
    }

    #[test]
    fn kind_inference_binary_vs_continuous() {
        let f = write_tmp("a,b,class\n0,0,0\n1,0.5,1\n1,0,1\n");
        let ds = load_csv(f.path(), "class").unwrap();
        assert_eq!(ds.kinds, vec![FeatureKind::Binary, FeatureKind::Continuous]);
    }

    #[test]
    fn unparseable_cell_reports_coordinates() {
        let f = write_tmp("a,class\n1.0,0\nxyz,1\n");
        match load_csv(f.path(), "class") {
            Err(Error::CsvCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
            }
            other => panic!("expected CsvCell error, got {other:?}"),
        }
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let f = write_tmp("a,b\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), "class"),
            Err(Error::MissingLabelColumn(_))
        ));
    }

    #[test]
    fn class_prior_matches_line_count() {
        // Desk-scale analogue of checking a loaded file's prior against an
        // independent count: 7 positives among 400 rows.
        let mut content = String::from("x,class\n");
        for i in 0..400 {
            let label = usize::from(i % 57 == 0);
            content.push_str(&format!("{}.5,{label}\n", i));
        }
        let expected_pos = (0..400).filter(|i| i % 57 == 0).count();
        let f = write_tmp(&content);
        let ds = load_csv(f.path(), "class").unwrap();
        let (_, ones) = ds.class_counts();
        assert_eq!(ones, expected_pos);
        let prior = ones as f64 / ds.n_rows() as f64;
        assert!((prior - expected_pos as f64 / 400.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip_with_weights_and_provenance() {
        let f = write_tmp("a,b,class\n1.25,0,0\n-2.5,1,0\n0.125,1,1\n");
        let mut ds = load_csv(f.path(), "class").unwrap();
        let extra = Matrix::from_rows(&[vec![0.33331, 1.0]]).unwrap();
        ds.append_synthetic(&extra, 1, 0.2).unwrap();

        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset_csv(out.path(), &ds, "class").unwrap();
        let back = load_csv(out.path(), "class").unwrap();

        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.kinds, ds.kinds);
        assert_eq!(back.weights, ds.weights);
        assert_eq!(back.provenance, ds.provenance);
        // Values compare at printed precision.
        for i in 0..ds.n_rows() {
            for j in 0..ds.n_features() {
                let printed: f64 = format_value(ds.features.get(i, j)).parse().unwrap();
                assert_eq!(back.features.get(i, j), printed);
            }
        }
    }

    #[test]
    fn format_value_nine_significant_digits() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(1.0), "1");
        assert_eq!(format_value(0.2), "0.2");
        assert_eq!(format_value(-3.5), "-3.5");
        assert_eq!(format_value(123456789.0), "123456789");
        assert_eq!(format_value(1234567891.0), "1.23456789e9");
        assert_eq!(format_value(0.000012345678912), "0.0000123456789");
        assert_eq!(format_value(1.0e-7), "1e-7");
        // Nine significant digits survive a round trip.
        let v = std::f64::consts::PI;
        let parsed: f64 = format_value(v).parse().unwrap();
        assert!((parsed - v).abs() < 1e-8);
    }
}
