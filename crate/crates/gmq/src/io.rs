//! Dataset CSV format (`x1,...,xp,y` header, one observation per row) and the
//! truth sidecar JSON written next to simulated datasets.
//!
//! CSV output is RFC-4180 (CRLF line endings, header row, no quoting needed
//! for plain numerics); values are printed with Rust's shortest round-trip
//! float formatting, so write-then-read reproduces the dataset bit for bit.

use crate::datagen::SimSpec;
use crate::error::{Error, Result};
use crate::model::Dataset;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Sidecar written by `gmq simulate`: the generating spec plus the truth
/// vector errors are measured against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub spec: SimSpec,
    /// True coefficients, intercept first when the model has one.
    pub beta_truth: Vec<f64>,
    pub has_intercept: bool,
}

/// Write a dataset as CSV with header `x1,...,xp,y`.
pub fn write_dataset_csv<W: Write>(writer: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(writer);
    let p = dataset.p();
    let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    header.push("y".to_string());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(p + 1);
    for i in 0..dataset.n() {
        record.clear();
        for v in dataset.row(i) {
            record.push(v.to_string());
        }
        record.push(dataset.y()[i].to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a dataset written by [`write_dataset_csv`]. The header must be
/// exactly `x1,...,xp,y`; `has_intercept` marks whether fits should prepend a
/// constant column (the CSV itself never stores one).
pub fn read_dataset_csv<R: Read>(reader: R, has_intercept: bool) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = r.headers()?.clone();
    let cols = header.len();
    if cols < 1 || header.get(cols - 1) != Some("y") {
        return Err(Error::Parse(
            "dataset CSV header must end with column 'y'".into(),
        ));
    }
    let p = cols - 1;
    for j in 0..p {
        let want = format!("x{}", j + 1);
        if header.get(j) != Some(want.as_str()) {
            return Err(Error::Parse(format!(
                "dataset CSV header column {} must be '{}', found '{}'",
                j + 1,
                want,
                header.get(j).unwrap_or("")
            )));
        }
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                cols
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Parse(format!("row {}, column {}: bad number '{field}'", line + 2, j + 1))
            })?;
            if j < p {
                x.push(v);
            } else {
                y.push(v);
            }
        }
    }
    Dataset::new(x, p, y, has_intercept)
}

pub fn write_dataset_csv_path(path: &Path, dataset: &Dataset) -> Result<()> {
    write_dataset_csv(std::fs::File::create(path)?, dataset)
}

pub fn read_dataset_csv_path(path: &Path, has_intercept: bool) -> Result<Dataset> {
    read_dataset_csv(std::fs::File::open(path)?, has_intercept)
}

pub fn write_truth_sidecar(path: &Path, sidecar: &TruthSidecar) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, sidecar)?;
    Ok(())
}

pub fn read_truth_sidecar(path: &Path) -> Result<TruthSidecar> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{ErrorDist, SimModel};

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let spec = SimSpec::new(SimModel::Homoskedastic, 17, 3, 0.3, ErrorDist::StudentT2, 8);
        let (ds, _) = spec.generate().unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&mut buf, &ds).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,x3,y\r\n"));
        let back = read_dataset_csv(buf.as_slice(), false).unwrap();
        assert_eq!(back.n(), ds.n());
        assert_eq!(back.y(), ds.y());
        for i in 0..ds.n() {
            assert_eq!(back.row(i), ds.row(i));
        }
    }

    #[test]
    fn csv_same_input_same_bytes() {
        let spec = SimSpec::new(SimModel::LinearScale, 5, 2, 0.7, ErrorDist::Normal0_4, 123);
        let (ds, _) = spec.generate().unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_dataset_csv(&mut a, &ds).unwrap();
        write_dataset_csv(&mut b, &ds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_header_and_cell_validation() {
        assert!(read_dataset_csv("a,b\r\n1,2\r\n".as_bytes(), false).is_err());
        assert!(read_dataset_csv("x1,z\r\n1,2\r\n".as_bytes(), false).is_err());
        assert!(read_dataset_csv("x2,y\r\n1,2\r\n".as_bytes(), false).is_err());
        let err = read_dataset_csv("x1,y\r\n1,oops\r\n".as_bytes(), false).unwrap_err();
        assert_eq!(err.code(), "E_PARSE");
        assert!(read_dataset_csv("x1,y\r\n1,2\r\n3,4\r\n".as_bytes(), false).is_ok());
        // intercept-only dataset: header is just y
        let ds = read_dataset_csv("y\r\n1.5\r\n2.5\r\n".as_bytes(), true).unwrap();
        assert_eq!(ds.p(), 0);
        assert_eq!(ds.num_coeffs(), 1);
    }

    #[test]
    fn sidecar_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.json");
        let spec = SimSpec::new(SimModel::QuadraticScale, 4, 2, 0.9, ErrorDist::StudentT2, 77);
        let sidecar = TruthSidecar {
            beta_truth: vec![1.0, 1.0, 1.0],
            has_intercept: true,
            spec,
        };
        write_truth_sidecar(&path, &sidecar).unwrap();
        let back = read_truth_sidecar(&path).unwrap();
        assert_eq!(back.beta_truth, sidecar.beta_truth);
        assert_eq!(back.spec, sidecar.spec);
    }
}
