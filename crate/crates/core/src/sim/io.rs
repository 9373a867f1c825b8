//! CSV + JSON sidecar persistence of [`DataMatrix`].
//!
//! The CSV has a `t_s,<junction ids...>` header and one row per timestep. The
//! sidecar carries the scenario and timestep.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::transport::DataMatrix;
use crate::error::{Error, Result};
use crate::network::InjectionScenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrixMeta {
    pub scenario: InjectionScenario,
    pub timestep: f64,
    pub steps: usize,
    pub node_index: Vec<String>,
}

impl DataMatrix {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t_s".to_string()];
        header.extend(self.node_index.iter().cloned());
        w.write_record(&header)?;
        for k in 0..self.steps() {
            let mut row = vec![(k as f64 * self.timestep).to_string()];
            row.extend(self.values.column(k).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn meta(&self) -> DataMatrixMeta {
        DataMatrixMeta {
            scenario: self.scenario.clone(),
            timestep: self.timestep,
            steps: self.steps(),
            node_index: self.node_index.clone(),
        }
    }

    pub fn from_csv(text: &str, meta: &DataMatrixMeta) -> Result<DataMatrix> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        if header.get(0) != Some("t_s") || ids != meta.node_index {
            return Err(Error::InvalidArgument(
                "CSV header does not match the sidecar node index".into(),
            ));
        }
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let col = rec
                .iter()
                .skip(1)
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad number \"{f}\" in data matrix CSV")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if col.len() != ids.len() {
                return Err(Error::DimensionMismatch {
                    expected: ids.len(),
                    got: col.len(),
                });
            }
            columns.push(col);
        }
        let n = ids.len();
        let k = columns.len();
        Ok(DataMatrix {
            values: DMatrix::from_fn(n, k, |i, j| columns[j][i]),
            node_index: ids,
            timestep: meta.timestep,
            scenario: meta.scenario.clone(),
        })
    }
}

/// Writes `<stem>.csv` and `<stem>.json` next to each other and returns both paths.
pub fn write_data_matrix(x: &DataMatrix, dir: &Path, stem: &str) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&csv_path, x.to_csv()?)?;
    fs::write(&json_path, serde_json::to_string_pretty(&x.meta())?)?;
    Ok((csv_path, json_path))
}

/// Reads a matrix from its CSV path; the sidecar is the same path with `.json`.
pub fn read_data_matrix(csv_path: &Path) -> Result<DataMatrix> {
    let text = fs::read_to_string(csv_path)?;
    let meta: DataMatrixMeta = serde_json::from_str(&fs::read_to_string(csv_path.with_extension("json"))?)?;
    DataMatrix::from_csv(&text, &meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DataMatrix {
        DataMatrix {
            values: DMatrix::from_row_slice(2, 3, &[0.0, 0.1, 1.0 / 3.0, 2.5e-17, 0.0, 7.0]),
            node_index: vec!["J1".into(), "J2".into()],
            timestep: 60.0,
            scenario: InjectionScenario {
                source: "J1".into(),
                rate: 2.0,
                start: 0.0,
                duration: 60.0,
                timestep: 60.0,
                max_steps: 3,
            },
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let x = sample();
        let text = x.to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t_s,J1,J2"));
        assert_eq!(lines.next(), Some("0,0,0.000000000000000025"));
        let back = DataMatrix::from_csv(&text, &x.meta()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let x = sample();
        let (csv_path, _) = write_data_matrix(&x, dir.path(), "run").unwrap();
        assert_eq!(read_data_matrix(&csv_path).unwrap(), x);
    }

    #[test]
    fn header_mismatch_rejected() {
        let x = sample();
        let mut meta = x.meta();
        meta.node_index.reverse();
        assert!(DataMatrix::from_csv(&x.to_csv().unwrap(), &meta).is_err());
    }
}
