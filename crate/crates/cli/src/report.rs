//! Machine-readable run reports. The CSV form uses the shortest exact
//! decimal representation for floats, so parsing a written file recovers
//! every record bit-for-bit.

use anyhow::Result;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub m: usize,
    /// Degree list, comma-joined (for example "4,3").
    pub nus: String,
    pub tau: usize,
    pub feasible: bool,
    pub margin: f64,
    pub iterations: usize,
    pub nodv: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub system: String,
    pub feas_tol: f64,
    pub duality_gap_tol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: Metadata,
    pub records: Vec<CellRecord>,
}

impl RunReport {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    #[cfg(test)]
    pub fn records_from_csv(text: &str) -> Result<Vec<CellRecord>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut out = Vec::new();
        for rec in r.deserialize() {
            out.push(rec?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let report = RunReport {
            metadata: Metadata {
                tool_version: "0.1.0".into(),
                system: "toy".into(),
                feas_tol: 1e-6,
                duality_gap_tol: 1e-8,
                max_iterations: 200,
            },
            records: vec![
                CellRecord {
                    m: 2,
                    nus: "4,3".into(),
                    tau: 169,
                    feasible: false,
                    margin: -3.479e-9,
                    iterations: 118,
                    nodv: 64,
                    wall_ms: 0.1 + 0.2,
                },
                CellRecord {
                    m: 1,
                    nus: "0".into(),
                    tau: 42,
                    feasible: true,
                    margin: 4.541675e-5,
                    iterations: 73,
                    nodv: 9,
                    wall_ms: 1e-300,
                },
            ],
        };
        let csv = report.to_csv_string().unwrap();
        let back = RunReport::records_from_csv(&csv).unwrap();
        assert_eq!(back, report.records);
        assert_eq!(back[0].margin.to_bits(), report.records[0].margin.to_bits());
        assert_eq!(back[1].wall_ms.to_bits(), report.records[1].wall_ms.to_bits());
    }
}
