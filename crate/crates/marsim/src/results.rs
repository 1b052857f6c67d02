//! Result CSV files.
//!
//! One row per `(scenario, seed, algorithm)`:
//!
//! ```text
//! scenario_id,seed,algorithm,K,T,M,users_total,users_served,rbs_used,bits_served,runtime_ms
//! ```
//!
//! `K` is empty for the i.i.d. uniform channel. `bits_served` is exact to
//! four decimals.

use std::io::{Read, Write};

use marsim_core::Rate;
use thiserror::Error;

use crate::runner::Algorithm;

pub const CSV_HEADER: [&str; 11] = [
    "scenario_id",
    "seed",
    "algorithm",
    "K",
    "T",
    "M",
    "users_total",
    "users_served",
    "rbs_used",
    "bits_served",
    "runtime_ms",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub k: Option<f64>,
    pub t: usize,
    pub m: usize,
    pub users_total: usize,
    pub users_served: usize,
    pub rbs_used: u64,
    pub bits_served: Rate,
    pub runtime_ms: f64,
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: bad {field} {value:?}")]
    Field {
        row: usize,
        field: &'static str,
        value: String,
    },
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.seed.to_string(),
            r.algorithm.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.t.to_string(),
            r.m.to_string(),
            r.users_total.to_string(),
            r.users_served.to_string(),
            r.rbs_used.to_string(),
            r.bits_served.to_string(),
            format!("{:.3}", r.runtime_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, CsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        fn field<T: std::str::FromStr>(rec: &csv::StringRecord, row: usize, col: usize) -> Result<T, CsvError> {
            let value = &rec[col];
            value.parse().map_err(|_| CsvError::Field {
                row,
                field: CSV_HEADER[col],
                value: value.to_owned(),
            })
        }
        rows.push(ResultRow {
            scenario_id: rec[0].to_owned(),
            seed: field(&rec, row, 1)?,
            algorithm: field(&rec, row, 2)?,
            k: if rec[3].is_empty() { None } else { Some(field(&rec, row, 3)?) },
            t: field(&rec, row, 4)?,
            m: field(&rec, row, 5)?,
            users_total: field(&rec, row, 6)?,
            users_served: field(&rec, row, 7)?,
            rbs_used: field(&rec, row, 8)?,
            bits_served: field(&rec, row, 9)?,
            runtime_ms: field(&rec, row, 10)?,
        });
    }
    Ok(rows)
}
