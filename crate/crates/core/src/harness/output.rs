use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TopoError};
use crate::model::io::csv_err;

/// One row of results: a single realization, or the aggregate over an ensemble (`seed` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task: String,
    pub fingerprint: String,
    pub seed: Option<u64>,
    pub sizes: Vec<usize>,
    pub raw: Vec<f64>,
    pub rounded: Vec<i64>,
    /// Standard deviation of each raw component over the ensemble; empty for single realizations.
    pub spread: Vec<f64>,
    pub error_proxy: Option<f64>,
    /// `None` when the task has no quantized output.
    pub quantized: Option<bool>,
    pub wall_time: f64,
    pub note: String,
}

impl ResultRecord {
    pub fn is_aggregate(&self) -> bool {
        self.seed.is_none()
    }
}

pub const CSV_HEADER: [&str; 10] =
    ["task", "fingerprint", "seed", "sizes", "raw", "rounded", "spread", "error_proxy", "quantized", "note"];

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";")
}

/// CSV fields of a record; wall time is left out so that identical runs give identical bytes.
pub fn csv_fields(r: &ResultRecord) -> Vec<String> {
    vec![
        r.task.clone(),
        r.fingerprint.clone(),
        r.seed.map(|s| s.to_string()).unwrap_or_else(|| "aggregate".into()),
        join(&r.sizes),
        floats(&r.raw),
        join(&r.rounded),
        floats(&r.spread),
        r.error_proxy.map(|x| format!("{x:e}")).unwrap_or_default(),
        r.quantized.map(|q| q.to_string()).unwrap_or_default(),
        r.note.clone(),
    ]
}

pub fn write_results_csv<W: Write>(w: W, records: &[ResultRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        out.write_record(csv_fields(r)).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_results_json<W: Write>(w: W, records: &[ResultRecord]) -> Result<()> {
    serde_json::to_writer_pretty(w, records).map_err(|e| TopoError::Io(e.into()))
}

/// Long-format table: one row per record and grid value.
pub fn write_sweep_csv<W: Write>(w: W, param: &str, rows: &[(f64, Vec<ResultRecord>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["param", "value"];
    header.extend(CSV_HEADER);
    out.write_record(&header).map_err(csv_err)?;
    for (value, records) in rows {
        for r in records {
            let mut fields = vec![param.to_string(), format!("{value:e}")];
            fields.extend(csv_fields(r));
            out.write_record(&fields).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}
