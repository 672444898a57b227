//! Configuration, ensemble orchestration and result persistence.

mod config;
mod output;
mod tasks;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    from_matrix, to_matrix, AntiunitarySection, DisorderSection, EnsembleSection, ExperimentConfig, FieldSection,
    HoppingEntry, LatticeSection, MatrixEntries, ModelSection, OutputSection, SymmetrySection, Task, TaskOptions,
    ToleranceSection,
};
pub use output::{csv_fields, write_results_csv, write_results_json, write_sweep_csv, ResultRecord, CSV_HEADER};
pub use tasks::{assess, run_task, spectrum_of, Measurement};

use crate::error::{Result, TopoError};
use crate::boundary::write_dispersion_csv;
use crate::flow::write_flow_csv;
use crate::spectral::write_spectrum_csv;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "TOPO_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_QUANTIZED: i32 = 2;

/// Worker count from `TOPO_WORKERS`, else the number of available cores.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Records of one run together with the auxiliary data of its first realization.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub records: Vec<ResultRecord>,
    pub first: Measurement,
}

impl Experiment {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.records)
    }

    /// Writes `results.csv`, `results.json` and the requested optional tables into `dir`.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_results_csv(BufWriter::new(File::create(dir.join("results.csv"))?), &self.records)?;
        write_results_json(BufWriter::new(File::create(dir.join("results.json"))?), &self.records)?;
        if cfg.output.spectrum {
            let e = match &self.first.spectrum {
                Some(e) => e.clone(),
                None => spectrum_of(&cfg.build_model()?, cfg.ensemble.base_seed)?,
            };
            write_spectrum_csv(BufWriter::new(File::create(dir.join("spectrum.csv"))?), &e)?;
        }
        if let (true, Some(f)) = (cfg.output.flow, &self.first.flow) {
            write_flow_csv(BufWriter::new(File::create(dir.join("flow.csv"))?), f)?;
        }
        if let (true, Some(rows)) = (cfg.output.dispersion, &self.first.dispersion) {
            write_dispersion_csv(BufWriter::new(File::create(dir.join("edge_dispersion.csv"))?), rows)?;
        }
        Ok(())
    }
}

/// 0 when every quantized record is within tolerance, 2 otherwise.
pub fn exit_code(records: &[ResultRecord]) -> i32 {
    if records.iter().any(|r| r.quantized == Some(false)) {
        EXIT_NOT_QUANTIZED
    } else {
        EXIT_OK
    }
}

fn record(cfg: &ExperimentConfig, fingerprint: &str, seed: Option<u64>, raw: Vec<f64>, spread: Vec<f64>, wall: f64, note: String) -> ResultRecord {
    let assessed = assess(cfg.task, &raw);
    ResultRecord {
        task: cfg.task.name().into(),
        fingerprint: fingerprint.into(),
        seed,
        sizes: cfg.lattice.sizes.clone(),
        rounded: assessed.as_ref().map(|a| a.0.clone()).unwrap_or_default(),
        error_proxy: assessed.as_ref().map(|a| a.1),
        quantized: assessed.map(|a| a.1 <= cfg.tolerance.quantization),
        raw,
        spread,
        wall_time: wall,
        note,
    }
}

/// Runs the configured task on realizations `base_seed + i`, `i < realizations`, in parallel
/// over `workers` threads, and appends an aggregate row when there is more than one.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Experiment> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let fingerprint = model.fingerprint();
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| TopoError::Io(std::io::Error::other(e)))?;
    let n = cfg.ensemble.realizations;
    let base = cfg.ensemble.base_seed;
    let runs: Vec<(Measurement, f64)> = pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let m = run_task(cfg, &model, base + i)?;
                Ok((m, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records: Vec<ResultRecord> = runs
        .iter()
        .enumerate()
        .map(|(i, (m, wall))| record(cfg, &fingerprint, Some(base + i as u64), m.raw.clone(), Vec::new(), *wall, m.note.clone()))
        .collect();
    if n > 1 {
        let k = runs[0].0.raw.len();
        let nf = n as f64;
        let mean: Vec<f64> = (0..k).map(|j| runs.iter().map(|r| r.0.raw[j]).sum::<f64>() / nf).collect();
        let spread: Vec<f64> = (0..k)
            .map(|j| (runs.iter().map(|r| (r.0.raw[j] - mean[j]).powi(2)).sum::<f64>() / nf).sqrt())
            .collect();
        let wall = runs.iter().map(|r| r.1).sum();
        records.push(record(cfg, &fingerprint, None, mean, spread, wall, format!("mean over {n} realizations")));
    }
    let first = runs.into_iter().next().map(|r| r.0).unwrap_or_default();
    Ok(Experiment { records, first })
}

/// Copy of `cfg` with the dotted `path` (e.g. `model.params.m`) set to `value`.
pub fn with_parameter(cfg: &ExperimentConfig, path: &str, value: f64) -> Result<ExperimentConfig> {
    let err = |m: String| TopoError::Config { section: path.into(), message: m };
    let mut root = toml::Value::try_from(cfg).map_err(|e| err(e.to_string()))?;
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().filter(|(l, _)| !l.is_empty()).ok_or_else(|| err("empty parameter path".into()))?;
    let mut node = &mut root;
    for key in parents {
        let table = node.as_table_mut().ok_or_else(|| err(format!("'{key}' is not inside a table")))?;
        node = table.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node.as_table_mut().ok_or_else(|| err(format!("parent of '{last}' is not a table")))?;
    let new = match table.get(*last) {
        Some(toml::Value::Integer(_)) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        _ => toml::Value::Float(value),
    };
    table.insert(last.to_string(), new);
    let out: ExperimentConfig = root.try_into().map_err(|e: toml::de::Error| err(e.message().to_string()))?;
    out.validate()?;
    Ok(out)
}

/// Runs the experiment at every grid value of `path`, in grid order.
pub fn sweep(cfg: &ExperimentConfig, path: &str, values: &[f64], workers: usize) -> Result<Vec<(f64, Vec<ResultRecord>)>> {
    values
        .iter()
        .map(|&v| Ok((v, run_experiment(&with_parameter(cfg, path, v)?, workers)?.records)))
        .collect()
}
