//! Runs every (scheme, seed) cell of an experiment and writes its CSVs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use shrinkinit::{
    initialize, load_csv, split, standardize, synth_blobs, Dataset, MetricsRecord, NetworkParams, Scheme,
};

use crate::config::{DatasetSpec, ExperimentConfig};
use crate::RunError;

/// Train and test sets for an experiment.
pub fn build_datasets(cfg: &ExperimentConfig, base_dir: &Path) -> Result<(Dataset, Dataset), RunError> {
    let ds = match &cfg.dataset {
        DatasetSpec::Synthetic {
            classes,
            per_class,
            dim,
            separation,
            seed,
        } => synth_blobs(*classes, *per_class, *dim, *separation, *seed)?,
        DatasetSpec::Csv { path, label_column } => {
            let path = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            load_csv(&path, (*label_column).into())?
        }
    };
    let ds = if cfg.standardize { standardize(&ds)? } else { ds };
    Ok(split(&ds, cfg.train_fraction, cfg.split_seed)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok(MetricsRecord),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub scheme: Scheme,
    pub seed: u64,
    pub status: CellStatus,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub cells: Vec<CellOutcome>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| matches!(c.status, CellStatus::Failed(_)))
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures().next().is_some() {
            1
        } else {
            0
        }
    }
}

pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from("epoch,objective,train_acc,test_acc\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.epoch, r.objective, r.train_accuracy, r.test_accuracy
        );
    }
    out
}

/// Flattened weights, one row per entry.
pub fn weights_csv(params: &NetworkParams) -> String {
    let mut out = String::from("layer,row,col,value\n");
    for (k, layer) in params.layers().iter().enumerate() {
        let w = &layer.weight;
        for i in 0..w.rows() {
            for j in 0..w.cols() {
                let _ = writeln!(out, "{},{},{},{}", k + 1, i, j, w.get(i, j));
            }
        }
    }
    out
}

pub fn summary_csv(cells: &[CellOutcome]) -> String {
    let mut out = String::from("scheme,seed,status,epoch,objective,train_acc,test_acc,detail\n");
    for c in cells {
        match &c.status {
            CellStatus::Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},ok,{},{},{},{},",
                    c.scheme, c.seed, r.epoch, r.objective, r.train_accuracy, r.test_accuracy
                );
            }
            CellStatus::Failed(msg) => {
                let detail = msg.replace([',', '\n', '"'], " ");
                let _ = writeln!(out, "{},{},failed,,,,,{}", c.scheme, c.seed, detail);
            }
        }
    }
    out
}

fn run_cell(
    cfg: &ExperimentConfig,
    dims: &[usize],
    train: &Dataset,
    test: &Dataset,
    scheme: Scheme,
    seed: u64,
    out: &Path,
) -> Result<MetricsRecord, RunError> {
    let stem = format!("{scheme}_{seed}");
    let params = initialize(dims, &train.features, &cfg.init_spec(scheme, seed))?;
    fs::write(out.join(format!("{stem}_weights_init.csv")), weights_csv(&params))?;
    let (_, records) = shrinkinit::train(params, train, test, &cfg.train_config(seed))?;
    fs::write(out.join(format!("{stem}_metrics.csv")), metrics_csv(&records))?;
    Ok(*records.last().expect("epoch 0 is always recorded"))
}

/// Runs a validated config. `base_dir` anchors relative paths inside it.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    out_override: Option<&Path>,
    jobs: usize,
) -> Result<RunReport, RunError> {
    cfg.validate()?;
    let output_dir = match (out_override, &cfg.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) if o.is_absolute() => o.clone(),
        (None, Some(o)) => base_dir.join(o),
        (None, None) => {
            return Err(RunError::Config(
                "no output directory: set output_dir or pass --out".into(),
            ))
        }
    };
    let (train, test) = build_datasets(cfg, base_dir).map_err(|e| match e {
        RunError::Core(inner) => RunError::Config(format!("dataset: {inner}")),
        other => other,
    })?;
    let mut dims = vec![train.dim()];
    dims.extend(&cfg.hidden_widths);
    dims.push(train.class_count);
    fs::create_dir_all(&output_dir)?;

    let cells: Vec<(Scheme, u64)> = cfg
        .parsed_schemes()?
        .into_iter()
        .flat_map(|s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(scheme, seed)| {
                let status = match run_cell(cfg, &dims, &train, &test, scheme, seed, &output_dir) {
                    Ok(last) => CellStatus::Ok(last),
                    Err(e) => CellStatus::Failed(e.to_string()),
                };
                CellOutcome { scheme, seed, status }
            })
            .collect()
    });

    fs::write(output_dir.join("summary.csv"), summary_csv(&outcomes))?;
    Ok(RunReport {
        output_dir,
        cells: outcomes,
    })
}

/// Loads `config_path` and runs it; relative paths in the config resolve against its directory.
pub fn run(config_path: &Path, out_override: Option<&Path>, jobs: usize) -> Result<RunReport, RunError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    run_experiment(&cfg, base, out_override, jobs)
}
