use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use spl_core::io::{encode_pair, load_features};
use spl_core::report::TaskRecord;
use spl_core::{nn_baseline, run, run_ablation, DomainDataset, DomainTag, RunConfig};

#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub source_name: String,
    pub source_path: PathBuf,
    pub target_name: String,
    pub target_path: PathBuf,
}

impl TaskSpec {
    pub fn new(
        source_name: String,
        source_path: PathBuf,
        target_name: String,
        target_path: PathBuf,
    ) -> Self {
        TaskSpec {
            source_name,
            source_path,
            target_name,
            target_path,
        }
    }
}

pub enum Method {
    Adapt(RunConfig),
    Ablate(RunConfig),
    Baseline,
}

/// Runs every task, in parallel up to `jobs`, and returns the records in
/// task order. A failing task becomes a failed record.
pub fn run_all(
    tasks: &[TaskSpec],
    method: &Method,
    jobs: usize,
    omit_timing: bool,
) -> Result<Vec<TaskRecord>> {
    // Each file is read once even when it appears in many tasks.
    let mut files: HashMap<PathBuf, Arc<Result<DomainDataset, String>>> = HashMap::new();
    for task in tasks {
        for path in [&task.source_path, &task.target_path] {
            files.entry(path.clone()).or_insert_with(|| {
                Arc::new(
                    load_features(path, DomainTag::Source)
                        .with_context(|| format!("loading {}", path.display()))
                        .map_err(|e| format!("{e:#}")),
                )
            });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    let nested: Vec<Vec<TaskRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                run_one(
                    task,
                    &files[&task.source_path],
                    &files[&task.target_path],
                    method,
                    omit_timing,
                )
            })
            .collect()
    });
    Ok(nested.into_iter().flatten().collect())
}

fn method_key(method: &Method) -> String {
    match method {
        Method::Adapt(cfg) => format!("{}/{}", cfg.labeling, cfg.selection),
        Method::Ablate(_) => "ablation".into(),
        Method::Baseline => "1nn".into(),
    }
}

fn run_one(
    task: &TaskSpec,
    source: &Result<DomainDataset, String>,
    target: &Result<DomainDataset, String>,
    method: &Method,
    omit_timing: bool,
) -> Vec<TaskRecord> {
    let (s, t) = (&task.source_name, &task.target_name);
    let fail = |msg: String| vec![TaskRecord::failed(s, t, method_key(method), msg)];
    let (source, target) = match (source, target) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(e.clone()),
    };
    let (source, target) = match encode_pair(source, target) {
        Ok((a, b, _)) => (a, b),
        Err(e) => return fail(e.to_string()),
    };

    let start = Instant::now();
    let mut records = match method {
        Method::Adapt(cfg) => match run(&source, &target, cfg) {
            Ok(result) => vec![TaskRecord::from_result(s, t, &result)],
            Err(e) => return fail(e.to_string()),
        },
        Method::Ablate(cfg) => match run_ablation(&source, &target, cfg) {
            Ok(entries) => entries
                .iter()
                .map(|entry| TaskRecord::from_result(s, t, &entry.result))
                .collect(),
            Err(e) => return fail(e.to_string()),
        },
        Method::Baseline => match nn_baseline(&source, &target) {
            Ok(result) => vec![TaskRecord::baseline(s, t, result.accuracy)],
            Err(e) => return fail(e.to_string()),
        },
    };
    if !omit_timing {
        let elapsed = start.elapsed().as_secs_f64() / records.len() as f64;
        for r in &mut records {
            r.wall_time_s = Some(elapsed);
        }
    }
    records
}
