//! `spl`: batch runner for selective pseudo-labeling domain adaptation.

mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spl_core::report::Report;
use spl_core::synth::{generate, SynthConfig};
use spl_core::{LabelingMode, RunConfig, SelectionMode};

use crate::tasks::{Method, TaskSpec};

#[derive(Parser)]
#[command(
    name = "spl",
    version,
    about = "Unsupervised domain adaptation by selective pseudo-labeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adapt from a labeled source domain to an unlabeled target domain.
    Adapt {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "fused")]
        labeling: LabelingMode,
        #[arg(long, default_value = "progressive")]
        selection: SelectionMode,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every labeling/selection combination on each task.
    Ablate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nearest-neighbor classification on the raw features, no adaptation.
    #[command(name = "baseline-1nn")]
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write a synthetic shifted source/target pair.
    Synth {
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        /// Target shift in units of the within-class standard deviation.
        #[arg(long, default_value_t = 4.0)]
        shift: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long, requires = "target", conflicts_with = "domain")]
    source: Option<PathBuf>,
    #[arg(long, requires = "source")]
    target: Option<PathBuf>,
    /// NAME=PATH; repeat to run every ordered pair of domains.
    #[arg(long, value_name = "NAME=PATH")]
    domain: Vec<String>,
    /// Worker threads for independent tasks.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    d1: usize,
    /// Subspace dimension; defaults to min(128, d1).
    #[arg(long)]
    d2: Option<usize>,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Leave wall-clock times out of the report.
    #[arg(long)]
    omit_timing: bool,
}

impl ParamArgs {
    fn config(&self, labeling: LabelingMode, selection: SelectionMode) -> RunConfig {
        RunConfig {
            d1: self.d1,
            d2: self.d2.unwrap_or(RunConfig::new(self.d1).d2),
            iterations: self.iters,
            labeling,
            selection,
            seed: self.seed,
        }
    }
}

fn main() -> ExitCode {
    match try_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn try_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let (name, input, method, output) = match cli.command {
        Command::Adapt {
            input,
            params,
            labeling,
            selection,
            output,
        } => (
            "adapt",
            input,
            Method::Adapt(params.config(labeling, selection)),
            output,
        ),
        Command::Ablate {
            input,
            params,
            output,
        } => (
            "ablate",
            input,
            Method::Ablate(params.config(LabelingMode::Fused, SelectionMode::Progressive)),
            output,
        ),
        Command::Baseline { input, output } => ("baseline-1nn", input, Method::Baseline, output),
        Command::Synth {
            classes,
            per_class,
            dim,
            shift,
            seed,
            out_dir,
        } => {
            write_synthetic(
                &SynthConfig::new(classes, per_class, dim, shift, seed),
                &out_dir,
            )?;
            return Ok(ExitCode::SUCCESS);
        }
    };

    let task_list = task_specs(&input)?;
    let records = tasks::run_all(&task_list, &method, input.jobs.max(1), output.omit_timing)?;
    let report = Report::new(name, records);

    for task in &report.tasks {
        for w in &task.warnings {
            eprintln!(
                "warning: {}->{} {}: {w}",
                task.source, task.target, task.method
            );
        }
        if let Some(e) = &task.error {
            eprintln!(
                "error: {}->{} {}: {e}",
                task.source, task.target, task.method
            );
        }
    }
    print_summary(&report);
    if let Some(path) = &output.report {
        std::fs::write(path, report.to_json())
            .with_context(|| format!("writing report to {}", path.display()))?;
    }
    Ok(if report.failed_tasks > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn task_specs(input: &InputArgs) -> Result<Vec<TaskSpec>> {
    if let (Some(source), Some(target)) = (&input.source, &input.target) {
        return Ok(vec![TaskSpec::new(
            file_stem(source),
            source.clone(),
            file_stem(target),
            target.clone(),
        )]);
    }
    let mut domains = Vec::new();
    for entry in &input.domain {
        let Some((name, path)) = entry.split_once('=') else {
            bail!("--domain expects NAME=PATH, got '{entry}'");
        };
        if domains.iter().any(|(n, _): &(String, PathBuf)| n == name) {
            bail!("domain '{name}' given twice");
        }
        domains.push((name.to_string(), PathBuf::from(path)));
    }
    if domains.len() < 2 {
        bail!("give --source and --target, or at least two --domain entries");
    }
    let mut tasks = Vec::new();
    for (sn, sp) in &domains {
        for (tn, tp) in &domains {
            if sn != tn {
                tasks.push(TaskSpec::new(
                    sn.clone(),
                    sp.clone(),
                    tn.clone(),
                    tp.clone(),
                ));
            }
        }
    }
    Ok(tasks)
}

fn file_stem(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_synthetic(cfg: &SynthConfig, dir: &std::path::Path) -> Result<()> {
    let (source, target) = generate(cfg)?;
    std::fs::create_dir_all(dir)?;
    for (file, data) in [("source.txt", &source), ("target.txt", &target)] {
        let path = dir.join(file);
        spl_core::io::save_features(&path, data)
            .with_context(|| format!("writing {}", path.display()))?;
        println!(
            "wrote {} ({} samples, d={})",
            path.display(),
            data.len(),
            data.dim()
        );
    }
    Ok(())
}

fn print_summary(report: &Report) {
    for task in &report.tasks {
        let acc = task
            .final_accuracy
            .map_or_else(|| "-".to_string(), |a| format!("{a:.1}"));
        println!(
            "{:>12} -> {:<12} {:<22} {acc}",
            task.source, task.target, task.method
        );
    }
    for (method, avg) in &report.averages {
        println!("average {method:<22} {avg:.1}");
    }
}
