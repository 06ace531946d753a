//! Batch runner: solve every instance in a directory, aggregate per group,
//! and emit the summary as Markdown and CSV.

use std::fs;
use std::path::{Path, PathBuf};

use crate::instance::load_instance_file;
use crate::report::{round_sig, SolveReport};
use crate::run::{run_solve, SolveOptions};
use crate::{CliError, CliResult};

/// One instance outcome inside a batch.
#[derive(Debug)]
pub struct BatchItem {
    pub file: PathBuf,
    pub group: String,
    pub outcome: Result<SolveReport, CliError>,
}

/// Aggregated statistics of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRow {
    pub group: String,
    pub instances: usize,
    pub optimal_e5: usize,
    pub optimal_e2: usize,
    pub rgap_min: f64,
    pub rgap_avg: f64,
    pub rgap_max: f64,
    pub rnorm_min: f64,
    pub rnorm_avg: f64,
    pub rnorm_max: f64,
    pub cpu_min: f64,
    pub cpu_avg: f64,
    pub cpu_max: f64,
}

/// Run a whole directory of `*.json` instances. Deterministic: files are
/// processed in sorted order and aggregation never depends on scheduling.
pub fn run_batch(
    dir: &Path,
    opts: &SolveOptions,
    parallel: usize,
    suppress_timing: bool,
) -> CliResult<Vec<BatchItem>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::schema(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::schema(format!(
            "no .json instances under {}",
            dir.display()
        )));
    }

    let solve_one = |file: &PathBuf| -> BatchItem {
        let loaded = load_instance_file(file);
        let group = match &loaded {
            Ok(inst) => inst.group.clone().unwrap_or_else(|| file_stem(file)),
            Err(_) => file_stem(file),
        };
        let outcome = loaded.and_then(|inst| {
            run_solve(&inst, opts).map(|mut report| {
                if suppress_timing {
                    report.cpu_seconds = 0.0;
                    report.metrics.cpu_seconds = 0.0;
                }
                report
            })
        });
        BatchItem { file: file.clone(), group, outcome }
    };

    #[cfg(feature = "parallel")]
    {
        if parallel > 1 {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallel)
                .build()
                .map_err(|e| CliError { exit_code: 4, message: e.to_string() })?;
            return Ok(pool.install(|| files.par_iter().map(solve_one).collect()));
        }
    }
    let _ = parallel;
    Ok(files.iter().map(solve_one).collect())
}

fn file_stem(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file.display().to_string())
}

/// Aggregate successful reports per group, sorted by group name.
pub fn aggregate(items: &[BatchItem]) -> Vec<GroupRow> {
    let mut groups: Vec<(&str, Vec<&SolveReport>)> = Vec::new();
    for item in items {
        if let Ok(report) = &item.outcome {
            match groups.iter_mut().find(|(g, _)| *g == item.group) {
                Some((_, list)) => list.push(report),
                None => groups.push((&item.group, vec![report])),
            }
        }
    }
    groups.sort_by(|a, b| a.0.cmp(b.0));

    groups
        .into_iter()
        .map(|(group, reports)| {
            let stat = |f: &dyn Fn(&SolveReport) -> f64| -> (f64, f64, f64) {
                let values: Vec<f64> = reports.iter().map(|r| f(r)).collect();
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let avg = values.iter().sum::<f64>() / values.len() as f64;
                (min, avg, max)
            };
            let rgap = stat(&|r: &SolveReport| r.metrics.rgap);
            let rnorm = stat(&|r: &SolveReport| r.metrics.rnorm_norm_of_diff);
            let cpu = stat(&|r: &SolveReport| r.cpu_seconds);
            GroupRow {
                group: group.to_string(),
                instances: reports.len(),
                optimal_e5: reports.iter().filter(|r| r.metrics.optimal_at_e5).count(),
                optimal_e2: reports.iter().filter(|r| r.metrics.optimal_at_e2).count(),
                rgap_min: rgap.0,
                rgap_avg: rgap.1,
                rgap_max: rgap.2,
                rnorm_min: rnorm.0,
                rnorm_avg: rnorm.1,
                rnorm_max: rnorm.2,
                cpu_min: cpu.0,
                cpu_avg: cpu.1,
                cpu_max: cpu.2,
            }
        })
        .collect()
}

fn fmt_cell(v: f64) -> String {
    format!("{}", round_sig(v, 6))
}

/// Markdown table of the aggregated rows.
pub fn to_markdown(rows: &[GroupRow]) -> String {
    let mut out = String::from(
        "| group | n | opt(e-5) | opt(e-2) | rgap min | rgap avg | rgap max \
         | rnorm min | rnorm avg | rnorm max | cpu min | cpu avg | cpu max |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.group,
            r.instances,
            r.optimal_e5,
            r.optimal_e2,
            fmt_cell(r.rgap_min),
            fmt_cell(r.rgap_avg),
            fmt_cell(r.rgap_max),
            fmt_cell(r.rnorm_min),
            fmt_cell(r.rnorm_avg),
            fmt_cell(r.rnorm_max),
            fmt_cell(r.cpu_min),
            fmt_cell(r.cpu_avg),
            fmt_cell(r.cpu_max),
        ));
    }
    out
}

/// CSV emission of the aggregated rows.
pub fn to_csv(rows: &[GroupRow]) -> String {
    let mut out = String::from(
        "group,instances,optimal_e5,optimal_e2,rgap_min,rgap_avg,rgap_max,\
         rnorm_min,rnorm_avg,rnorm_max,cpu_min,cpu_avg,cpu_max\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.group,
            r.instances,
            r.optimal_e5,
            r.optimal_e2,
            fmt_cell(r.rgap_min),
            fmt_cell(r.rgap_avg),
            fmt_cell(r.rgap_max),
            fmt_cell(r.rnorm_min),
            fmt_cell(r.rnorm_avg),
            fmt_cell(r.rnorm_max),
            fmt_cell(r.cpu_min),
            fmt_cell(r.cpu_avg),
            fmt_cell(r.cpu_max),
        ));
    }
    out
}
