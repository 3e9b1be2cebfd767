//! The four subcommands.

use crate::manifest::{build_id, load_config, RunManifest, SummaryEntry, SCHEMA_VERSION};
use crate::output::{fmt_f64, write_curves, write_finals, write_summary, write_traces, Group};
use crate::{CliError, CliResult};
use alphats_core::diagnostics::{validate, Fault, ValidateOptions, ValidationReport};
use alphats_core::sim::{ablate_alpha, ablate_prior, in_pool, run_batch};
use alphats_core::{BatchResult, ExperimentConfig, PriorMode};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Options shared by the experiment subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub threads: Option<usize>,
}

fn resolve(opts: &RunOptions) -> CliResult<ExperimentConfig> {
    let mut cfg = load_config(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.master_seed = seed;
    }
    if let Some(reps) = opts.reps {
        cfg.replications = reps;
    }
    if opts.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

struct Emit<'a> {
    command: &'a str,
    grid: &'a [&'a str],
    groups: Vec<Group<'a>>,
    summary: Vec<SummaryEntry>,
}

fn write_outputs(opts: &RunOptions, cfg: &ExperimentConfig, started: Instant, emit: Emit) -> CliResult<RunManifest> {
    fs::create_dir_all(&opts.out)?;
    let files = ["traces.csv", "curves.csv", "finals.csv", "summary.csv"];
    let open = |name: &str| -> CliResult<BufWriter<File>> {
        Ok(BufWriter::new(File::create(opts.out.join(name))?))
    };
    write_traces(open(files[0])?, emit.grid, &emit.groups)?;
    write_curves(open(files[1])?, emit.grid, &emit.groups)?;
    write_finals(open(files[2])?, emit.grid, &emit.groups)?;
    write_summary(open(files[3])?, emit.grid, &emit.groups)?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: emit.command.to_string(),
        build: build_id(),
        config: cfg.clone(),
        threads: opts.threads,
        replication_seeds: emit.groups[0].batch.replication_seeds(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files: files.iter().map(|s| s.to_string()).collect(),
        variance_scale: cfg.variance_scale,
        summary: emit.summary,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(opts.out.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

fn summary_entries(batch: &BatchResult, alpha: Option<f64>, prior: Option<&PriorMode>) -> Vec<SummaryEntry> {
    batch
        .policies
        .iter()
        .map(|p| SummaryEntry {
            alpha,
            prior: prior.map(|m| m.label().to_string()),
            delta: prior.and_then(|m| m.delta()),
            policy: p.label.clone(),
            final_time_avg_regret_mean: p.final_mean,
            final_time_avg_regret_variance: p.final_variance,
            diagnostics: p.diagnostics,
        })
        .collect()
}

pub fn cmd_run(opts: &RunOptions) -> CliResult<RunManifest> {
    let started = Instant::now();
    let cfg = resolve(opts)?;
    let batch = in_pool(opts.threads, || run_batch(&cfg))?;
    let emit = Emit {
        command: "run",
        grid: &[],
        summary: summary_entries(&batch, None, None),
        groups: vec![Group {
            keys: vec![],
            batch: &batch,
        }],
    };
    write_outputs(opts, &cfg, started, emit)
}

pub fn cmd_ablate_alpha(opts: &RunOptions) -> CliResult<RunManifest> {
    let started = Instant::now();
    let cfg = resolve(opts)?;
    let alphas = cfg
        .ablate_alpha
        .as_ref()
        .ok_or_else(|| CliError::Config("ablate-alpha needs an [ablate_alpha] section".into()))?
        .alphas
        .clone();
    let results = in_pool(opts.threads, || ablate_alpha(&cfg, &alphas))?;
    let emit = Emit {
        command: "ablate-alpha",
        grid: &["alpha"],
        summary: results
            .iter()
            .flat_map(|(a, b)| summary_entries(b, Some(*a), None))
            .collect(),
        groups: results
            .iter()
            .map(|(a, b)| Group {
                keys: vec![fmt_f64(*a)],
                batch: b,
            })
            .collect(),
    };
    write_outputs(opts, &cfg, started, emit)
}

pub fn cmd_ablate_prior(opts: &RunOptions) -> CliResult<RunManifest> {
    let started = Instant::now();
    let cfg = resolve(opts)?;
    let grid = cfg
        .ablate_prior
        .as_ref()
        .ok_or_else(|| CliError::Config("ablate-prior needs an [ablate_prior] section".into()))?;
    let mut modes: Vec<PriorMode> = grid
        .deltas
        .iter()
        .map(|&delta| PriorMode::Sharpened { delta })
        .collect();
    if grid.include_uniform {
        modes.push(PriorMode::UniformRange);
    }
    let results = in_pool(opts.threads, || ablate_prior(&cfg, &modes))?;
    let emit = Emit {
        command: "ablate-prior",
        grid: &["prior", "delta"],
        summary: results
            .iter()
            .flat_map(|(m, b)| summary_entries(b, None, Some(m)))
            .collect(),
        groups: results
            .iter()
            .map(|(m, b)| Group {
                keys: vec![
                    m.label().to_string(),
                    m.delta().map(fmt_f64).unwrap_or_default(),
                ],
                batch: b,
            })
            .collect(),
    };
    write_outputs(opts, &cfg, started, emit)
}

#[derive(Debug, Clone)]
pub struct ValidateCommand {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub out: Option<PathBuf>,
}

/// Runs the sampler diagnostics, prints one line per check and writes
/// `validation.json` when an output directory is given.
pub fn cmd_validate(cmd: &ValidateCommand) -> CliResult<ValidationReport> {
    if cmd.alphas.iter().any(|a| !(*a > 1.0 && *a <= 2.0)) {
        return Err(CliError::Config("--alphas must lie in (1, 2]".into()));
    }
    let report = validate(&ValidateOptions {
        alphas: cmd.alphas.clone(),
        n: cmd.n,
        seed: cmd.seed,
        fault: cmd.fault,
    })?;
    for c in &report.checks {
        let alpha = if c.alpha.is_nan() {
            "-".to_string()
        } else {
            fmt_f64(c.alpha)
        };
        println!(
            "{} {:<22} alpha={:<4} statistic={:.6e} threshold={:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            alpha,
            c.statistic,
            c.threshold
        );
    }
    if let Some(dir) = &cmd.out {
        write_report(dir, &report)?;
    }
    if report.passed() {
        Ok(report)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Validation(failed.join(", ")))
    }
}

fn write_report(dir: &Path, report: &ValidationReport) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let value = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "build": build_id(),
        "passed": report.passed(),
        "options": report.options,
        "checks": report.checks.iter().map(|c| serde_json::json!({
            "name": c.name,
            "alpha": if c.alpha.is_nan() { None } else { Some(c.alpha) },
            "statistic": c.statistic,
            "threshold": c.threshold,
            "passed": c.passed,
        })).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(dir.join("validation.json"), text + "\n")?;
    Ok(())
}
