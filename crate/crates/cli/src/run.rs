//! Benchmark orchestration: flow, reference solution, error table and artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use crystalflow::benchmark::HoleWatch;
use crystalflow::flow::{run_flow_with, snapshot_grid};
use crystalflow::metrics::{benchmark_error, ErrorTable, SurfaceMetric};
use crystalflow::Grid;
use log::{info, warn};

use crate::config::RunConfig;

/// What a run produced, beyond the files it wrote.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub table: ErrorTable,
    pub max_error: Option<f64>,
    pub extinction: Option<f64>,
    pub hole_closed: Option<f64>,
    pub steps: usize,
    pub iterations: usize,
    pub all_converged: bool,
}

struct Log {
    out: BufWriter<File>,
    path: std::path::PathBuf,
}

impl Log {
    fn line(&mut self, text: impl AsRef<str>) -> Result<()> {
        writeln!(self.out, "{}", text.as_ref()).with_context(|| format!("writing {}", self.path.display()))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs one configuration, writing `errors.csv`, `run.log` and, if asked, `meshes/*.obj`
/// under `cfg.out`.
pub fn run_benchmark(cfg: &RunConfig) -> Result<RunSummary> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let log_path = cfg.out.join("run.log");
    let file = File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?;
    let mut log = Log { out: BufWriter::new(file), path: log_path };
    log.line("# resolved configuration")?;
    for line in cfg.to_config_text().lines() {
        log.line(line)?;
    }

    let bench = &cfg.benchmark;
    let exact_end = bench.exact.extinction_time();
    if cfg.window.0 >= exact_end {
        log.line(format!(
            "# the window starts at t={} after the reference vanishes at t={exact_end:.6}; nothing to compare",
            cfg.window.0
        ))?;
        let table = ErrorTable::default();
        write_file(&cfg.out.join("errors.csv"), &table.to_csv())?;
        log.out.flush()?;
        return Ok(RunSummary {
            table,
            max_error: None,
            extinction: None,
            hole_closed: None,
            steps: 0,
            iterations: 0,
            all_converged: true,
        });
    }

    let grid = Grid::new(bench.dim(), cfg.m)?;
    let flow_cfg = cfg.flow_config();
    let times = snapshot_grid(cfg.snapshot_dt, cfg.t_max);
    let watch_holes = bench.name == "sponge";
    let mut holes = HoleWatch::default();
    let mut io_error = None;
    log.line("# steps")?;
    let started = Instant::now();
    let traj = run_flow_with(bench.initial_field(grid), &flow_cfg, &times, |flow, rep| {
        let mut text = format!(
            "step={} t={:.6} iterations={} delta={:.3e} converged={} redistanced={} polar_max={:.9} ch_ratio_min={:.9}",
            rep.step,
            rep.t,
            rep.iterations,
            rep.delta,
            rep.converged,
            rep.redistanced,
            rep.cahn_hoffman.max_polar,
            rep.cahn_hoffman.min_ratio
        );
        if watch_holes {
            if let Some(t) = holes.observe(flow) {
                text.push_str(&format!("\nhole-closed t={t:.6}"));
            }
        }
        if io_error.is_none() {
            io_error = log.line(text).err();
        }
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    let flow_time = started.elapsed();
    match traj.extinction {
        Some(t) => log.line(format!("extinction t={t:.6}"))?,
        None => log.line(format!("extinction none before t={}", cfg.t_max))?,
    }
    log.line(format!("reference extinction t={exact_end:.6}"))?;
    if let Some(t) = holes.closed() {
        info!("holes closed at t={t:.6}");
    }

    let metric = SurfaceMetric::new(grid)?;
    let table = benchmark_error(&traj, &bench.exact, &metric, cfg.window);
    write_file(&cfg.out.join("errors.csv"), &table.to_csv())?;
    let max_error = table.max(cfg.metric);
    match max_error {
        Some(e) => log.line(format!("max dist_{}={e:.9e}", cfg.metric))?,
        None => log.line(format!("max dist_{}=none", cfg.metric))?,
    }

    if cfg.export_mesh {
        let dir = cfg.out.join("meshes");
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (t, v) in &traj.snapshots {
            metric.extract(v).write_obj(&dir.join(format!("numerical_t{t:.6}.obj")))?;
            if bench.exact.extinction_time() > *t {
                let exact = bench.exact.exact_level_set(*t, grid);
                metric.extract(&exact).write_obj(&dir.join(format!("exact_t{t:.6}.obj")))?;
            }
        }
    }

    let all_converged = traj.all_converged();
    let failed = traj.steps.iter().filter(|s| !s.converged).count();
    if failed > 0 {
        warn!("{failed} resolvent solves did not converge");
    }
    log.line(format!(
        "steps={} iterations={} unconverged={failed} flow_seconds={:.3}",
        traj.steps.len(),
        traj.total_iterations(),
        flow_time.as_secs_f64()
    ))?;
    log.out.flush().with_context(|| format!("writing {}", log.path.display()))?;
    Ok(RunSummary {
        table,
        max_error,
        extinction: traj.extinction,
        hole_closed: holes.closed(),
        steps: traj.steps.len(),
        iterations: traj.total_iterations(),
        all_converged,
    })
}

/// Runs every configuration of a sweep, concurrently up to the available parallelism.
pub fn run_sweep(cfg: &RunConfig) -> Vec<(RunConfig, Result<RunSummary>)> {
    let runs = cfg.expand();
    let width = std::thread::available_parallelism().map_or(1, |n| n.get()).max(1);
    let mut results = Vec::new();
    for chunk in runs.chunks(width) {
        let done: Vec<Result<RunSummary>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|c| s.spawn(move || run_benchmark(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("run panicked"))))
                .collect()
        });
        results.extend(chunk.iter().cloned().zip(done));
    }
    results
}
