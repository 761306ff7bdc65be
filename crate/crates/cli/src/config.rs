//! Run configuration: flags, config files and validation.
//!
//! Every setting has one key, used both as the flag name (`--key value`) and in config files
//! (`key = value`). Values from flags override values from the file.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use crystalflow::benchmark::NAMES;
use crystalflow::{Anisotropy, Benchmark, Discretization, FlowConfig, HausdorffMode};

/// Keys accepted in config files and on the command line.
pub const KEYS: [&str; 16] = [
    "benchmark",
    "anisotropy",
    "mobility",
    "M",
    "h",
    "tmax",
    "window",
    "discretization",
    "lambda-ratio",
    "btol",
    "redistance-period",
    "snapshot-dt",
    "metric",
    "export-mesh",
    "out",
    "sweep",
];

/// A bad key or value; reported with the offending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub key: String,
    pub message: String,
}

impl UsageError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        UsageError { key: key.to_string(), message: message.into() }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "crystalflow", version, about = "Crystalline mean curvature flow benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a benchmark and write errors.csv, run.log and optional meshes.
    Run(RunArgs),
    /// List the registered benchmarks.
    List,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Benchmark name (see `crystalflow list`).
    #[arg(long)]
    pub benchmark: Option<String>,
    /// Surface energy σ: iso, l1, hex, hexprism, triprism, cyl:<base>[:mu=<w>].
    #[arg(long)]
    pub anisotropy: Option<String>,
    /// Mobility β, same names as --anisotropy.
    #[arg(long)]
    pub mobility: Option<String>,
    /// Cells per axis, a power of two in 16..=512.
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Time step in (0, 1e-2].
    #[arg(long)]
    pub h: Option<String>,
    /// Final time.
    #[arg(long)]
    pub tmax: Option<String>,
    /// Error window `t0,t1`.
    #[arg(long)]
    pub window: Option<String>,
    /// fdm or fem.
    #[arg(long)]
    pub discretization: Option<String>,
    /// λ/μ of the split Bregman iteration.
    #[arg(long = "lambda-ratio")]
    pub lambda_ratio: Option<String>,
    /// Bregman stopping tolerance.
    #[arg(long)]
    pub btol: Option<String>,
    /// Redistance every this many steps.
    #[arg(long = "redistance-period")]
    pub redistance_period: Option<String>,
    /// Interval between error snapshots.
    #[arg(long = "snapshot-dt")]
    pub snapshot_dt: Option<String>,
    /// Hausdorff distance summarized in the log: l2 or inf.
    #[arg(long)]
    pub metric: Option<String>,
    /// Write the numerical and exact surfaces of every snapshot as OBJ files.
    #[arg(long = "export-mesh")]
    pub export_mesh: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Run several configurations, e.g. `M=32,64,128` or `h=1e-4,2e-4`.
    #[arg(long)]
    pub sweep: Option<String>,
}

impl RunArgs {
    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |key: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((key, v.clone()));
            }
        };
        push("benchmark", &self.benchmark);
        push("anisotropy", &self.anisotropy);
        push("mobility", &self.mobility);
        push("M", &self.m);
        push("h", &self.h);
        push("tmax", &self.tmax);
        push("window", &self.window);
        push("discretization", &self.discretization);
        push("lambda-ratio", &self.lambda_ratio);
        push("btol", &self.btol);
        push("redistance-period", &self.redistance_period);
        push("snapshot-dt", &self.snapshot_dt);
        push("metric", &self.metric);
        push("out", &self.out);
        push("sweep", &self.sweep);
        if self.export_mesh {
            out.push(("export-mesh", "true".to_string()));
        }
        out
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(UsageError::new(line, format!("line {}: expected `key = value`", no + 1)));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(UsageError::new(key, format!("line {}: unknown key", no + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Configurations a `sweep` expands into: the varied key and its values.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    M(Vec<usize>),
    H(Vec<f64>),
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub benchmark: Benchmark,
    pub sigma: Anisotropy,
    pub beta: Anisotropy,
    pub m: usize,
    pub h: f64,
    pub t_max: f64,
    pub window: (f64, f64),
    pub discretization: Discretization,
    pub lambda_ratio: f64,
    pub btol: f64,
    pub redistance_period: usize,
    pub snapshot_dt: f64,
    pub metric: HausdorffMode,
    pub export_mesh: bool,
    pub out: PathBuf,
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    pub fn flow_config(&self) -> FlowConfig {
        let mut cfg = FlowConfig::new(self.sigma.clone(), self.beta.clone(), self.h, self.m);
        cfg.discretization = self.discretization;
        cfg.lambda_ratio = self.lambda_ratio;
        cfg.btol = self.btol;
        cfg.t_max = self.t_max;
        cfg.redistance_period = self.redistance_period;
        cfg
    }

    /// The settings as a config file, which parses back to the same configuration.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "benchmark = {}", self.benchmark.name);
        let _ = writeln!(s, "anisotropy = {}", self.sigma);
        let _ = writeln!(s, "mobility = {}", self.beta);
        let _ = writeln!(s, "M = {}", self.m);
        let _ = writeln!(s, "h = {:e}", self.h);
        let _ = writeln!(s, "tmax = {}", self.t_max);
        let _ = writeln!(s, "window = {},{}", self.window.0, self.window.1);
        let _ = writeln!(s, "discretization = {}", self.discretization);
        let _ = writeln!(s, "lambda-ratio = {}", self.lambda_ratio);
        let _ = writeln!(s, "btol = {:e}", self.btol);
        let _ = writeln!(s, "redistance-period = {}", self.redistance_period);
        let _ = writeln!(s, "snapshot-dt = {}", self.snapshot_dt);
        let _ = writeln!(s, "metric = {}", self.metric);
        let _ = writeln!(s, "export-mesh = {}", self.export_mesh);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    /// One configuration per sweep value, each writing to its own subdirectory of `out`.
    pub fn expand(&self) -> Vec<RunConfig> {
        let Some(sweep) = &self.sweep else { return vec![self.clone()] };
        let mut runs = Vec::new();
        let base = RunConfig { sweep: None, ..self.clone() };
        match sweep {
            Sweep::M(ms) => {
                for &m in ms {
                    let mut c = base.clone();
                    c.m = m;
                    c.btol = if self.btol == default_btol(self.sigma.dim(), self.m) {
                        default_btol(self.sigma.dim(), m)
                    } else {
                        self.btol
                    };
                    c.out = self.out.join(format!("M{m}"));
                    runs.push(c);
                }
            }
            Sweep::H(hs) => {
                for &h in hs {
                    let mut c = base.clone();
                    c.h = h;
                    c.out = self.out.join(format!("h{h:e}"));
                    runs.push(c);
                }
            }
        }
        runs
    }
}

fn default_btol(dim: usize, m: usize) -> f64 {
    crystalflow::bregman::default_btol(dim, m)
}

/// Parses the `run` arguments, reading the config file if one is named.
pub fn parse_config(args: &RunArgs) -> Result<RunConfig, UsageError> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    for (key, value) in args.entries() {
        map.insert(key.to_string(), value);
    }
    resolve(&map)
}

/// Parses a command line such as `run --benchmark cube3d --M 64`.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| UsageError::new("arguments", e.to_string()))?;
    match cli.command {
        Command::Run(run) => parse_config(&run),
        Command::List => Err(UsageError::new("arguments", "expected the `run` command")),
    }
}

fn number(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, UsageError> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| UsageError::new(key, format!("`{v}` is not a number")))
        })
        .transpose()
}

fn positive(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, UsageError> {
    match number(map, key)? {
        Some(x) if x <= 0.0 => Err(UsageError::new(key, format!("must be positive, got {x}"))),
        other => Ok(other),
    }
}

fn check_m(key: &str, m: usize) -> Result<usize, UsageError> {
    if m.is_power_of_two() && (16..=512).contains(&m) {
        Ok(m)
    } else {
        Err(UsageError::new(key, format!("must be a power of two in 16..=512, got {m}")))
    }
}

fn check_h(key: &str, h: f64) -> Result<f64, UsageError> {
    if h > 0.0 && h <= 1e-2 {
        Ok(h)
    } else {
        Err(UsageError::new(key, format!("must lie in (0, 1e-2], got {h}")))
    }
}

fn parse_m(key: &str, v: &str) -> Result<usize, UsageError> {
    let m = v.trim().parse::<usize>().map_err(|_| UsageError::new(key, format!("`{v}` is not an integer")))?;
    check_m(key, m)
}

fn parse_h(key: &str, v: &str) -> Result<f64, UsageError> {
    let h = v.trim().parse::<f64>().map_err(|_| UsageError::new(key, format!("`{v}` is not a number")))?;
    check_h(key, h)
}

/// The benchmark named by `benchmark`, or the first whose surface energy matches `anisotropy`,
/// or `cube2d`.
fn pick_benchmark(map: &BTreeMap<String, String>) -> Result<Benchmark, UsageError> {
    if let Some(name) = map.get("benchmark") {
        return Benchmark::get(name).map_err(|e| UsageError::new("benchmark", e.to_string()));
    }
    if let Some(aniso) = map.get("anisotropy") {
        for name in NAMES {
            let b = Benchmark::get(name).expect("registered");
            if Anisotropy::parse(aniso, b.dim()).is_ok_and(|a| a == b.sigma) {
                return Ok(b);
            }
        }
        return Err(UsageError::new(
            "anisotropy",
            format!("no benchmark uses `{aniso}`; name one with --benchmark"),
        ));
    }
    Ok(Benchmark::get("cube2d").expect("registered"))
}

fn resolve(map: &BTreeMap<String, String>) -> Result<RunConfig, UsageError> {
    for key in map.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(UsageError::new(key, "unknown key"));
        }
    }
    let benchmark = pick_benchmark(map)?;
    let dim = benchmark.dim();
    let aniso = |key: &str, default: &Anisotropy| -> Result<Anisotropy, UsageError> {
        match map.get(key) {
            Some(v) => Anisotropy::parse(v, dim).map_err(|e| UsageError::new(key, e.to_string())),
            None => Ok(default.clone()),
        }
    };
    let sigma = aniso("anisotropy", &benchmark.sigma)?;
    let beta = aniso("mobility", &benchmark.beta)?;
    let m = map.get("M").map(|v| parse_m("M", v)).transpose()?.unwrap_or(64);
    let h = map.get("h").map(|v| parse_h("h", v)).transpose()?.unwrap_or(1e-4);
    let t_max = positive(map, "tmax")?.unwrap_or(benchmark.t_max);
    let window = match map.get("window") {
        Some(v) => {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            let parsed: Vec<f64> = parts.iter().filter_map(|p| p.parse::<f64>().ok()).collect();
            match parsed[..] {
                [a, b] if parts.len() == 2 && 0.0 <= a && a <= b => (a, b),
                _ => return Err(UsageError::new("window", format!("expected `t0,t1` with 0 ≤ t0 ≤ t1, got `{v}`"))),
            }
        }
        None => (benchmark.window.0.min(t_max), benchmark.window.1.min(t_max)),
    };
    let discretization = match map.get("discretization") {
        Some(v) => v.parse().map_err(|e: crystalflow::Error| UsageError::new("discretization", e.to_string()))?,
        None => Discretization::Fdm,
    };
    let lambda_ratio = positive(map, "lambda-ratio")?.unwrap_or(0.125);
    let btol = positive(map, "btol")?.unwrap_or_else(|| default_btol(dim, m));
    let redistance_period = match map.get("redistance-period") {
        Some(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&p| p >= 1)
            .ok_or_else(|| UsageError::new("redistance-period", format!("expected a positive integer, got `{v}`")))?,
        None => 1,
    };
    let snapshot_dt = positive(map, "snapshot-dt")?.unwrap_or(0.002);
    let metric = match map.get("metric") {
        Some(v) => v.parse().map_err(|e: crystalflow::Error| UsageError::new("metric", e.to_string()))?,
        None => HausdorffMode::L2,
    };
    let export_mesh = match map.get("export-mesh").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => return Err(UsageError::new("export-mesh", format!("expected true or false, got `{v}`"))),
    };
    let out = PathBuf::from(map.get("out").map_or("out", String::as_str));
    let sweep = map.get("sweep").map(|v| parse_sweep(v)).transpose()?;
    let cfg = RunConfig {
        benchmark,
        sigma,
        beta,
        m,
        h,
        t_max,
        window,
        discretization,
        lambda_ratio,
        btol,
        redistance_period,
        snapshot_dt,
        metric,
        export_mesh,
        out,
        sweep,
    };
    cfg.flow_config().validate().map_err(|e| UsageError::new("config", e.to_string()))?;
    Ok(cfg)
}

fn parse_sweep(v: &str) -> Result<Sweep, UsageError> {
    let bad = || UsageError::new("sweep", format!("expected `M=<list>` or `h=<list>`, got `{v}`"));
    let (key, list) = v.split_once('=').ok_or_else(bad)?;
    let items: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(bad());
    }
    match key.trim() {
        "M" => Ok(Sweep::M(items.iter().map(|s| parse_m("sweep", s)).collect::<Result<_, _>>()?)),
        "h" => Ok(Sweep::H(items.iter().map(|s| parse_h("sweep", s)).collect::<Result<_, _>>()?)),
        _ => Err(bad()),
    }
}

/// Reads a resolved configuration back from the header of a run log or a config file.
pub fn read_config_file(path: &Path) -> Result<RunConfig, UsageError> {
    let args = RunArgs { config: Some(path.to_path_buf()), ..RunArgs::default() };
    parse_config(&args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Result<RunConfig, UsageError> {
        let mut full = vec!["crystalflow", "run"];
        full.extend_from_slice(list);
        parse_args(full)
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = args(&["--benchmark", "cube3d", "--M", "64", "--h", "1e-4"]).unwrap();
        assert_eq!(cfg.benchmark.name, "cube3d");
        assert_eq!(cfg.m, 64);
        assert_eq!(cfg.h, 1e-4);
        assert_eq!(cfg.lambda_ratio, 0.125);
        assert_eq!(cfg.discretization, Discretization::Fdm);
        assert_eq!(cfg.snapshot_dt, 0.002);
        assert_eq!(cfg.sigma, Anisotropy::cubic(3));
        assert_eq!(cfg.btol, default_btol(3, 64));
    }

    #[test]
    fn fem_prism_run() {
        let cfg = args(&["--discretization", "fem", "--anisotropy", "hexprism", "--mobility", "hexprism"]).unwrap();
        assert_eq!(cfg.discretization, Discretization::Fem);
        assert_eq!(cfg.benchmark.name, "hexprism");
        assert_eq!(cfg.sigma, Anisotropy::hexagonal_prism());
        assert_eq!(cfg.beta, Anisotropy::hexagonal_prism());
    }

    #[test]
    fn usage_errors_name_the_key() {
        for (list, key) in [
            (vec!["--h", "0"], "h"),
            (vec!["--h", "0.02"], "h"),
            (vec!["--M", "48"], "M"),
            (vec!["--M", "1024"], "M"),
            (vec!["--metric", "l3"], "metric"),
            (vec!["--discretization", "fvm"], "discretization"),
            (vec!["--benchmark", "cube4d"], "benchmark"),
            (vec!["--window", "0.2,0.1"], "window"),
            (vec!["--sweep", "M=32,33"], "sweep"),
            (vec!["--redistance-period", "0"], "redistance-period"),
            (vec!["--benchmark", "cube2d", "--anisotropy", "hexprism"], "anisotropy"),
        ] {
            let err = args(&list).unwrap_err();
            assert_eq!(err.key, key, "{list:?}: {err}");
        }
    }

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# comment\nbenchmark = hex2d\nM = 32\nh = 5e-4 # trailing\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = args(&["--config", p, "--M", "128"]).unwrap();
        assert_eq!(cfg.benchmark.name, "hex2d");
        assert_eq!(cfg.m, 128);
        assert_eq!(cfg.h, 5e-4);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let err = parse_config_file("M = 32\nresolution = 64\n").unwrap_err();
        assert_eq!(err.key, "resolution");
        assert!(parse_config_file("just words").is_err());
    }

    #[test]
    fn resolved_text_round_trips() {
        let cfg = args(&["--benchmark", "torus-hex", "--M", "32", "--metric", "inf", "--export-mesh"]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("resolved.cfg");
        std::fs::write(&path, cfg.to_config_text()).unwrap();
        let back = read_config_file(&path).unwrap();
        assert_eq!(back.to_config_text(), cfg.to_config_text());
        assert_eq!(back.beta, cfg.beta);
    }

    #[test]
    fn sweeps_get_their_own_directories() {
        let cfg = args(&["--benchmark", "cube2d", "--sweep", "M=32,64", "--out", "res"]).unwrap();
        let runs = cfg.expand();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].m, 32);
        assert_eq!(runs[1].out, PathBuf::from("res/M64"));
        assert!(runs.iter().all(|r| r.sweep.is_none()));
        let hs = args(&["--sweep", "h=1e-4, 2e-4"]).unwrap().expand();
        assert_eq!(hs.iter().map(|r| r.h).collect::<Vec<_>>(), vec![1e-4, 2e-4]);
        assert_ne!(hs[0].out, hs[1].out);
    }
}
