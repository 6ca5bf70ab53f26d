//! Command-line front end: run configs, density sweeps, grid export, checks.
//!
//! Config files are flat `key = value` text, one run per file; `#` starts a
//! comment. Keys (defaults in brackets, most follow the problem):
//!
//! | key | meaning |
//! |---|---|
//! | `problem` | catalog name (required) |
//! | `m_interior`, `m_boundary`, `m_interface`, `m_initial` | point counts [problem's middle triple] |
//! | `strategy` | `grid` or `lhs` [problem default] |
//! | `sample_seed`, `init_seed` | seeds [0] |
//! | `validation_seed` | [sample_seed + 1000000] |
//! | `validation_factor` | validation cloud = factor × m_interior [4] |
//! | `hidden` | comma-separated widths [50,50,50] |
//! | `mode` | `maf` or `tanh` [maf] |
//! | `omega` | `differentiated` or `frozen` [differentiated] |
//! | `gauss_gamma`, `weight_decay_rate`, `gauss_bias` | [1, 10, false] |
//! | `w_pde1`, `w_pde2`, `w_bc1`, `w_bc2`, `w_init`, `gamma1`, `gamma2` | loss weights [1] |
//! | `steps`, `lr`, `adam_beta1`, `adam_beta2`, `adam_eps` | [50000, 1e-3, 0.9, 0.999, 1e-8] |
//! | `log_every` | [100] |
//! | `output` | run directory [runs/<problem>] |
//!
//! Floats are written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checks;
use crate::error::{Error, Result};
use crate::geometry::{Region, RegionLabel, ON_INTERFACE_TOL};
use crate::network::{forward, ActivationMode, Checkpoint, NetworkParams, OmegaMode};
use crate::problems::{find, Counts, ProblemSpec};
use crate::sampling::{Strategy, VALIDATION_SEED_OFFSET};
use crate::training::{train, TrainConfig, TrainRecord};

/// Default Adam budget of the shipped full-length configs.
pub const DEFAULT_STEPS: usize = 50_000;

/// One run: a problem plus its training configuration and output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub train: TrainConfig,
    pub output: PathBuf,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value for `{key}`: `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad value for `{key}`: `{v}` (true/false)"))),
    }
}

impl RunConfig {
    /// Defaults for a catalog problem: middle density triple, full 50k-step budget.
    pub fn for_problem(problem: &ProblemSpec) -> Self {
        let train = TrainConfig::for_problem(problem, problem.density_triples[1], DEFAULT_STEPS);
        Self { problem: problem.name.to_string(), train, output: PathBuf::from(format!("runs/{}", problem.name)) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim().to_string();
            if entries.insert(k.clone(), (lineno + 1, v.trim().to_string())).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
        }
        let (_, name) = entries.remove("problem").ok_or_else(|| Error::Config("missing `problem`".into()))?;
        let problem = find(&name)?;
        let mut cfg = Self::for_problem(&problem);
        let mut validation_seed = None;
        for (key, (_, v)) in &entries {
            let t = &mut cfg.train;
            let key = key.as_str();
            match key {
                "m_interior" => t.counts.interior = parse_value(key, v)?,
                "m_boundary" => t.counts.boundary = parse_value(key, v)?,
                "m_interface" => t.counts.interface = parse_value(key, v)?,
                "m_initial" => t.counts.initial = parse_value(key, v)?,
                "strategy" => t.strategy = parse_strategy(v)?,
                "sample_seed" => t.sample_seed = parse_value(key, v)?,
                "init_seed" => t.init_seed = parse_value(key, v)?,
                "validation_seed" => validation_seed = Some(parse_value(key, v)?),
                "validation_factor" => t.validation_factor = parse_value(key, v)?,
                "hidden" => {
                    t.hidden = v.split(',').map(|w| parse_value(key, w.trim())).collect::<Result<_>>()?;
                }
                "mode" => t.mode = parse_mode(v)?,
                "omega" => t.omega_mode = parse_omega(v)?,
                "gauss_gamma" => t.network.gauss_gamma = parse_value(key, v)?,
                "weight_decay_rate" => t.network.weight_decay_rate = parse_value(key, v)?,
                "gauss_bias" => t.network.gauss_bias = parse_bool(key, v)?,
                "w_pde1" => t.weights.w_pde1 = parse_value(key, v)?,
                "w_pde2" => t.weights.w_pde2 = parse_value(key, v)?,
                "w_bc1" => t.weights.w_bc1 = parse_value(key, v)?,
                "w_bc2" => t.weights.w_bc2 = parse_value(key, v)?,
                "w_init" => t.weights.w_init = parse_value(key, v)?,
                "gamma1" => t.weights.gamma1 = parse_value(key, v)?,
                "gamma2" => t.weights.gamma2 = parse_value(key, v)?,
                "steps" => t.steps = parse_value(key, v)?,
                "lr" => t.adam.lr = parse_value(key, v)?,
                "adam_beta1" => t.adam.beta1 = parse_value(key, v)?,
                "adam_beta2" => t.adam.beta2 = parse_value(key, v)?,
                "adam_eps" => t.adam.eps = parse_value(key, v)?,
                "log_every" => t.log_every = parse_value(key, v)?,
                "output" => cfg.output = PathBuf::from(v),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.train.validation_seed = validation_seed.unwrap_or(cfg.train.sample_seed + VALIDATION_SEED_OFFSET);
        cfg.train.validate(&problem)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Every key, in documentation order; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let hidden: Vec<String> = t.hidden.iter().map(|w| w.to_string()).collect();
        let lines = [
            ("problem", self.problem.clone()),
            ("m_interior", t.counts.interior.to_string()),
            ("m_boundary", t.counts.boundary.to_string()),
            ("m_interface", t.counts.interface.to_string()),
            ("m_initial", t.counts.initial.to_string()),
            ("strategy", t.strategy.name().to_string()),
            ("sample_seed", t.sample_seed.to_string()),
            ("init_seed", t.init_seed.to_string()),
            ("validation_seed", t.validation_seed.to_string()),
            ("validation_factor", t.validation_factor.to_string()),
            ("hidden", hidden.join(",")),
            ("mode", t.mode.name().to_string()),
            ("omega", t.omega_mode.name().to_string()),
            ("gauss_gamma", fmt_f64(t.network.gauss_gamma)),
            ("weight_decay_rate", fmt_f64(t.network.weight_decay_rate)),
            ("gauss_bias", t.network.gauss_bias.to_string()),
            ("w_pde1", fmt_f64(t.weights.w_pde1)),
            ("w_pde2", fmt_f64(t.weights.w_pde2)),
            ("w_bc1", fmt_f64(t.weights.w_bc1)),
            ("w_bc2", fmt_f64(t.weights.w_bc2)),
            ("w_init", fmt_f64(t.weights.w_init)),
            ("gamma1", fmt_f64(t.weights.gamma1)),
            ("gamma2", fmt_f64(t.weights.gamma2)),
            ("steps", t.steps.to_string()),
            ("lr", fmt_f64(t.adam.lr)),
            ("adam_beta1", fmt_f64(t.adam.beta1)),
            ("adam_beta2", fmt_f64(t.adam.beta2)),
            ("adam_eps", fmt_f64(t.adam.eps)),
            ("log_every", t.log_every.to_string()),
            ("output", self.output.display().to_string()),
        ];
        let mut s = String::new();
        for (k, v) in lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        find(&self.problem)
    }
}

pub fn parse_omega(v: &str) -> Result<OmegaMode> {
    OmegaMode::parse(v).ok_or_else(|| Error::Config(format!("unknown omega mode `{v}` (frozen|differentiated)")))
}

pub fn parse_mode(v: &str) -> Result<ActivationMode> {
    ActivationMode::parse(v).ok_or_else(|| Error::Config(format!("unknown mode `{v}` (maf|tanh)")))
}

pub fn parse_strategy(v: &str) -> Result<Strategy> {
    Strategy::parse(v).ok_or_else(|| Error::Config(format!("unknown strategy `{v}` (grid|lhs)")))
}

/// Files written by [`run`].
#[derive(Debug)]
pub struct RunArtifacts {
    pub record: TrainRecord,
    pub metrics: PathBuf,
    pub summary: PathBuf,
    pub checkpoint: PathBuf,
}

/// Summary text: record lines as comments, then the config echo (so the file
/// itself is a valid config for an identical re-run).
pub fn summary_text(record: &TrainRecord, config: &RunConfig) -> String {
    let mut s = String::new();
    for line in record.summary().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(&config.to_text());
    s
}

/// Trains and writes `metrics.csv`, `summary.txt` and `checkpoint.bin` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    let problem = config.problem_spec()?;
    let outcome = train(&problem, &config.train)?;
    fs::create_dir_all(&config.output)?;
    let metrics = config.output.join("metrics.csv");
    let summary = config.output.join("summary.txt");
    let checkpoint = config.output.join("checkpoint.bin");
    fs::write(&metrics, outcome.record.to_csv())?;
    fs::write(&summary, summary_text(&outcome.record, config))?;
    Checkpoint { problem: config.problem.clone(), networks: outcome.params }.save(&checkpoint)?;
    Ok(RunArtifacts { record: outcome.record, metrics, summary, checkpoint })
}

pub const SWEEP_HEADER: &str = "m_interior,m_boundary,m_interface,seed,mode,final_val_rel_l2,wall_clock_s";

/// One (triple, mode, seed) training run; `error` is set when it failed.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub counts: Counts,
    pub seed: u64,
    pub mode: ActivationMode,
    pub final_val_rel_l2: f64,
    pub wall_clock_s: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepMedian {
    pub counts: Counts,
    pub mode: ActivationMode,
    /// Over successful seeds; NaN when none succeeded.
    pub final_val_rel_l2: f64,
    pub wall_clock_s: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub medians: Vec<SweepMedian>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) }
}

impl SweepResult {
    /// Data rows, then one `median` row per (triple, mode).
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SWEEP_HEADER}\n");
        let c3 = |c: &Counts| format!("{},{},{}", c.interior, c.boundary, c.interface);
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{:e},{:.3}", c3(&r.counts), r.seed, r.mode.name(), r.final_val_rel_l2, r.wall_clock_s);
        }
        for m in &self.medians {
            let _ = writeln!(s, "{},median,{},{:e},{:.3}", c3(&m.counts), m.mode.name(), m.final_val_rel_l2, m.wall_clock_s);
        }
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    /// Median errors of one mode in triple order.
    pub fn median_errors(&self, mode: ActivationMode) -> Vec<f64> {
        self.medians.iter().filter(|m| m.mode == mode).map(|m| m.final_val_rel_l2).collect()
    }

    /// Whether median error is nonincreasing with density for `mode`.
    pub fn monotone(&self, mode: ActivationMode) -> bool {
        self.median_errors(mode).windows(2).all(|w| w[1] <= w[0])
    }
}

/// Trains every (triple, mode, seed) combination; seeds run 0..n_seeds.
///
/// Each run gets its own subdirectory under `base.output/sweep`. Failed runs are
/// recorded and the sweep continues.
pub fn sweep(
    base: &RunConfig,
    triples: &[Counts],
    modes: &[ActivationMode],
    n_seeds: u64,
    mut progress: impl FnMut(&SweepRow),
) -> Result<SweepResult> {
    let problem = base.problem_spec()?;
    let mut result = SweepResult::default();
    for &counts in triples {
        for &mode in modes {
            let mut vals = Vec::new();
            let mut times = Vec::new();
            for seed in 0..n_seeds {
                let mut cfg = base.clone();
                cfg.train = cfg.train.clone().with_seed(seed);
                cfg.train.counts = Counts { initial: counts.initial.max(if problem.parabolic { 1 } else { 0 }), ..counts };
                cfg.train.mode = mode;
                cfg.output = base.output.join("sweep").join(format!(
                    "{}_{}_{}_{}_s{seed}",
                    mode.name(),
                    counts.interior,
                    counts.boundary,
                    counts.interface
                ));
                let row = match run(&cfg) {
                    Ok(a) => {
                        vals.push(a.record.final_val_rel_l2());
                        times.push(a.record.wall_clock_s);
                        SweepRow {
                            counts,
                            seed,
                            mode,
                            final_val_rel_l2: a.record.final_val_rel_l2(),
                            wall_clock_s: a.record.wall_clock_s,
                            error: None,
                        }
                    }
                    Err(e) => SweepRow {
                        counts,
                        seed,
                        mode,
                        final_val_rel_l2: f64::NAN,
                        wall_clock_s: f64::NAN,
                        error: Some(e.to_string()),
                    },
                };
                progress(&row);
                result.rows.push(row);
            }
            result.medians.push(SweepMedian {
                counts,
                mode,
                final_val_rel_l2: median(&mut vals),
                wall_clock_s: median(&mut times),
            });
        }
    }
    Ok(result)
}

/// Something that can be evaluated on a region at a point.
pub trait Evaluator {
    fn eval(&self, problem: &ProblemSpec, region: Region, x: &[f64], t: Option<f64>) -> Result<f64>;
}

impl Evaluator for Checkpoint {
    fn eval(&self, problem: &ProblemSpec, region: Region, x: &[f64], t: Option<f64>) -> Result<f64> {
        let net: &NetworkParams = &self.networks[region.index()];
        forward(net, x, t, Some(&problem.interface))
    }
}

/// The manufactured solution itself.
pub struct ExactOracle;

impl Evaluator for ExactOracle {
    fn eval(&self, problem: &ProblemSpec, region: Region, x: &[f64], t: Option<f64>) -> Result<f64> {
        problem.exact(region, x, t.unwrap_or(0.0))
    }
}

/// A resolution × resolution grid on the plane of two spatial axes through `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub axes: (usize, usize),
    /// Coordinates held fixed off the plane; defaults to zeros.
    pub point: Option<Vec<f64>>,
    pub t: Option<f64>,
}

pub fn axis_name(dim: usize, axis: usize) -> String {
    if dim <= 3 { ["x", "y", "z"][axis].to_string() } else { format!("x{}", axis + 1) }
}

pub fn parse_axis(dim: usize, name: &str) -> Result<usize> {
    let axis = match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => name.strip_prefix('x').and_then(|n| n.parse::<usize>().ok()).and_then(|n| n.checked_sub(1)),
    };
    axis.filter(|&a| a < dim).ok_or_else(|| Error::Config(format!("axis `{name}` does not exist in {dim}D")))
}

/// CSV `a,b[,t],region,u_exact,u_nn,abs_err`; points within the interface band
/// or outside the domain are left out.
pub fn export_grid(eval: &dyn Evaluator, problem: &ProblemSpec, spec: &GridSpec) -> Result<String> {
    let d = problem.dim;
    let (a, b) = spec.axes;
    if a >= d || b >= d || a == b {
        return Err(Error::Config(format!("slice axes {a},{b} invalid for a {d}D problem")));
    }
    if spec.resolution < 2 {
        return Err(Error::Config("resolution must be at least 2".into()));
    }
    let t = match (problem.parabolic, spec.t) {
        (true, Some(t)) if (0.0..=problem.horizon).contains(&t) => Some(t),
        (true, Some(t)) => return Err(Error::TimeOutOfHorizon { t, horizon: problem.horizon }),
        (true, None) => Some(problem.horizon),
        (false, None) => None,
        (false, Some(_)) => return Err(Error::Config(format!("{} is not time dependent", problem.name))),
    };
    let mut base = spec.point.clone().unwrap_or_else(|| vec![0.0; d]);
    if base.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: base.len() });
    }
    let (lo, hi) = problem.domain.bounding_box();
    let mut s = format!("{},{}", axis_name(d, a), axis_name(d, b));
    if t.is_some() {
        s.push_str(",t");
    }
    s.push_str(",region,u_exact,u_nn,abs_err\n");
    let n = spec.resolution;
    let coord = |axis: usize, k: usize| lo[axis] + (hi[axis] - lo[axis]) * k as f64 / (n - 1) as f64;
    let tt = t.unwrap_or(0.0);
    for j in 0..n {
        for i in 0..n {
            base[a] = coord(a, i);
            base[b] = coord(b, j);
            if !problem.domain.contains_closed(&base) || problem.interface.distance(&base, tt)? <= ON_INTERFACE_TOL {
                continue;
            }
            let region = match problem.region_at(&base, tt)? {
                RegionLabel::OnInterface => continue,
                label => label.region().expect("off-interface label"),
            };
            let exact = problem.exact(region, &base, tt)?;
            let nn = eval.eval(problem, region, &base, t)?;
            let _ = write!(s, "{},{}", base[a], base[b]);
            if let Some(t) = t {
                let _ = write!(s, ",{t}");
            }
            let _ = writeln!(s, ",{},{exact:e},{nn:e},{:e}", region.name(), (nn - exact).abs());
        }
    }
    Ok(s)
}

#[derive(Parser, Debug)]
#[command(name = "ipinn", version, about = "Two-network PINN solver for interface problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train from a config file; writes metrics.csv, summary.txt, checkpoint.bin.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train over density triples × seeds (× modes) and tabulate final errors.
    Sweep(SweepArgs),
    /// Write u_exact / u_nn / abs_err on a grid or slice.
    ExportGrid(ExportArgs),
    /// Run the derivative, distance-oracle and manufactured-data suites.
    Check {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print the problem catalog.
    Catalog,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// `mi,mb,mg[,m0];...`; defaults to the problem's three triples.
    #[arg(long)]
    pub triples: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Comma-separated: maf, tanh.
    #[arg(long, default_value = "maf")]
    pub modes: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long)]
    pub t: Option<f64>,
    /// Plane axes, e.g. `x,y` or `x1,x2`.
    #[arg(long, default_value = "x,y")]
    pub plane: String,
    /// Fixed coordinates off the plane, comma-separated.
    #[arg(long)]
    pub point: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Evaluate the exact solution instead of the checkpoint (a reference grid).
    #[arg(long)]
    pub exact: bool,
}

/// `mi,mb,mg[,m0]` groups separated by `;`.
pub fn parse_triples(text: &str) -> Result<Vec<Counts>> {
    text.split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|g| {
            let v: Vec<usize> = g.split(',').map(|x| parse_value("triples", x.trim())).collect::<Result<_>>()?;
            match v[..] {
                [a, b, c] => Ok(Counts::new(a, b, c, 0)),
                [a, b, c, d] => Ok(Counts::new(a, b, c, d)),
                _ => Err(Error::Config(format!("triple `{g}` needs 3 or 4 counts"))),
            }
        })
        .collect()
}

fn parse_floats(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|x| parse_value(key, x.trim())).collect()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, output } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            let a = run(&cfg)?;
            print!("{}", a.record.summary());
            println!("wrote {}, {}, {}", a.metrics.display(), a.summary.display(), a.checkpoint.display());
        }
        Command::Sweep(args) => {
            let mut cfg = RunConfig::load(&args.config)?;
            if let Some(o) = args.output {
                cfg.output = o;
            }
            let problem = cfg.problem_spec()?;
            let triples = match &args.triples {
                Some(t) => parse_triples(t)?,
                None => problem.density_triples.to_vec(),
            };
            let modes: Vec<ActivationMode> =
                args.modes.split(',').map(|m| parse_mode(m.trim())).collect::<Result<_>>()?;
            let result = sweep(&cfg, &triples, &modes, args.seeds, |r| match &r.error {
                None => eprintln!(
                    "{:?} seed {} {}: {:e} ({:.1}s)",
                    (r.counts.interior, r.counts.boundary, r.counts.interface),
                    r.seed,
                    r.mode.name(),
                    r.final_val_rel_l2,
                    r.wall_clock_s
                ),
                Some(e) => eprintln!("seed {} {} failed: {e}", r.seed, r.mode.name()),
            })?;
            fs::create_dir_all(&cfg.output)?;
            let path = cfg.output.join("sweep.csv");
            fs::write(&path, result.to_csv())?;
            print!("{}", result.to_csv());
            for mode in &modes {
                if !result.monotone(*mode) {
                    eprintln!("warning: {} median error is not monotone in density", mode.name());
                }
            }
            eprintln!("wrote {}", path.display());
            let failed: Vec<String> = result.failures().filter_map(|r| r.error.clone()).collect();
            if let Some(first) = failed.first() {
                return Err(Error::Metric(format!("{} sweep row(s) failed, first: {first}", failed.len())));
            }
        }
        Command::ExportGrid(args) => {
            let checkpoint = Checkpoint::load(&args.checkpoint)?;
            let problem = find(&checkpoint.problem)?;
            let axes: Vec<&str> = args.plane.split(',').map(str::trim).collect();
            if axes.len() != 2 {
                return Err(Error::Config(format!("--plane needs two axes, got `{}`", args.plane)));
            }
            let dim = checkpoint.networks[0].arch.spatial_dim;
            if dim != problem.dim {
                return Err(Error::DimensionMismatch { expected: problem.dim, got: dim });
            }
            let spec = GridSpec {
                resolution: args.resolution,
                axes: (parse_axis(dim, axes[0])?, parse_axis(dim, axes[1])?),
                point: args.point.as_deref().map(|p| parse_floats("point", p)).transpose()?,
                t: args.t,
            };
            let csv = if args.exact {
                export_grid(&ExactOracle, &problem, &spec)?
            } else {
                export_grid(&checkpoint, &problem, &spec)?
            };
            match args.out {
                Some(p) => fs::write(p, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Check { seed } => {
            let reports = checks::run_all(seed)?;
            for r in &reports {
                println!("{}", r.line());
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if !failed.is_empty() {
                return Err(Error::CheckFailed(failed.join(", ")));
            }
        }
        Command::Catalog => print!("{}", crate::problems::catalog_report()),
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code
/// (0 ok, 1 config, 2 numerical, 3 check failure).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_is_lossless() {
        let problem = find("ellipse2d").unwrap();
        let mut cfg = RunConfig::for_problem(&problem);
        cfg.train.adam.lr = 0.1 + 0.2;
        cfg.train.network.gauss_gamma = std::f64::consts::PI;
        cfg.train.hidden = vec![7, 9];
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.train.adam.lr.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn parse_applies_defaults_and_comments() {
        let cfg = RunConfig::parse("# test\nproblem = line2d\nsteps = 10 # short\nmode = tanh\nsample_seed = 3\n").unwrap();
        assert_eq!(cfg.train.steps, 10);
        assert_eq!(cfg.train.mode, ActivationMode::TanhOnly);
        assert_eq!(cfg.train.counts, Counts::new(400, 80, 50, 0));
        assert_eq!(cfg.train.validation_seed, 3 + VALIDATION_SEED_OFFSET);
        assert_eq!(cfg.train.strategy, Strategy::Grid);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(RunConfig::parse("steps = 3"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("problem = nope"), Err(Error::UnknownProblem { .. })));
        assert!(matches!(RunConfig::parse("problem = line2d\nbogus = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("problem = line2d\nsteps = x"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("problem = line2d\nsteps = 1\nsteps = 2"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("problem = line2d\nnot a pair"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("problem = fixed_circle\nm_initial = 0"), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_problem_lists_names() {
        let msg = RunConfig::parse("problem = nope").unwrap_err().to_string();
        assert!(msg.contains("line2d") && msg.contains("deforming_star"));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn triples_parse() {
        let t = parse_triples("100,40,25;400,80,50").unwrap();
        assert_eq!(t, vec![Counts::new(100, 40, 25, 0), Counts::new(400, 80, 50, 0)]);
        assert_eq!(parse_triples("1,2,3,4").unwrap()[0].initial, 4);
        assert!(parse_triples("1,2").is_err());
    }

    #[test]
    fn exact_oracle_grid_has_zero_error_and_skips_interface() {
        let problem = find("line2d").unwrap();
        let spec = GridSpec { resolution: 3, axes: (0, 1), point: None, t: None };
        let csv = export_grid(&ExactOracle, &problem, &spec).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,region,u_exact,u_nn,abs_err");
        // x = 0 column lies on the interface.
        assert_eq!(lines.len() - 1, 6);
        for l in &lines[1..] {
            let err: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn slices_of_higher_dimensional_problems() {
        let problem = find("ellipsoid3d").unwrap();
        let spec = GridSpec { resolution: 5, axes: (0, 2), point: Some(vec![0.0, 0.1, 0.0]), t: None };
        let csv = export_grid(&ExactOracle, &problem, &spec).unwrap();
        assert!(csv.starts_with("x,z,region,"));
        assert!(export_grid(&ExactOracle, &problem, &GridSpec { axes: (0, 3), ..spec.clone() }).is_err());
        let p10 = find("hypersphere10d").unwrap();
        assert_eq!(axis_name(10, 4), "x5");
        assert_eq!(parse_axis(10, "x5").unwrap(), 4);
        assert!(parse_axis(3, "x4").is_err());
        let csv = export_grid(&ExactOracle, &p10, &GridSpec { resolution: 4, axes: (0, 1), point: None, t: None }).unwrap();
        assert!(csv.starts_with("x1,x2,region"));
    }

    #[test]
    fn parabolic_grid_carries_time() {
        let problem = find("fixed_circle").unwrap();
        let spec = GridSpec { resolution: 4, axes: (0, 1), point: None, t: Some(0.5) };
        let csv = export_grid(&ExactOracle, &problem, &spec).unwrap();
        assert!(csv.starts_with("x,y,t,region"));
        assert!(export_grid(&ExactOracle, &problem, &GridSpec { t: Some(9.0), ..spec }).is_err());
        let ell = find("ellipse2d").unwrap();
        assert!(export_grid(&ExactOracle, &ell, &GridSpec { resolution: 4, axes: (0, 1), point: None, t: Some(0.1) }).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["ipinn", "bogus-subcommand"]), 1);
        assert_eq!(main_with_args(["ipinn", "run", "/nonexistent/config.cfg"]), 1);
    }
}
