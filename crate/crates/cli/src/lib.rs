//! Subcommands of the `ginibre` binary. Each one creates a run directory,
//! writes `manifest.json` before any data, then the data files, and finally
//! rewrites the manifest with the wall-clock time and diagnostics.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use ginibre_core::analysis::{self, axis_gap, complex_support, gap_statistics, real_histogram};
use ginibre_core::config::check_counts;
use ginibre_core::gasdyn::{self, evolve, relax, EvolveOptions, RelaxParams, Scheme, Trajectory};
use ginibre_core::mcmc::{sample_chains, write_samples_jsonl, write_trace_csv, ChainOptions};
use ginibre_core::oracle::{conditional_ensemble, estimate_pnk, write_spectra_jsonl};
use ginibre_core::ratefn::{log_pnk_asymptotic, minimum_estimate, solve_ystar, write_reports_csv};
use ginibre_core::rng::{stream, Domain};
use ginibre_core::{initial_configuration, round_to_parity, to_measure, GasParams, RunManifest, SpectralConfiguration};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
/// I/O and serialization failures; not usage and not numerics.
pub const EXIT_IO: i32 = 1;

/// Nodes per support cell used by every command that estimates supports.
const SUPPORT_RESOLUTION: usize = 4;
/// Fraction of a stochastic trajectory averaged for ensemble observables.
const TAIL_FRACTION: f64 = 0.2;
const HISTOGRAM_BINS: usize = 40;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Numerical(m) => ("numerical", m),
            CliError::Io(m) => ("io", m),
        };
        json!({ "error": kind, "exit_code": self.exit_code(), "message": message })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ginibre_core::Error> for CliError {
    fn from(e: ginibre_core::Error) -> Self {
        use ginibre_core::Error as E;
        match e {
            E::Io(_) | E::Json(_) => CliError::Io(e.to_string()),
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// An open run directory.
struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    fn create(dir: &Path, manifest: RunManifest) -> CliResult<Run> {
        std::fs::create_dir_all(dir)?;
        manifest.save(dir.join("manifest.json"))?;
        Ok(Run { dir: dir.to_path_buf(), manifest, started: Instant::now() })
    }

    fn writer(&self, name: &str) -> CliResult<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn write_json(&self, name: &str, value: &impl serde::Serialize) -> CliResult<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn finish(mut self, summary: Value) -> CliResult<Value> {
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        if let Value::Object(map) = &summary {
            for (k, v) in map {
                self.manifest.diagnostic(k, v);
            }
        }
        self.manifest.save(self.dir.join("manifest.json"))?;
        self.write_json("summary.json", &summary)?;
        Ok(summary)
    }

    /// Runs `body` and leaves `error.json` in the directory if it fails.
    fn execute(self, body: impl FnOnce(&Run) -> CliResult<Value>) -> CliResult<Value> {
        match body(&self) {
            Ok(summary) => self.finish(summary),
            Err(e) => {
                let _ = self.write_json("error.json", &e.record());
                Err(e)
            }
        }
    }
}

/// Output directory: `--out` if given, else `<root>/<default_name>`.
fn run_dir(out: &Option<PathBuf>, root: &Path, default_name: String) -> PathBuf {
    out.clone().unwrap_or_else(|| root.join(default_name))
}

fn histogram_to(run: &Run, name: &str, ensemble: &[SpectralConfiguration]) -> CliResult<Option<f64>> {
    if ensemble.iter().all(|c| c.k() == 0) {
        return Ok(None);
    }
    let h = real_histogram(ensemble, HISTOGRAM_BINS, None)?;
    let mut w = run.writer(name)?;
    h.write_csv(&mut w)?;
    w.flush()?;
    Ok(Some(h.integral()))
}

/// Support boundary as CSV `re,im`, closed loops separated by blank lines.
/// Skipped with a reason when the planar phase is too small.
fn support_to(run: &Run, name: &str, ensemble: &[SpectralConfiguration]) -> CliResult<Value> {
    match complex_support(ensemble, SUPPORT_RESOLUTION) {
        Ok(s) => {
            let mut w = run.writer(name)?;
            writeln!(w, "re,im")?;
            for (i, loop_) in s.components.iter().enumerate() {
                if i > 0 {
                    writeln!(w)?;
                }
                for z in loop_ {
                    writeln!(w, "{},{}", z.re, z.im)?;
                }
            }
            w.flush()?;
            Ok(json!({
                "area": s.area,
                "min_y": s.min_y,
                "flatness": s.flatness,
                "interior_nodes": s.interior_nodes,
                "components": s.components.len(),
                "particle_min_y": s.particle_min_y,
            }))
        }
        Err(e @ (ginibre_core::Error::Resolution(_) | ginibre_core::Error::Degenerate(_))) => Ok(json!({ "skipped": e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GasMode {
    Deterministic,
    Stochastic,
}

#[derive(Args, Debug, Clone)]
pub struct GasArgs {
    #[arg(long)]
    pub n: usize,
    /// Target on-axis fraction; k is the closest integer to alpha*n with the parity of n.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "deterministic")]
    pub mode: GasMode,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Largest time step; the stability rule may take smaller ones.
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record every this many steps (default: steps/100).
    #[arg(long)]
    pub stride: Option<usize>,
    /// Deterministic mode only: relax until the rms gradient is below this
    /// instead of running a fixed number of steps.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Reject deterministic steps that raise the energy.
    #[arg(long)]
    pub enforce_descent: bool,
    /// Allow sigma^2 > 2, where collisions are not ruled out.
    #[arg(long)]
    pub experimental: bool,
    /// Time stepping: split-implicit (nearest-neighbour barriers implicit) or explicit.
    #[arg(long, default_value = "split-implicit")]
    pub scheme: Scheme,
}

pub fn cmd_gas(args: &GasArgs, out_root: &Path) -> CliResult<Value> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Usage(format!("alpha = {} must lie in [0, 1]", args.alpha)));
    }
    if args.n == 0 {
        return Err(CliError::Usage("n must be positive".into()));
    }
    let k = round_to_parity(args.alpha, args.n)?;
    let sigma = if args.mode == GasMode::Deterministic { 0.0 } else { args.sigma };
    let params = GasParams::new(args.n, k, sigma, args.dt, args.steps, args.seed)?;
    if params.is_supercritical() && !args.experimental {
        return Err(CliError::Usage(format!("sigma^2 = {} exceeds 2; pass --experimental to run anyway", sigma * sigma)));
    }
    if args.tolerance.is_some() && args.mode != GasMode::Deterministic {
        return Err(CliError::Usage("--tolerance applies to deterministic mode only".into()));
    }
    let dir = run_dir(&args.out, out_root, format!("gas-n{}-a{}-seed{}", args.n, args.alpha, args.seed));
    let manifest = RunManifest::new("gas", Some(args.seed))
        .param("n", args.n)
        .param("alpha", args.alpha)
        .param("k", k)
        .param("mode", format!("{:?}", args.mode).to_lowercase())
        .param("steps", args.steps)
        .param("dt", args.dt)
        .param("sigma", sigma)
        .param("tolerance", args.tolerance)
        .param("scheme", args.scheme)
        .output("trajectory.jsonl")
        .output("diagnostics.csv")
        .output("final.json")
        .output("measure.csv")
        .output("histogram.csv")
        .output("support.csv")
        .output("summary.json");
    Run::create(&dir, manifest)?.execute(|run| {
        let init = initial_configuration(args.n, k, &mut stream(args.seed, Domain::Init, 0))?;
        let (traj, ensemble, extra) = match args.tolerance {
            Some(tol) => {
                let relaxed = relax(&init, RelaxParams { tolerance: tol, max_steps: args.steps, ..Default::default() })?;
                let mut traj = Trajectory::default();
                for (step, c) in [(0, &init), (relaxed.steps, &relaxed.config)] {
                    traj.snapshots.push(gasdyn::Snapshot {
                        step,
                        // relaxation has no physical time; record the iteration
                        time: step as f64,
                        energy: ginibre_core::potential::total_energy(c)?.total,
                        min_separation: gasdyn::min_separation(c),
                        config: c.clone(),
                    });
                }
                let extra = json!({ "relax_steps": relaxed.steps, "rms_gradient": relaxed.rms_gradient });
                (traj, vec![relaxed.config], extra)
            }
            None => {
                let mode = match args.mode {
                    GasMode::Deterministic => gasdyn::Mode::Deterministic,
                    GasMode::Stochastic => gasdyn::Mode::Stochastic,
                };
                let stride = args.stride.unwrap_or((args.steps / 100).max(1)).max(1);
                let options = EvolveOptions::new(mode).stride(stride).enforce_descent(args.enforce_descent).scheme(args.scheme);
                let traj = evolve(&init, &params, options, |_| {})?;
                let ensemble: Vec<SpectralConfiguration> = match args.mode {
                    GasMode::Deterministic => vec![traj.last().config.clone()],
                    GasMode::Stochastic => traj.tail(TAIL_FRACTION).iter().map(|s| s.config.clone()).collect(),
                };
                let extra = json!({ "descent_retries": traj.descent_retries });
                (traj, ensemble, extra)
            }
        };
        traj.save(run.dir.join("trajectory.jsonl"), run.dir.join("diagnostics.csv"))?;
        let last = traj.last();
        last.config.write_json(run.dir.join("final.json"))?;
        to_measure(&last.config).save_csv(run.dir.join("measure.csv"))?;
        let histogram_mass = histogram_to(run, "histogram.csv", &ensemble)?;
        let support = support_to(run, "support.csv", &ensemble)?;
        let summary = json!({
            "n": args.n,
            "k": k,
            "final_energy": last.energy,
            "final_min_separation": last.min_separation,
            "guard_trips": traj.guard_trips,
            "axis_gap": axis_gap(&ensemble).ok(),
            "histogram_mass": histogram_mass,
            "support": support,
            "run": extra,
        });
        if traj.guard_trips > 0 {
            run.write_json("summary.json", &summary)?;
            return Err(CliError::Numerical(format!("{} guard trips during the run", traj.guard_trips)));
        }
        Ok(summary)
    })
}

#[derive(Args, Debug, Clone)]
pub struct McmcArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 200_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 20_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 100)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_mcmc(args: &McmcArgs, out_root: &Path) -> CliResult<Value> {
    if args.n == 0 || args.chains == 0 {
        return Err(CliError::Usage("n and chains must be positive".into()));
    }
    let dir = run_dir(&args.out, out_root, format!("mcmc-n{}-k{}-seed{}", args.n, args.k, args.seed));
    let options = ChainOptions::new(args.steps, args.burn_in, args.thin, args.seed);
    // parameter errors before any directory is created
    check_counts(args.n, args.k)?;
    let manifest = RunManifest::new("mcmc", Some(args.seed))
        .param("n", args.n)
        .param("k", args.k)
        .param("steps", args.steps)
        .param("burn_in", args.burn_in)
        .param("thin", args.thin)
        .param("chains", args.chains)
        .output("samples.jsonl")
        .output("trace.csv")
        .output("histogram.csv")
        .output("summary.json");
    Run::create(&dir, manifest)?.execute(|run| {
        let outputs = sample_chains(args.n, args.k, options, args.chains)?;
        let samples: Vec<SpectralConfiguration> = outputs.iter().flat_map(|o| o.samples.iter().cloned()).collect();
        let trace: Vec<_> = outputs.iter().flat_map(|o| o.trace.iter().copied()).collect();
        let mut w = run.writer("samples.jsonl")?;
        write_samples_jsonl(&samples, &mut w)?;
        w.flush()?;
        let mut w = run.writer("trace.csv")?;
        write_trace_csv(&trace, &mut w)?;
        w.flush()?;
        let histogram_mass = if samples.is_empty() { None } else { histogram_to(run, "histogram.csv", &samples)? };
        let min_y = samples.iter().flat_map(|c| c.uppers().iter().map(|z| z.im)).fold(f64::INFINITY, f64::min);
        let stats: Vec<Value> = outputs
            .iter()
            .map(|o| {
                json!({
                    "chain": o.stats.chain,
                    "real_scale": o.stats.scales.real,
                    "complex_scale": o.stats.scales.complex,
                    "real_acceptance": o.stats.real_moves.rate(),
                    "complex_acceptance": o.stats.complex_moves.rate(),
                    "max_drift": o.stats.max_drift,
                })
            })
            .collect();
        Ok(json!({
            "n": args.n,
            "k": args.k,
            "samples": samples.len(),
            "on_axis_mass": args.k as f64 / args.n as f64,
            "histogram_mass": histogram_mass,
            "ensemble_min_y": if min_y.is_finite() { Some(min_y) } else { None },
            "chains": stats,
        }))
    })
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also collect spectra with exactly this many real eigenvalues.
    #[arg(long)]
    pub k: Option<usize>,
    /// Stop collecting conditioned spectra once this many were accepted.
    #[arg(long, default_value_t = 10_000)]
    pub target: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_oracle(args: &OracleArgs, out_root: &Path) -> CliResult<Value> {
    if args.n == 0 || args.trials == 0 {
        return Err(CliError::Usage("n and trials must be positive".into()));
    }
    let dir = run_dir(&args.out, out_root, format!("oracle-n{}-seed{}", args.n, args.seed));
    let mut manifest = RunManifest::new("oracle", Some(args.seed))
        .param("n", args.n)
        .param("trials", args.trials)
        .param("k", args.k)
        .output("pmf.csv")
        .output("summary.json");
    if args.k.is_some() {
        manifest = manifest.param("target", args.target).output("spectra.jsonl");
    }
    Run::create(&dir, manifest)?.execute(|run| {
        let pmf = estimate_pnk(args.n, args.trials, args.seed)?;
        let mut w = run.writer("pmf.csv")?;
        pmf.write_csv(&mut w)?;
        w.flush()?;
        let probabilities: serde_json::Map<String, Value> =
            pmf.counts.keys().map(|&k| (k.to_string(), json!({ "p": pmf.probability(k), "stderr": pmf.stderr(k) }))).collect();
        let conditioned = match args.k {
            Some(k) => {
                let e = conditional_ensemble(args.n, k, args.target, args.trials, args.seed)?;
                let mut w = run.writer("spectra.jsonl")?;
                write_spectra_jsonl(&e.spectra, &mut w)?;
                w.flush()?;
                Some(json!({ "k": k, "accepted": e.spectra.len(), "trials": e.trials, "acceptance": e.acceptance() }))
            }
            None => None,
        };
        Ok(json!({
            "n": args.n,
            "trials": args.trials,
            "mean_real": pmf.mean(),
            "mean_real_stderr": pmf.mean_stderr(),
            "pmf": probabilities,
            "conditioned": conditioned,
        }))
    })
}

#[derive(Args, Debug, Clone)]
pub struct RateArgs {
    /// Comma-separated on-axis fractions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    /// Particles in the finer relaxation; the error bar compares with n/2.
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_rate(args: &RateArgs, out_root: &Path) -> CliResult<Value> {
    if let Some(a) = args.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(CliError::Usage(format!("alpha = {a} must lie in [0, 1]")));
    }
    let dir = run_dir(&args.out, out_root, format!("rate-n{}-seed{}", args.n, args.seed));
    let mut manifest = RunManifest::new("rate", Some(args.seed))
        .param("alpha", &args.alpha)
        .param("n_particles", args.n)
        .param("tolerance", args.tolerance)
        .output("rate.csv");
    for (i, _) in args.alpha.iter().enumerate() {
        manifest = manifest.output(format!("minimizer-{i}.json"));
    }
    let manifest = manifest.output("summary.json");
    Run::create(&dir, manifest)?.execute(|run| {
        let params = RelaxParams { tolerance: args.tolerance, ..Default::default() };
        let mut reports = Vec::new();
        let mut rows = Vec::new();
        for (i, &alpha) in args.alpha.iter().enumerate() {
            let est = minimum_estimate(alpha, args.n, params, args.seed)?;
            est.config.write_json(run.dir.join(format!("minimizer-{i}.json")))?;
            rows.push(json!({
                "alpha": alpha,
                "I": est.report.rate_value,
                "stderr": est.report.stderr,
                "coarse": est.coarse_value,
                "log_pnk_leading": log_pnk_asymptotic(alpha, args.n, est.report.rate_value)?,
            }));
            reports.push(est.report);
        }
        let mut w = run.writer("rate.csv")?;
        write_reports_csv(&reports, &mut w)?;
        w.flush()?;
        Ok(json!({ "n_particles": args.n, "estimates": rows }))
    })
}

#[derive(Args, Debug, Clone)]
pub struct YstarArgs {
    #[arg(long, default_value_t = 200)]
    pub quadrature: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_ystar(args: &YstarArgs, out_root: &Path) -> CliResult<Value> {
    let dir = run_dir(&args.out, out_root, "ystar".into());
    let manifest = RunManifest::new("ystar", None).param("quadrature_points", args.quadrature).output("summary.json");
    Run::create(&dir, manifest)?.execute(|_| {
        let y = solve_ystar(args.quadrature)?;
        Ok(json!({ "ystar": y, "quadrature_points": args.quadrature }))
    })
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    /// A configuration (`.json`) or configurations as JSON lines, either
    /// bare or under a `config` key as in trajectories.
    #[arg(long)]
    pub input: PathBuf,
    /// Keep only the last fraction of the lines of a JSON-lines input.
    #[arg(long, default_value_t = 1.0)]
    pub tail: f64,
    #[arg(long, default_value_t = HISTOGRAM_BINS)]
    pub bins: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reads configurations from a `.json` file or a JSON-lines file.
pub fn read_configurations(path: &Path) -> CliResult<Vec<SpectralConfiguration>> {
    let parse = |v: Value| -> CliResult<SpectralConfiguration> {
        let v = match v {
            Value::Object(mut m) if m.contains_key("config") => m.remove("config").unwrap_or(Value::Null),
            v => v,
        };
        let c: SpectralConfiguration = serde_json::from_value(v)?;
        // re-validate through the checked constructor
        Ok(ginibre_core::make_configuration(c.reals().to_vec(), c.uppers().to_vec())?)
    };
    let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(vec![parse(serde_json::from_reader(BufReader::new(file))?)?]);
    }
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(parse(serde_json::from_str(&line)?)?);
        }
    }
    Ok(out)
}

pub fn cmd_analyze(args: &AnalyzeArgs, out_root: &Path) -> CliResult<Value> {
    if !(args.tail > 0.0 && args.tail <= 1.0) {
        return Err(CliError::Usage(format!("tail = {} must lie in (0, 1]", args.tail)));
    }
    let mut configs = read_configurations(&args.input)?;
    if configs.is_empty() {
        return Err(CliError::Usage(format!("{} holds no configurations", args.input.display())));
    }
    let keep = ((configs.len() as f64 * args.tail).ceil() as usize).max(1);
    configs.drain(..configs.len() - keep);
    let stem = args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = run_dir(&args.out, out_root, format!("analyze-{stem}"));
    let manifest = RunManifest::new("analyze", None)
        .param("input", args.input.display().to_string())
        .param("tail", args.tail)
        .param("bins", args.bins)
        .output("histogram.csv")
        .output("support.csv")
        .output("summary.json");
    Run::create(&dir, manifest)?.execute(|run| {
        let histogram = if configs.iter().any(|c| c.k() > 0) {
            let h = real_histogram(&configs, args.bins, None)?;
            let mut w = run.writer("histogram.csv")?;
            h.write_csv(&mut w)?;
            w.flush()?;
            let k_over_n = configs.iter().map(|c| c.k() as f64 / c.n() as f64).sum::<f64>() / configs.len() as f64;
            Some(json!({
                "mass": h.integral(),
                "semicircle_sup_distance": h.sup_distance(analysis::semicircle_cdf, k_over_n),
            }))
        } else {
            None
        };
        let gaps = gap_statistics(configs.last().expect("nonempty")).ok();
        Ok(json!({
            "configurations": configs.len(),
            "n": configs[0].n(),
            "k": configs[0].k(),
            "axis_gap": axis_gap(&configs).ok(),
            "histogram": histogram,
            "support": support_to(run, "support.csv", &configs)?,
            "real_gaps": gaps.map(|g| json!({ "mean": g.mean, "cv": g.cv, "unfolded_cv": g.unfolded_cv })),
        }))
    })
}
