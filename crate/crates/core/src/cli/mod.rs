//! Command-line front end: configuration, the analysis pipeline, and report
//! files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 violated
//! hypothesis (map not expanding, exponent not admissible, ...), 3 numerical
//! failure (solver nonconvergence or a failed hard check).

mod config;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::holder_space::{
    dual_norm_complex, dual_norm_detailed, GridFunction, TestFunction, DEFAULT_PHASES,
    DEFAULT_TOL,
};
use crate::ly_lab::{admissible_alpha, ly_verify, summability, LyOptions, LyReport};
use crate::map_model::{catalog, MapSpec, PiecewiseMap, Weight, WeightSpec};
use crate::spectral::{
    correlation_decay, leading_density, spectrum_report, BoundsOptions, DecayReport,
    Spectrum, SpectrumOptions, SpectrumReport, DENSE_LIMIT,
};
use crate::transfer::{apply_matrix, ulam_matrix, UlamOptions};

pub use config::RunConfig;

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "FRACBV_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotAdmissible { .. }
        | Error::InvalidMap(_)
        | Error::OverlappingDomains(..)
        | Error::NonMonotone { .. }
        | Error::NotExpanding { .. } => EXIT_HYPOTHESIS,
        Error::LpNonConvergence { .. }
        | Error::EigenNonConvergence(_)
        | Error::LeadingEigenvalueNotPositive { .. }
        | Error::NegativeDensity(_)
        | Error::DenseLimit { .. }
        | Error::InsufficientTruncation { .. }
        | Error::QuadratureOutsideDomain { .. } => EXIT_NUMERICAL,
        Error::InvalidArgument(_)
        | Error::Expression(_)
        | Error::DimensionMismatch { .. }
        | Error::ComplexWeight
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_USAGE,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "fracbv",
    version,
    about = "Fractional-BV norms, transfer operators and Lasota-Yorke checks for interval maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in maps with their Hölder and integrability data.
    Catalog {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Full pipeline: validation, admissibility, spectrum, bounds, decay and
    /// Lasota-Yorke verification.
    Analyze(RunArgs),
    /// Dual norm of a grid density read from CSV or JSON.
    Norm(NormArgs),
    /// Invariant density (leading Ulam eigenvector).
    Density(RunArgs),
    /// Ulam spectrum with the spectral-radius bounds.
    Spectrum(RunArgs),
    /// Decay of correlations for one observable and test function.
    Decay(DecayArgs),
    /// Lasota-Yorke verification on random and adversarial densities.
    LyCheck(RunArgs),
}

/// Flags shared by the map-based commands; each overrides the config key of
/// the same name.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Catalog map name: doubling, tent, gauss or cusp(κ).
    #[arg(long)]
    map: Option<String>,
    /// Weight: `pf` or `const:<value>`; other kinds need a config file.
    #[arg(long)]
    weight: Option<String>,
    /// Hölder exponent of the test functions, in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Override for the weight's Hölder exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Summability exponent, in [0, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Override for the map's integrability exponent.
    #[arg(long)]
    r: Option<f64>,
    /// Ulam grid size.
    #[arg(long)]
    n: Option<usize>,
    /// Branches kept for countable maps.
    #[arg(long)]
    truncation: Option<usize>,
    /// Gauss-Legendre order per intersection interval.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Random densities in the Lasota-Yorke check.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed of the random densities.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest iterate in the essential-rate estimate.
    #[arg(long)]
    k_max: Option<usize>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Skip the grid-doubling pass of the Lasota-Yorke check.
    #[arg(long)]
    no_refine: bool,
    /// Skip the grid-doubling pass of the eigenvalue stability filter.
    #[arg(long)]
    no_stability: bool,
}

#[derive(Args, Debug)]
struct DecayArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Observable `h(x)`, sampled at cell midpoints.
    #[arg(long)]
    h: Option<String>,
    /// Test function `φ(x)`.
    #[arg(long)]
    phi: Option<String>,
    /// Number of correlation steps.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct NormArgs {
    /// Density file: one cell value (or `re,im`) per line, or JSON.
    input: PathBuf,
    /// Hölder exponent, in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Relative gap of the nodal program.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Phase samples for complex densities.
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    phases: usize,
    /// Output directory.
    #[arg(long, short, default_value = "fracbv-out")]
    output: PathBuf,
}

fn parse_weight_flag(flag: &str) -> Result<WeightSpec> {
    if flag == "pf" {
        return Ok(WeightSpec::default());
    }
    if let Some(v) = flag.strip_prefix("const:") {
        let value = v
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad constant weight `{flag}`")))?;
        return Ok(WeightSpec {
            kind: "const".into(),
            value: Some(value),
            ..WeightSpec::default()
        });
    }
    Err(Error::Config(format!(
        "weight flag `{flag}` must be `pf` or `const:<value>`; use a config file for other kinds"
    )))
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.map {
            cfg.map = MapSpec::catalog(m);
        }
        if let Some(w) = &self.weight {
            cfg.weight = parse_weight_flag(w)?;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(alpha, gamma, n, truncation, quad_order, samples, seed, k_max);
        if self.beta.is_some() {
            cfg.beta = self.beta;
        }
        if self.r.is_some() {
            cfg.r = self.r;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if self.no_refine {
            cfg.refine = false;
        }
        if self.no_stability {
            cfg.stability = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One file in the run manifest.
#[derive(Clone, Debug, Serialize)]
pub struct ArtifactEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

/// A named pass/fail check of the pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Provenance of one run. Timestamps are the only nondeterministic fields.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckEntry>,
    pub exit_code: i32,
    pub artifacts: Vec<ArtifactEntry>,
}

/// Tolerances in force for a run.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub dual_norm: f64,
    pub ly_slack: f64,
    pub l1_contraction: f64,
    pub power_agreement: f64,
    pub density_negativity: f64,
    pub stability_move: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dual_norm: DEFAULT_TOL,
            ly_slack: LyOptions::default().slack_tol,
            l1_contraction: 1e-8,
            power_agreement: crate::spectral::POWER_AGREEMENT_TOL,
            density_negativity: crate::spectral::DENSITY_NEGATIVITY_TOL,
            stability_move: crate::spectral::STABILITY_MOVE_TOL,
        }
    }
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Output directory plus the manifest of everything written into it.
struct Outputs {
    dir: PathBuf,
    written: Vec<ArtifactEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, file: &str, contents: &[u8]) -> Result<()> {
        fs::write(self.dir.join(file), contents)?;
        self.written.push(ArtifactEntry {
            file: file.to_string(),
            bytes: contents.len(),
            sha256: config::hex(&Sha256::digest(contents)),
        });
        Ok(())
    }

    fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(file, text.as_bytes())
    }

    fn finish(
        self,
        command: &str,
        cfg: &RunConfig,
        started: u128,
        checks: Vec<CheckEntry>,
        exit_code: i32,
    ) -> Result<()> {
        let record = RunRecord {
            tool: "fracbv".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: cfg.hash()?,
            config: cfg.clone(),
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            tolerances: Tolerances::default(),
            checks,
            exit_code,
            artifacts: self.written,
        };
        let mut text = serde_json::to_string_pretty(&record)?;
        text.push('\n');
        fs::write(self.dir.join("run_record.json"), text)?;
        Ok(())
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => crate::par::set_worker_count(w),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return EXIT_USAGE;
            }
        }
    }
    let outcome = match cli.command {
        Command::Catalog { json } => cmd_catalog(json),
        Command::Analyze(a) => a.resolve().and_then(|cfg| cmd_analyze(&cfg)),
        Command::Norm(a) => cmd_norm(&a),
        Command::Density(a) => a.resolve().and_then(|cfg| cmd_density(&cfg)),
        Command::Spectrum(a) => a.resolve().and_then(|cfg| cmd_spectrum(&cfg)),
        Command::Decay(a) => a.run.resolve().and_then(|mut cfg| {
            if let Some(h) = a.h {
                cfg.decay_h = h;
            }
            if let Some(phi) = a.phi {
                cfg.decay_phi = phi;
            }
            if let Some(s) = a.steps {
                cfg.decay_steps = s;
            }
            cfg.validate()?;
            cmd_decay(&cfg)
        }),
        Command::LyCheck(a) => a.resolve().and_then(|cfg| cmd_ly(&cfg)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_catalog(json: bool) -> Result<i32> {
    let entries = catalog();
    if json {
        println!("{}", serde_json::to_string_pretty(&entries)?);
        return Ok(EXIT_OK);
    }
    println!(
        "{:<12} {:<20} {:>7} {:>6} {:>8} {:>8} {:>6} {:>6} {:>8}",
        "name", "formula", "lambda", "beta", "C_beta", "r", "r_lim", "gamma", "infinite"
    );
    for e in entries {
        println!(
            "{:<12} {:<20} {:>7.3} {:>6.3} {:>8.4} {:>8.3} {:>6} {:>6.2} {:>8}",
            e.name,
            e.formula,
            e.expansion_lambda,
            e.beta,
            e.holder_constant,
            e.r,
            if e.r_limit.is_finite() {
                format!("{:.3}", e.r_limit)
            } else {
                "inf".into()
            },
            e.gamma,
            if e.infinite_partition { "yes" } else { "no" }
        );
    }
    Ok(EXIT_OK)
}

fn cmd_norm(args: &NormArgs) -> Result<i32> {
    #[derive(Serialize)]
    struct NormReport {
        input: String,
        alpha: f64,
        n: usize,
        complex: bool,
        value: f64,
        upper: Option<f64>,
        t: Option<f64>,
    }
    let text = fs::read_to_string(&args.input)?;
    let is_json = args.input.extension().and_then(|e| e.to_str()) == Some("json");
    let real = if is_json {
        GridFunction::<f64>::from_json(&text)
    } else {
        GridFunction::<f64>::from_csv(&text)
    };
    let report = match real {
        Ok(h) => {
            let d = dual_norm_detailed(&h, args.alpha, args.tol)?;
            NormReport {
                input: args.input.display().to_string(),
                alpha: args.alpha,
                n: h.n(),
                complex: false,
                value: d.value,
                upper: Some(d.upper),
                t: Some(d.t),
            }
        }
        Err(_) => {
            let h = if is_json {
                GridFunction::from_json(&text)?
            } else {
                GridFunction::from_csv(&text)?
            };
            let value = dual_norm_complex(&h, args.alpha, args.tol, args.phases)?;
            NormReport {
                input: args.input.display().to_string(),
                alpha: args.alpha,
                n: h.n(),
                complex: true,
                value,
                upper: None,
                t: None,
            }
        }
    };
    let started = now_ms();
    let mut out = Outputs::new(&args.output)?;
    out.json("norm.json", &report)?;
    let cfg = RunConfig {
        alpha: args.alpha,
        output: args.output.clone(),
        ..RunConfig::default()
    };
    out.finish("norm", &cfg, started, Vec::new(), EXIT_OK)?;
    println!("norm: {:.6} (alpha = {}, n = {})", report.value, args.alpha, report.n);
    Ok(EXIT_OK)
}

fn build(cfg: &RunConfig) -> Result<(PiecewiseMap, Weight)> {
    let map = cfg.build_map()?;
    let weight = cfg.build_weight(&map)?;
    Ok((map, weight))
}

fn ulam_options(cfg: &RunConfig) -> UlamOptions {
    UlamOptions {
        quad_order: cfg.quad_order,
        truncation: cfg.truncation,
        ..Default::default()
    }
}

fn spectrum_options(cfg: &RunConfig) -> SpectrumOptions {
    SpectrumOptions {
        n: cfg.n,
        count: cfg.eigen_count,
        quad_order: cfg.quad_order,
        bounds: BoundsOptions {
            k_max: cfg.k_max,
            gamma: cfg.gamma,
            truncation: cfg.truncation,
            ..Default::default()
        },
        stability: cfg.stability,
        dense_limit: DENSE_LIMIT,
    }
}

fn ly_options(cfg: &RunConfig) -> LyOptions {
    LyOptions {
        n: cfg.n,
        samples: cfg.samples,
        seed: cfg.seed,
        gamma: cfg.gamma,
        quad_order: cfg.quad_order,
        truncation: cfg.truncation,
        refine: cfg.refine,
        ..Default::default()
    }
}

/// Admissibility of the configured exponents; fails with the violated
/// inequalities named.
fn check_admissible(cfg: &RunConfig, map: &PiecewiseMap, weight: &Weight, out: &mut Outputs) -> Result<()> {
    let report = admissible_alpha(&cfg.params(map, weight)?);
    out.json("admissibility.json", &report)?;
    report.require()
}

/// Density, its fixed-point residual, and whether it stays nonnegative.
fn density_with_residual(cfg: &RunConfig, map: &PiecewiseMap, weight: &Weight) -> Result<(GridFunction<f64>, f64)> {
    let m = ulam_matrix(map, weight, cfg.n, &ulam_options(cfg))?;
    let h = leading_density(&m)?;
    let residual = apply_matrix(&m, &h)?.l1_distance(&h)?;
    Ok((h, residual))
}

fn decay_run(cfg: &RunConfig, map: &PiecewiseMap, weight: &Weight) -> Result<DecayReport> {
    let h_expr = Expr::parse(&cfg.decay_h)?;
    let phi_expr = Expr::parse(&cfg.decay_phi)?;
    let h = GridFunction::sample_midpoints(cfg.n, |x| h_expr.eval(x))?;
    let phi = TestFunction::from_fn(cfg.n, |x| phi_expr.eval(x))?;
    correlation_decay(map, weight, &h, &phi, cfg.decay_steps, cfg.n, &ulam_options(cfg))
}

fn density_svg(h: &GridFunction<f64>, title: &str) -> String {
    let n = h.n() as f64;
    let xs: Vec<f64> = (0..h.n()).map(|i| (i as f64 + 0.5) / n).collect();
    svg::line_plot(title, "x", "density", &xs, h.values())
}

fn spectrum_svg(report: &SpectrumReport, spectrum: &Spectrum) -> String {
    let points: Vec<(f64, f64)> = spectrum.eigenvalues.iter().map(|z| (z.re, z.im)).collect();
    svg::eigen_scatter(
        &format!("Ulam spectrum, {} (n = {})", report.map, report.n),
        &points,
        &[
            (report.bounds.rho_bound, "black"),
            (report.bounds.ess_bound_single, "gray"),
            (report.bounds.ess_rate_power, "darkorange"),
        ],
    )
}

fn decay_svg(decay: &DecayReport) -> String {
    let xs: Vec<f64> = (1..=decay.correlations.len()).map(|k| k as f64).collect();
    let ys: Vec<f64> = decay
        .correlations
        .iter()
        .map(|c| if *c != 0.0 { c.abs().log10() } else { f64::NAN })
        .collect();
    svg::line_plot("Decay of correlations", "k", "log10 |C_k|", &xs, &ys)
}

fn ly_checks(ly: &LyReport) -> Vec<CheckEntry> {
    let mut checks = vec![
        CheckEntry {
            name: "ly_l1_contraction".into(),
            pass: ly.l1_ok,
            detail: format!("max ratio {:.12}", ly.l1_contraction_max_ratio),
        },
        CheckEntry {
            name: "ly_slacks".into(),
            pass: ly.slacks_ok,
            detail: format!("min slack {:e}, fitted B {:e}", ly.min_slack, ly.fitted_b),
        },
        CheckEntry {
            name: "ly_no_skipped_samples".into(),
            pass: ly.skipped == 0,
            detail: format!("{} skipped", ly.skipped),
        },
    ];
    if let Some(r) = &ly.refinement {
        checks.push(CheckEntry {
            name: "ly_refinement_slacks".into(),
            pass: r.min_slack >= -ly.tolerances.slack_tol,
            detail: format!(
                "fitted B at n = {}: {:e}, ratio {}",
                r.n, r.fitted_b, r.ratio
            ),
        });
    }
    checks
}

fn exit_for(checks: &[CheckEntry]) -> i32 {
    if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}

fn report_checks(checks: &[CheckEntry]) {
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
}

/// Runs the whole pipeline and writes every artifact into `cfg.output`.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<i32> {
    let started = now_ms();
    let mut out = Outputs::new(&cfg.output)?;
    let (map, weight) = build(cfg)?;
    check_admissible(cfg, &map, &weight, &mut out)?;
    out.json("summability.json", &summability(&map, &weight, cfg.gamma, cfg.truncation)?)?;

    let (spec, spectrum) = spectrum_report(&map, &weight, cfg.alpha, &spectrum_options(cfg))?;
    out.json("spectrum.json", &spec)?;
    out.write("eigenvalues.csv", spectrum.eigenvalues_csv().as_bytes())?;

    let (density, residual) = density_with_residual(cfg, &map, &weight)?;
    out.write("density.csv", density.to_csv().as_bytes())?;

    let decay = decay_run(cfg, &map, &weight)?;
    out.write("decay.csv", decay.to_csv().as_bytes())?;

    let ly = ly_verify(&map, &weight, cfg.alpha, &ly_options(cfg))?;
    out.json("ly_report.json", &ly)?;
    out.write("ly_samples.csv", ly.samples_csv().as_bytes())?;

    out.write(
        "density.svg",
        density_svg(&density, &format!("Invariant density, {}", map.name())).as_bytes(),
    )?;
    out.write("spectrum.svg", spectrum_svg(&spec, &spectrum).as_bytes())?;
    out.write("decay.svg", decay_svg(&decay).as_bytes())?;

    let mut checks = vec![
        CheckEntry {
            name: "power_iteration_agrees".into(),
            pass: spec.power_check.agrees,
            detail: format!(
                "QR {:.12}, power {:.12}",
                spec.leading_eigenvalue.re, spec.power_check.estimate
            ),
        },
        CheckEntry {
            name: "density_fixed_point".into(),
            pass: residual <= 1e-8,
            detail: format!("|Mh - h|_1 = {residual:e}"),
        },
        CheckEntry {
            name: "bounds_ordered".into(),
            pass: spec.bounds.ess_rate_power <= spec.bounds.ess_bound_single
                && spec.bounds.ess_bound_single <= spec.bounds.rho_bound,
            detail: format!(
                "{:.6} <= {:.6} <= {:.6}",
                spec.bounds.ess_rate_power, spec.bounds.ess_bound_single, spec.bounds.rho_bound
            ),
        },
    ];
    checks.extend(ly_checks(&ly));
    let code = exit_for(&checks);
    report_checks(&checks);
    out.finish("analyze", cfg, started, checks, code)?;

    println!(
        "{}: leading eigenvalue {:.10}, |λ2| = {:.6}, ess_rate_power = {:.6}, fitted B = {:.4e}, decay rate {}",
        map.name(),
        spec.leading_eigenvalue.re,
        spec.second_modulus,
        spec.bounds.ess_rate_power,
        ly.fitted_b,
        decay
            .rate
            .map_or_else(|| "n/a".to_string(), |r| format!("{r:.6}"))
    );
    println!("artifacts written to {}", cfg.output.display());
    Ok(code)
}

fn cmd_density(cfg: &RunConfig) -> Result<i32> {
    let started = now_ms();
    let mut out = Outputs::new(&cfg.output)?;
    let (map, weight) = build(cfg)?;
    let (h, residual) = density_with_residual(cfg, &map, &weight)?;
    out.write("density.csv", h.to_csv().as_bytes())?;
    let (lo, hi) = h
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let checks = vec![CheckEntry {
        name: "density_fixed_point".into(),
        pass: residual <= 1e-8,
        detail: format!("|Mh - h|_1 = {residual:e}"),
    }];
    let code = exit_for(&checks);
    report_checks(&checks);
    out.finish("density", cfg, started, checks, code)?;
    println!(
        "density of {} on {} cells: min {lo:.6}, max {hi:.6}, fixed-point residual {residual:.2e}",
        map.name(),
        h.n()
    );
    Ok(code)
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let started = now_ms();
    let mut out = Outputs::new(&cfg.output)?;
    let (map, weight) = build(cfg)?;
    check_admissible(cfg, &map, &weight, &mut out)?;
    let (spec, _) = spectrum_report(&map, &weight, cfg.alpha, &spectrum_options(cfg))?;
    out.json("spectrum.json", &spec)?;
    let checks = vec![CheckEntry {
        name: "power_iteration_agrees".into(),
        pass: spec.power_check.agrees,
        detail: format!("power {:.12}", spec.power_check.estimate),
    }];
    let code = exit_for(&checks);
    report_checks(&checks);
    out.finish("spectrum", cfg, started, checks, code)?;
    println!(
        "{}: leading {:.10}, |λ2| = {:.6}, rho_bound = {:.6}, ess_bound_single = {:.6}, ess_rate_power = {:.6}",
        map.name(),
        spec.leading_eigenvalue.re,
        spec.second_modulus,
        spec.bounds.rho_bound,
        spec.bounds.ess_bound_single,
        spec.bounds.ess_rate_power
    );
    Ok(code)
}

fn cmd_decay(cfg: &RunConfig) -> Result<i32> {
    let started = now_ms();
    let mut out = Outputs::new(&cfg.output)?;
    let (map, weight) = build(cfg)?;
    let decay = decay_run(cfg, &map, &weight)?;
    out.write("decay.csv", decay.to_csv().as_bytes())?;
    out.finish("decay", cfg, started, Vec::new(), EXIT_OK)?;
    println!(
        "decay rate: {} (fit over k = {:?})",
        decay
            .rate
            .map_or_else(|| "n/a".to_string(), |r| format!("{r:.6}")),
        decay.fit_window
    );
    Ok(EXIT_OK)
}

fn cmd_ly(cfg: &RunConfig) -> Result<i32> {
    let started = now_ms();
    let mut out = Outputs::new(&cfg.output)?;
    let (map, weight) = build(cfg)?;
    check_admissible(cfg, &map, &weight, &mut out)?;
    let ly = ly_verify(&map, &weight, cfg.alpha, &ly_options(cfg))?;
    out.json("ly_report.json", &ly)?;
    let checks = ly_checks(&ly);
    let code = exit_for(&checks);
    report_checks(&checks);
    out.finish("ly-check", cfg, started, checks, code)?;
    println!(
        "{}: A = {:.6}, fitted B = {:.6e}, min slack = {:.3e}, L1 ratio = {:.12}{}",
        map.name(),
        ly.a_const,
        ly.fitted_b,
        ly.min_slack,
        ly.l1_contraction_max_ratio,
        ly.refinement
            .as_ref()
            .map_or_else(String::new, |r| format!(", B(2n)/B(n) = {}", r.ratio))
    );
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_flag() {
        assert_eq!(parse_weight_flag("pf").unwrap().kind, "pf");
        let c = parse_weight_flag("const:0.5").unwrap();
        assert_eq!((c.kind.as_str(), c.value), ("const", Some(0.5)));
        assert!(parse_weight_flag("expr:x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let args = RunArgs {
            map: Some("tent".into()),
            n: Some(64),
            no_refine: true,
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.map.name.as_deref(), Some("tent"));
        assert_eq!(cfg.n, 64);
        assert!(!cfg.refine);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["fracbv", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["fracbv", "catalog"]), EXIT_OK);
        assert_eq!(
            exit_code(&Error::NotAdmissible {
                alpha: 0.5,
                violated: "x".into()
            }),
            EXIT_HYPOTHESIS
        );
        assert_eq!(exit_code(&Error::EigenNonConvergence(3)), EXIT_NUMERICAL);
    }
}
