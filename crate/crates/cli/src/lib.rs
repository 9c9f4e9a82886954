//! Command-line front end: verb dispatch, config loading and output.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.

pub mod config;
pub mod csv_io;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use krrlab::diagnostics::{bound_scan, default_k_grid};
use krrlab::estimators::gram_variance;
use krrlab::features::FeatureFamily;
use krrlab::kernels::{gram, min_kernel_mercer_check, sample_points, Domain, KernelKind};
use krrlab::numerics::RngStream;
use krrlab::spectral::{
    make_spectrum, predict_rates, FeatureAssumption, Rate, RateScale, Regime, RidgeSchedule, SpectralFamily, Variant,
};
use krrlab::sweep::{
    classify_overfitting, draw_sample, fit_rates, gep_compare_with_workers, run_sweep_with_workers, RateFit,
    SweepConfig, DEFAULT_TAU,
};

pub use config::parse_config;
pub use csv_io::{read_sweep_csv, write_sweep_csv, CsvRow, COLUMNS};

/// Environment variable capping the sweep worker count.
pub const THREADS_ENV: &str = "KRR_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] krrlab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "krrlab", version, about = "Spectral laboratory for kernel ridge regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Predicted learning-curve exponents
    Rates(RatesArgs),
    /// Learning-curve sweep written as CSV
    Sweep(SweepArgs),
    /// Bound audit for one sample of a sweep
    Bounds(BoundsArgs),
    /// Compare slopes across feature families
    Gep(GepArgs),
    /// Ridgeless variance of a concrete kernel on growing samples
    KernelVariance(KernelVarianceArgs),
    /// Truncated Mercer sum of the min kernel against its closed form
    MercerCheck(MercerArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Poly,
    Exp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Plain,
    MinKernel,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RidgeArg {
    Power,
    Exp,
    Zero,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AssumptionArg {
    Independent,
    Generic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RegimeArg {
    Over,
    Under,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FeaturesArg {
    Gaussian,
    Rademacher,
    Sine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KernelArg {
    Laplacian,
    Ntk1,
    Min,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long, value_enum, default_value = "poly")]
    family: FamilyArg,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    /// Ridge exponent; omit for the ridgeless schedule
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Ridge law; defaults to the decay family's own law when `--b` is given
    #[arg(long, value_enum)]
    ridge: Option<RidgeArg>,
    #[arg(long, value_enum, default_value = "independent")]
    features: AssumptionArg,
    #[arg(long, value_enum, default_value = "over")]
    regime: RegimeArg,
    #[arg(long, value_enum, default_value = "plain")]
    variant: VariantArg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides KRR_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Sample size; defaults to the first entry of the grid
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    replicate: usize,
    /// Comma-separated truncation indices; defaults to a geometric grid
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
}

#[derive(Args, Debug)]
struct GepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Feature family of the second sweep
    #[arg(long, value_enum)]
    against: FeaturesArg,
    /// Seed of the second sweep; defaults to the config seed
    #[arg(long)]
    seed_b: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct KernelVarianceArgs {
    #[arg(long, value_enum)]
    kernel: KernelArg,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    n_test: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
}

#[derive(Args, Debug)]
struct MercerArgs {
    #[arg(long)]
    x: f64,
    #[arg(long)]
    x2: f64,
    #[arg(long, default_value_t = 2000)]
    p: usize,
}

/// Parses `argv` (including the program name), runs the verb and returns the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Rates(a) => rates(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Bounds(a) => bounds(a, out),
        Command::Gep(a) => gep(a, out),
        Command::KernelVariance(a) => kernel_variance(a, out),
        Command::MercerCheck(a) => mercer_check(a, out),
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn load_config(path: &Path) -> Result<SweepConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Worker count from the flag, else from `KRR_THREADS`, else the default pool.
fn workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let value = match flag {
        Some(w) => w.to_string(),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v,
            Err(_) => return Ok(None),
        },
    };
    match value.trim().parse::<usize>() {
        Ok(w) if w > 0 => Ok(Some(w)),
        _ => Err(CliError::Usage(format!("worker count must be a positive integer, got {value:?}"))),
    }
}

fn fmt_rate(rate: Rate) -> String {
    match rate {
        // normalizes −0
        Rate::Exponent(e) => format!("{}", e + 0.0),
        Rate::Constant => "0".into(),
        Rate::Catastrophic => "catastrophic".into(),
        Rate::NoBound => "none".into(),
        Rate::Surrogate => "surrogate".into(),
    }
}

fn fmt_scale(s: RateScale) -> &'static str {
    match s {
        RateScale::PowerOfN => "power",
        RateScale::ExpOfN => "exp",
    }
}

fn rates(a: RatesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let family = match a.family {
        FamilyArg::Poly => SpectralFamily::Poly,
        FamilyArg::Exp => SpectralFamily::Exp,
    };
    let variant = match a.variant {
        VariantArg::Plain => Variant::Plain,
        VariantArg::MinKernel => Variant::MinKernel,
    };
    let m = make_spectrum(family, a.a, a.r, 1, variant)?;
    let ridge = a.ridge.unwrap_or(match (a.b, family) {
        (None, _) => RidgeArg::Zero,
        (Some(_), SpectralFamily::Poly) => RidgeArg::Power,
        (Some(_), SpectralFamily::Exp) => RidgeArg::Exp,
    });
    let need_b = || a.b.ok_or_else(|| CliError::Usage("this ridge law needs --b".into()));
    let schedule = match ridge {
        RidgeArg::Zero => RidgeSchedule::zero(),
        RidgeArg::Power => RidgeSchedule::power_law(need_b()?, variant)?,
        RidgeArg::Exp => RidgeSchedule::exp_law(need_b()?)?,
    };
    let features = match a.features {
        AssumptionArg::Independent => FeatureAssumption::Independent,
        AssumptionArg::Generic => FeatureAssumption::Generic,
    };
    let regime = match a.regime {
        RegimeArg::Over => Regime::Over,
        RegimeArg::Under => Regime::Under,
    };
    let pred = predict_rates(&m, &schedule, features, regime)?;
    writeln!(out, "s = {}", pred.s).map_err(io)?;
    writeln!(out, "s_tilde = {}", pred.s_tilde).map_err(io)?;
    if let Some(strength) = pred.strength {
        writeln!(out, "ridge = {}", format!("{strength:?}").to_lowercase()).map_err(io)?;
    }
    writeln!(out, "bias_exponent = {}", fmt_rate(pred.bias)).map_err(io)?;
    writeln!(out, "bias_scale = {}", fmt_scale(pred.bias_scale)).map_err(io)?;
    writeln!(out, "bias_tight = {}", pred.bias_tight).map_err(io)?;
    writeln!(out, "variance_exponent = {}", fmt_rate(pred.variance)).map_err(io)?;
    writeln!(out, "variance_scale = {}", fmt_scale(pred.variance_scale)).map_err(io)?;
    writeln!(out, "variance_tight = {}", pred.variance_tight).map_err(io)?;
    if pred.log_factor_warning {
        writeln!(out, "warning = boundary parameters, rates carry logarithmic factors").map_err(io)?;
    }
    Ok(())
}

fn write_fit(out: &mut dyn Write, prefix: &str, fit: &RateFit) -> Result<(), CliError> {
    for (name, f) in [("bias", fit.bias), ("variance", fit.variance)] {
        match f {
            Some(f) => writeln!(out, "{prefix}{name}_slope = {} (r2 = {:.4})", f.slope, f.r2),
            None => writeln!(out, "{prefix}{name}_slope = none"),
        }
        .map_err(io)?;
    }
    Ok(())
}

fn rate_scale(cfg: &SweepConfig) -> RateScale {
    match cfg.family {
        SpectralFamily::Poly => RateScale::PowerOfN,
        SpectralFamily::Exp => RateScale::ExpOfN,
    }
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    let res = run_sweep_with_workers(&cfg, workers(a.threads)?)?;
    match a.out {
        None => write_sweep_csv(&res, &mut *out),
        Some(path) => {
            let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_sweep_csv(&res, BufWriter::new(file))?;
            writeln!(out, "rows = {}", res.rows.len()).map_err(io)?;
            writeln!(out, "config_digest = {}", res.config_digest).map_err(io)?;
            if let Ok(fit) = fit_rates(&res, rate_scale(&cfg)) {
                write_fit(out, "", &fit)?;
            }
            Ok(())
        }
    }
}

fn bounds(a: BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(&a.config)?;
    let n = a.n.unwrap_or(cfg.n_grid[0]);
    let m = cfg.model()?;
    let lambda = cfg.schedule.at(n);
    let fs = draw_sample(&cfg, &m, n, a.replicate)?;
    let k_grid = if a.k.is_empty() { default_k_grid(n, cfg.p) } else { a.k };
    let report = bound_scan(&fs, &m, lambda, cfg.sigma2, cfg.delta, &k_grid)?;
    writeln!(out, "# n = {n}, lambda = {lambda:.16e}, delta = {}", report.delta).map_err(io)?;
    writeln!(out, "# exact_bias = {:.16e}", report.exact_bias).map_err(io)?;
    writeln!(out, "# exact_variance = {:.16e}", report.exact_variance).map_err(io)?;
    writeln!(out, "# best_k_bias = {}, best_k_variance = {}", report.best_k_bias, report.best_k_variance).map_err(io)?;
    writeln!(out, "k,bias_bound,variance_bound,rho,zeta,xi,bias_satisfied,variance_satisfied,status").map_err(io)?;
    for row in &report.per_k {
        match &row.bound {
            Ok(b) => writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},ok",
                row.k,
                b.bias.value,
                b.variance.value,
                b.bias.triple.rho,
                b.bias.triple.zeta,
                b.bias.triple.xi,
                b.bias_satisfied,
                b.variance_satisfied
            ),
            Err(e) => writeln!(out, "{},,,,,,,,\"error: {e}\"", row.k),
        }
        .map_err(io)?;
    }
    Ok(())
}

fn gep(a: GepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg_a = load_config(&a.config)?;
    let features = match a.against {
        FeaturesArg::Gaussian => FeatureFamily::Gaussian,
        FeaturesArg::Rademacher => FeatureFamily::Rademacher,
        FeaturesArg::Sine => FeatureFamily::Sine,
    };
    let cfg_b = SweepConfig { features, seed: a.seed_b.unwrap_or(cfg_a.seed), ..cfg_a.clone() };
    let cmp = gep_compare_with_workers(&cfg_a, &cfg_b, workers(a.threads)?)?;
    write_fit(out, &format!("{}.", krrlab::sweep::feature_name(cfg_a.features)), &cmp.fit_a)?;
    write_fit(out, &format!("{}.", krrlab::sweep::feature_name(cfg_b.features)), &cmp.fit_b)?;
    let fmt = |d: Option<f64>| d.map_or("none".to_string(), |d| d.to_string());
    writeln!(out, "delta_bias_slope = {}", fmt(cmp.delta_bias_slope)).map_err(io)?;
    writeln!(out, "delta_variance_slope = {}", fmt(cmp.delta_variance_slope)).map_err(io)?;
    Ok(())
}

fn kernel_variance(a: KernelVarianceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (kind, domain) = match a.kernel {
        KernelArg::Laplacian => (KernelKind::Laplacian, Domain::UnitDisk2),
        KernelArg::Ntk1 => (KernelKind::Ntk1, Domain::UnitDisk2),
        KernelArg::Min => (KernelKind::MinKernel, Domain::UnitInterval),
    };
    let root = RngStream::new(a.seed);
    writeln!(out, "n,variance,stderr").map_err(io)?;
    let mut curve = Vec::with_capacity(a.n_grid.len());
    for &n in &a.n_grid {
        let rng = root.derive("kernel", n as u64);
        let pts = sample_points(domain, n, &mut rng.derive("train", 0))?;
        let k = gram(kind, &pts, None)?;
        let est = gram_variance(&k, kind, &pts, a.lambda, a.sigma2, a.n_test, &mut rng.derive("test", 0))?;
        let se = est.mc_stderr.map_or(0.0, |s| s.1);
        writeln!(out, "{n},{:.16e},{:.16e}", est.variance, se).map_err(io)?;
        curve.push((n as f64, est.variance));
    }
    let verdict = classify_overfitting(&curve, a.tau)?;
    writeln!(out, "# class = {:?}, slope = {}", verdict.class, verdict.slope).map_err(io)?;
    Ok(())
}

fn mercer_check(a: MercerArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let m = make_spectrum(SpectralFamily::Poly, 1.0, 1.0, a.p, Variant::MinKernel)?;
    let c = min_kernel_mercer_check(a.x, a.x2, &m)?;
    writeln!(out, "truncated_sum = {:.16e}", c.truncated_sum).map_err(io)?;
    writeln!(out, "kernel = {:.16e}", a.x.min(a.x2)).map_err(io)?;
    writeln!(out, "abs_error = {:.6e}", c.abs_error).map_err(io)?;
    Ok(())
}
