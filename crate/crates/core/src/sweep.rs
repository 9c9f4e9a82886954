//! Learning-curve sweeps over sample sizes, rate fits, feature-family
//! comparisons and overfitting classification.

use std::fmt;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::diagnostics::{bound_scan, default_k_grid, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::estimators::DesignFactorization;
use crate::features::{sample_whitened, FeatureFamily, FeatureSample};
use crate::numerics::{linear_fit, loglog_fit, LinearFit, RngStream};
use crate::spectral::{classify_ridge, make_spectrum, RateScale, Regime, RidgeKind, RidgeSchedule, SpectralFamily, SpectralModel, Variant};

pub const DEFAULT_TAU: f64 = 0.25;

/// `count` integers log-spaced over `[lo, hi]`, rounded and deduplicated.
pub fn log_spaced_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    grid.dedup();
    grid
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: SpectralFamily,
    pub a: f64,
    pub r: f64,
    pub p: usize,
    pub variant: Variant,
    pub schedule: RidgeSchedule,
    pub features: FeatureFamily,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub sigma2: f64,
    pub seed: u64,
    pub bounds: bool,
    pub delta: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            family: SpectralFamily::Poly,
            a: 1.0,
            r: 1.0,
            p: 2000,
            variant: Variant::MinKernel,
            schedule: RidgeSchedule::power_law(2.0, Variant::MinKernel).expect("positive exponent"),
            features: FeatureFamily::Gaussian,
            n_grid: log_spaced_grid(100, 1000, 8),
            replicates: 5,
            sigma2: 1.0,
            seed: 0,
            bounds: false,
            delta: DEFAULT_DELTA,
        }
    }
}

impl SweepConfig {
    pub fn model(&self) -> Result<SpectralModel> {
        make_spectrum(self.family, self.a, self.r, self.p, self.variant)
    }

    /// Regime implied by the grid: every `n` below `p`, or every `n` above it.
    pub fn regime(&self) -> Result<Regime> {
        if self.n_grid.iter().all(|&n| n < self.p) {
            Ok(Regime::Over)
        } else if self.n_grid.iter().all(|&n| n > self.p) {
            Ok(Regime::Under)
        } else {
            Err(Error::InvalidParameter(format!(
                "sample sizes must all lie on one side of p = {}",
                self.p
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.model()?;
        classify_ridge(&self.schedule, &m)?;
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("empty sample-size grid".into()));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::InvalidParameter("sample sizes must be positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("sample-size grid must be strictly increasing".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("at least one replicate is required".into()));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level σ² = {} must be non-negative", self.sigma2)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("confidence δ = {} must lie in (0, 1)", self.delta)));
        }
        self.regime()?;
        Ok(())
    }

    /// Canonical `key = value` form, one key per line in a fixed order.
    pub fn canonical_text(&self) -> String {
        let (kind, b) = match self.schedule.kind() {
            RidgeKind::PowerLaw(b) => ("power", format!("{b:?}")),
            RidgeKind::ExpLaw(b) => ("exp", format!("{b:?}")),
            RidgeKind::Zero => ("zero", String::new()),
        };
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let lines = [
            ("model.family", family_name(self.family).to_string()),
            ("model.a", format!("{:?}", self.a)),
            ("model.r", format!("{:?}", self.r)),
            ("model.p", self.p.to_string()),
            ("model.variant", variant_name(self.variant).to_string()),
            ("ridge.kind", kind.to_string()),
            ("ridge.b", b),
            ("features.family", feature_name(self.features).to_string()),
            ("sweep.n_grid", grid.join(",")),
            ("sweep.replicates", self.replicates.to_string()),
            ("noise.sigma2", format!("{:?}", self.sigma2)),
            ("seed", self.seed.to_string()),
            ("bounds.enabled", self.bounds.to_string()),
            ("bounds.delta", format!("{:?}", self.delta)),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Hex SHA-256 of [`SweepConfig::canonical_text`].
    pub fn digest(&self) -> String {
        Sha256::digest(self.canonical_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn family_name(f: SpectralFamily) -> &'static str {
    match f {
        SpectralFamily::Poly => "poly",
        SpectralFamily::Exp => "exp",
    }
}

pub fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Plain => "plain",
        Variant::MinKernel => "min_kernel",
    }
}

pub fn feature_name(f: FeatureFamily) -> &'static str {
    match f {
        FeatureFamily::Gaussian => "gaussian",
        FeatureFamily::Rademacher => "rademacher",
        FeatureFamily::Sine => "sine",
    }
}

/// Bound audit condensed to one row; coefficients are taken at the best bias truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSummary {
    pub bias_bound: f64,
    pub variance_bound: f64,
    pub best_k_bias: usize,
    pub best_k_variance: usize,
    pub rho: f64,
    pub zeta: f64,
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Ok,
    /// Exact errors are present; the bound audit failed.
    BoundsFailed(Error),
    Failed(Error),
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Ok => write!(f, "ok"),
            RowStatus::BoundsFailed(e) => write!(f, "bounds-error: {e}"),
            RowStatus::Failed(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub lambda: f64,
    pub replicate: usize,
    pub bias: Option<f64>,
    pub variance: Option<f64>,
    pub bounds: Option<BoundSummary>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config_digest: String,
}

/// The materialized sample behind row `(n, replicate)` of a sweep.
pub fn draw_sample(cfg: &SweepConfig, m: &SpectralModel, n: usize, replicate: usize) -> Result<FeatureSample> {
    let mut rng = RngStream::new(cfg.seed).derive("n", n as u64).derive("rep", replicate as u64);
    sample_whitened(cfg.features, n, cfg.p, &mut rng)?.materialize(m)
}

fn run_task(cfg: &SweepConfig, m: &SpectralModel, n: usize, replicate: usize) -> SweepRow {
    let lambda = cfg.schedule.at(n);
    let mut row = SweepRow { n, lambda, replicate, bias: None, variance: None, bounds: None, status: RowStatus::Ok };
    let exact = draw_sample(cfg, m, n, replicate)
        .and_then(|fs| {
            let f = DesignFactorization::new(&fs)?;
            Ok((f.bias(m, lambda)?, f.variance(m, lambda, cfg.sigma2)?, fs))
        });
    let (bias, variance, fs) = match exact {
        Ok(v) => v,
        Err(e) => {
            row.status = RowStatus::Failed(e);
            return row;
        }
    };
    row.bias = Some(bias);
    row.variance = Some(variance);
    if cfg.bounds {
        match bound_scan(&fs, m, lambda, cfg.sigma2, cfg.delta, &default_k_grid(n, cfg.p)) {
            Ok(report) => {
                let bb = report.best_bias();
                row.bounds = Some(BoundSummary {
                    bias_bound: bb.value,
                    variance_bound: report.best_variance().value,
                    best_k_bias: report.best_k_bias,
                    best_k_variance: report.best_k_variance,
                    rho: bb.triple.rho,
                    zeta: bb.triple.zeta,
                    xi: bb.triple.xi,
                });
            }
            Err(e) => row.status = RowStatus::BoundsFailed(e),
        }
    }
    row
}

/// Runs the sweep on the default rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with_workers(cfg, None)
}

/// Runs the sweep on a dedicated pool of `workers` threads. Rows come back
/// in `(n, replicate)` order whatever the scheduling.
pub fn run_sweep_with_workers(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let m = cfg.model()?;
    let tasks: Vec<(usize, usize)> =
        cfg.n_grid.iter().flat_map(|&n| (0..cfg.replicates).map(move |rep| (n, rep))).collect();
    let run = || tasks.par_iter().map(|&(n, rep)| run_task(cfg, &m, n, rep)).collect::<Vec<_>>();
    let rows = match workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?
            .install(run),
    };
    Ok(SweepResult { rows, config_digest: cfg.digest() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    /// `None` when fewer than three sample sizes carry a positive mean.
    pub bias: Option<LinearFit>,
    pub variance: Option<LinearFit>,
    pub scale: RateScale,
}

impl RateFit {
    pub fn bias_slope(&self) -> Option<f64> {
        self.bias.map(|f| f.slope)
    }
    pub fn variance_slope(&self) -> Option<f64> {
        self.variance.map(|f| f.slope)
    }
}

/// Replicate means per sample size of the successful rows, as `(n, bias, variance)`.
pub fn replicate_means(res: &SweepResult) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<(usize, f64, f64, usize)> = Vec::new();
    for row in &res.rows {
        let (Some(b), Some(v)) = (row.bias, row.variance) else { continue };
        match out.last_mut() {
            Some(last) if last.0 == row.n => {
                last.1 += b;
                last.2 += v;
                last.3 += 1;
            }
            _ => out.push((row.n, b, v, 1)),
        }
    }
    out.into_iter().map(|(n, b, v, c)| (n, b / c as f64, v / c as f64)).collect()
}

fn fit_curve(points: &[(f64, f64)], scale: RateScale) -> Option<LinearFit> {
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, y)| y > 0.0).collect();
    if positive.len() < 3 {
        return None;
    }
    match scale {
        RateScale::PowerOfN => loglog_fit(&positive).ok(),
        RateScale::ExpOfN => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = positive.iter().map(|&(n, y)| (n, y.ln())).unzip();
            linear_fit(&xs, &ys).ok()
        }
    }
}

/// Fits `log(mean error)` against `log n` (power scale) or `n` (exponential scale).
pub fn fit_rates(res: &SweepResult, scale: RateScale) -> Result<RateFit> {
    let means = replicate_means(res);
    if means.len() < 3 {
        return Err(Error::InsufficientData(format!("{} sample sizes with results, need 3", means.len())));
    }
    let bias: Vec<(f64, f64)> = means.iter().map(|&(n, b, _)| (n as f64, b)).collect();
    let variance: Vec<(f64, f64)> = means.iter().map(|&(n, _, v)| (n as f64, v)).collect();
    Ok(RateFit { bias: fit_curve(&bias, scale), variance: fit_curve(&variance, scale), scale })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GepComparison {
    pub fit_a: RateFit,
    pub fit_b: RateFit,
    pub delta_bias_slope: Option<f64>,
    pub delta_variance_slope: Option<f64>,
}

fn rate_scale(family: SpectralFamily) -> RateScale {
    match family {
        SpectralFamily::Poly => RateScale::PowerOfN,
        SpectralFamily::Exp => RateScale::ExpOfN,
    }
}

/// Runs two sweeps that differ at most in feature family and seed and
/// compares their fitted slopes.
pub fn gep_compare(cfg_a: &SweepConfig, cfg_b: &SweepConfig) -> Result<GepComparison> {
    gep_compare_with_workers(cfg_a, cfg_b, None)
}

/// [`gep_compare`] with both sweeps on a pool of `workers` threads.
pub fn gep_compare_with_workers(cfg_a: &SweepConfig, cfg_b: &SweepConfig, workers: Option<usize>) -> Result<GepComparison> {
    let aligned = SweepConfig { features: cfg_a.features, seed: cfg_a.seed, ..cfg_b.clone() };
    if &aligned != cfg_a {
        return Err(Error::ConfigMismatch("only the feature family and seed may differ".into()));
    }
    let scale = rate_scale(cfg_a.family);
    let fit_a = fit_rates(&run_sweep_with_workers(cfg_a, workers)?, scale)?;
    let fit_b = fit_rates(&run_sweep_with_workers(cfg_b, workers)?, scale)?;
    let gap = |x: Option<f64>, y: Option<f64>| Some((x? - y?).abs());
    Ok(GepComparison {
        delta_bias_slope: gap(fit_a.bias_slope(), fit_b.bias_slope()),
        delta_variance_slope: gap(fit_a.variance_slope(), fit_b.variance_slope()),
        fit_a,
        fit_b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Overfitting {
    Benign,
    Tempered,
    Catastrophic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverfittingVerdict {
    pub class: Overfitting,
    pub slope: f64,
}

/// Log-log slope `s` of the variance curve: `s < −τ` benign, `|s| ≤ τ`
/// tempered, `s > τ` catastrophic.
pub fn classify_overfitting(curve: &[(f64, f64)], tau: f64) -> Result<OverfittingVerdict> {
    if curve.len() < 4 {
        return Err(Error::InsufficientData(format!("{} points, need 4", curve.len())));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("threshold τ = {tau} must be non-negative")));
    }
    let slope = loglog_fit(curve)?.slope;
    let class = if slope < -tau {
        Overfitting::Benign
    } else if slope > tau {
        Overfitting::Catastrophic
    } else {
        Overfitting::Tempered
    };
    Ok(OverfittingVerdict { class, slope })
}
