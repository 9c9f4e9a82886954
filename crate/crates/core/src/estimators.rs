//! Closed-form bias and variance of the ridge estimator, Monte Carlo
//! oracles for both, the gram-space variance of concrete kernels, and the
//! under-parameterized surrogates.
//!
//! The closed forms share one thin factorization of the design. Writing
//! `XᵀX = Σ_i g_i g_iᵀ` with orthogonal `g_i` (`‖g_i‖² = Λ_i`), the ridge
//! solution of the noiseless target and the noise covariance are
//!
//! ```text
//! θ̂(Xθ*) = Σ_i g_i (g_iᵀθ*) w_i        Cov θ̂(ε) = σ² Σ_i g_i g_iᵀ w_i²
//! ```
//!
//! with `w_i = 1/(Λ_i + nλ)`, or the thresholded `1/Λ_i` when `λ = 0`.

use crate::error::{Error, Result};
use crate::features::{sample_whitened, FeatureSample};
use crate::kernels::{gram, sample_points, KernelKind, PointSet};
use crate::numerics::{cholesky_solve, dot, pinv_apply, sym_eigendecompose, EigenSystem, Matrix, RngStream, SymMatrix, DEFAULT_PINV_TOL};
use crate::spectral::SpectralModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
    /// Monte Carlo over test points with the kernel gram.
    GramMC,
    Surrogate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorEstimate {
    pub bias: f64,
    pub variance: f64,
    pub method: EstimateMethod,
    /// Standard errors of `(bias, variance)` for the Monte Carlo methods.
    pub mc_stderr: Option<(f64, f64)>,
}

impl ErrorEstimate {
    pub fn risk(&self) -> f64 {
        self.bias + self.variance
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("ridge λ = {lambda} must be finite and non-negative")));
    }
    Ok(())
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level σ² = {sigma2} must be finite and non-negative")));
    }
    Ok(())
}

fn check_model(m: &SpectralModel, fs: &FeatureSample) -> Result<()> {
    if fs.p() != m.p() {
        return Err(Error::InvalidShape(format!("sample has {} features, model rank {}", fs.p(), m.p())));
    }
    Ok(())
}

/// Thin factorization `XᵀX = Σ_i g_i g_iᵀ`, built from the smaller of the
/// two grams and reusable across ridge values.
#[derive(Clone, Debug)]
pub struct DesignFactorization {
    n: usize,
    /// `g_i` as rows.
    g: Matrix,
    /// `Λ_i = ‖g_i‖²`, descending and clamped at zero.
    gram_eigvals: Vec<f64>,
}

impl DesignFactorization {
    pub fn new(fs: &FeatureSample) -> Result<Self> {
        let x = fs.x_or_err()?;
        let (n, p) = (x.nrows(), x.ncols());
        if n <= p {
            let es = sym_eigendecompose(&x.gram_rows())?;
            let g = es.eigvecs().t_matmul(x)?;
            let gram_eigvals = es.eigvals().iter().map(|l| l.max(0.0)).collect();
            Ok(Self { n, g, gram_eigvals })
        } else {
            let es = sym_eigendecompose(&x.gram_cols())?;
            let gram_eigvals: Vec<f64> = es.eigvals().iter().map(|l| l.max(0.0)).collect();
            let u = es.eigvecs();
            let g = Matrix::from_fn(p, p, |i, k| gram_eigvals[i].sqrt() * u[(k, i)]);
            Ok(Self { n, g, gram_eigvals })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram_eigvals(&self) -> &[f64] {
        &self.gram_eigvals
    }

    fn weights(&self, lambda: f64) -> Vec<f64> {
        let shift = self.n as f64 * lambda;
        if lambda > 0.0 {
            return self.gram_eigvals.iter().map(|l| 1.0 / (l + shift)).collect();
        }
        let threshold = DEFAULT_PINV_TOL * self.gram_eigvals.first().copied().unwrap_or(0.0);
        self.gram_eigvals.iter().map(|&l| if l > threshold && l > 0.0 { 1.0 / l } else { 0.0 }).collect()
    }

    /// `‖θ* − θ̂(Xθ*)‖²_Σ`.
    pub fn bias(&self, m: &SpectralModel, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        self.check_rank(m)?;
        let theta = m.theta_star();
        let mut err = theta.to_vec();
        for (i, w) in self.weights(lambda).into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let gi = self.g.row(i);
            let c = -dot(gi, theta) * w;
            for (e, gk) in err.iter_mut().zip(gi) {
                *e += c * gk;
            }
        }
        Ok(m.sigma_norm_sq(&err))
    }

    /// `σ² Σ_i (g_iᵀ Σ g_i) w_i²`.
    pub fn variance(&self, m: &SpectralModel, lambda: f64, sigma2: f64) -> Result<f64> {
        check_lambda(lambda)?;
        check_sigma2(sigma2)?;
        self.check_rank(m)?;
        if sigma2 == 0.0 {
            return Ok(0.0);
        }
        let total: f64 = self
            .weights(lambda)
            .into_iter()
            .enumerate()
            .filter(|&(_, w)| w > 0.0)
            .map(|(i, w)| m.sigma_norm_sq(self.g.row(i)) * w * w)
            .sum();
        Ok(sigma2 * total)
    }

    fn check_rank(&self, m: &SpectralModel) -> Result<()> {
        if self.g.ncols() != m.p() {
            return Err(Error::InvalidShape(format!("design has {} features, model rank {}", self.g.ncols(), m.p())));
        }
        Ok(())
    }
}

/// `B = λ² ‖(λI + Σ̂)^{-1} θ*‖²_Σ`, or `‖(I − P)θ*‖²_Σ` at `λ = 0`.
pub fn exact_bias(m: &SpectralModel, fs: &FeatureSample, lambda: f64) -> Result<f64> {
    check_model(m, fs)?;
    DesignFactorization::new(fs)?.bias(m, lambda)
}

/// `V = (σ²/n) tr[(Σ̂+λ)^{-1} Σ (Σ̂+λ)^{-1} Σ̂]`, pseudo-inverse at `λ = 0`.
pub fn exact_variance(m: &SpectralModel, fs: &FeatureSample, lambda: f64, sigma2: f64) -> Result<f64> {
    check_model(m, fs)?;
    DesignFactorization::new(fs)?.variance(m, lambda, sigma2)
}

/// Both closed forms from a single factorization.
pub fn exact_errors(m: &SpectralModel, fs: &FeatureSample, lambda: f64, sigma2: f64) -> Result<ErrorEstimate> {
    check_model(m, fs)?;
    let f = DesignFactorization::new(fs)?;
    Ok(ErrorEstimate {
        bias: f.bias(m, lambda)?,
        variance: f.variance(m, lambda, sigma2)?,
        method: EstimateMethod::Exact,
        mc_stderr: None,
    })
}

/// Dual solver for `(K + nλ) α = y`: Cholesky under ridge, eigen pseudo-inverse without.
enum DualSolver {
    Cholesky(SymMatrix),
    Pinv(EigenSystem),
}

impl DualSolver {
    fn new(x: &Matrix, lambda: f64) -> Result<Self> {
        let mut k = x.gram_rows();
        if lambda > 0.0 {
            k.add_diagonal(x.nrows() as f64 * lambda);
            Ok(DualSolver::Cholesky(k))
        } else {
            Ok(DualSolver::Pinv(sym_eigendecompose(&k)?))
        }
    }

    fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            DualSolver::Cholesky(k) => cholesky_solve(k, y),
            DualSolver::Pinv(es) => pinv_apply(es, DEFAULT_PINV_TOL, y),
        }
    }
}

/// `θ̂(y) = Xᵀ (XXᵀ + nλI)^{-1} y`.
pub fn fit_regressor(fs: &FeatureSample, lambda: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let x = fs.x_or_err()?;
    if y.len() != x.nrows() {
        return Err(Error::InvalidShape(format!("{} responses for {} samples", y.len(), x.nrows())));
    }
    let alpha = DualSolver::new(x, lambda)?.solve(y)?;
    x.t_mul_vec(&alpha)
}

fn mean_and_stderr(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn fresh_test_inputs(m: &SpectralModel, fs: &FeatureSample, n_test: usize, rng: &mut RngStream) -> Result<Matrix> {
    let test = sample_whitened(fs.family(), n_test, m.p(), rng)?.materialize(m)?;
    Ok(test.x().expect("materialized").clone())
}

/// Simulates `B = E_x[(xᵀ(θ̂(Xθ*) − θ*))²]` over fresh test features of
/// the same family. The variance field is zero.
pub fn mc_bias(m: &SpectralModel, fs: &FeatureSample, lambda: f64, n_test: usize, rng: &mut RngStream) -> Result<ErrorEstimate> {
    check_model(m, fs)?;
    if n_test < 100 {
        return Err(Error::InvalidParameter(format!("n_test = {n_test} must be at least 100")));
    }
    let x = fs.x_or_err()?;
    let y = x.mul_vec(m.theta_star())?;
    let theta_hat = fit_regressor(fs, lambda, &y)?;
    let diff: Vec<f64> = theta_hat.iter().zip(m.theta_star()).map(|(a, b)| a - b).collect();
    let test = fresh_test_inputs(m, fs, n_test, &mut rng.derive("test", 0))?;
    let sq: Vec<f64> = test.mul_vec(&diff)?.into_iter().map(|v| v * v).collect();
    let (bias, se) = mean_and_stderr(&sq);
    Ok(ErrorEstimate { bias, variance: 0.0, method: EstimateMethod::MonteCarlo, mc_stderr: Some((se, 0.0)) })
}

/// Simulates `V = E_{x,ε}[(xᵀθ̂(ε))²]` with Gaussian noise of variance
/// `σ²`. The bias field is zero.
///
/// The reported error combines the spread across noise draws and across
/// test points, the two independent sources of the crossed design.
pub fn mc_variance(
    m: &SpectralModel,
    fs: &FeatureSample,
    lambda: f64,
    sigma2: f64,
    n_test: usize,
    n_noise: usize,
    rng: &mut RngStream,
) -> Result<ErrorEstimate> {
    check_model(m, fs)?;
    check_lambda(lambda)?;
    check_sigma2(sigma2)?;
    if n_test < 100 || n_noise < 10 {
        return Err(Error::InvalidParameter(format!(
            "need n_test ≥ 100 and n_noise ≥ 10, got {n_test} and {n_noise}"
        )));
    }
    let x = fs.x_or_err()?;
    let solver = DualSolver::new(x, lambda)?;
    let sigma = sigma2.sqrt();
    let mut noise_rng = rng.derive("noise", 0);
    // p × n_noise matrix of fitted noise regressors
    let mut thetas = Matrix::zeros(m.p(), n_noise);
    for l in 0..n_noise {
        let eps: Vec<f64> = (0..x.nrows()).map(|_| sigma * noise_rng.standard_normal()).collect();
        let theta = x.t_mul_vec(&solver.solve(&eps)?)?;
        for (k, t) in theta.into_iter().enumerate() {
            thetas[(k, l)] = t;
        }
    }
    let test = fresh_test_inputs(m, fs, n_test, &mut rng.derive("test", 0))?;
    let preds = test.matmul(&thetas)?;
    let mut per_noise = vec![0.0; n_noise];
    let mut per_point = vec![0.0; n_test];
    for (j, row) in preds.rows_iter().enumerate() {
        for (l, v) in row.iter().enumerate() {
            let sq = v * v;
            per_noise[l] += sq / n_test as f64;
            per_point[j] += sq / n_noise as f64;
        }
    }
    let (variance, se_noise) = mean_and_stderr(&per_noise);
    let (_, se_point) = mean_and_stderr(&per_point);
    let se = se_noise.hypot(se_point);
    Ok(ErrorEstimate { bias: 0.0, variance, method: EstimateMethod::MonteCarlo, mc_stderr: Some((0.0, se)) })
}

/// `V = σ² E_x ‖(K + nλ)^{-1} K_x‖²` over fresh uniform test points.
pub fn gram_variance(
    k: &Matrix,
    kind: KernelKind,
    train_pts: &PointSet,
    lambda: f64,
    sigma2: f64,
    n_test: usize,
    rng: &mut RngStream,
) -> Result<ErrorEstimate> {
    check_lambda(lambda)?;
    check_sigma2(sigma2)?;
    let n = train_pts.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::InvalidShape(format!("gram {}x{} for {n} points", k.nrows(), k.ncols())));
    }
    if n_test < 2 {
        return Err(Error::InvalidParameter(format!("n_test = {n_test} must be at least 2")));
    }
    let es = sym_eigendecompose(&SymMatrix::new(k.clone())?)?;
    let max = es.eigvals()[0];
    if !(max > 0.0) {
        return Err(Error::SingularGram);
    }
    let shift = n as f64 * lambda;
    let weights: Vec<f64> = es
        .eigvals()
        .iter()
        .map(|&l| {
            if lambda > 0.0 {
                1.0 / (l.max(0.0) + shift)
            } else if l > DEFAULT_PINV_TOL * max {
                1.0 / l
            } else {
                0.0
            }
        })
        .collect();
    let test = sample_points(train_pts.domain(), n_test, rng)?;
    let cross = gram(kind, train_pts, Some(&test))?;
    let coeffs = es.eigvecs().t_matmul(&cross)?;
    let mut per_point = vec![0.0; n_test];
    for (i, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let w2 = w * w;
        for (acc, c) in per_point.iter_mut().zip(coeffs.row(i)) {
            *acc += w2 * c * c;
        }
    }
    let (mean, se) = mean_and_stderr(&per_point);
    Ok(ErrorEstimate {
        bias: 0.0,
        variance: sigma2 * mean,
        method: EstimateMethod::GramMC,
        mc_stderr: Some((0.0, sigma2 * se)),
    })
}

/// Deterministic representatives `λ² Σ λ_k θ*_k²/(λ_k+λ)²` and
/// `(σ²/n) Σ λ_k²/(λ_k+λ)²` of the under-parameterized errors.
pub fn underparam_surrogate(m: &SpectralModel, lambda: f64, n: usize, sigma2: f64) -> Result<ErrorEstimate> {
    check_lambda(lambda)?;
    check_sigma2(sigma2)?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    let (mut bias, mut variance) = (0.0, 0.0);
    for (&l, &t) in m.eigvals().iter().zip(m.theta_star()).rev() {
        let d = (l + lambda) * (l + lambda);
        bias += l * t * t / d;
        variance += l * l / d;
    }
    Ok(ErrorEstimate {
        bias: lambda * lambda * bias,
        variance: sigma2 * variance / n as f64,
        method: EstimateMethod::Surrogate,
        mc_stderr: None,
    })
}
