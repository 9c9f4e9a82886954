//! Head/tail split of the design, concentration coefficients, empirical
//! generic-feature constants and the non-asymptotic bounds on bias and
//! variance.

use crate::error::{Error, Result};
use crate::estimators::DesignFactorization;
use crate::features::FeatureSample;
use crate::numerics::{sym_eigenvalues, SymMatrix, DEFAULT_PINV_TOL};
use crate::spectral::{effective_ranks, SpectralModel};

pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcentrationTriple {
    pub k: usize,
    pub rho: f64,
    pub zeta: f64,
    pub xi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GfEmpirical {
    pub k: usize,
    pub alpha_hat: f64,
    pub beta_hat: f64,
}

fn check_k(m: &SpectralModel, fs: &FeatureSample, k: usize) -> Result<()> {
    if fs.p() != m.p() {
        return Err(Error::InvalidShape(format!("sample has {} features, model rank {}", fs.p(), m.p())));
    }
    if k >= m.p() {
        return Err(Error::InvalidTruncation { k, p: m.p() });
    }
    Ok(())
}

/// Head indices must leave a non-empty tail and fit inside the sample.
fn check_head_k(m: &SpectralModel, fs: &FeatureSample, k: usize) -> Result<()> {
    check_k(m, fs, k)?;
    if k == 0 || k > fs.n() {
        return Err(Error::InvalidTruncation { k, p: m.p() });
    }
    Ok(())
}

/// `A_k = X_{>k} X_{>k}ᵀ + nλ I_n`.
pub fn truncated_gram(fs: &FeatureSample, m: &SpectralModel, k: usize, lambda: f64) -> Result<SymMatrix> {
    check_k(m, fs, k)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("ridge λ = {lambda} must be finite and non-negative")));
    }
    let x = fs.x_or_err()?;
    let mut a = x.column_block(k, x.ncols()).gram_rows();
    a.add_diagonal(x.nrows() as f64 * lambda);
    Ok(a)
}

/// Coefficients together with `s₁(A_k)`, which the bias bound also needs.
struct Split {
    triple: ConcentrationTriple,
    s1_a: f64,
}

fn split(fs: &FeatureSample, m: &SpectralModel, k: usize, lambda: f64) -> Result<Split> {
    check_head_k(m, fs, k)?;
    let n = fs.n() as f64;
    let a_vals = sym_eigenvalues(&truncated_gram(fs, m, k, lambda)?)?;
    let (s1_a, sn_a) = (a_vals[0], *a_vals.last().expect("n ≥ 1"));
    if !(s1_a > 0.0) || sn_a <= DEFAULT_PINV_TOL * s1_a {
        return Err(Error::DegenerateTail { k });
    }
    let h_vals = sym_eigenvalues(&fs.z().column_block(0, k).gram_cols())?;
    let (s1_h, sk_h) = (h_vals[0], h_vals[k - 1]);
    if !(s1_h > 0.0) || sk_h <= DEFAULT_PINV_TOL * s1_h {
        return Err(Error::DegenerateHead { k });
    }
    let rho = (n * m.eigvals()[k] + s1_a) / sn_a;
    Ok(Split { triple: ConcentrationTriple { k, rho, zeta: s1_h / sk_h, xi: s1_h / n }, s1_a })
}

/// `ρ = (nλ_{k+1} + s₁(A_k))/s_n(A_k)`, `ζ = s₁(H)/s_k(H)`, `ξ = s₁(H)/n`
/// with head gram `H = Z_{≤k}ᵀ Z_{≤k}`. Requires `1 ≤ k ≤ min(n, p − 1)`.
pub fn concentration_coefficients(
    fs: &FeatureSample,
    m: &SpectralModel,
    k: usize,
    lambda: f64,
) -> Result<ConcentrationTriple> {
    Ok(split(fs, m, k, lambda)?.triple)
}

/// Sample extremes of the three generic-feature ratios; the head ratio is
/// skipped at `k = 0`.
pub fn empirical_gf_coefficients(fs: &FeatureSample, m: &SpectralModel, k: usize) -> Result<GfEmpirical> {
    check_k(m, fs, k)?;
    let tail = &m.eigvals()[k..];
    let tr1: f64 = tail.iter().rev().sum();
    let tr2: f64 = tail.iter().rev().map(|l| l * l).sum();
    let (mut alpha_hat, mut beta_hat) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in fs.z().rows_iter() {
        let (head, zt) = z.split_at(k);
        let (mut w1, mut w2) = (0.0, 0.0);
        for (v, l) in zt.iter().zip(tail) {
            w1 += l * v * v;
            w2 += l * l * v * v;
        }
        let r1 = w1 / tr1;
        let mut beta = r1.max(w2 / tr2);
        if k > 0 {
            beta = beta.max(head.iter().map(|v| v * v).sum::<f64>() / k as f64);
        }
        alpha_hat = alpha_hat.min(r1);
        beta_hat = beta_hat.max(beta);
    }
    Ok(GfEmpirical { k, alpha_hat, beta_hat })
}

/// Bias bound with its four summands:
/// `tail/δ`, `(ρ²ζ²ξ⁻¹ + ρ)·tail/δ`, `ζ²ξ⁻²·h` and `ρζ²ξ⁻¹·h`, where
/// `tail = ‖θ*_{>k}‖²_Σ` and `h = s₁(A_k)²/n² · ‖θ*_{≤k}‖²_{Σ⁻¹}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasBound {
    pub value: f64,
    pub terms: [f64; 4],
    pub triple: ConcentrationTriple,
}

/// Variance bound with its head and tail summands.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceBound {
    pub value: f64,
    pub terms: [f64; 2],
    pub triple: ConcentrationTriple,
}

fn bias_from_split(m: &SpectralModel, n: usize, k: usize, delta: f64, s: &Split) -> BiasBound {
    let ConcentrationTriple { rho, zeta, xi, .. } = s.triple;
    let (theta, lam) = (m.theta_star(), m.eigvals());
    let tail: f64 = (k..m.p()).rev().map(|i| lam[i] * theta[i] * theta[i]).sum();
    let head: f64 = (0..k).map(|i| theta[i] * theta[i] / lam[i]).sum();
    let h = (s.s1_a / n as f64).powi(2) * head;
    let z2 = zeta * zeta;
    let terms = [
        tail / delta,
        (rho * rho * z2 / xi + rho) * tail / delta,
        z2 / (xi * xi) * h,
        rho * z2 / xi * h,
    ];
    BiasBound { value: terms.iter().sum(), terms, triple: s.triple }
}

fn variance_from_split(fs: &FeatureSample, m: &SpectralModel, k: usize, sigma2: f64, s: &Split) -> Result<VarianceBound> {
    let ConcentrationTriple { rho, zeta, xi, .. } = s.triple;
    let n = fs.n() as f64;
    let er = effective_ranks(m, k)?;
    let tail = &m.eigvals()[k..];
    let tr2: f64 = tail.iter().rev().map(|l| l * l).sum();
    // tr[Z_{>k} Σ²_{>k} Z_{>k}ᵀ]
    let weighted: f64 = fs
        .z()
        .rows_iter()
        .map(|z| z[k..].iter().zip(tail).map(|(v, l)| l * l * v * v).sum::<f64>())
        .sum();
    let scale = sigma2 * rho * rho;
    let terms = [
        scale * zeta * zeta / xi * k as f64 / n,
        scale * weighted / (n * tr2) * er.r_k * er.r_k / (n * er.big_r_k),
    ];
    Ok(VarianceBound { value: terms[0] + terms[1], terms, triple: s.triple })
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence δ = {delta} must lie in (0, 1)")));
    }
    Ok(())
}

/// Right-hand side of the high-probability bias inequality at truncation `k`.
pub fn master_bias_bound(fs: &FeatureSample, m: &SpectralModel, lambda: f64, k: usize, delta: f64) -> Result<BiasBound> {
    check_delta(delta)?;
    let s = split(fs, m, k, lambda)?;
    Ok(bias_from_split(m, fs.n(), k, delta, &s))
}

/// Right-hand side of the deterministic variance inequality at truncation `k`.
pub fn master_variance_bound(fs: &FeatureSample, m: &SpectralModel, lambda: f64, k: usize, sigma2: f64) -> Result<VarianceBound> {
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise level σ² = {sigma2} must be finite and non-negative")));
    }
    let s = split(fs, m, k, lambda)?;
    variance_from_split(fs, m, k, sigma2, &s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KBound {
    pub bias: BiasBound,
    pub variance: VarianceBound,
    pub bias_satisfied: bool,
    pub variance_satisfied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub k: usize,
    /// Degenerate truncations keep their error.
    pub bound: Result<KBound>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub per_k: Vec<ScanRow>,
    pub best_k_bias: usize,
    pub best_k_variance: usize,
    pub delta: f64,
    pub exact_bias: f64,
    pub exact_variance: f64,
    /// The exact bias stays below the smallest bias bound.
    pub bias_satisfied: bool,
    pub variance_satisfied: bool,
}

impl BoundReport {
    fn row(&self, k: usize) -> &KBound {
        self.per_k
            .iter()
            .find(|r| r.k == k)
            .and_then(|r| r.bound.as_ref().ok())
            .expect("best k always has a valid row")
    }

    pub fn best_bias(&self) -> &BiasBound {
        &self.row(self.best_k_bias).bias
    }

    pub fn best_variance(&self) -> &VarianceBound {
        &self.row(self.best_k_variance).variance
    }
}

/// `{1, 2, 4, …} ∪ {⌊n/2⌋, ⌊n/4⌋, ⌊n/8⌋}` restricted to `[1, min(n, p − 1)]`.
pub fn default_k_grid(n: usize, p: usize) -> Vec<usize> {
    let cap = n.min(p.saturating_sub(1));
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k <= cap)
        .chain([n / 2, n / 4, n / 8])
        .filter(|&k| k >= 1 && k <= cap)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Evaluates both bounds at every `k` of the grid and audits them against
/// the exact errors of the same sample.
pub fn bound_scan(
    fs: &FeatureSample,
    m: &SpectralModel,
    lambda: f64,
    sigma2: f64,
    delta: f64,
    k_grid: &[usize],
) -> Result<BoundReport> {
    check_delta(delta)?;
    if k_grid.is_empty() {
        return Err(Error::InvalidParameter("empty truncation grid".into()));
    }
    for &k in k_grid {
        check_head_k(m, fs, k)?;
    }
    let f = DesignFactorization::new(fs)?;
    let exact_bias = f.bias(m, lambda)?;
    let exact_variance = f.variance(m, lambda, sigma2)?;

    let per_k: Vec<ScanRow> = k_grid
        .iter()
        .map(|&k| {
            let bound = split(fs, m, k, lambda).and_then(|s| {
                let bias = bias_from_split(m, fs.n(), k, delta, &s);
                let variance = variance_from_split(fs, m, k, sigma2, &s)?;
                Ok(KBound {
                    bias_satisfied: exact_bias <= bias.value,
                    variance_satisfied: exact_variance <= variance.value,
                    bias,
                    variance,
                })
            });
            ScanRow { k, bound }
        })
        .collect();

    let valid = || per_k.iter().filter_map(|r| r.bound.as_ref().ok().map(|b| (r.k, b)));
    // first minimizer on ties
    let argmin = |key: fn(&KBound) -> f64| {
        valid().fold(None, |best: Option<(usize, f64)>, (k, b)| match best {
            Some((_, v)) if v <= key(b) => best,
            _ => Some((k, key(b))),
        })
    };
    let (best_k_bias, min_bias) = argmin(|b| b.bias.value).ok_or(Error::NoValidTruncation)?;
    let (best_k_variance, min_variance) = argmin(|b| b.variance.value).ok_or(Error::NoValidTruncation)?;

    Ok(BoundReport {
        per_k,
        best_k_bias,
        best_k_variance,
        delta,
        exact_bias,
        exact_variance,
        bias_satisfied: exact_bias <= min_bias,
        variance_satisfied: exact_variance <= min_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{exact_bias, exact_variance};
    use crate::features::{materialize_inputs, sample_whitened, FeatureFamily};
    use crate::numerics::{Matrix, RngStream};
    use crate::spectral::{make_spectrum, SpectralFamily, Variant};
    use proptest::prelude::*;

    fn poly(p: usize) -> SpectralModel {
        make_spectrum(SpectralFamily::Poly, 1.0, 1.0, p, Variant::Plain).unwrap()
    }

    fn gaussian(m: &SpectralModel, n: usize, seed: u64) -> FeatureSample {
        sample_whitened(FeatureFamily::Gaussian, n, m.p(), &mut RngStream::new(seed)).unwrap().materialize(m).unwrap()
    }

    fn with_z(m: &SpectralModel, z: Matrix) -> FeatureSample {
        materialize_inputs(FeatureSample::from_whitened(FeatureFamily::Gaussian, z), m).unwrap()
    }

    /// Brute-force singular values of an explicitly formed matrix, descending.
    fn singular_values(a: &Matrix) -> Vec<f64> {
        let ata = a.gram_cols();
        let mut v: Vec<f64> = crate::numerics::jacobi_eigen(&ata).unwrap().eigvals().iter().map(|l| l.max(0.0).sqrt()).collect();
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
        v
    }

    #[test]
    fn pure_ridge_tail() {
        // tail columns vanish: A_k = 3λ I
        let m = poly(4);
        let z = Matrix::from_fn(3, 4, |i, j| if j < 2 && i == j { 1.0 } else { 0.0 });
        let fs = with_z(&m, z);
        let a = truncated_gram(&fs, &m, 2, 1.0).unwrap();
        assert_eq!(a.as_matrix(), &Matrix::from_diagonal(&[3.0; 3]));
    }

    #[test]
    fn rank_one_tail() {
        let m = poly(3);
        let fs = gaussian(&m, 4, 7);
        let a = truncated_gram(&fs, &m, 2, 0.5).unwrap();
        let c: Vec<f64> = fs.z().column(2);
        let l3 = m.eigvals()[2];
        for i in 0..4 {
            for j in 0..4 {
                let expected = l3 * c[i] * c[j] + if i == j { 2.0 } else { 0.0 };
                assert!((a[(i, j)] - expected).abs() < 1e-14);
            }
        }
        assert!(matches!(truncated_gram(&fs, &m, 3, 0.5), Err(Error::InvalidTruncation { k: 3, p: 3 })));
    }

    #[test]
    fn orthogonal_tail_rows() {
        let m = poly(5);
        // tail rows supported on distinct coordinates
        let z = Matrix::from_fn(3, 5, |i, j| if j == i + 2 { (i + 1) as f64 } else { 0.0 });
        let fs = with_z(&m, z);
        let vals = sym_eigenvalues(&truncated_gram(&fs, &m, 2, 0.0).unwrap()).unwrap();
        let mut expected: Vec<f64> = (0..3).map(|i| ((i + 1) as f64).powi(2) * m.eigvals()[i + 2]).collect();
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn isotropic_head_and_pure_ridge() {
        let n = 4;
        let m = poly(6);
        // head columns orthogonal with squared norm n, tail zero
        let z = Matrix::from_fn(n, 6, |i, j| if j < 2 { [[1.0, 1.0], [1.0, -1.0], [1.0, 1.0], [1.0, -1.0]][i][j] } else { 0.0 });
        let fs = with_z(&m, z);
        let t = concentration_coefficients(&fs, &m, 2, 0.3).unwrap();
        assert!((t.zeta - 1.0).abs() < 1e-14 && (t.xi - 1.0).abs() < 1e-14);
        assert!((t.rho - (1.0 + m.eigvals()[2] / 0.3)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_tail_ridgeless() {
        let m = poly(8);
        let fs = gaussian(&m, 10, 1);
        // p − k = 3 tail columns cannot fill a 10×10 gram
        assert_eq!(concentration_coefficients(&fs, &m, 5, 0.0), Err(Error::DegenerateTail { k: 5 }));
        assert!(concentration_coefficients(&fs, &m, 5, 0.1).is_ok());
    }

    #[test]
    fn coefficients_match_brute_force() {
        let m = poly(120);
        let n = 50;
        let k = 5;
        let lambda = 0.02;
        let fs = gaussian(&m, n, 11);
        let t = concentration_coefficients(&fs, &m, k, lambda).unwrap();

        // A_k^{1/2}-free route: singular values of [X_{>k}, √(nλ) I] squared
        let x_tail = fs.x().unwrap().column_block(k, m.p());
        let aug = Matrix::from_fn(n, m.p() - k + n, |i, j| {
            if j < m.p() - k {
                x_tail[(i, j)]
            } else if j - (m.p() - k) == i {
                (n as f64 * lambda).sqrt()
            } else {
                0.0
            }
        });
        let sa: Vec<f64> = singular_values(&aug.transpose()).iter().map(|s| s * s).collect();
        let sh: Vec<f64> = singular_values(&fs.z().column_block(0, k)).iter().map(|s| s * s).collect();
        let rho = (n as f64 * m.eigvals()[k] + sa[0]) / sa[n - 1];
        let zeta = sh[0] / sh[k - 1];
        let xi = sh[0] / n as f64;
        assert!((t.rho - rho).abs() <= 1e-8 * rho);
        assert!((t.zeta - zeta).abs() <= 1e-8 * zeta);
        assert!((t.xi - xi).abs() <= 1e-8 * xi);
    }

    #[test]
    fn gf_single_row_at_expectation() {
        let m = poly(3);
        // ‖z_{>0}‖²_Σ = tr Σ and ‖z‖²_{Σ²} = tr Σ² with all coordinates ±1
        let fs = with_z(&m, Matrix::from_rows(&[vec![1.0, -1.0, 1.0]]).unwrap());
        let gf = empirical_gf_coefficients(&fs, &m, 0).unwrap();
        assert!((gf.alpha_hat - 1.0).abs() < 1e-15 && (gf.beta_hat - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gf_sine_bounded_and_gaussian_bands() {
        let m = poly(50);
        let fs = sample_whitened(FeatureFamily::Sine, 300, 50, &mut RngStream::new(4)).unwrap().materialize(&m).unwrap();
        let gf = empirical_gf_coefficients(&fs, &m, 0).unwrap();
        assert!(gf.beta_hat <= 2.0 + 1e-12);

        let m = poly(100);
        let fs = gaussian(&m, 500, 5);
        let gf = empirical_gf_coefficients(&fs, &m, 10).unwrap();
        assert!(gf.alpha_hat > 0.0 && gf.alpha_hat < 1.0, "{gf:?}");
        assert!(gf.beta_hat > 1.0 && gf.beta_hat < 5.0, "{gf:?}");
        assert!(gf.alpha_hat <= gf.beta_hat);
    }

    #[test]
    fn zero_target_and_tail_only_target() {
        let m = poly(60);
        let fs = gaussian(&m, 20, 2);
        let zero = m.with_theta_star(vec![0.0; 60]).unwrap();
        assert_eq!(master_bias_bound(&fs, &zero, 0.05, 4, 0.1).unwrap().value, 0.0);

        let mut theta = m.theta_star().to_vec();
        theta[..4].iter_mut().for_each(|t| *t = 0.0);
        let tail_only = m.with_theta_star(theta.clone()).unwrap();
        let b = master_bias_bound(&fs, &tail_only, 0.05, 4, 0.1).unwrap();
        let t = b.triple;
        let tail: f64 = tail_only.sigma_norm_sq(&theta);
        let expected = (1.0 + t.rho * t.rho * t.zeta * t.zeta / t.xi + t.rho) / 0.1 * tail;
        assert!((b.value - expected).abs() <= 1e-12 * expected);
        assert_eq!(&b.terms[2..], &[0.0, 0.0]);
    }

    #[test]
    fn variance_bound_special_cases() {
        let m = poly(30);
        let fs = gaussian(&m, 20, 3);
        assert_eq!(master_variance_bound(&fs, &m, 0.05, 3, 0.0).unwrap().value, 0.0);

        let z = Matrix::from_fn(20, 30, |i, j| if j < 3 { fs.z()[(i, j)] } else { 0.0 });
        let head_only = with_z(&m, z);
        let v = master_variance_bound(&head_only, &m, 0.05, 3, 2.0).unwrap();
        let t = v.triple;
        let expected = 2.0 * t.rho * t.rho * t.zeta * t.zeta / t.xi * 3.0 / 20.0;
        assert!((v.value - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn bounds_hold_on_reference_instance() {
        let m = poly(400);
        let fs = gaussian(&m, 100, 21);
        let lambda = 0.01;
        let b = exact_bias(&m, &fs, lambda).unwrap();
        let v = exact_variance(&m, &fs, lambda, 1.0).unwrap();
        assert!(master_bias_bound(&fs, &m, lambda, 10, 0.1).unwrap().value >= b);
        for k in [1, 10, 50, 100] {
            assert!(master_variance_bound(&fs, &m, lambda, k, 1.0).unwrap().value >= v);
        }
    }

    #[test]
    fn scan_shape_and_argmin() {
        let m = poly(200);
        let fs = gaussian(&m, 40, 8);
        let single = bound_scan(&fs, &m, 0.01, 1.0, 0.1, &[7]).unwrap();
        assert_eq!((single.best_k_bias, single.best_k_variance), (7, 7));

        let grid = default_k_grid(40, 200);
        let report = bound_scan(&fs, &m, 0.01, 1.0, 0.1, &grid).unwrap();
        assert_eq!(report.per_k.len(), grid.len());
        let min_v = report.per_k.iter().map(|r| r.bound.as_ref().unwrap().variance.value).fold(f64::INFINITY, f64::min);
        assert_eq!(report.best_variance().value, min_v);
        assert!(report.variance_satisfied);

        assert!(matches!(bound_scan(&fs, &m, 0.01, 1.0, 0.1, &[]), Err(Error::InvalidParameter(_))));
        assert!(matches!(bound_scan(&fs, &m, 0.01, 1.0, 0.1, &[41]), Err(Error::InvalidTruncation { .. })));
        assert!(matches!(bound_scan(&fs, &m, 0.01, 1.0, 1.0, &[1]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn scan_all_degenerate() {
        let m = poly(12);
        let fs = gaussian(&m, 10, 1);
        assert_eq!(bound_scan(&fs, &m, 0.0, 1.0, 0.1, &[4, 6]), Err(Error::NoValidTruncation));
    }

    #[test]
    fn grid_contents() {
        assert_eq!(default_k_grid(100, 400), vec![1, 2, 4, 8, 12, 16, 25, 32, 50, 64]);
        assert_eq!(default_k_grid(100, 6), vec![1, 2, 4]);
        assert!(default_k_grid(1, 1).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn coefficient_invariants(seed in 0u64..10_000, k in 1usize..10, lambda in 1e-4f64..1.0) {
            let m = poly(80);
            let fs = gaussian(&m, 30, seed);
            let t = concentration_coefficients(&fs, &m, k, lambda).unwrap();
            prop_assert!(t.zeta >= 1.0 && t.rho >= 1.0);
            let head = fs.z().column_block(0, k);
            let trace: f64 = head.as_slice().iter().map(|v| v * v).sum();
            prop_assert!(t.xi >= trace / (k as f64 * 30.0) * (1.0 - 1e-12));
        }

        #[test]
        fn variance_bound_is_deterministic(seed in 0u64..10_000, k in 1usize..=30) {
            let m = poly(120);
            let fs = gaussian(&m, 30, seed);
            let v = exact_variance(&m, &fs, 1.0 / 30.0, 1.0).unwrap();
            prop_assert!(master_variance_bound(&fs, &m, 1.0 / 30.0, k, 1.0).unwrap().value >= v);
        }
    }
}
