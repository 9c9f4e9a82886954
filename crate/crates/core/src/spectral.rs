//! Synthetic eigen-systems, target coefficients, ridge schedules and the
//! theoretical learning-rate table.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectralFamily {
    /// `λ_k ∝ k^{-1-a}`
    Poly,
    /// `λ_k = e^{-a k}`
    Exp,
}

/// Constant convention for the polynomial family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Unit constants: `λ_k = k^{-1-a}`, `θ*_k = k^{-r}`.
    Plain,
    /// Mercer system of `min(x, x')` on `[0, 1]`: frequencies `ω_k = (2k-1)π/2`.
    MinKernel,
}

/// Frequency of the k-th (1-based) sine eigenfunction of the min kernel.
#[inline]
pub fn min_kernel_frequency(k: usize) -> f64 {
    (2.0 * k as f64 - 1.0) * PI / 2.0
}

/// Eigenvalues and target coefficients of a diagonal covariance, truncated at rank `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    family: SpectralFamily,
    a: f64,
    r: f64,
    variant: Variant,
    eigvals: Vec<f64>,
    theta_star: Vec<f64>,
}

impl SpectralModel {
    pub fn family(&self) -> SpectralFamily {
        self.family
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn p(&self) -> usize {
        self.eigvals.len()
    }
    pub fn variant(&self) -> Variant {
        self.variant
    }
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }
    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    /// Same spectrum with a different target vector.
    pub fn with_theta_star(&self, theta_star: Vec<f64>) -> Result<SpectralModel> {
        if theta_star.len() != self.p() {
            return Err(Error::InvalidShape(format!(
                "target of length {} for rank {}",
                theta_star.len(),
                self.p()
            )));
        }
        Ok(SpectralModel { theta_star, ..self.clone() })
    }

    /// Same target with an explicit spectrum, which must stay positive and non-increasing.
    pub fn with_eigvals(&self, eigvals: Vec<f64>) -> Result<SpectralModel> {
        if eigvals.len() != self.p() {
            return Err(Error::InvalidShape(format!(
                "spectrum of length {} for rank {}",
                eigvals.len(),
                self.p()
            )));
        }
        if eigvals.iter().any(|&l| !(l > 0.0 && l.is_finite())) || eigvals.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("eigenvalues must be positive and non-increasing".into()));
        }
        Ok(SpectralModel { eigvals, ..self.clone() })
    }

    /// `‖θ‖²_Σ = Σ λ_k θ_k²`.
    pub fn sigma_norm_sq(&self, theta: &[f64]) -> f64 {
        self.eigvals.iter().zip(theta).map(|(l, t)| l * t * t).sum()
    }

    /// Source coefficient `s`; see [`source_coefficient`].
    pub fn source_coefficient(&self) -> f64 {
        source_coefficient(self)
    }
}

/// Builds the spectrum and target for the requested family.
///
/// The exponential family only exists with unit constants, and its rank is
/// limited by `a·p` staying inside the normal `f64` range.
pub fn make_spectrum(family: SpectralFamily, a: f64, r: f64, p: usize, variant: Variant) -> Result<SpectralModel> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("decay exponent a = {a} must be positive")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("target decay r = {r} must be positive")));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("truncation rank p must be at least 1".into()));
    }
    let (eigvals, theta_star): (Vec<f64>, Vec<f64>) = match (family, variant) {
        (SpectralFamily::Poly, Variant::Plain) => (1..=p)
            .map(|k| {
                let k = k as f64;
                (k.powf(-1.0 - a), k.powf(-r))
            })
            .unzip(),
        (SpectralFamily::Poly, Variant::MinKernel) => (1..=p)
            .map(|k| {
                let w = min_kernel_frequency(k);
                (w.powf(-1.0 - a), w.powf(-r))
            })
            .unzip(),
        (SpectralFamily::Exp, Variant::Plain) => (1..=p)
            .map(|k| {
                let k = k as f64;
                ((-a * k).exp(), (-r * k).exp())
            })
            .unzip(),
        (SpectralFamily::Exp, Variant::MinKernel) => {
            return Err(Error::InvalidParameter(
                "the min-kernel constants only apply to the polynomial family".into(),
            ))
        }
    };
    if let Some(k) = eigvals.iter().position(|&l| !(l >= f64::MIN_POSITIVE)) {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue {} underflows; reduce p or a",
            k + 1
        )));
    }
    Ok(SpectralModel { family, a, r, variant, eigvals, theta_star })
}

/// `s = (2r + a)/(1 + a)` for polynomial decay, `2r/a + 1` for exponential decay.
pub fn source_coefficient(m: &SpectralModel) -> f64 {
    match m.family {
        SpectralFamily::Poly => (2.0 * m.r + m.a) / (1.0 + m.a),
        SpectralFamily::Exp => 2.0 * m.r / m.a + 1.0,
    }
}

/// Effective ranks of the tail beyond index `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveRanks {
    /// `Σ_{l>k} λ_l / λ_{k+1}`
    pub r_k: f64,
    /// `(Σ_{l>k} λ_l)² / Σ_{l>k} λ_l²`
    pub big_r_k: f64,
}

/// Effective ranks over the finite truncation. Requires `k < p`.
pub fn effective_ranks(m: &SpectralModel, k: usize) -> Result<EffectiveRanks> {
    let p = m.p();
    if k >= p {
        return Err(Error::InvalidTruncation { k, p });
    }
    let tail = &m.eigvals[k..];
    // smallest terms first
    let (sum, sum_sq) = tail.iter().rev().fold((0.0, 0.0), |(s, q), &l| (s + l, q + l * l));
    Ok(EffectiveRanks { r_k: sum / tail[0], big_r_k: sum * sum / sum_sq })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RidgeKind {
    /// `λ(n) = n^{-b}` (or `ω_n^{-b}` with min-kernel constants)
    PowerLaw(f64),
    /// `λ(n) = e^{-b n}`
    ExpLaw(f64),
    /// Ridgeless, the `b = ∞` convention.
    Zero,
}

/// Mapping from sample size to ridge parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RidgeSchedule {
    kind: RidgeKind,
    variant: Variant,
}

impl RidgeSchedule {
    pub fn new(kind: RidgeKind, variant: Variant) -> Result<Self> {
        match kind {
            RidgeKind::PowerLaw(b) | RidgeKind::ExpLaw(b) if !(b > 0.0 && b.is_finite()) => {
                Err(Error::InvalidParameter(format!("ridge exponent b = {b} must be positive")))
            }
            _ => Ok(Self { kind, variant }),
        }
    }

    pub fn power_law(b: f64, variant: Variant) -> Result<Self> {
        Self::new(RidgeKind::PowerLaw(b), variant)
    }

    pub fn exp_law(b: f64) -> Result<Self> {
        Self::new(RidgeKind::ExpLaw(b), Variant::Plain)
    }

    pub fn zero() -> Self {
        Self { kind: RidgeKind::Zero, variant: Variant::Plain }
    }

    pub fn kind(&self) -> RidgeKind {
        self.kind
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// The exponent `b`, or `None` for the ridgeless schedule.
    pub fn b(&self) -> Option<f64> {
        match self.kind {
            RidgeKind::PowerLaw(b) | RidgeKind::ExpLaw(b) => Some(b),
            RidgeKind::Zero => None,
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        ridge_at(self, n)
    }
}

pub fn ridge_at(s: &RidgeSchedule, n: usize) -> f64 {
    match s.kind {
        RidgeKind::PowerLaw(b) => match s.variant {
            Variant::Plain => (n as f64).powf(-b),
            Variant::MinKernel => min_kernel_frequency(n).powf(-b),
        },
        RidgeKind::ExpLaw(b) => (-b * n as f64).exp(),
        RidgeKind::Zero => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RidgeStrength {
    Strong,
    Weak,
}

/// Strong iff `b ≤ 1 + a` (polynomial) or `b ≤ a` (exponential); ridgeless is weak.
pub fn classify_ridge(s: &RidgeSchedule, m: &SpectralModel) -> Result<RidgeStrength> {
    let strong = match (s.kind, m.family) {
        (RidgeKind::Zero, _) => false,
        (RidgeKind::PowerLaw(b), SpectralFamily::Poly) => b <= 1.0 + m.a,
        (RidgeKind::ExpLaw(b), SpectralFamily::Exp) => b <= m.a,
        (kind, family) => {
            return Err(Error::ScheduleMismatch(format!("{kind:?} against {family:?} decay")));
        }
    };
    Ok(if strong { RidgeStrength::Strong } else { RidgeStrength::Weak })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureAssumption {
    /// Independent sub-Gaussian coordinates.
    Independent,
    /// Generic (possibly dependent) features.
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `p > n`
    Over,
    /// `p < n`
    Under,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RateScale {
    /// Error `∝ n^{exponent}`.
    PowerOfN,
    /// Error `∝ e^{exponent · n}`.
    ExpOfN,
}

/// Predicted decay of one error term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Exponent(f64),
    /// `Θ(1)`: tempered behaviour.
    Constant,
    /// Diverges with `n`.
    Catastrophic,
    NoBound,
    /// Under-parameterized: use the deterministic surrogate sums instead of a rate.
    Surrogate,
}

impl Rate {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Rate::Exponent(e) => Some(*e),
            Rate::Constant => Some(0.0),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePrediction {
    pub bias: Rate,
    pub variance: Rate,
    /// Matching lower bound known (`Θ` rather than `O`).
    pub bias_tight: bool,
    pub variance_tight: bool,
    pub bias_scale: RateScale,
    pub variance_scale: RateScale,
    pub strength: Option<RidgeStrength>,
    pub s: f64,
    pub s_tilde: f64,
    /// Parameters sit on an excluded boundary (`a + 2 = 2r` or `a = 2r`)
    /// where the rates pick up logarithmic factors.
    pub log_factor_warning: bool,
}

/// Encodes the over-parameterized learning-curve table together with the
/// improved ridgeless bias bound for generic features.
pub fn predict_rates(
    m: &SpectralModel,
    schedule: &RidgeSchedule,
    features: FeatureAssumption,
    regime: Regime,
) -> Result<RatePrediction> {
    use FeatureAssumption::*;
    use RidgeStrength::*;

    let strength = classify_ridge(schedule, m)?;
    let s = source_coefficient(m);
    let s_tilde = s.min(2.0);
    let (a, r) = (m.a, m.r);
    let log_factor_warning = match m.family {
        SpectralFamily::Poly => (a + 2.0 - 2.0 * r).abs() < 1e-12,
        SpectralFamily::Exp => (a - 2.0 * r).abs() < 1e-12,
    };
    let mut pred = RatePrediction {
        bias: Rate::NoBound,
        variance: Rate::NoBound,
        bias_tight: false,
        variance_tight: false,
        bias_scale: RateScale::PowerOfN,
        variance_scale: RateScale::PowerOfN,
        strength: Some(strength),
        s,
        s_tilde,
        log_factor_warning,
    };
    if regime == Regime::Under {
        pred.bias = Rate::Surrogate;
        pred.variance = Rate::Surrogate;
        return Ok(pred);
    }
    let independent = features == Independent;
    let b = schedule.b();

    match (m.family, strength) {
        (SpectralFamily::Poly, Strong) => {
            let b = b.expect("strong schedules carry an exponent");
            pred.bias = Rate::Exponent(-b * s_tilde);
            pred.variance = Rate::Exponent(-1.0 + b / (a + 1.0));
            pred.bias_tight = independent;
            pred.variance_tight = independent;
        }
        (SpectralFamily::Poly, Weak) if independent => {
            pred.bias = Rate::Exponent(-(1.0 + a) * s_tilde);
            pred.variance = Rate::Constant;
            pred.bias_tight = true;
            pred.variance_tight = true;
        }
        (SpectralFamily::Poly, Weak) => {
            if s < 1.0 {
                pred.bias = Rate::Exponent(-(r - a).max(0.0));
            } else if s <= 2.0 {
                pred.bias = Rate::Exponent(-(2.0 * r + a));
                pred.bias_tight = true;
            } else {
                pred.bias = Rate::Exponent(-2.0 * (1.0 + a));
            }
            pred.variance = Rate::Exponent(2.0 * a);
        }
        (SpectralFamily::Exp, Strong) => {
            let b = b.expect("strong schedules carry an exponent");
            pred.bias = Rate::Exponent(-b * s_tilde);
            pred.bias_scale = RateScale::ExpOfN;
            pred.variance = Rate::Exponent(-1.0 + b / a);
            pred.bias_tight = independent;
            pred.variance_tight = independent;
        }
        (SpectralFamily::Exp, Weak) => {
            pred.bias_scale = RateScale::ExpOfN;
            pred.bias = if s > 1.0 { Rate::Exponent(-a * s_tilde) } else { Rate::NoBound };
            pred.variance = Rate::Catastrophic;
        }
    }
    Ok(pred)
}
