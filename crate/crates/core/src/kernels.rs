//! Concrete kernels (Laplacian, one-hidden-layer NTK, min) and samplers for
//! their input domains.

use std::f64::consts::{PI, SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::spectral::{min_kernel_frequency, SpectralFamily, SpectralModel, Variant};

/// Slack on `|xᵀz| ≤ 1` before the NTK rejects a pair.
pub const NTK_CLAMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    UnitInterval,
    /// Closed unit disk in the plane.
    UnitDisk2,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::UnitInterval => 1,
            Domain::UnitDisk2 => 2,
        }
    }
}

/// Points of a domain stored as a flat coordinate array.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    domain: Domain,
    coords: Vec<f64>,
}

impl PointSet {
    /// Validates that every point lies in the domain.
    pub fn new(domain: Domain, coords: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if coords.len() % dim != 0 {
            return Err(Error::InvalidShape(format!("{} coordinates for dimension {dim}", coords.len())));
        }
        let inside = coords.chunks_exact(dim).all(|c| match domain {
            Domain::UnitInterval => (0.0..=1.0).contains(&c[0]),
            Domain::UnitDisk2 => c[0] * c[0] + c[1] * c[1] <= 1.0 + 1e-12,
        });
        if !inside {
            return Err(Error::DomainError(format!("point outside {domain:?}")));
        }
        Ok(Self { domain, coords })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn len(&self) -> usize {
        self.coords.len() / self.domain.dim()
    }
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.domain.dim();
        &self.coords[i * d..(i + 1) * d]
    }
    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.domain.dim())
    }
}

/// Uniform i.i.d. points; the disk uses radius `√u` and angle `2πv`.
pub fn sample_points(domain: Domain, n: usize, rng: &mut RngStream) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    let coords = match domain {
        Domain::UnitInterval => (0..n).map(|_| rng.uniform()).collect(),
        Domain::UnitDisk2 => {
            let mut c = Vec::with_capacity(2 * n);
            for _ in 0..n {
                let radius = rng.uniform().sqrt();
                let (s, co) = (TAU * rng.uniform()).sin_cos();
                c.push(radius * co);
                c.push(radius * s);
            }
            c
        }
    };
    Ok(PointSet { domain, coords })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `e^{-‖x − z‖₂}`
    Laplacian,
    /// One-hidden-layer ReLU NTK `t κ₀(t) + κ₁(t)` at `t = xᵀz`.
    Ntk1,
    /// `min(x, z)` on the unit interval.
    MinKernel,
}

/// Evaluates a single kernel entry.
pub fn kernel_eval(kind: KernelKind, x: &[f64], z: &[f64]) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::InvalidShape(format!("points of dimension {} and {}", x.len(), z.len())));
    }
    match kind {
        KernelKind::Laplacian => {
            let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok((-d2.sqrt()).exp())
        }
        KernelKind::Ntk1 => {
            let t: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
            if t.abs() > 1.0 + NTK_CLAMP_TOL {
                return Err(Error::DomainError(format!("NTK needs |xᵀz| ≤ 1, got {t}")));
            }
            let t = t.clamp(-1.0, 1.0);
            let acos = t.acos();
            let kappa0 = 1.0 - acos / PI;
            let kappa1 = (t * (PI - acos) + (1.0 - t * t).sqrt()) / PI;
            Ok(t * kappa0 + kappa1)
        }
        KernelKind::MinKernel => {
            if x.len() != 1 {
                return Err(Error::DomainError("the min kernel is defined on the unit interval".into()));
            }
            Ok(x[0].min(z[0]))
        }
    }
}

fn check_domain(kind: KernelKind, pts: &PointSet) -> Result<()> {
    if kind == KernelKind::MinKernel && pts.domain() != Domain::UnitInterval {
        return Err(Error::DomainError("the min kernel is defined on the unit interval".into()));
    }
    Ok(())
}

/// Square gram of `pts`, or the cross gram `K[i][j] = k(pts_i, pts2_j)`.
///
/// The square gram is evaluated on the upper triangle and mirrored.
pub fn gram(kind: KernelKind, pts: &PointSet, pts2: Option<&PointSet>) -> Result<Matrix> {
    check_domain(kind, pts)?;
    match pts2 {
        None => {
            let n = pts.len();
            let mut k = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = kernel_eval(kind, pts.point(i), pts.point(j))?;
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
            }
            Ok(k)
        }
        Some(other) => {
            check_domain(kind, other)?;
            if other.domain().dim() != pts.domain().dim() {
                return Err(Error::InvalidShape("point sets of different dimension".into()));
            }
            let mut k = Matrix::zeros(pts.len(), other.len());
            for i in 0..pts.len() {
                for j in 0..other.len() {
                    k[(i, j)] = kernel_eval(kind, pts.point(i), other.point(j))?;
                }
            }
            Ok(k)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MercerCheck {
    pub truncated_sum: f64,
    pub abs_error: f64,
}

/// Compares the rank-`p` Mercer sum `Σ λ_k ψ_k(x) ψ_k(x2)` with `min(x, x2)`.
///
/// Only the min-kernel spectrum with `a = 1` reproduces the kernel.
pub fn min_kernel_mercer_check(x: f64, x2: f64, m: &SpectralModel) -> Result<MercerCheck> {
    if m.variant() != Variant::MinKernel || m.family() != SpectralFamily::Poly || m.a() != 1.0 {
        return Err(Error::ModelMismatch("the Mercer check needs the min-kernel spectrum with a = 1".into()));
    }
    for v in [x, x2] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("abscissa {v} outside [0, 1]")));
        }
    }
    let psi = |k: usize, t: f64| SQRT_2 * (min_kernel_frequency(k) * t).sin();
    // smallest terms first
    let truncated_sum = m
        .eigvals()
        .iter()
        .enumerate()
        .rev()
        .map(|(i, l)| l * psi(i + 1, x) * psi(i + 1, x2))
        .sum::<f64>();
    Ok(MercerCheck { truncated_sum, abs_error: (truncated_sum - x.min(x2)).abs() })
}
