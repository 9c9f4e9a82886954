//! Whitened feature draws and their materialization into inputs `X = Z Σ^{1/2}`.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::spectral::{min_kernel_frequency, SpectralModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureFamily {
    /// i.i.d. standard normal coordinates.
    Gaussian,
    /// i.i.d. uniform signs.
    Rademacher,
    /// `√2 sin(ω_k x)` at `x ~ U[0, 1]`: the min-kernel eigenfunctions.
    Sine,
}

impl FeatureFamily {
    /// Whether the coordinates are independent.
    pub fn is_independent(self) -> bool {
        !matches!(self, FeatureFamily::Sine)
    }
}

#[derive(Clone, Debug)]
pub struct FeatureSample {
    family: FeatureFamily,
    z: Matrix,
    x: Option<Matrix>,
    inputs: Option<Vec<f64>>,
}

impl FeatureSample {
    /// Wraps an explicit whitened matrix.
    pub fn from_whitened(family: FeatureFamily, z: Matrix) -> Self {
        Self { family, z, x: None, inputs: None }
    }

    pub fn family(&self) -> FeatureFamily {
        self.family
    }
    pub fn n(&self) -> usize {
        self.z.nrows()
    }
    pub fn p(&self) -> usize {
        self.z.ncols()
    }
    pub fn z(&self) -> &Matrix {
        &self.z
    }
    /// Materialized inputs, if [`materialize_inputs`] has run.
    pub fn x(&self) -> Option<&Matrix> {
        self.x.as_ref()
    }
    pub fn inputs(&self) -> Option<&[f64]> {
        self.inputs.as_deref()
    }

    pub(crate) fn x_or_err(&self) -> Result<&Matrix> {
        self.x.as_ref().ok_or_else(|| Error::InvalidShape("inputs X have not been materialized".into()))
    }

    pub fn materialize(self, m: &SpectralModel) -> Result<FeatureSample> {
        materialize_inputs(self, m)
    }
}

/// Draws an `n × p` whitened matrix from `family`.
pub fn sample_whitened(family: FeatureFamily, n: usize, p: usize, rng: &mut RngStream) -> Result<FeatureSample> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter(format!("sample shape {n}x{p} must be non-empty")));
    }
    match family {
        FeatureFamily::Gaussian => {
            let z = Matrix::from_fn(n, p, |_, _| rng.standard_normal());
            Ok(FeatureSample::from_whitened(family, z))
        }
        FeatureFamily::Rademacher => {
            let z = Matrix::from_fn(n, p, |_, _| rng.rademacher());
            Ok(FeatureSample::from_whitened(family, z))
        }
        FeatureFamily::Sine => {
            let inputs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            Ok(sine_features_at(&inputs, p))
        }
    }
}

/// Sine features evaluated at the given abscissae.
pub fn sine_features_at(inputs: &[f64], p: usize) -> FeatureSample {
    let z = Matrix::from_fn(inputs.len(), p, |i, k| SQRT_2 * (min_kernel_frequency(k + 1) * inputs[i]).sin());
    FeatureSample { family: FeatureFamily::Sine, z, x: None, inputs: Some(inputs.to_vec()) }
}

/// Fills `X[i][k] = Z[i][k] · √λ_k`.
pub fn materialize_inputs(mut fs: FeatureSample, m: &SpectralModel) -> Result<FeatureSample> {
    if fs.p() != m.p() {
        return Err(Error::InvalidShape(format!("sample has {} features, model rank {}", fs.p(), m.p())));
    }
    let roots: Vec<f64> = m.eigvals().iter().map(|l| l.sqrt()).collect();
    let mut x = fs.z.clone();
    for i in 0..x.nrows() {
        for (v, r) in x.row_mut(i).iter_mut().zip(&roots) {
            *v *= r;
        }
    }
    fs.x = Some(x);
    Ok(fs)
}
