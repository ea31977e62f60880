use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::{add_steering, steering_vector, PathAngles, PortGrid};
use super::correlation_matrix;
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt_factor, ComplexMatrix, ComplexVector};

/// One `CN(0, 1)` draw: `(a + jb) / sqrt(2)` with `a, b ~ N(0, 1)`.
pub fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) / SQRT_2
}

/// Parameters of the finite-scatterer geometric channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricChannelParams {
    /// Rice factor, linear. `f64::INFINITY` gives a pure line-of-sight channel.
    pub rice_k: f64,
    pub num_paths: usize,
    pub los: PathAngles,
}

impl GeometricChannelParams {
    pub fn new(rice_k: f64, num_paths: usize) -> Self {
        Self {
            rice_k,
            num_paths,
            los: PathAngles::default(),
        }
    }

    pub fn from_db(rice_k_db: f64, num_paths: usize) -> Self {
        Self::new(10f64.powf(rice_k_db / 10.0), num_paths)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rice_k.is_nan() || self.rice_k < 0.0 {
            return Err(Error::InvalidArgument(format!("Rice factor {}", self.rice_k)));
        }
        if self.num_paths == 0 {
            return Err(Error::InvalidArgument("geometric channel needs at least one path".into()));
        }
        if !self.los.theta.is_finite() || !self.los.phi.is_finite() {
            return Err(Error::InvalidArgument("non-finite line-of-sight angles".into()));
        }
        Ok(())
    }

    /// Amplitudes `(sqrt(K/(K+1)), sqrt(1/((K+1) Np)))`.
    fn amplitudes(&self) -> (f64, f64) {
        if self.rice_k.is_infinite() {
            (1.0, 0.0)
        } else {
            let k = self.rice_k;
            ((k / (k + 1.0)).sqrt(), (1.0 / ((k + 1.0) * self.num_paths as f64)).sqrt())
        }
    }
}

/// Draws `N x M` correlated Rayleigh matrices with columns `CN(0, Sigma)`.
#[derive(Debug, Clone)]
pub struct RayleighSampler {
    factor: ComplexMatrix,
}

impl RayleighSampler {
    /// Unit-variance Bessel correlation of `grid`.
    pub fn new(grid: &PortGrid) -> Result<Self> {
        let sigma = correlation_matrix(grid, 1.0)?;
        Self::from_covariance(&sigma)
    }

    pub fn from_covariance(sigma: &ComplexMatrix) -> Result<Self> {
        Ok(Self {
            factor: psd_sqrt_factor(sigma)?,
        })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.factor
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> ComplexMatrix {
        let n = self.factor.ncols();
        let g = ComplexMatrix::from_fn(n, m, |_, _| circular_gaussian(rng));
        &self.factor * g
    }
}

/// Convenience wrapper building the sampler on every call.
pub fn sample_rayleigh_channel<R: Rng + ?Sized>(grid: &PortGrid, m: usize, rng: &mut R) -> Result<ComplexMatrix> {
    Ok(RayleighSampler::new(grid)?.sample(m, rng))
}

/// Isotropic arrival direction: `phi ~ U[-pi, pi)`, `theta` with density
/// `sin(theta) / 2` on `[0, pi]`.
fn isotropic_angles<R: Rng + ?Sized>(rng: &mut R) -> PathAngles {
    let u: f64 = rng.random();
    let theta = (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos();
    let phi = rng.random_range(-PI..PI);
    PathAngles::new(theta, phi)
}

/// Draws `N x M` matrices from the line-of-sight plus `Np` scatterer model.
///
/// Per column the draw order is: LoS phase, then for each path
/// `(theta, phi, gain)`.
#[derive(Debug, Clone)]
pub struct GeometricSampler {
    grid: PortGrid,
    params: GeometricChannelParams,
    los: ComplexVector,
}

impl GeometricSampler {
    pub fn new(grid: &PortGrid, params: GeometricChannelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid: grid.clone(),
            params,
            los: steering_vector(grid, params.los),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> ComplexMatrix {
        let n = self.grid.len();
        let (los_amp, nlos_amp) = self.params.amplitudes();
        let mut h = ComplexMatrix::zeros(n, m);
        for mut col in h.column_iter_mut() {
            let delta = rng.random_range(0.0..2.0 * PI);
            let rot = Complex64::from_polar(los_amp, delta);
            let out = col.as_mut_slice();
            for (o, a) in out.iter_mut().zip(self.los.iter()) {
                *o = rot * a;
            }
            for _ in 0..self.params.num_paths {
                let angles = isotropic_angles(rng);
                let gain = circular_gaussian(rng) * nlos_amp;
                add_steering(out, &self.grid, angles, gain);
            }
        }
        h
    }
}

pub fn sample_geometric_channel<R: Rng + ?Sized>(
    grid: &PortGrid,
    m: usize,
    params: GeometricChannelParams,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    Ok(GeometricSampler::new(grid, params)?.sample(m, rng))
}
