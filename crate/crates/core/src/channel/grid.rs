use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bessel_j0, ComplexMatrix, ComplexVector};

/// Port layout of a fluid antenna, with positions in wavelengths.
///
/// Plane grids are enumerated row-major: port `t = t2 * n1 + t1` sits at
/// column `t1` of row `t2` (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "lowercase")]
pub enum PortGrid {
    Line { n: usize, aperture: f64 },
    Plane { n1: usize, n2: usize, aperture1: f64, aperture2: f64 },
}

/// Azimuth `theta` and elevation `phi` of an arriving path, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAngles {
    pub theta: f64,
    pub phi: f64,
}

impl PathAngles {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }
}

impl Default for PathAngles {
    /// Broadside line-of-sight direction `theta = pi/2, phi = 0`.
    fn default() -> Self {
        Self { theta: PI / 2.0, phi: 0.0 }
    }
}

fn axis_step(count: usize, aperture: f64) -> f64 {
    if count > 1 {
        aperture / (count - 1) as f64
    } else {
        0.0
    }
}

impl PortGrid {
    pub fn line(n: usize, aperture: f64) -> Result<Self> {
        let g = PortGrid::Line { n, aperture };
        g.validate()?;
        Ok(g)
    }

    pub fn plane(n1: usize, n2: usize, aperture1: f64, aperture2: f64) -> Result<Self> {
        let g = PortGrid::Plane { n1, n2, aperture1, aperture2 };
        g.validate()?;
        Ok(g)
    }

    /// Axis counts of 1 are accepted as a degenerate single-port axis.
    pub fn validate(&self) -> Result<()> {
        let (counts, apertures) = match *self {
            PortGrid::Line { n, aperture } => (vec![n], vec![aperture]),
            PortGrid::Plane { n1, n2, aperture1, aperture2 } => (vec![n1, n2], vec![aperture1, aperture2]),
        };
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument("port grid axis with zero ports".into()));
        }
        if apertures.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidArgument("port grid aperture must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// Total number of ports.
    pub fn len(&self) -> usize {
        match *self {
            PortGrid::Line { n, .. } => n,
            PortGrid::Plane { n1, n2, .. } => n1 * n2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index to `(t1, t2)`; a line grid has `t2 = 0`.
    pub fn coords(&self, t: usize) -> (usize, usize) {
        match *self {
            PortGrid::Line { .. } => (t, 0),
            PortGrid::Plane { n1, .. } => (t % n1, t / n1),
        }
    }

    /// `(t1, t2)` to linear index.
    pub fn index(&self, t1: usize, t2: usize) -> usize {
        match *self {
            PortGrid::Line { .. } => t1,
            PortGrid::Plane { n1, .. } => t2 * n1 + t1,
        }
    }

    /// Port position `(x, y)` in wavelengths.
    pub fn position(&self, t: usize) -> (f64, f64) {
        let (t1, t2) = self.coords(t);
        match *self {
            PortGrid::Line { n, aperture } => (t1 as f64 * axis_step(n, aperture), 0.0),
            PortGrid::Plane { n1, n2, aperture1, aperture2 } => (
                t1 as f64 * axis_step(n1, aperture1),
                t2 as f64 * axis_step(n2, aperture2),
            ),
        }
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|t| self.position(t)).collect()
    }
}

/// Path-length difference (in wavelengths) of each port relative to port 0.
fn propagation_offsets(grid: &PortGrid, angles: PathAngles) -> impl Iterator<Item = f64> + '_ {
    let horizontal = angles.theta.sin() * angles.phi.cos();
    let vertical = angles.theta.cos();
    let is_plane = matches!(grid, PortGrid::Plane { .. });
    (0..grid.len()).map(move |t| {
        let (x, y) = grid.position(t);
        if is_plane {
            x * horizontal + y * vertical
        } else {
            x * horizontal
        }
    })
}

/// Array response `[exp(-j 2 pi d(t))]_t`; entry 0 is exactly 1.
pub fn steering_vector(grid: &PortGrid, angles: PathAngles) -> ComplexVector {
    ComplexVector::from_iterator(
        grid.len(),
        propagation_offsets(grid, angles).map(|d| Complex64::from_polar(1.0, -2.0 * PI * d)),
    )
}

/// Accumulate `weight * a(angles)` into `out` without allocating.
pub(crate) fn add_steering(out: &mut [Complex64], grid: &PortGrid, angles: PathAngles, weight: Complex64) {
    for (o, d) in out.iter_mut().zip(propagation_offsets(grid, angles)) {
        *o += weight * Complex64::from_polar(1.0, -2.0 * PI * d);
    }
}

/// Spatial correlation `[Sigma]_{t,v} = variance * J0(2 pi d_{t,v})`, with
/// `d_{t,v}` the Euclidean port separation in wavelengths.
pub fn correlation_matrix(grid: &PortGrid, variance: f64) -> Result<ComplexMatrix> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidArgument(format!("correlation variance {variance}")));
    }
    let n = grid.len();
    let pos = grid.positions();
    let mut s = ComplexMatrix::zeros(n, n);
    for t in 0..n {
        s[(t, t)] = Complex64::new(variance, 0.0);
        for v in 0..t {
            let (dx, dy) = (pos[t].0 - pos[v].0, pos[t].1 - pos[v].1);
            let rho = variance * bessel_j0(2.0 * PI * dx.hypot(dy))?;
            s[(t, v)] = Complex64::new(rho, 0.0);
            s[(v, t)] = Complex64::new(rho, 0.0);
        }
    }
    Ok(s)
}
