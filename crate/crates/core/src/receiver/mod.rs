//! Receiver schemes for one user of a slow-FAMA downlink.
//!
//! Every scheme returns a [`CombinerSolution`]: the selected ports, the
//! equivalent combiner `t = F w` and its hybrid realisation `(F, w)`.
//! Port indices are 0-based throughout.

mod baseline;
mod cuma;
mod geport;
mod hybrid;

pub use baseline::{dc_receiver, per_port_sinr, slow_fama_receiver};
pub use cuma::{cuma_combiner, cuma_partition, cuma_receiver, CumaCombiner, CumaPartition, CUMA_DEFAULT_RHO};
pub use geport::{
    fahm_geport_receiver, geport_select, EliminationRule, EliminationTrace, GeportMode, GeportSelection, PortPolicy,
};
pub use hybrid::hybrid_decompose;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_lower, cholesky_solve, gram_plus_identity, hermitian_inverse, ComplexMatrix, ComplexVector,
    HermitianInverseState,
};
use crate::metrics::{combiner_sinr, sinr_eq12, SinrInputs};

/// Desired channel, interfering channels and SNR seen by one user.
///
/// With precoders `p_u = e_u`, the desired channel is column `u` of `H_u`
/// and the interferers are the remaining columns.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLinkProblem {
    pub desired: ComplexVector,
    pub interference: ComplexMatrix,
    pub snr: f64,
}

impl UserLinkProblem {
    pub fn new(desired: ComplexVector, interference: ComplexMatrix, snr: f64) -> Result<Self> {
        if interference.nrows() != desired.len() && interference.ncols() > 0 {
            return Err(Error::InvalidArgument(format!(
                "desired channel has {} ports, interference {}",
                desired.len(),
                interference.nrows()
            )));
        }
        if desired.is_empty() {
            return Err(Error::InvalidArgument("empty channel".into()));
        }
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::InvalidArgument(format!("snr must be finite and positive, got {snr}")));
        }
        let interference = if interference.ncols() == 0 {
            ComplexMatrix::zeros(desired.len(), 0)
        } else {
            interference
        };
        Ok(Self { desired, interference, snr })
    }

    /// Problem of user `u` given its channel `H_u` (`N x M`).
    pub fn from_channel(h_u: &ComplexMatrix, user: usize, snr: f64) -> Result<Self> {
        if user >= h_u.ncols() {
            return Err(Error::InvalidArgument(format!("user {user} of {}", h_u.ncols())));
        }
        let desired = h_u.column(user).into_owned();
        let interference = h_u.clone().remove_column(user);
        Self::new(desired, interference, snr)
    }

    pub fn ports(&self) -> usize {
        self.desired.len()
    }

    /// `H_u` with the desired stream in column 0.
    pub fn channel_matrix(&self) -> ComplexMatrix {
        let n = self.ports();
        let m = self.interference.ncols() + 1;
        ComplexMatrix::from_fn(n, m, |i, j| if j == 0 { self.desired[i] } else { self.interference[(i, j - 1)] })
    }

    /// `B = sum_j h_j h_j^H + I / snr`.
    pub fn interference_plus_noise(&self) -> ComplexMatrix {
        gram_plus_identity(&self.interference, 1.0 / self.snr)
    }

    /// `B` restricted to `ports` (in the given order).
    pub fn interference_plus_noise_on(&self, ports: &[usize]) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(ports.len(), self.interference.ncols(), |i, j| self.interference[(ports[i], j)]);
        gram_plus_identity(&g, 1.0 / self.snr)
    }

    pub fn desired_on(&self, ports: &[usize]) -> ComplexVector {
        ComplexVector::from_iterator(ports.len(), ports.iter().map(|&p| self.desired[p]))
    }

    pub(crate) fn is_degenerate(&self) -> bool {
        self.desired.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// SINR of `(selection, F, w)` for this problem.
    pub fn sinr_of(&self, selection: &[usize], analog: &ComplexMatrix, digital: &ComplexVector) -> Result<f64> {
        let h = self.channel_matrix();
        sinr_eq12(&SinrInputs {
            selection,
            analog,
            digital,
            channel: &h,
            user: 0,
            snr: self.snr,
        })
    }

    /// SINR of an equivalent combiner `t` on `selection`.
    pub fn sinr_of_combiner(&self, selection: &[usize], t: &[Complex64]) -> f64 {
        combiner_sinr(t, selection, &self.channel_matrix(), 0, self.snr)
    }
}

/// Selected ports and hybrid combiner produced by a receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerSolution {
    /// Strictly increasing port indices.
    pub selected_ports: Vec<usize>,
    /// Equivalent combiner `t = F w` on the selected ports.
    #[serde(skip)]
    pub combiner: ComplexVector,
    #[serde(skip)]
    pub analog: ComplexMatrix,
    #[serde(skip)]
    pub digital: ComplexVector,
    pub sinr: f64,
    /// Effective number of ports of the full-aperture GEV, when computed.
    pub effective_ports: Option<f64>,
    /// False when the analog entries are not restricted to unit modulus (CUMA).
    pub unit_modulus: bool,
    /// Set when the scheme fell back to a single port.
    pub fallback: bool,
}

impl CombinerSolution {
    pub(crate) fn single_port(port: usize, sinr: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            selected_ports: vec![port],
            combiner: ComplexVector::from_element(1, one),
            analog: ComplexMatrix::from_element(1, 1, one),
            digital: ComplexVector::from_element(1, one),
            sinr,
            effective_ports: None,
            unit_modulus: true,
            fallback: false,
        }
    }

    /// Hybrid solution for a zero desired channel: port 0, SINR 0.
    pub(crate) fn degenerate_hybrid() -> Self {
        let t = ComplexVector::from_element(1, Complex64::new(1.0, 0.0));
        let (analog, digital) = hybrid_decompose(&t).expect("nonzero combiner");
        let combiner = &analog * &digital;
        Self {
            selected_ports: vec![0],
            combiner,
            analog,
            digital,
            sinr: 0.0,
            effective_ports: None,
            unit_modulus: true,
            fallback: true,
        }
    }

    pub fn num_selected(&self) -> usize {
        self.selected_ports.len()
    }

    pub fn rf_chains(&self) -> usize {
        self.digital.len()
    }
}

/// `t = B~^-1 h~` and `lambda = h~^H t` on `ports`, by a fresh Cholesky solve.
pub(crate) fn solve_on(problem: &UserLinkProblem, ports: &[usize]) -> Result<(ComplexVector, f64)> {
    let l = cholesky_lower(&problem.interference_plus_noise_on(ports))?;
    let h = problem.desired_on(ports);
    let t = cholesky_solve(&l, &h);
    let lambda = h.dotc(&t).re.max(0.0);
    Ok((t, lambda))
}

/// Hybrid (`L = 2`) solution for the combiner `t` on `ports`.
pub(crate) fn hybrid_solution(
    problem: &UserLinkProblem,
    ports: Vec<usize>,
    t: &ComplexVector,
    lambda: f64,
) -> Result<CombinerSolution> {
    if problem.is_degenerate() {
        return Ok(CombinerSolution::degenerate_hybrid());
    }
    let (analog, digital) = hybrid_decompose(t)?;
    let combiner = &analog * &digital;
    Ok(CombinerSolution {
        selected_ports: ports,
        combiner,
        analog,
        digital,
        sinr: lambda,
        effective_ports: None,
        unit_modulus: true,
        fallback: false,
    })
}

/// Inverse of `B = sum_{j != u} h_j h_j^H + I / snr` over all ports.
pub fn build_b_inverse(problem: &UserLinkProblem) -> Result<HermitianInverseState> {
    hermitian_inverse(&problem.interference_plus_noise())
}

/// Dominant generalized eigenpair of `(h h^H, B)` over the active ports.
///
/// `v = B^-1 h` and `lambda = h^H B^-1 h`, the largest generalized
/// Rayleigh quotient `|w^H h|^2 / (w^H B w)`.
pub fn dominant_gev(h: &ComplexVector, state: &HermitianInverseState) -> (ComplexVector, f64) {
    let restricted = ComplexVector::from_iterator(state.dim(), state.active().iter().map(|&p| h[p]));
    let v = state.inverse() * &restricted;
    let lambda = restricted.dotc(&v).re.max(0.0);
    (v, lambda)
}

/// Inverse participation ratio `1 / sum |v_i|^4` of the unit-norm `v`.
pub fn effective_ports(v: &ComplexVector) -> Result<f64> {
    let energy: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::InvalidArgument("effective ports of a zero vector".into()));
    }
    let fourth: f64 = v.iter().map(|z| (z.norm_sqr() / energy).powi(2)).sum();
    Ok((1.0 / fourth).clamp(1.0, v.len() as f64))
}

/// `ceil(p_eff)` clamped to `[1, n]`. Values within `1e-9` relative of an
/// integer are snapped first so that exact integers survive rounding noise.
pub fn stopping_dimension(p_eff: f64, n: usize) -> usize {
    let nearest = p_eff.round();
    let snapped = if (p_eff - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        p_eff.ceil()
    };
    (snapped.max(1.0) as usize).clamp(1, n.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_problem(rng: &mut ChaCha8Rng, n: usize, users: usize, snr: f64) -> UserLinkProblem {
        let mut r = || crate::channel::circular_gaussian(rng);
        let h = ComplexMatrix::from_fn(n, users, |_, _| r());
        UserLinkProblem::from_channel(&h, 0, snr).unwrap()
    }

    #[test]
    fn b_inverse_examples() {
        let h = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.5, 0.5), c(0.0, 1.0)]);
        let p = UserLinkProblem::new(h, ComplexMatrix::zeros(3, 0), 10.0).unwrap();
        let s = build_b_inverse(&p).unwrap();
        assert!((s.inverse() - ComplexMatrix::identity(3, 3) * c(10.0, 0.0)).norm() < 1e-12);

        let g = ComplexMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let p = UserLinkProblem::new(ComplexVector::from_element(2, c(1.0, 0.0)), g, 1.0).unwrap();
        let s = build_b_inverse(&p).unwrap();
        let expect = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(0.5, 0.0), c(1.0, 0.0)]));
        assert!((s.inverse() - expect).norm() < 1e-14);
    }

    #[test]
    fn b_inverse_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = random_problem(&mut rng, 10, 4, 5.0);
        let s = build_b_inverse(&p).unwrap();
        let resid = (p.interference_plus_noise() * s.inverse() - ComplexMatrix::identity(10, 10)).norm();
        assert!(resid < 1e-9);
    }

    #[test]
    fn gev_identity_b_and_scaling() {
        let h = ComplexVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.0)]);
        let s = hermitian_inverse(&ComplexMatrix::identity(2, 2)).unwrap();
        let (v, lambda) = dominant_gev(&h, &s);
        assert_eq!(v, h);
        assert!((lambda - h.norm_squared()).abs() < 1e-15);
        let (v2, lambda2) = dominant_gev(&(&h * c(2.0, 0.0)), &s);
        assert!((lambda2 - 4.0 * lambda).abs() < 1e-12);
        assert!((v2.normalize() - v.normalize()).norm() < 1e-12);
    }

    #[test]
    fn effective_port_examples() {
        let e1 = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(effective_ports(&e1).unwrap(), 1.0);
        let uniform = ComplexVector::from_element(4, c(0.3, -0.1));
        assert!((effective_ports(&uniform).unwrap() - 4.0).abs() < 1e-12);
        let half = 0.5f64.sqrt();
        let split = ComplexVector::from_vec(vec![c(half, 0.0), c(half, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((effective_ports(&split).unwrap() - 2.0).abs() < 1e-12);
        assert!(effective_ports(&ComplexVector::zeros(3)).is_err());
    }

    #[test]
    fn stopping_dimension_examples() {
        assert_eq!(stopping_dimension(1.0, 10), 1);
        assert_eq!(stopping_dimension(84.2, 225), 85);
        assert_eq!(stopping_dimension(4.000_000_000_01, 10), 4);
        assert_eq!(stopping_dimension(12.5, 10), 10);
    }

    proptest! {
        #[test]
        fn effective_ports_bounds_and_invariance(
            seed in 0u64..10_000, n in 1usize..40, re in 0.01f64..10.0, phase in 0.0f64..6.3,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = ComplexVector::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>()));
            let p = effective_ports(&v).unwrap();
            prop_assert!((1.0..=n as f64).contains(&p));
            let rotated = &v * Complex64::from_polar(re, phase);
            prop_assert!((effective_ports(&rotated).unwrap() - p).abs() <= 1e-12 * p);
        }

        #[test]
        fn gev_invariant_under_port_reordering(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, 7, 3, 2.0);
            let (_, lambda) = dominant_gev(&p.desired, &build_b_inverse(&p).unwrap());
            let perm = [3usize, 6, 0, 2, 5, 1, 4];
            let hp = p.desired_on(&perm);
            let gp = ComplexMatrix::from_fn(7, 2, |i, j| p.interference[(perm[i], j)]);
            let q = UserLinkProblem::new(hp, gp, 2.0).unwrap();
            let (_, lambda_p) = dominant_gev(&q.desired, &build_b_inverse(&q).unwrap());
            prop_assert!((lambda - lambda_p).abs() <= 1e-10 * lambda);
        }
    }
}
