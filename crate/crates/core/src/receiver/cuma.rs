use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{slow_fama_receiver, CombinerSolution, UserLinkProblem};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

pub const CUMA_DEFAULT_RHO: f64 = 0.4;

/// Membership test for the in-phase and quadrature port sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CumaPartition {
    /// Component dominance plus a threshold on the component signed like
    /// the strongest one, so that aggregated ports add coherently.
    #[default]
    SignConsistent,
    /// Component dominance plus a threshold on the component magnitude.
    Magnitude,
}

/// CUMA as a structured FAHM instance with four analog outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CumaCombiner {
    pub in_phase: Vec<usize>,
    pub quadrature: Vec<usize>,
    /// Union of both sets, increasing.
    pub selected_ports: Vec<usize>,
    /// `P x 4`; in-phase rows use columns 0-1, quadrature rows columns 2-3.
    pub analog: ComplexMatrix,
    /// `w` with `w^H = [1, j] M^+`, before normalisation.
    pub raw_digital: ComplexVector,
}

fn component_set(
    values: &[f64],
    dominant: impl Fn(usize) -> bool,
    rho: f64,
    n_max: usize,
    partition: CumaPartition,
) -> Vec<usize> {
    let mut peak = 0;
    for (p, v) in values.iter().enumerate() {
        if v.abs() > values[peak].abs() {
            peak = p;
        }
    }
    let threshold = rho * values[peak].abs();
    let sign = if values[peak] < 0.0 { -1.0 } else { 1.0 };
    let mut set: Vec<usize> = (0..values.len())
        .filter(|&p| dominant(p))
        .filter(|&p| match partition {
            CumaPartition::SignConsistent => sign * values[p] >= threshold,
            CumaPartition::Magnitude => values[p].abs() >= threshold,
        })
        .collect();
    set.sort_by(|&a, &b| values[b].abs().partial_cmp(&values[a].abs()).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    set.truncate(n_max);
    set.sort_unstable();
    set
}

/// In-phase and quadrature port sets, each capped at `n_max` ports.
pub fn cuma_partition(
    h: &ComplexVector,
    rho: f64,
    n_max: usize,
    partition: CumaPartition,
) -> (Vec<usize>, Vec<usize>) {
    let re: Vec<f64> = h.iter().map(|z| z.re).collect();
    let im: Vec<f64> = h.iter().map(|z| z.im).collect();
    let in_phase = component_set(&re, |p| re[p].abs() >= im[p].abs(), rho, n_max, partition);
    let quadrature = component_set(&im, |p| im[p].abs() > re[p].abs(), rho, n_max, partition);
    (in_phase, quadrature)
}

/// Analog network and digital recovery vector of CUMA for channel `h`.
///
/// The analog phases come from the channel itself, `phi_p = arg(h_p)`.
pub fn cuma_combiner(h: &ComplexVector, rho: f64, n_max: usize, partition: CumaPartition) -> Result<CumaCombiner> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho must lie in [0, 1], got {rho}")));
    }
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 2, got {n_max}")));
    }
    let (in_phase, quadrature) = cuma_partition(h, rho, n_max, partition);
    let mut selected_ports: Vec<usize> = in_phase.iter().chain(&quadrature).copied().collect();
    selected_ports.sort_unstable();

    let sum = |set: &[usize]| set.iter().map(|&p| h[p]).sum::<Complex64>();
    let (c_i, c_q) = (sum(&in_phase), sum(&quadrature));
    // M = [[a, -b], [b, a], [c, -d], [d, c]] has orthogonal columns of equal
    // norm, so its pseudo-inverse is M^T / (a^2 + b^2 + c^2 + d^2).
    let gain = c_i.norm_sqr() + c_q.norm_sqr();
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::DegenerateSelection(format!(
            "in-phase set of {} and quadrature set of {} ports aggregate to zero",
            in_phase.len(),
            quadrature.len()
        )));
    }
    let m = [[c_i.re, -c_i.im], [c_i.im, c_i.re], [c_q.re, -c_q.im], [c_q.im, c_q.re]];
    let raw_digital = ComplexVector::from_fn(4, |k, _| Complex64::new(m[k][0], m[k][1]).conj() / gain);

    let mut analog = ComplexMatrix::zeros(selected_ports.len(), 4);
    for (row, &p) in selected_ports.iter().enumerate() {
        let phi = h[p].arg();
        let phase = Complex64::from_polar(1.0, phi);
        let col = if in_phase.binary_search(&p).is_ok() { 0 } else { 2 };
        analog[(row, col)] = phase * phi.cos();
        analog[(row, col + 1)] = phase * phi.sin();
    }
    Ok(CumaCombiner { in_phase, quadrature, selected_ports, analog, raw_digital })
}

/// CUMA receiver; falls back to the best single port when both sets
/// aggregate to nothing.
pub fn cuma_receiver(
    problem: &UserLinkProblem,
    rho: f64,
    n_max: usize,
    partition: CumaPartition,
) -> Result<CombinerSolution> {
    let cuma = match cuma_combiner(&problem.desired, rho, n_max, partition) {
        Ok(c) => c,
        Err(Error::DegenerateSelection(_)) => {
            let mut fallback = slow_fama_receiver(problem);
            fallback.fallback = true;
            return Ok(fallback);
        }
        Err(e) => return Err(e),
    };
    let digital = cuma.raw_digital.normalize();
    let combiner = &cuma.analog * &digital;
    let sinr = problem.sinr_of(&cuma.selected_ports, &cuma.analog, &digital)?;
    Ok(CombinerSolution {
        selected_ports: cuma.selected_ports,
        combiner,
        analog: cuma.analog,
        digital,
        sinr,
        effective_ports: None,
        unit_modulus: false,
        fallback: false,
    })
}
