use std::cmp::Ordering;

use super::{hybrid_solution, solve_on, CombinerSolution, UserLinkProblem};
use crate::error::{Error, Result};

/// Single-port SINR `|h_p|^2 / (sum_j |H[p, j]|^2 + 1 / snr)` of every port.
pub fn per_port_sinr(problem: &UserLinkProblem) -> Vec<f64> {
    let noise = 1.0 / problem.snr;
    (0..problem.ports())
        .map(|p| {
            let interference: f64 = problem.interference.row(p).iter().map(|z| z.norm_sqr()).sum();
            problem.desired[p].norm_sqr() / (interference + noise)
        })
        .collect()
}

/// Ports sorted by decreasing single-port SINR, ties by lower index.
fn ranked_ports(problem: &UserLinkProblem) -> Vec<usize> {
    let sinr = per_port_sinr(problem);
    let mut order: Vec<usize> = (0..sinr.len()).collect();
    order.sort_by(|&a, &b| sinr[b].partial_cmp(&sinr[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order
}

/// Best single port with one RF chain.
pub fn slow_fama_receiver(problem: &UserLinkProblem) -> CombinerSolution {
    let sinr = per_port_sinr(problem);
    let mut best = 0;
    for (p, &s) in sinr.iter().enumerate() {
        if s > sinr[best] {
            best = p;
        }
    }
    CombinerSolution::single_port(best, sinr[best])
}

/// Select-then-combine: the `P` best single ports, then the optimal combiner
/// on that set realised with two RF chains.
pub fn dc_receiver(problem: &UserLinkProblem, p: usize) -> Result<CombinerSolution> {
    if p == 0 || p > problem.ports() {
        return Err(Error::InvalidArgument(format!("P = {p} outside [1, {}]", problem.ports())));
    }
    if problem.is_degenerate() {
        return Ok(CombinerSolution::degenerate_hybrid());
    }
    let mut ports: Vec<usize> = ranked_ports(problem).into_iter().take(p).collect();
    ports.sort_unstable();
    let (t, lambda) = solve_on(problem, &ports)?;
    hybrid_solution(problem, ports, &t, lambda)
}
