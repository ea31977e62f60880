use serde::{Deserialize, Serialize};

use super::{
    build_b_inverse, dominant_gev, effective_ports, hybrid_solution, solve_on, stopping_dimension, CombinerSolution,
    UserLinkProblem,
};
use crate::error::{Error, Result};
use crate::linalg::{quadratic_form_after_drop, ComplexVector, HermitianInverseState};

const TIE_TOLERANCE: f64 = 1e-12;

/// How GEPort evaluates candidate removals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeportMode {
    /// Rank-1 shortcuts on a downdated inverse, `O(N^2)` per removal.
    #[default]
    Fast,
    /// Explicit re-factorisation of every reduced problem.
    Naive,
}

/// Which port GEPort discards at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EliminationRule {
    /// Smallest `|v_i|^2` of the current dominant GEV `v = B^-1 h`.
    #[default]
    Contribution,
    /// Largest remaining eigenvalue `lambda - |v_i|^2 / [B^-1]_ii`.
    SinrLoss,
}

/// Number of ports kept by the FAHM pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PortPolicy {
    Fixed(usize),
    /// `ceil(P_eff)` of the full-aperture GEV.
    Effective,
    /// `ceil(ratio * P_eff)`.
    Ratio(f64),
}

/// Removal order and the dominant eigenvalue after each removal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EliminationTrace {
    pub removed_ports: Vec<usize>,
    /// `sinr_sequence[k]` is the eigenvalue after `k` removals.
    pub sinr_sequence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeportSelection {
    pub ports: Vec<usize>,
    /// `B~^-1 h~` on `ports`.
    pub combiner: ComplexVector,
    pub lambda: f64,
    pub trace: EliminationTrace,
}

/// Position of the best score; near-ties go to the lower position.
fn pick(scores: &[f64], minimize: bool) -> usize {
    let scale = scores.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let tol = TIE_TOLERANCE * scale;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        let better = if minimize { s < scores[best] - tol } else { s > scores[best] + tol };
        if better {
            best = i;
        }
    }
    best
}

/// Backward elimination from all `N` ports down to `target_p`.
pub fn geport_select(
    problem: &UserLinkProblem,
    target_p: usize,
    mode: GeportMode,
    rule: EliminationRule,
) -> Result<GeportSelection> {
    check_target(problem, target_p)?;
    match mode {
        GeportMode::Fast => select_fast(problem, build_b_inverse(problem)?, target_p, rule),
        GeportMode::Naive => select_naive(problem, target_p, rule),
    }
}

fn check_target(problem: &UserLinkProblem, target_p: usize) -> Result<()> {
    if target_p == 0 || target_p > problem.ports() {
        return Err(Error::InvalidArgument(format!("target P = {target_p} outside [1, {}]", problem.ports())));
    }
    Ok(())
}

fn select_fast(
    problem: &UserLinkProblem,
    mut state: HermitianInverseState,
    target_p: usize,
    rule: EliminationRule,
) -> Result<GeportSelection> {
    let (mut v, mut lambda) = dominant_gev(&problem.desired, &state);
    let mut trace = EliminationTrace {
        removed_ports: Vec::with_capacity(problem.ports() - target_p),
        sinr_sequence: vec![lambda],
    };
    while state.dim() > target_p {
        let diag = state.diagonal();
        let pos = match rule {
            EliminationRule::Contribution => {
                let scores: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
                pick(&scores, true)
            }
            EliminationRule::SinrLoss => {
                let scores = (0..state.dim())
                    .map(|i| quadratic_form_after_drop(lambda, v.as_slice(), &diag, i))
                    .collect::<Result<Vec<_>>>()?;
                pick(&scores, false)
            }
        };
        lambda = quadratic_form_after_drop(lambda, v.as_slice(), &diag, pos)?;
        trace.removed_ports.push(state.active()[pos]);
        trace.sinr_sequence.push(lambda);
        state.downdate_position(pos)?;
        v = dominant_gev(&problem.desired, &state).0;
    }
    finish(problem, state.active().to_vec(), trace)
}

fn select_naive(problem: &UserLinkProblem, target_p: usize, rule: EliminationRule) -> Result<GeportSelection> {
    let mut active: Vec<usize> = (0..problem.ports()).collect();
    let (mut v, mut lambda) = solve_on(problem, &active)?;
    let mut trace = EliminationTrace {
        removed_ports: Vec::with_capacity(problem.ports() - target_p),
        sinr_sequence: vec![lambda],
    };
    while active.len() > target_p {
        let pos = match rule {
            EliminationRule::Contribution => {
                let scores: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
                pick(&scores, true)
            }
            EliminationRule::SinrLoss => {
                let mut scores = Vec::with_capacity(active.len());
                for i in 0..active.len() {
                    let mut reduced = active.clone();
                    reduced.remove(i);
                    scores.push(solve_on(problem, &reduced)?.1);
                }
                pick(&scores, false)
            }
        };
        trace.removed_ports.push(active.remove(pos));
        let (next_v, next_lambda) = solve_on(problem, &active)?;
        v = next_v;
        lambda = next_lambda.min(lambda);
        trace.sinr_sequence.push(lambda);
    }
    finish(problem, active, trace)
}

fn finish(problem: &UserLinkProblem, ports: Vec<usize>, trace: EliminationTrace) -> Result<GeportSelection> {
    let (combiner, lambda) = solve_on(problem, &ports)?;
    Ok(GeportSelection { ports, combiner, lambda, trace })
}

/// GEPort selection followed by the two-RF-chain decomposition.
///
/// `P_eff` of the full-aperture GEV is always reported, whatever the policy.
pub fn fahm_geport_receiver(
    problem: &UserLinkProblem,
    policy: PortPolicy,
    mode: GeportMode,
    rule: EliminationRule,
) -> Result<CombinerSolution> {
    let n = problem.ports();
    if let PortPolicy::Fixed(p) = policy {
        check_target(problem, p)?;
    }
    if let PortPolicy::Ratio(r) = policy {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("P / P_eff ratio must be positive, got {r}")));
        }
    }
    if problem.is_degenerate() {
        return Ok(CombinerSolution::degenerate_hybrid());
    }
    let state = build_b_inverse(problem)?;
    let p_eff = effective_ports(&dominant_gev(&problem.desired, &state).0)?;
    let target = match policy {
        PortPolicy::Fixed(p) => p,
        PortPolicy::Effective => stopping_dimension(p_eff, n),
        PortPolicy::Ratio(r) => stopping_dimension(r * p_eff, n),
    };
    let selection = match mode {
        GeportMode::Fast => select_fast(problem, state, target, rule)?,
        GeportMode::Naive => select_naive(problem, target, rule)?,
    };
    let mut solution = hybrid_solution(problem, selection.ports, &selection.combiner, selection.lambda)?;
    solution.effective_ports = Some(p_eff);
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::circular_gaussian;
    use crate::linalg::ComplexMatrix;
    use crate::receiver::tests::random_problem;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RULES: [EliminationRule; 2] = [EliminationRule::Contribution, EliminationRule::SinrLoss];

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn keeping_everything_is_the_full_gev() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = random_problem(&mut rng, 10, 3, 4.0);
        let full = dominant_gev(&p.desired, &build_b_inverse(&p).unwrap()).1;
        for rule in RULES {
            let s = geport_select(&p, 10, GeportMode::Fast, rule).unwrap();
            assert_eq!(s.ports, (0..10).collect::<Vec<_>>());
            assert!(s.trace.removed_ports.is_empty());
            assert!((s.lambda - full).abs() <= 1e-10 * full);
        }
    }

    #[test]
    fn single_user_keeps_strongest_port() {
        let h = ComplexVector::from_vec(vec![c(0.2, 0.1), c(-1.0, 0.5), c(0.0, 0.9), c(0.3, -0.3)]);
        let p = UserLinkProblem::new(h, ComplexMatrix::zeros(4, 0), 5.0).unwrap();
        for rule in RULES {
            for mode in [GeportMode::Fast, GeportMode::Naive] {
                let s = geport_select(&p, 1, mode, rule).unwrap();
                assert_eq!(s.ports, vec![1]);
                assert_eq!(s.trace.removed_ports.len(), 3);
            }
        }
    }

    #[test]
    fn fast_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..40 {
            let n = rng.random_range(8..=24);
            let users = rng.random_range(1..=6);
            let snr = 10f64.powf(rng.random_range(-1.0..2.0));
            let p = random_problem(&mut rng, n, users, snr);
            let target = rng.random_range(2..=8);
            for rule in RULES {
                let fast = geport_select(&p, target, GeportMode::Fast, rule).unwrap();
                let naive = geport_select(&p, target, GeportMode::Naive, rule).unwrap();
                assert_eq!(fast.ports, naive.ports);
                assert_eq!(fast.trace.removed_ports, naive.trace.removed_ports);
                assert!((fast.lambda - naive.lambda).abs() <= 1e-8 * naive.lambda);
                for (a, b) in fast.trace.sinr_sequence.iter().zip(&naive.trace.sinr_sequence) {
                    assert!((a - b).abs() <= 1e-8 * b);
                }
            }
        }
    }

    #[test]
    fn sinr_loss_rule_is_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let p = random_problem(&mut rng, 9, 4, 8.0);
        let s = geport_select(&p, 8, GeportMode::Fast, EliminationRule::SinrLoss).unwrap();
        let best = (0..9)
            .map(|i| {
                let kept: Vec<usize> = (0..9).filter(|&k| k != i).collect();
                solve_on(&p, &kept).unwrap().1
            })
            .fold(0.0, f64::max);
        assert!((s.lambda - best).abs() <= 1e-10 * best);
    }

    #[test]
    fn receiver_examples() {
        let h = ComplexVector::from_vec(vec![c(0.0, 0.0), c(0.6, -0.8), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = UserLinkProblem::new(h, ComplexMatrix::zeros(4, 0), 7.0).unwrap();
        let s = fahm_geport_receiver(&p, PortPolicy::Fixed(1), GeportMode::Fast, EliminationRule::default()).unwrap();
        assert_eq!(s.selected_ports, vec![1]);
        assert!((s.sinr - 7.0).abs() < 1e-12);
        assert_eq!(s.effective_ports, Some(1.0));

        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let p = random_problem(&mut rng, 12, 5, 3.0);
        let full = dominant_gev(&p.desired, &build_b_inverse(&p).unwrap()).1;
        let s = fahm_geport_receiver(&p, PortPolicy::Fixed(12), GeportMode::Fast, EliminationRule::default()).unwrap();
        assert!((s.sinr - full).abs() <= 1e-9 * full);
    }

    #[test]
    fn effective_policy_uses_ceiling() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let p = random_problem(&mut rng, 16, 4, 10.0);
        let s = fahm_geport_receiver(&p, PortPolicy::Effective, GeportMode::Fast, EliminationRule::default()).unwrap();
        let p_eff = s.effective_ports.unwrap();
        assert_eq!(s.num_selected(), stopping_dimension(p_eff, 16));
        let r = fahm_geport_receiver(&p, PortPolicy::Ratio(0.5), GeportMode::Fast, EliminationRule::default()).unwrap();
        assert_eq!(r.num_selected(), stopping_dimension(0.5 * p_eff, 16));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let p = UserLinkProblem::new(ComplexVector::zeros(5), ComplexMatrix::zeros(5, 0), 1.0).unwrap();
        let s = fahm_geport_receiver(&p, PortPolicy::Effective, GeportMode::Fast, EliminationRule::default()).unwrap();
        assert_eq!((s.selected_ports.clone(), s.sinr), (vec![0], 0.0));
        assert!(geport_select(&p, 0, GeportMode::Fast, EliminationRule::default()).is_err());
        assert!(geport_select(&p, 6, GeportMode::Naive, EliminationRule::default()).is_err());
        assert!(fahm_geport_receiver(&p, PortPolicy::Ratio(-1.0), GeportMode::Fast, EliminationRule::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stored_sinr_matches_hybrid_evaluation(seed in 0u64..100_000, target in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 10;
            let h = ComplexMatrix::from_fn(n, 4, |_, _| circular_gaussian(&mut rng));
            let p = UserLinkProblem::from_channel(&h, 2, 6.0).unwrap();
            let s = fahm_geport_receiver(&p, PortPolicy::Fixed(target), GeportMode::Fast, EliminationRule::default()).unwrap();
            prop_assert!(s.analog.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            prop_assert!((s.digital.norm() - 1.0).abs() < 1e-12);
            prop_assert!(s.selected_ports.windows(2).all(|w| w[0] < w[1]));
            let eq12 = p.sinr_of(&s.selected_ports, &s.analog, &s.digital).unwrap();
            prop_assert!((eq12 - s.sinr).abs() <= 1e-9 * s.sinr);
        }

        #[test]
        fn trace_is_non_increasing(seed in 0u64..100_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, 14, 5, 20.0);
            for rule in RULES {
                let s = geport_select(&p, 1, GeportMode::Fast, rule).unwrap();
                prop_assert_eq!(s.trace.sinr_sequence.len(), 14);
                prop_assert!(s.trace.sinr_sequence.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }
}
