use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ResolvedScheme, ScenarioConfig, SchemeKind};
use super::rng::realization_rng;
use super::stats;
use crate::channel::{read_coupling_file, ChannelSampler, ChannelSet, GeometricSampler, RayleighSampler};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{outage_estimate, spectral_efficiency, OutageEstimate};
use crate::receiver::{
    build_b_inverse, cuma_receiver, dc_receiver, dominant_gev, effective_ports, fahm_geport_receiver,
    slow_fama_receiver, stopping_dimension, CombinerSolution, PortPolicy, UserLinkProblem,
};

/// Read-only state shared by all realizations of one scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub schemes: Vec<ResolvedScheme>,
    pub sampler: ChannelSampler,
    pub coupling: Option<ComplexMatrix>,
    pub snr: f64,
}

impl Scenario {
    pub fn prepare(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let sampler = match config.channel.geometric_params() {
            None => ChannelSampler::Rayleigh(RayleighSampler::new(&config.grid)?),
            Some(p) => ChannelSampler::Geometric(GeometricSampler::new(&config.grid, p)?),
        };
        let coupling = match &config.coupling_file {
            None => None,
            Some(path) => {
                let g = read_coupling_file(path).map_err(|e| Error::config("coupling_file", e.to_string()))?;
                if g.nrows() != config.ports() {
                    return Err(Error::config(
                        "coupling_file",
                        format!("matrix is {0}x{0}, grid has {1} ports", g.nrows(), config.ports()),
                    ));
                }
                Some(g)
            }
        };
        Ok(Self {
            schemes: config.resolved_schemes()?,
            snr: config.snr_linear(),
            config: config.clone(),
            sampler,
            coupling,
        })
    }

    /// Channels of realization `r`; user `u` sees `per_user[u]`.
    pub fn channels(&self, fold: u64, r: usize) -> Result<ChannelSet> {
        let mut rng = realization_rng(self.config.master_seed, fold, r as u64);
        let users = self.config.users;
        let mut set = self.sampler.draw(users, users, &mut rng);
        if let Some(g) = &self.coupling {
            set.apply_coupling(g)?;
        }
        Ok(set)
    }

    pub fn problem(&self, set: &ChannelSet, user: usize) -> Result<UserLinkProblem> {
        UserLinkProblem::from_channel(&set.per_user[user], user, self.snr)
    }
}

/// Solves one user's problem with a configured scheme.
pub fn solve_scheme(scheme: &ResolvedScheme, problem: &UserLinkProblem) -> Result<CombinerSolution> {
    match scheme.kind {
        SchemeKind::SlowFama => Ok(slow_fama_receiver(problem)),
        SchemeKind::Dc => match scheme.policy.expect("validated") {
            PortPolicy::Fixed(p) => dc_receiver(problem, p),
            policy => {
                if problem.is_degenerate() {
                    return dc_receiver(problem, 1);
                }
                let v = dominant_gev(&problem.desired, &build_b_inverse(problem)?).0;
                let p_eff = effective_ports(&v)?;
                let ratio = if let PortPolicy::Ratio(r) = policy { r } else { 1.0 };
                let mut sol = dc_receiver(problem, stopping_dimension(ratio * p_eff, problem.ports()))?;
                sol.effective_ports = Some(p_eff);
                Ok(sol)
            }
        },
        SchemeKind::Cuma => cuma_receiver(problem, scheme.rho, scheme.n_max, scheme.partition),
        SchemeKind::FahmGeport | SchemeKind::FahmGeportNaive => fahm_geport_receiver(
            problem,
            scheme.policy.expect("validated"),
            scheme.mode(),
            scheme.rule,
        ),
    }
}

/// Raw per-solve outputs of one scheme, realization-major (`r * U + u`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemeSamples {
    pub name: String,
    pub kind: Option<SchemeKind>,
    pub user_se: Vec<f64>,
    pub sum_se: Vec<f64>,
    pub effective_ports: Vec<f64>,
    pub selected_ports: Vec<usize>,
    pub fallbacks: usize,
    pub solve_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSamples {
    pub realizations: usize,
    pub users: usize,
    pub ports: usize,
    pub snr_db: f64,
    pub schemes: Vec<SchemeSamples>,
}

struct SchemeOutcome {
    se: Vec<f64>,
    effective_ports: Vec<f64>,
    selected: Vec<usize>,
    fallbacks: usize,
    seconds: Vec<f64>,
}

fn realization(scenario: &Scenario, fold: u64, r: usize) -> Result<Vec<SchemeOutcome>> {
    let set = scenario.channels(fold, r)?;
    let users = scenario.config.users;
    let mut out: Vec<SchemeOutcome> = scenario
        .schemes
        .iter()
        .map(|_| SchemeOutcome {
            se: Vec::with_capacity(users),
            effective_ports: Vec::new(),
            selected: Vec::with_capacity(users),
            fallbacks: 0,
            seconds: Vec::with_capacity(users),
        })
        .collect();
    for u in 0..users {
        let problem = scenario.problem(&set, u)?;
        for (scheme, o) in scenario.schemes.iter().zip(out.iter_mut()) {
            let wrap = |e: Error| Error::Numerical {
                realization: r,
                scheme: scheme.name.clone(),
                source: Box::new(e),
            };
            let start = Instant::now();
            let sol = solve_scheme(scheme, &problem).map_err(wrap)?;
            o.seconds.push(start.elapsed().as_secs_f64());
            if !sol.sinr.is_finite() {
                return Err(wrap(Error::NumericalDegeneracy(format!("user {u}: non-finite SINR {}", sol.sinr))));
            }
            o.se.push(spectral_efficiency(sol.sinr).map_err(wrap)?);
            o.selected.push(sol.num_selected());
            o.fallbacks += usize::from(sol.fallback);
            if let Some(p) = sol.effective_ports {
                o.effective_ports.push(p);
            }
        }
    }
    Ok(out)
}

/// Runs every realization, in parallel on the current rayon pool, and
/// gathers the results in realization order.
pub fn run_samples(cfg: &ScenarioConfig, fold: u64) -> Result<ScenarioSamples> {
    let scenario = Scenario::prepare(cfg)?;
    let outcomes = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| realization(&scenario, fold, r))
        .collect::<Result<Vec<_>>>()?;
    let mut schemes: Vec<SchemeSamples> = scenario
        .schemes
        .iter()
        .map(|s| SchemeSamples {
            name: s.name.clone(),
            kind: Some(s.kind),
            ..Default::default()
        })
        .collect();
    for per_scheme in outcomes {
        for (acc, o) in schemes.iter_mut().zip(per_scheme) {
            acc.sum_se.push(stats::sum(o.se.iter().copied()));
            acc.user_se.extend(o.se);
            acc.effective_ports.extend(o.effective_ports);
            acc.selected_ports.extend(o.selected);
            acc.fallbacks += o.fallbacks;
            acc.solve_seconds.extend(o.seconds);
        }
    }
    Ok(ScenarioSamples {
        realizations: cfg.realizations,
        users: cfg.users,
        ports: cfg.ports(),
        snr_db: cfg.snr_db,
        schemes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: String,
    pub kind: SchemeKind,
    /// Mean SE over users and realizations.
    pub user_mean_se: f64,
    /// Mean over realizations of the sum of user SEs.
    pub sum_se: f64,
    /// Standard error of `user_mean_se`, from per-realization user means.
    pub se_stderr: f64,
    pub sum_se_stderr: f64,
    pub outage: Vec<OutageEstimate>,
    pub mean_peff: Option<f64>,
    pub median_peff: Option<f64>,
    pub mean_ceil_peff: Option<f64>,
    pub mean_selected_ports: f64,
    pub fallbacks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub realizations: usize,
    pub users: usize,
    pub ports: usize,
    #[serde(rename = "snr_dB")]
    pub snr_db: f64,
    pub schemes: Vec<SchemeSummary>,
}

impl MetricsSummary {
    /// Drops wall-clock figures, leaving only seed-determined values.
    pub fn without_timing(mut self) -> Self {
        for s in &mut self.schemes {
            s.timing = None;
        }
        self
    }

    pub fn scheme(&self, name: &str) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == name)
    }
}

fn summarize_scheme(s: &SchemeSamples, users: usize, gammas: &[f64]) -> Result<SchemeSummary> {
    let per_realization: Vec<f64> = s.sum_se.iter().map(|x| x / users as f64).collect();
    let outage = gammas.iter().map(|&g| outage_estimate(g, &s.user_se)).collect::<Result<Vec<_>>>()?;
    let peff = (!s.effective_ports.is_empty()).then_some(&s.effective_ports);
    let ceil: Option<Vec<f64>> = peff.map(|p| p.iter().map(|x| x.ceil()).collect());
    let selected: Vec<f64> = s.selected_ports.iter().map(|&p| p as f64).collect();
    Ok(SchemeSummary {
        scheme: s.name.clone(),
        kind: s.kind.expect("scheme kind"),
        user_mean_se: stats::mean(&s.user_se),
        sum_se: stats::mean(&s.sum_se),
        se_stderr: stats::standard_error(&per_realization),
        sum_se_stderr: stats::standard_error(&s.sum_se),
        outage,
        mean_peff: peff.map(|p| stats::mean(p)),
        median_peff: peff.map(|p| stats::median(p)),
        mean_ceil_peff: ceil.map(|c| stats::mean(&c)),
        mean_selected_ports: stats::mean(&selected),
        fallbacks: s.fallbacks,
        timing: (!s.solve_seconds.is_empty()).then(|| TimingStats {
            mean_ms: 1e3 * stats::mean(&s.solve_seconds),
            median_ms: 1e3 * stats::median(&s.solve_seconds),
            solves: s.solve_seconds.len(),
        }),
    })
}

/// Aggregates raw samples; outage is estimated at each of `gammas`.
pub fn summarize(samples: &ScenarioSamples, gammas: &[f64]) -> Result<MetricsSummary> {
    Ok(MetricsSummary {
        realizations: samples.realizations,
        users: samples.users,
        ports: samples.ports,
        snr_db: samples.snr_db,
        schemes: samples
            .schemes
            .iter()
            .map(|s| summarize_scheme(s, samples.users, gammas))
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Monte Carlo evaluation of every configured scheme.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<MetricsSummary> {
    summarize(&run_samples(cfg, 0)?, &cfg.gamma)
}
