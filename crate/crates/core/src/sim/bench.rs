use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SchemeKind};
use super::run::{solve_scheme, Scenario};
use super::stats;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub warmup: usize,
    pub runs: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { warmup: 3, runs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scheme: String,
    pub kind: SchemeKind,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub runs: usize,
    pub mean_selected_ports: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub ports: usize,
    pub users: usize,
    pub warmup: usize,
    pub runs: usize,
    pub rows: Vec<BenchRow>,
    /// Median fast GEPort time over median naive GEPort time.
    pub fast_over_naive: f64,
}

/// Wall-clock time of one complete receiver solve per scheme, on user 0
/// of realization `i` for run `i`. Every scheme sees the same problems;
/// the fast and naive GEPort selections are checked to agree on each run.
pub fn bench_timing(cfg: &ScenarioConfig, opts: BenchOptions) -> Result<BenchReport> {
    if opts.runs == 0 {
        return Err(Error::config("runs", "must be at least 1"));
    }
    let scenario = Scenario::prepare(cfg)?;
    let position = |kind: SchemeKind| scenario.schemes.iter().position(|s| s.kind == kind);
    let fast = position(SchemeKind::FahmGeport)
        .ok_or_else(|| Error::config("scheme", "bench needs a fahm-geport scheme"))?;
    let naive = position(SchemeKind::FahmGeportNaive)
        .ok_or_else(|| Error::config("scheme", "bench needs a fahm-geport-naive scheme"))?;

    let mut seconds = vec![Vec::with_capacity(opts.runs); scenario.schemes.len()];
    let mut selected = vec![Vec::with_capacity(opts.runs); scenario.schemes.len()];
    for run in 0..opts.warmup + opts.runs {
        let mut rng = super::rng::realization_rng(cfg.master_seed, 0, run as u64);
        let set = scenario.sampler.draw(1, cfg.users, &mut rng);
        let h = match &scenario.coupling {
            Some(g) => crate::channel::apply_coupling(&set.per_user[0], g)?,
            None => set.per_user[0].clone(),
        };
        let problem = crate::receiver::UserLinkProblem::from_channel(&h, 0, scenario.snr)?;
        let mut ports = Vec::with_capacity(scenario.schemes.len());
        for (k, scheme) in scenario.schemes.iter().enumerate() {
            let start = Instant::now();
            let sol = solve_scheme(scheme, &problem).map_err(|e| Error::Numerical {
                realization: run,
                scheme: scheme.name.clone(),
                source: Box::new(e),
            })?;
            let elapsed = start.elapsed().as_secs_f64();
            if run >= opts.warmup {
                seconds[k].push(elapsed);
                selected[k].push(sol.num_selected() as f64);
            }
            ports.push(sol.selected_ports);
        }
        if ports[fast] != ports[naive] {
            return Err(Error::Numerical {
                realization: run,
                scheme: scenario.schemes[naive].name.clone(),
                source: Box::new(Error::NumericalDegeneracy(
                    "fast and naive GEPort selected different ports".into(),
                )),
            });
        }
    }
    let rows: Vec<BenchRow> = scenario
        .schemes
        .iter()
        .zip(seconds.iter().zip(&selected))
        .map(|(s, (t, p))| BenchRow {
            scheme: s.name.clone(),
            kind: s.kind,
            median_ms: 1e3 * stats::median(t),
            mean_ms: 1e3 * stats::mean(t),
            min_ms: 1e3 * t.iter().copied().fold(f64::INFINITY, f64::min),
            runs: t.len(),
            mean_selected_ports: stats::mean(p),
        })
        .collect();
    Ok(BenchReport {
        ports: cfg.ports(),
        users: cfg.users,
        warmup: opts.warmup,
        runs: opts.runs,
        fast_over_naive: rows[fast].median_ms / rows[naive].median_ms,
        rows,
    })
}
