use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::run::Scenario;
use super::stats::{self, CompensatedSum};
use crate::error::{Error, Result};
use crate::receiver::{build_b_inverse, dominant_gev, effective_ports, geport_select};

/// Dominant eigenvalue against the number of removed ports, averaged over
/// users and realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElbowCurve {
    pub scheme: String,
    /// `mean_lambda[k]` after `k` removals, `k = 0..N-1`.
    pub mean_lambda: Vec<f64>,
    pub mean_lambda_db: Vec<f64>,
    pub mean_peff: f64,
    pub median_peff: f64,
    pub mean_ceil_peff: f64,
    pub traces: usize,
}

impl ElbowCurve {
    pub fn is_non_increasing(&self) -> bool {
        self.mean_lambda.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Full GEPort elimination (down to one port) with the first fahm-geport
/// scheme of `cfg`; its port policy is ignored.
pub fn elbow_curve(cfg: &ScenarioConfig) -> Result<ElbowCurve> {
    let scenario = Scenario::prepare(cfg)?;
    let scheme = scenario
        .schemes
        .iter()
        .find(|s| s.kind.is_geport())
        .ok_or_else(|| Error::config("scheme", "elbow needs a fahm-geport scheme"))?
        .clone();
    let n = cfg.ports();
    let per_realization = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, Vec<f64>)> {
            let set = scenario.channels(0, r)?;
            let mut sums = vec![0.0; n];
            let mut peffs = Vec::with_capacity(cfg.users);
            for u in 0..cfg.users {
                let problem = scenario.problem(&set, u)?;
                let wrap = |e: Error| Error::Numerical {
                    realization: r,
                    scheme: scheme.name.clone(),
                    source: Box::new(e),
                };
                let v = dominant_gev(&problem.desired, &build_b_inverse(&problem).map_err(wrap)?).0;
                peffs.push(effective_ports(&v).map_err(wrap)?);
                let sel = geport_select(&problem, 1, scheme.mode(), scheme.rule).map_err(wrap)?;
                for (s, l) in sums.iter_mut().zip(&sel.trace.sinr_sequence) {
                    *s += l;
                }
            }
            Ok((sums, peffs))
        })
        .collect::<Result<Vec<_>>>()?;

    let traces = cfg.realizations * cfg.users;
    let mut totals = vec![CompensatedSum::default(); n];
    let mut peffs = Vec::with_capacity(traces);
    for (sums, p) in per_realization {
        for (t, s) in totals.iter_mut().zip(sums) {
            t.add(s);
        }
        peffs.extend(p);
    }
    let mut mean_lambda: Vec<f64> = totals.iter().map(|t| t.value() / traces as f64).collect();
    // Averaging per-trace non-increasing sequences cannot increase; clear
    // any last-bit rounding residue so the guarantee holds exactly.
    for k in 1..mean_lambda.len() {
        mean_lambda[k] = mean_lambda[k].min(mean_lambda[k - 1]);
    }
    let ceil: Vec<f64> = peffs.iter().map(|p| p.ceil()).collect();
    Ok(ElbowCurve {
        scheme: scheme.name,
        mean_lambda_db: mean_lambda.iter().map(|l| 10.0 * l.log10()).collect(),
        mean_lambda,
        mean_peff: stats::mean(&peffs),
        median_peff: stats::median(&peffs),
        mean_ceil_peff: stats::mean(&ceil),
        traces,
    })
}
