use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{ChannelConfig, PortsSetting, ScenarioConfig};
use super::run::{run_samples, summarize, MetricsSummary};
use crate::error::{Error, Result};

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "riceK_dB")]
    RiceKDb,
    #[serde(rename = "numPaths")]
    NumPaths,
    #[serde(rename = "users")]
    Users,
    #[serde(rename = "selectedP")]
    SelectedP,
    #[serde(rename = "snr_dB")]
    SnrDb,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "pOverPeffRatio")]
    POverPeffRatio,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::RiceKDb,
        SweepAxis::NumPaths,
        SweepAxis::Users,
        SweepAxis::SelectedP,
        SweepAxis::SnrDb,
        SweepAxis::Gamma,
        SweepAxis::POverPeffRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::RiceKDb => "riceK_dB",
            SweepAxis::NumPaths => "numPaths",
            SweepAxis::Users => "users",
            SweepAxis::SelectedP => "selectedP",
            SweepAxis::SnrDb => "snr_dB",
            SweepAxis::Gamma => "gamma",
            SweepAxis::POverPeffRatio => "pOverPeffRatio",
        }
    }

    /// Axes that alter the channel law get their own random streams per
    /// value; the others reuse the same channels at every value.
    pub fn changes_channel(self) -> bool {
        matches!(self, SweepAxis::RiceKDb | SweepAxis::NumPaths | SweepAxis::Users)
    }

    /// Copy of `cfg` with this axis set to `value`, validated.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let field = self.as_str();
        if !value.is_finite() {
            return Err(Error::config(field, format!("non-finite axis value {value}")));
        }
        let count = || -> Result<usize> {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::config(field, format!("expected a positive integer, got {value}")));
            }
            Ok(value as usize)
        };
        let mut out = cfg.clone();
        match self {
            SweepAxis::RiceKDb | SweepAxis::NumPaths => {
                let ChannelConfig::Geometric { rice_k_db, num_paths, .. } = &mut out.channel else {
                    return Err(Error::config(field, "requires the geometric channel model"));
                };
                match self {
                    SweepAxis::RiceKDb => *rice_k_db = value,
                    _ => *num_paths = count()?,
                }
            }
            SweepAxis::Users => {
                out.users = count()?;
                out.bs_antennas = out.bs_antennas.map(|_| out.users);
            }
            SweepAxis::SelectedP => {
                let p = count()?;
                let mut touched = false;
                for s in &mut out.schemes {
                    if let Some(PortsSetting::Count(_)) = s.ports {
                        s.ports = Some(PortsSetting::Count(p));
                        touched = true;
                    }
                }
                if !touched {
                    return Err(Error::config(field, "no scheme has a fixed port count"));
                }
            }
            SweepAxis::SnrDb => out.snr_db = value,
            SweepAxis::Gamma => {
                if value < 0.0 {
                    return Err(Error::config(field, format!("threshold must be >= 0, got {value}")));
                }
                out.gamma = vec![value];
            }
            SweepAxis::POverPeffRatio => {
                let mut touched = false;
                for s in out.schemes.iter_mut().filter(|s| s.kind.takes_port_count()) {
                    s.ports = Some(PortsSetting::Keyword("effective".into()));
                    s.ratio = Some(value);
                    touched = true;
                }
                if !touched {
                    return Err(Error::config(field, "no dc or fahm-geport scheme to apply the ratio to"));
                }
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.as_str()).collect();
            Error::config("axis", format!("unknown axis `{s}`; expected one of {}", names.join(", ")))
        })
    }
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::config("values", msg);
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", t.trim())));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if !(step > 0.0) || !step.is_finite() || !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(bad(format!("range `{spec}` needs finite start <= stop and step > 0")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(bad(format!("range `{spec}` has too many points")));
            }
            (0..count).map(|k| start + k as f64 * step).collect()
        }
        [list] => list.split(',').map(number).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad(format!("expected start:step:stop or a comma list, got `{spec}`"))),
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: MetricsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn without_timing(mut self) -> Self {
        for p in &mut self.points {
            p.summary = p.summary.clone().without_timing();
        }
        self
    }
}

/// One summary per axis value, in the given order.
pub fn sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    cfg.validate()?;
    if values.is_empty() {
        return Err(Error::config("values", "no values"));
    }
    let configs = values.iter().map(|&v| axis.apply(cfg, v)).collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(values.len());
    if axis == SweepAxis::Gamma {
        let samples = run_samples(cfg, 0)?;
        for &value in values {
            points.push(SweepPoint { value, summary: summarize(&samples, &[value])? });
        }
    } else {
        for (k, (c, &value)) in configs.iter().zip(values).enumerate() {
            let fold = if axis.changes_channel() { k as u64 + 1 } else { 0 };
            let samples = run_samples(c, fold)?;
            points.push(SweepPoint { value, summary: summarize(&samples, &c.gamma)? });
        }
    }
    Ok(SweepTable { axis, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_specs() {
        assert_eq!(parse_values("0:5:30").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]);
        assert_eq!(parse_values("1,2.5, 4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_values("0:0.1:0.3").unwrap().len(), 4);
        assert_eq!(parse_values("7").unwrap(), vec![7.0]);
        for bad in ["", "1:0:3", "3:1:1", "a,b", "1:2", "1:2:3:4"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn axis_names_round_trip() {
        for a in SweepAxis::ALL {
            assert_eq!(a.as_str().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("bogus".parse::<SweepAxis>().unwrap_err().is_config());
    }
}
