use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{GeometricChannelParams, PathAngles, PortGrid};
use crate::error::{Error, Result};
use crate::receiver::{CumaPartition, EliminationRule, GeportMode, PortPolicy, CUMA_DEFAULT_RHO};

/// Receiver scheme identifiers as written in configs and outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    SlowFama,
    Dc,
    Cuma,
    FahmGeport,
    FahmGeportNaive,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::SlowFama => "slow-fama",
            SchemeKind::Dc => "dc",
            SchemeKind::Cuma => "cuma",
            SchemeKind::FahmGeport => "fahm-geport",
            SchemeKind::FahmGeportNaive => "fahm-geport-naive",
        }
    }

    pub fn is_geport(self) -> bool {
        matches!(self, SchemeKind::FahmGeport | SchemeKind::FahmGeportNaive)
    }

    /// Schemes whose port count can follow `P_eff`.
    pub fn takes_port_count(self) -> bool {
        self.is_geport() || self == SchemeKind::Dc
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `ports = 4` or `ports = "effective"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PortsSetting {
    Count(usize),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Output name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ports: Option<PortsSetting>,
    /// Keep `ceil(ratio * P_eff)` ports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub rule: EliminationRule,
    #[serde(default)]
    pub partition: CumaPartition,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            label: None,
            ports: None,
            ratio: None,
            rho: None,
            n_max: None,
            rule: EliminationRule::default(),
            partition: CumaPartition::default(),
        }
    }

    pub fn with_ports(mut self, p: usize) -> Self {
        self.ports = Some(PortsSetting::Count(p));
        self
    }

    pub fn effective(mut self) -> Self {
        self.ports = Some(PortsSetting::Keyword("effective".into()));
        self
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(self.kind.as_str())
    }
}

fn default_los_theta() -> f64 {
    FRAC_PI_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelConfig {
    /// Bessel-correlated Rayleigh fading.
    Rayleigh,
    Geometric {
        #[serde(rename = "rice_k_dB")]
        rice_k_db: f64,
        num_paths: usize,
        /// Line-of-sight azimuth and elevation, radians.
        #[serde(default = "default_los_theta")]
        los_theta: f64,
        #[serde(default)]
        los_phi: f64,
    },
}

impl ChannelConfig {
    pub fn geometric_params(&self) -> Option<GeometricChannelParams> {
        match *self {
            ChannelConfig::Rayleigh => None,
            ChannelConfig::Geometric { rice_k_db, num_paths, los_theta, los_phi } => {
                let mut p = GeometricChannelParams::from_db(rice_k_db, num_paths);
                p.los = PathAngles::new(los_theta, los_phi);
                Some(p)
            }
        }
    }
}

/// One Monte Carlo scenario. `users` is both `U` and the BS antenna count `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub realizations: usize,
    pub master_seed: u64,
    pub users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_antennas: Option<usize>,
    #[serde(rename = "snr_dB")]
    pub snr_db: f64,
    /// Outage thresholds in bits/s/Hz.
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_file: Option<PathBuf>,
    pub grid: PortGrid,
    pub channel: ChannelConfig,
    #[serde(rename = "scheme")]
    pub schemes: Vec<SchemeConfig>,
}

/// A validated scheme with its parameters filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScheme {
    pub name: String,
    pub kind: SchemeKind,
    pub policy: Option<PortPolicy>,
    pub rho: f64,
    pub n_max: usize,
    pub rule: EliminationRule,
    pub partition: CumaPartition,
}

impl ResolvedScheme {
    pub fn mode(&self) -> GeportMode {
        if self.kind == SchemeKind::FahmGeportNaive {
            GeportMode::Naive
        } else {
            GeportMode::Fast
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let field = match e.span() {
                Some(span) => format!("line {}", text[..span.start].lines().count().max(1)),
                None => "<document>".to_string(),
            };
            Error::config(field, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. A relative `coupling_file` is
    /// resolved against the config's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.coupling_file, path.parent()) {
            if file.is_relative() {
                cfg.coupling_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn ports(&self) -> usize {
        self.grid.len()
    }

    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if self.users == 0 {
            return Err(Error::config("users", "must be at least 1"));
        }
        if let Some(m) = self.bs_antennas {
            if m != self.users {
                return Err(Error::config(
                    "bs_antennas",
                    format!("must equal users ({}), got {m}", self.users),
                ));
            }
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_dB", "must be finite"));
        }
        if let Some(g) = self.gamma.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(Error::config("gamma", format!("thresholds must be finite and >= 0, got {g}")));
        }
        self.grid.validate().map_err(|e| Error::config("grid", e.to_string()))?;
        if let ChannelConfig::Geometric { rice_k_db, .. } = self.channel {
            if rice_k_db.is_nan() {
                return Err(Error::config("channel.rice_k_dB", "must be a number"));
            }
        }
        if let Some(p) = self.channel.geometric_params() {
            p.validate().map_err(|e| Error::config("channel", e.to_string()))?;
        }
        if self.schemes.is_empty() {
            return Err(Error::config("scheme", "at least one [[scheme]] is required"));
        }
        let mut names: Vec<&str> = Vec::new();
        for (i, s) in self.schemes.iter().enumerate() {
            self.resolve_scheme(i, s)?;
            if names.contains(&s.name()) {
                return Err(Error::config(
                    format!("scheme[{i}].label"),
                    format!("duplicate scheme name `{}`; set distinct labels", s.name()),
                ));
            }
            names.push(s.name());
        }
        Ok(())
    }

    pub fn resolved_schemes(&self) -> Result<Vec<ResolvedScheme>> {
        self.schemes.iter().enumerate().map(|(i, s)| self.resolve_scheme(i, s)).collect()
    }

    fn resolve_scheme(&self, i: usize, s: &SchemeConfig) -> Result<ResolvedScheme> {
        let n = self.ports();
        let field = |name: &str| format!("scheme[{i}].{name}");
        let policy = match (&s.ports, s.ratio) {
            (_, Some(r)) if !(r > 0.0) || !r.is_finite() => {
                return Err(Error::config(field("ratio"), format!("must be positive, got {r}")));
            }
            (Some(PortsSetting::Count(_)), Some(_)) => {
                return Err(Error::config(field("ratio"), "cannot be combined with a fixed port count"));
            }
            (Some(PortsSetting::Count(p)), None) => {
                if *p == 0 || *p > n {
                    return Err(Error::config(field("ports"), format!("P = {p} outside [1, N = {n}]")));
                }
                Some(PortPolicy::Fixed(*p))
            }
            (Some(PortsSetting::Keyword(k)), ratio) => {
                if k != "effective" {
                    return Err(Error::config(field("ports"), format!("expected an integer or \"effective\", got \"{k}\"")));
                }
                Some(ratio.map_or(PortPolicy::Effective, PortPolicy::Ratio))
            }
            (None, Some(r)) => Some(PortPolicy::Ratio(r)),
            (None, None) => None,
        };
        let policy = match s.kind {
            SchemeKind::SlowFama | SchemeKind::Cuma => {
                if policy.is_some() {
                    return Err(Error::config(field("ports"), format!("not used by {}", s.kind)));
                }
                None
            }
            SchemeKind::Dc | SchemeKind::FahmGeport | SchemeKind::FahmGeportNaive => match policy {
                Some(p) => Some(p),
                None => return Err(Error::config(field("ports"), format!("required for {}", s.kind))),
            },
        };
        if s.kind != SchemeKind::Cuma && (s.rho.is_some() || s.n_max.is_some()) {
            return Err(Error::config(field("rho"), format!("rho and n_max only apply to cuma, not {}", s.kind)));
        }
        let rho = s.rho.unwrap_or(CUMA_DEFAULT_RHO);
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::config(field("rho"), format!("must lie in [0, 1], got {rho}")));
        }
        let n_max = s.n_max.unwrap_or(n);
        if n_max < 2 {
            return Err(Error::config(field("n_max"), format!("must be at least 2, got {n_max}")));
        }
        if s.label.as_deref().is_some_and(|l| l.is_empty() || l.contains([',', '"', '\n'])) {
            return Err(Error::config(field("label"), "must be non-empty without commas, quotes or newlines"));
        }
        Ok(ResolvedScheme {
            name: s.name().to_string(),
            kind: s.kind,
            policy,
            rho,
            n_max,
            rule: s.rule,
            partition: s.partition,
        })
    }
}
