//! Run configuration: TOML with a strict schema and a version key.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    KernelIdentities,
    Certify,
    Picard,
    LimitSweep,
    Remark21,
    Rescaled,
    GeneralQ,
    WeakLimit,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::KernelIdentities,
        Experiment::Certify,
        Experiment::Picard,
        Experiment::LimitSweep,
        Experiment::Remark21,
        Experiment::Rescaled,
        Experiment::GeneralQ,
        Experiment::WeakLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::KernelIdentities => "kernel-identities",
            Experiment::Certify => "certify",
            Experiment::Picard => "picard",
            Experiment::LimitSweep => "limit-sweep",
            Experiment::Remark21 => "remark21",
            Experiment::Rescaled => "rescaled",
            Experiment::GeneralQ => "general-q",
            Experiment::WeakLimit => "weak-limit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment `{s}`; expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub box_length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub a: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_list: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Constant,
    ShiftedSine,
    PeriodicWell,
}

/// Potential parameters; which keys apply depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// `constant`: the value of q.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// `shifted-sine`: q = a^2 + 1 + sin(omega x_1), `a` from the kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// `periodic-well`: q = a^2 + amplitude * sum sin^2(pi x_i / period).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    Exp,
    PowerShift,
    Constant,
    Affine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub kind: NonlinearityKind,
    /// `power-shift`: f(u) = (u + 1)^m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// `constant` and `affine`: f(u) = c + lambda u.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub picard: f64,
    pub max_iter: usize,
    pub linear: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            picard: 1e-10,
            max_iter: 500,
            linear: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub override_guards: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub radius: f64,
    pub grid: GridConfig,
    pub kernel: KernelConfig,
    pub potential: PotentialConfig,
    pub nonlinearity: NonlinearityConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        if self.schema != SCHEMA_VERSION {
            return err(format!("unsupported schema {}; this build reads schema {SCHEMA_VERSION}", self.schema));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return err(format!("radius must be positive, got {}", self.radius));
        }
        if !(self.tolerances.picard > 0.0 && self.tolerances.linear > 0.0) {
            return err("tolerances must be positive".into());
        }
        let needs_list = matches!(self.experiment, Experiment::LimitSweep | Experiment::WeakLimit);
        if needs_list && self.kernel.eps_list.is_empty() {
            return err(format!("experiment {} needs kernel.eps_list", self.experiment));
        }
        let p = &self.potential;
        let missing = |what: &str| err(format!("potential kind {:?} needs `{what}`", p.kind));
        match p.kind {
            PotentialKind::Constant if p.value.is_none() => return missing("value"),
            PotentialKind::ShiftedSine if p.omega.is_none() => return missing("omega"),
            PotentialKind::PeriodicWell if p.amplitude.is_none() || p.period.is_none() => {
                return missing("amplitude and period")
            }
            _ => {}
        }
        let f = &self.nonlinearity;
        let missing = |what: &str| err(format!("nonlinearity kind {:?} needs `{what}`", f.kind));
        match f.kind {
            NonlinearityKind::PowerShift if f.m.is_none() => return missing("m"),
            NonlinearityKind::Constant if f.c.is_none() => return missing("c"),
            NonlinearityKind::Affine if f.c.is_none() || f.lambda.is_none() => return missing("c and lambda"),
            _ => {}
        }
        Ok(())
    }

    /// Built-in configuration for each experiment.
    pub fn preset(experiment: Experiment) -> Self {
        let shifted_sine = PotentialConfig {
            kind: PotentialKind::ShiftedSine,
            value: None,
            omega: Some(1.0),
            amplitude: None,
            period: None,
        };
        let exp = NonlinearityConfig {
            kind: NonlinearityKind::Exp,
            m: None,
            c: None,
            lambda: None,
        };
        let mut cfg = RunConfig {
            schema: SCHEMA_VERSION,
            experiment,
            seed: DEFAULT_SEED,
            override_guards: false,
            output_dir: None,
            radius: 1.0,
            grid: GridConfig { box_length: TAU, n: 64 },
            kernel: KernelConfig {
                a: 2.5,
                epsilon: 0.5,
                eps_list: Vec::new(),
            },
            potential: shifted_sine,
            nonlinearity: exp,
            tolerances: Tolerances::default(),
        };
        match experiment {
            Experiment::KernelIdentities => {
                cfg.kernel = KernelConfig {
                    a: 2.0,
                    epsilon: 0.25,
                    eps_list: vec![0.5, 0.25, 0.125],
                };
                cfg.grid.n = 16;
            }
            Experiment::Certify => {
                cfg.grid.n = 16;
            }
            Experiment::Picard => {
                // resolved and periodization-safe: aL/(2 eps) = 20, h = eps/(4a)
                cfg.grid = GridConfig { box_length: 8.0, n: 160 };
                cfg.kernel.epsilon = 0.5;
                cfg.potential = PotentialConfig {
                    kind: PotentialKind::PeriodicWell,
                    value: None,
                    omega: None,
                    amplitude: Some(1.0),
                    period: Some(8.0),
                };
            }
            Experiment::Remark21 => {
                cfg.override_guards = true;
            }
            Experiment::LimitSweep => {
                cfg.override_guards = true;
                cfg.kernel.eps_list = vec![0.4, 0.2, 0.1];
                cfg.tolerances.picard = 1e-12;
            }
            Experiment::Rescaled => {
                // y-grid; at eps = 0 the solution is flat in y, so resolution is moot
                cfg.grid = GridConfig { box_length: 16.0, n: 8 };
                cfg.kernel.epsilon = 0.0;
                cfg.override_guards = true;
            }
            Experiment::GeneralQ => {
                cfg.grid.n = 16;
                cfg.kernel.a = 2.0;
                cfg.override_guards = true;
                cfg.potential = PotentialConfig {
                    kind: PotentialKind::PeriodicWell,
                    value: None,
                    omega: None,
                    amplitude: Some(50.0),
                    period: Some(TAU),
                };
            }
            Experiment::WeakLimit => {
                cfg.override_guards = true;
                cfg.kernel.eps_list = vec![0.4, 0.2, 0.1];
            }
        }
        cfg
    }
}
