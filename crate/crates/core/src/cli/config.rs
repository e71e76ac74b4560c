//! TOML run configuration files.
//!
//! ```toml
//! [domain]
//! width = 1.0
//! height = 1.0
//! dx = 0.025
//!
//! [material]
//! model = "nh"
//! nu = 0.2
//! mu = 1.0
//! rho0 = 1.0
//!
//! [numerics]
//! tau = 0.55
//! t_max = 2.2
//! snapshot_every = 10
//!
//! [boundaries.top]
//! kind = "neumann"
//! schedule = "sin2_ramp"
//! alpha = 0.35
//! direction = [0.0, 1.0]
//! ```
//!
//! All four edges must be present under `[boundaries]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boundary::Extrapolation;
use crate::constitutive::{Material, Model};
use crate::d2q9::{BcKind, Edge};
use crate::error::{Error, Result};
use crate::loading::{Load, Schedule};
use crate::solver::{EdgeCondition, EdgeConditions, RunConfig, SourceTiming};

const SECTIONS: [&str; 4] = ["domain", "material", "numerics", "boundaries"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    domain: Domain,
    material: MaterialSection,
    numerics: Numerics,
    boundaries: Boundaries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Domain {
    width: f64,
    height: f64,
    dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    model: Model,
    nu: f64,
    mu: f64,
    rho0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Numerics {
    tau: f64,
    t_max: f64,
    snapshot_every: usize,
    #[serde(default)]
    source_timing: SourceTiming,
    #[serde(default)]
    boundary_extrapolation: Extrapolation,
    #[serde(default)]
    body_force: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Boundaries {
    left: EdgeSpec,
    right: EdgeSpec,
    bottom: EdgeSpec,
    top: EdgeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScheduleName {
    Zero,
    Constant,
    Sin2Ramp,
    SinePulse,
    Ricker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    kind: BcKind,
    #[serde(default = "zero_schedule")]
    schedule: ScheduleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    direction: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    until: Option<f64>,
}

fn zero_schedule() -> ScheduleName {
    ScheduleName::Zero
}

impl EdgeSpec {
    fn from_condition(c: &EdgeCondition) -> Self {
        let (schedule, alpha, s, t0) = match c.load.schedule {
            Schedule::Zero => (ScheduleName::Zero, None, None, None),
            Schedule::Constant { alpha } => (ScheduleName::Constant, Some(alpha), None, None),
            Schedule::Sin2Ramp { alpha } => (ScheduleName::Sin2Ramp, Some(alpha), None, None),
            Schedule::SinePulse { alpha } => (ScheduleName::SinePulse, Some(alpha), None, None),
            Schedule::Ricker { alpha, s, t0 } => {
                (ScheduleName::Ricker, Some(alpha), Some(s), Some(t0))
            }
        };
        EdgeSpec {
            kind: c.kind,
            schedule,
            alpha,
            s,
            t0,
            direction: (schedule != ScheduleName::Zero).then_some(c.load.direction),
            until: c.load.until,
        }
    }

    fn to_condition(&self, edge: Edge) -> std::result::Result<EdgeCondition, String> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| format!("{edge} edge: schedule {:?} requires '{key}'", self.schedule))
        };
        let forbid = |present: bool, key: &str| {
            if present {
                Err(format!(
                    "{edge} edge: '{key}' is not used by schedule {:?}",
                    self.schedule
                ))
            } else {
                Ok(())
            }
        };
        let schedule = match self.schedule {
            ScheduleName::Zero => {
                forbid(self.alpha.is_some(), "alpha")?;
                Schedule::Zero
            }
            ScheduleName::Constant => Schedule::Constant {
                alpha: need(self.alpha, "alpha")?,
            },
            ScheduleName::Sin2Ramp => Schedule::Sin2Ramp {
                alpha: need(self.alpha, "alpha")?,
            },
            ScheduleName::SinePulse => Schedule::SinePulse {
                alpha: need(self.alpha, "alpha")?,
            },
            ScheduleName::Ricker => Schedule::Ricker {
                alpha: need(self.alpha, "alpha")?,
                s: need(self.s, "s")?,
                t0: need(self.t0, "t0")?,
            },
        };
        if self.schedule != ScheduleName::Ricker {
            forbid(self.s.is_some(), "s")?;
            forbid(self.t0.is_some(), "t0")?;
        }
        let direction = match (self.schedule, self.direction) {
            (ScheduleName::Zero, _) => self.direction.unwrap_or([0.0, 0.0]),
            (_, Some(d)) => d,
            (_, None) => return Err(format!("{edge} edge: a loaded edge requires 'direction'")),
        };
        let mut load = Load::new(schedule, direction);
        if let Some(t_end) = self.until {
            load = load.until(t_end);
        }
        Ok(EdgeCondition {
            kind: self.kind,
            load,
        })
    }
}

/// 1-based line of the first line of `text` that satisfies `pred`.
fn find_line(text: &str, pred: impl Fn(&str) -> bool) -> Option<usize> {
    text.lines().position(|l| pred(l.trim())).map(|i| i + 1)
}

fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let start = find_line(text, |l| l == header)?;
    text.lines()
        .enumerate()
        .skip(start)
        .take_while(|(_, l)| !l.trim_start().starts_with('['))
        .find(|(_, l)| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|(i, _)| i + 1)
        .or(Some(start))
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses configuration text into a validated run configuration.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
        line: e.span().map(|s| line_of_offset(text, s.start)),
        message: e.message().to_string(),
    })?;
    let missing: Vec<&str> = SECTIONS
        .iter()
        .copied()
        .filter(|s| !table.contains_key(*s))
        .collect();
    if !missing.is_empty() {
        return Err(Error::config(format!(
            "missing section(s): {}",
            missing
                .iter()
                .map(|s| format!("[{s}]"))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of_offset(text, s.start)),
        message: e.message().to_string(),
    })?;

    let material = Material::from_poisson(
        file.material.model,
        file.material.nu,
        file.material.mu,
        file.material.rho0,
    )
    .map_err(|e| Error::Config {
        line: key_line(text, "material", "nu"),
        message: e.to_string(),
    })?;
    let mut boundaries = EdgeConditions::all(EdgeCondition::free());
    let specs = [
        (Edge::Left, &file.boundaries.left),
        (Edge::Right, &file.boundaries.right),
        (Edge::Bottom, &file.boundaries.bottom),
        (Edge::Top, &file.boundaries.top),
    ];
    for (edge, spec) in specs {
        *boundaries.get_mut(edge) = spec.to_condition(edge).map_err(|message| Error::Config {
            line: find_line(text, |l| l == format!("[boundaries.{}]", edge.name())),
            message,
        })?;
    }
    let config = RunConfig {
        width: file.domain.width,
        height: file.domain.height,
        dx: file.domain.dx,
        material,
        tau: file.numerics.tau,
        t_max: file.numerics.t_max,
        snapshot_every: file.numerics.snapshot_every,
        body_force: file.numerics.body_force,
        boundaries,
        source_timing: file.numerics.source_timing,
        extrapolation: file.numerics.boundary_extrapolation,
    };
    config.validate().map_err(|e| {
        let line = match e {
            Error::CflViolation { .. } => key_line(text, "material", "nu"),
            Error::UnstableRelaxation { .. } => key_line(text, "numerics", "tau"),
            Error::NonCommensurate { .. } => key_line(text, "domain", "dx"),
            _ => None,
        };
        Error::Config {
            line,
            message: e.to_string(),
        }
    })?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Renders a run configuration in the file format read by [`parse_config`].
pub fn print_config(config: &RunConfig) -> String {
    let b = &config.boundaries;
    let file = ConfigFile {
        domain: Domain {
            width: config.width,
            height: config.height,
            dx: config.dx,
        },
        material: MaterialSection {
            model: config.material.model,
            nu: config.material.nu(),
            mu: config.material.mu,
            rho0: config.material.rho0,
        },
        numerics: Numerics {
            tau: config.tau,
            t_max: config.t_max,
            snapshot_every: config.snapshot_every,
            source_timing: config.source_timing,
            boundary_extrapolation: config.extrapolation,
            body_force: config.body_force,
        },
        boundaries: Boundaries {
            left: EdgeSpec::from_condition(&b.left),
            right: EdgeSpec::from_condition(&b.right),
            bottom: EdgeSpec::from_condition(&b.bottom),
            top: EdgeSpec::from_condition(&b.top),
        },
    };
    toml::to_string(&file).expect("config serializes to TOML")
}
