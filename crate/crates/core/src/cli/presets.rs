//! Benchmark setups: uniaxial tension, simple shear, bending wave, and a
//! uniformly loaded patch.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::Extrapolation;
use crate::constitutive::{Material, Model};
use crate::error::{Error, Result};
use crate::loading::{Load, Schedule};
use crate::solver::{EdgeCondition, EdgeConditions, RunConfig, SourceTiming};

pub const DEFAULT_DX: f64 = 0.025;
pub const DEFAULT_TAU: f64 = 0.55;
pub const DEFAULT_NU: f64 = 0.2;
pub const RICKER_ALPHA: f64 = 0.15;
pub const RICKER_S: f64 = 0.215;
pub const RICKER_T0: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Tension,
    Shear,
    Wave,
    Patch,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Tension, Preset::Shear, Preset::Wave, Preset::Patch];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Tension => "tension",
            Preset::Shear => "shear",
            Preset::Wave => "wave",
            Preset::Patch => "patch",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Parameters that may be changed on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub dx: Option<f64>,
    pub tau: Option<f64>,
    pub model: Option<Model>,
    pub t_max: Option<f64>,
    /// Replaces the model-dependent load amplitude.
    pub alpha: Option<f64>,
}

impl Overrides {
    /// Applies the overrides to an existing configuration, such as one read
    /// from a file. The load amplitude is left alone.
    pub fn apply(&self, config: &mut RunConfig) -> Result<()> {
        let m = config.material;
        if self.nu.is_some() || self.model.is_some() {
            config.material = Material::from_poisson(
                self.model.unwrap_or(m.model),
                self.nu.unwrap_or_else(|| m.nu()),
                m.mu,
                m.rho0,
            )?;
        }
        config.dx = self.dx.unwrap_or(config.dx);
        config.tau = self.tau.unwrap_or(config.tau);
        config.t_max = self.t_max.unwrap_or(config.t_max);
        config.validate()?;
        Ok(())
    }
}

/// Traction amplitude of the tension benchmark.
pub fn tension_alpha(model: Model) -> f64 {
    match model {
        Model::NeoHooke => 0.35,
        Model::Svk | Model::LinearElastic => 0.175,
    }
}

/// Momentum amplitude of the shear benchmark.
pub fn shear_alpha(model: Model) -> f64 {
    match model {
        Model::NeoHooke => 0.1,
        Model::Svk | Model::LinearElastic => 0.03,
    }
}

pub fn preset(name: Preset, overrides: &Overrides) -> Result<RunConfig> {
    let model = overrides.model.unwrap_or(Model::NeoHooke);
    let nu = overrides.nu.unwrap_or(DEFAULT_NU);
    let material = Material::from_poisson(model, nu, 1.0, 1.0)?;
    let (width, t_max, boundaries) = match name {
        Preset::Tension => {
            let alpha = overrides.alpha.unwrap_or_else(|| tension_alpha(model));
            let pull = |dir| EdgeCondition::neumann(Load::new(Schedule::Sin2Ramp { alpha }, dir));
            let mut b = EdgeConditions::all(EdgeCondition::free());
            b.top = pull([0.0, 1.0]);
            b.bottom = pull([0.0, -1.0]);
            (1.0, 2.2, b)
        }
        Preset::Shear => {
            let alpha = overrides.alpha.unwrap_or_else(|| shear_alpha(model));
            let mut b = EdgeConditions::all(EdgeCondition::free());
            b.bottom = EdgeCondition::clamped();
            b.top = EdgeCondition::dirichlet(Load::new(Schedule::SinePulse { alpha }, [1.0, 0.0]));
            (1.0, 2.2, b)
        }
        Preset::Wave => {
            let alpha = overrides.alpha.unwrap_or(RICKER_ALPHA);
            let ricker = Schedule::Ricker {
                alpha,
                s: RICKER_S,
                t0: RICKER_T0,
            };
            let mut b = EdgeConditions::all(EdgeCondition::free());
            b.left = EdgeCondition::clamped();
            b.right = EdgeCondition::neumann(Load::new(ricker, [0.0, 1.0]).until(2.0));
            (4.0, 12.0, b)
        }
        Preset::Patch => {
            let alpha = overrides.alpha.unwrap_or(0.05);
            let pull = |dir| EdgeCondition::neumann(Load::new(Schedule::Sin2Ramp { alpha }, dir));
            let b = EdgeConditions {
                left: pull([-1.0, 0.0]),
                right: pull([1.0, 0.0]),
                bottom: pull([0.0, -1.0]),
                top: pull([0.0, 1.0]),
            };
            (1.0, 10.0, b)
        }
    };
    let config = RunConfig {
        width,
        height: 1.0,
        dx: overrides.dx.unwrap_or(DEFAULT_DX),
        material,
        tau: overrides.tau.unwrap_or(DEFAULT_TAU),
        t_max: overrides.t_max.unwrap_or(t_max),
        snapshot_every: 10,
        body_force: [0.0, 0.0],
        boundaries,
        source_timing: SourceTiming::Lagged,
        extrapolation: Extrapolation::Linear,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d2q9::BcKind;

    #[test]
    fn overrides_apply_to_existing_config() {
        let mut c = preset(Preset::Shear, &Overrides::default()).unwrap();
        let o = Overrides {
            model: Some(Model::Svk),
            dx: Some(0.05),
            t_max: Some(1.0),
            ..Default::default()
        };
        o.apply(&mut c).unwrap();
        assert_eq!(c.material.model, Model::Svk);
        assert!((c.material.nu() - 0.2).abs() < 1e-12);
        assert_eq!((c.dx, c.t_max, c.tau), (0.05, 1.0, 0.55));
        let bad = Overrides {
            nu: Some(0.48),
            ..Default::default()
        };
        assert!(matches!(bad.apply(&mut c), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn wave_matches_setup() {
        let c = preset(Preset::Wave, &Overrides::default()).unwrap();
        assert_eq!((c.width, c.height, c.dx, c.tau), (4.0, 1.0, 0.025, 0.55));
        assert_eq!(c.material.model, Model::NeoHooke);
        assert!((c.material.nu() - 0.2).abs() < 1e-15);
        assert_eq!(c.material.rho0, 1.0);
        assert_eq!(c.boundaries.left, EdgeCondition::clamped());
        assert_eq!(c.boundaries.top, EdgeCondition::free());
        assert_eq!(c.boundaries.bottom, EdgeCondition::free());
        let right = c.boundaries.right;
        assert_eq!(right.kind, BcKind::Neumann);
        assert_eq!(
            right.load.schedule,
            Schedule::Ricker {
                alpha: 0.15,
                s: 0.215,
                t0: 1.0
            }
        );
        assert_eq!(right.load.direction, [0.0, 1.0]);
        assert_eq!(right.load.until, Some(2.0));
        let g = c.grid().unwrap();
        assert_eq!((g.nx(), g.ny()), (161, 41));
    }

    #[test]
    fn tension_amplitudes_follow_model() {
        let svk = preset(
            Preset::Tension,
            &Overrides {
                model: Some(Model::Svk),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            svk.boundaries.top.load.schedule,
            Schedule::Sin2Ramp { alpha: 0.175 }
        );
        assert_eq!(svk.boundaries.bottom.load.direction, [0.0, -1.0]);
        assert_eq!(svk.boundaries.left, EdgeCondition::free());
        let nh = preset(Preset::Tension, &Overrides::default()).unwrap();
        assert_eq!(
            nh.boundaries.top.load.schedule,
            Schedule::Sin2Ramp { alpha: 0.35 }
        );
        assert_eq!(nh.t_max, 2.2);
    }

    #[test]
    fn shear_setup() {
        let c = preset(Preset::Shear, &Overrides::default()).unwrap();
        assert_eq!(c.boundaries.bottom, EdgeCondition::clamped());
        assert_eq!(c.boundaries.top.kind, BcKind::Dirichlet);
        assert_eq!(
            c.boundaries.top.load.schedule,
            Schedule::SinePulse { alpha: 0.1 }
        );
        assert_eq!(c.boundaries.left, EdgeCondition::free());
        let c = preset(
            Preset::Shear,
            &Overrides {
                model: Some(Model::Svk),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            c.boundaries.top.load.schedule,
            Schedule::SinePulse { alpha: 0.03 }
        );
    }

    #[test]
    fn overrides_apply() {
        let c = preset(
            Preset::Tension,
            &Overrides {
                dx: Some(0.05),
                tau: Some(0.57),
                t_max: Some(1.0),
                nu: Some(0.1),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((c.dx, c.tau, c.t_max), (0.05, 0.57, 1.0));
        assert!((c.material.nu() - 0.1).abs() < 1e-15);
        assert_eq!(c.grid().unwrap().len(), 21 * 21);
        assert!(matches!(
            preset(
                Preset::Tension,
                &Overrides {
                    nu: Some(0.48),
                    ..Default::default()
                }
            ),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let err = "cantilever".parse::<Preset>().unwrap_err();
        let msg = err.to_string();
        for p in Preset::ALL {
            assert!(msg.contains(p.name()));
        }
        assert_eq!("Wave".parse::<Preset>().unwrap(), Preset::Wave);
    }
}
