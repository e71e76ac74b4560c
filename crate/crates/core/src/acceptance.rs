//! Acceptance checks for the solver, shared by the `acceptance` test target
//! and the `validate` subcommand.

use std::fmt;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cli::{preset, Overrides, Preset};
use crate::collision::{compute_moments, equilibrium, Moments};
use crate::constitutive::{Material, Model, Tensor2};
use crate::d2q9::LatticeScheme;
use crate::error::Result;
use crate::fdops::Vec2;
use crate::loading::{ricker, Load};
use crate::solver::{RunConfig, Simulation};
use crate::validation::{
    convergence_study, displacement_at, grid_error, stability_run, tension_oracle, time_average,
    OracleState,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} {verdict} {}: {} [{:.1} s",
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )?;
        match self.budget {
            Some(b) => write!(f, " of {} s]", b.as_secs()),
            None => write!(f, "]"),
        }
    }
}

/// Times `check` and folds runtime budget and internal errors into the verdict.
fn measure(
    id: u8,
    title: &'static str,
    budget: Option<u64>,
    check: impl FnOnce() -> Result<(bool, String)>,
) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let (passed, mut detail) = match result {
        Ok((passed, detail)) => (passed && in_time, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if !in_time {
        detail.push_str(", over time budget");
    }
    Outcome {
        id,
        title,
        passed,
        detail,
        elapsed,
        budget,
    }
}

pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
pub const QUIESCENT_TOLERANCE: f64 = 1e-12;
pub const SMALL_STRAIN_TOLERANCE: f64 = 1e-3;
pub const ORACLE_REL_TOLERANCE: f64 = 0.05;
pub const MIN_ORDER_E2: f64 = 1.7;
pub const MIN_ORDER_EINF: f64 = 0.8;
pub const PATCH_TOLERANCE: f64 = 1e-2;
pub const FIXTURE_TOLERANCE: f64 = 1e-12;

pub fn moment_round_trip() -> Outcome {
    measure(1, "moment round-trip", Some(1), || {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let scheme = LatticeScheme::new(rng.gen_range(0.2..2.0))?;
            let mut v = || rng.gen_range(-1.0..1.0);
            let (a, b, c) = (v(), v(), v());
            let m = Moments {
                r: v(),
                j: Vec2::new(v(), v()),
                pi: Tensor2::new(a, b, b, c),
            };
            let back = compute_moments(&equilibrium(&m, &scheme), Vec2::zeros(), 1.0, &scheme);
            let err = (back.r - m.r)
                .abs()
                .max((back.j - m.j).amax())
                .max((back.pi - m.pi).amax());
            worst = worst.max(err);
        }
        Ok((
            worst <= ROUND_TRIP_TOLERANCE,
            format!("max abs error {worst:.2e} over 1000 samples (tol {ROUND_TRIP_TOLERANCE:e})"),
        ))
    })
}

pub fn quiescent_fixed_point() -> Outcome {
    measure(2, "quiescent fixed point", Some(10), || {
        let mut config = preset(Preset::Tension, &Overrides::default())?;
        for edge in crate::d2q9::Edge::ALL {
            config.boundaries.get_mut(edge).load = Load::zero();
        }
        let mut sim = Simulation::new(config)?;
        for _ in 0..1000 {
            sim.step()?;
        }
        let vmax = |v: &[Vec2]| v.iter().map(|x| x.amax()).fold(0.0, f64::max);
        let tmax = |v: &[Tensor2]| v.iter().map(|x| x.amax()).fold(0.0, f64::max);
        let worst = [
            vmax(sim.displacement()),
            vmax(sim.momentum()),
            vmax(sim.source()),
            tmax(sim.displacement_gradient()),
            tmax(sim.stress()),
            sim.r().iter().map(|r| r.abs()).fold(0.0, f64::max),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok((
            worst <= QUIESCENT_TOLERANCE,
            format!(
                "max field magnitude {worst:.2e} after 1000 steps on {}x{} (tol {QUIESCENT_TOLERANCE:e})",
                sim.grid().nx(),
                sim.grid().ny()
            ),
        ))
    })
}

pub fn small_strain_agreement() -> Outcome {
    measure(3, "SVK/LE small-strain agreement", Some(60), || {
        let config = |model| {
            preset(
                Preset::Tension,
                &Overrides {
                    model: Some(model),
                    nu: Some(0.25),
                    alpha: Some(1e-3),
                    ..Default::default()
                },
            )
        };
        let svk = displacement_at(&config(Model::Svk)?, 2.2)?;
        let le = displacement_at(&config(Model::LinearElastic)?, 2.2)?;
        let report = grid_error(&svk, &le)?;
        Ok((
            report.e2 <= SMALL_STRAIN_TOLERANCE,
            format!(
                "E2 {:.2e} at t = 2.2 (tol {SMALL_STRAIN_TOLERANCE:e})",
                report.e2
            ),
        ))
    })
}

pub fn homogeneous_oracle() -> Outcome {
    measure(4, "neo-Hooke tension oracle", Some(300), || {
        let config = preset(
            Preset::Tension,
            &Overrides {
                t_max: Some(8.0),
                ..Default::default()
            },
        )?;
        let alpha = crate::cli::presets::tension_alpha(Model::NeoHooke);
        let grid = config.grid()?;
        let row =
            |iy: usize| -> Vec<usize> { (0..grid.nx()).map(|ix| grid.index(ix, iy)).collect() };
        let (top, bottom) = (row(grid.ny() - 1), row(0));
        let mean_y = |sim: &Simulation, nodes: &[usize]| {
            nodes.iter().map(|&n| sim.displacement()[n].y).sum::<f64>() / nodes.len() as f64
        };
        // Half the opening removes rigid drift of the free body.
        let measured = time_average(&config, 3.0, 8.0, |sim| {
            0.5 * (mean_y(sim, &top) - mean_y(sim, &bottom))
        })?;
        let oracle = tension_oracle(&config.material, alpha);
        let OracleState::Tension { stretch } = oracle.state else {
            unreachable!("tension oracle returns a stretch state")
        };
        let predicted = 0.5 * config.height * (stretch[1] - 1.0);
        let rel = ((measured - predicted) / predicted).abs();
        Ok((
            oracle.converged && rel <= ORACLE_REL_TOLERANCE,
            format!(
                "edge displacement {measured:.5} vs oracle {predicted:.5}, rel error {rel:.2e} (tol {ORACLE_REL_TOLERANCE})"
            ),
        ))
    })
}

pub fn convergence_orders() -> Outcome {
    measure(5, "convergence orders", Some(900), || {
        let mut passed = true;
        let mut parts = Vec::new();
        for p in [Preset::Tension, Preset::Shear] {
            for model in [Model::Svk, Model::NeoHooke] {
                let base = preset(
                    p,
                    &Overrides {
                        model: Some(model),
                        ..Default::default()
                    },
                )?;
                let study = convergence_study(&base, &[0.05, 0.025, 0.0125], 2.2)?;
                passed &= study.order_e2 >= MIN_ORDER_E2 && study.order_einf >= MIN_ORDER_EINF;
                parts.push(format!(
                    "{p}/{} E2 {:.2} Einf {:.2}",
                    model.tag(),
                    study.order_e2,
                    study.order_einf
                ));
            }
        }
        Ok((
            passed,
            format!(
                "{} (min {MIN_ORDER_E2}, {MIN_ORDER_EINF})",
                parts.join(", ")
            ),
        ))
    })
}

/// Windows in which the boundary momentum must peak after reflections.
pub const REFLECTION_WINDOWS: [(f64, f64); 2] = [(4.0, 6.0), (8.0, 10.0)];
const PEAK_SMOOTHING: f64 = 0.5;
const PEAK_PROMINENCE: f64 = 0.1;

pub fn dynamic_stability() -> Outcome {
    match preset(Preset::Wave, &Overrides::default()) {
        Ok(config) => dynamic_stability_with(&config),
        Err(e) => measure(6, "wave dynamic stability", Some(600), || Err(e)),
    }
}

pub fn dynamic_stability_with(config: &RunConfig) -> Outcome {
    measure(6, "wave dynamic stability", Some(600), || {
        let report = stability_run(config)?;
        if let Some(failure) = &report.failure {
            return Ok((
                false,
                format!(
                    "stopped at t = {:.3} of {}: {failure}",
                    report.t_reached, report.t_max
                ),
            ));
        }
        let peaks = report.peaks(PEAK_SMOOTHING, PEAK_PROMINENCE);
        let seen = REFLECTION_WINDOWS
            .iter()
            .all(|&(a, b)| peaks.iter().any(|&t| t >= a && t <= b));
        let bounded = report.bounded();
        let list: Vec<String> = peaks.iter().map(|t| format!("{t:.2}")).collect();
        Ok((
            bounded && seen,
            format!(
                "reached t = {:.3}, bounded {bounded}, boundary momentum peaks at [{}]",
                report.t_reached,
                list.join(", ")
            ),
        ))
    })
}

pub fn patch_test() -> Outcome {
    measure(7, "Neumann patch test", None, || {
        let config = preset(Preset::Patch, &Overrides::default())?;
        let alpha = config.boundaries.top.load.schedule.amplitude();
        let target = Tensor2::identity() * alpha;
        // The block keeps ringing after the ramp, so the stress is averaged
        // over the settled interval.
        let (t0, t1) = (4.0, config.t_max);
        let mut sim = Simulation::new(config)?;
        let mut sum = vec![Tensor2::zeros(); sim.grid().len()];
        let mut samples = 0usize;
        while sim.time() < t1 {
            sim.step()?;
            if sim.time() > t0 {
                sum.iter_mut().zip(sim.stress()).for_each(|(s, p)| *s += p);
                samples += 1;
            }
        }
        let worst = sum
            .iter()
            .map(|s| (s / samples as f64 - target).norm() / target.norm())
            .fold(0.0, f64::max);
        Ok((
            worst <= PATCH_TOLERANCE,
            format!(
                "max nodewise deviation of time-averaged stress {worst:.2e} over t in [{t0}, {t1}] (tol {PATCH_TOLERANCE:e})"
            ),
        ))
    })
}

pub fn formula_fixtures() -> Outcome {
    measure(8, "formula fixtures", None, || {
        let svk = Material::new(Model::Svk, 1.0, 1.0, 1.0)?;
        let nh = Material::new(Model::NeoHooke, 1.0, 1.0, 1.0)?;
        let stretch = Tensor2::new(0.1, 0.0, 0.0, 0.0);
        let shear = Tensor2::new(0.0, 0.1, 0.0, 0.0);
        let tensors = [
            (svk.pk2(&stretch)?, Tensor2::new(0.315, 0.0, 0.0, 0.105)),
            (nh.pk2(&shear)?, Tensor2::new(-0.01, 0.1, 0.1, 0.0)),
            (nh.first_piola(&shear)?, Tensor2::new(0.0, 0.1, 0.1, 0.0)),
            (nh.momentum_flux(&shear), Tensor2::new(0.0, -0.1, -0.1, 0.0)),
            (
                nh.momentum_flux(&stretch),
                Tensor2::new(-0.3, 0.0, 0.0, -0.1),
            ),
        ];
        let mut worst = tensors
            .iter()
            .map(|(got, want)| (got - want).amax())
            .fold(0.0, f64::max);
        let peak = 0.15 * 2.0 / (3.0 * 0.215 * std::f64::consts::PI.sqrt()).sqrt();
        worst = worst.max((ricker(1.0, 0.15, 0.215, 1.0) - peak).abs());
        let report = grid_error(
            &[Vec2::new(1.1, 0.0), Vec2::new(0.0, 1.0)],
            &[Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        )?;
        let norm = 0.1 / 2f64.sqrt();
        worst = worst
            .max((report.e2 - 0.5 * norm).abs())
            .max((report.einf - norm).abs());
        Ok((
            worst <= FIXTURE_TOLERANCE,
            format!("max deviation {worst:.2e} over 8 fixtures (tol {FIXTURE_TOLERANCE:e})"),
        ))
    })
}

/// All criteria in order.
pub fn run_all() -> Vec<Outcome> {
    vec![
        moment_round_trip(),
        quiescent_fixed_point(),
        small_strain_agreement(),
        homogeneous_oracle(),
        convergence_orders(),
        dynamic_stability(),
        patch_test(),
        formula_fixtures(),
    ]
}
