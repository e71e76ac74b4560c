//! A traction-free block given a brief kick must ring without the fast
//! sawtooth growth along its free edges. Over much longer times an
//! unconstrained body still drifts slowly in its rigid-body modes, which is
//! outside the horizon checked here.

use lbsolid::cli::{preset, Overrides, Preset};
use lbsolid::constitutive::Model;
use lbsolid::loading::{Load, Schedule};
use lbsolid::solver::{EdgeCondition, EdgeConditions, RunConfig, Simulation};

fn kicked_block(model: Model, nu: f64) -> RunConfig {
    let mut c = preset(
        Preset::Patch,
        &Overrides {
            model: Some(model),
            nu: Some(nu),
            t_max: Some(20.0),
            ..Default::default()
        },
    )
    .unwrap();
    c.boundaries = EdgeConditions::all(EdgeCondition::free());
    c.boundaries.left = EdgeCondition::neumann(
        Load::new(Schedule::SinePulse { alpha: 1e-3 }, [0.3, 1.0]).until(2.0),
    );
    c
}

/// Peak momentum over the second half of the run relative to the first.
fn peak_ratio(config: RunConfig) -> f64 {
    let half = 0.5 * config.t_max;
    let mut sim = Simulation::new(config).unwrap();
    let (mut early, mut late) = (0.0f64, 0.0f64);
    while sim.time() < sim.config().t_max {
        sim.step().unwrap();
        let j = sim.max_momentum();
        if sim.time() < half {
            early = early.max(j);
        } else {
            late = late.max(j);
        }
    }
    late / early
}

#[test]
fn kicked_blocks_ring_without_growth() {
    for (model, nu) in [
        (Model::LinearElastic, 0.25),
        (Model::LinearElastic, 0.2),
        (Model::Svk, 0.2),
        (Model::NeoHooke, 0.2),
    ] {
        let ratio = peak_ratio(kicked_block(model, nu));
        assert!(
            ratio < 1.5,
            "{model:?}, nu = {nu}: late/early momentum ratio {ratio}"
        );
    }
}
