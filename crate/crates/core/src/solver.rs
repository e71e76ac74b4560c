//! Time stepping for the solid lattice Boltzmann scheme.
//!
//! One step runs, in order: moments/equilibrium/forcing/collision per node,
//! push streaming, the boundary pass, displacement gradient and stresses,
//! and finally the constitutive source together with the trapezoidal
//! displacement update.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{dirichlet_rule, extrapolate, neumann_rule, traction_to_pi, Extrapolation};
use crate::collision::{
    collide, compute_moments, equilibrium, forcing, stream, Populations, StreamEdges,
};
use crate::constitutive::{Material, Tensor2};
use crate::d2q9::{BcKind, Edge, Grid, LatticeScheme, Q};
use crate::error::{Error, Result};
use crate::fdops::{divergence_into, gradient_into, Vec2};
use crate::loading::Load;

/// Largest Poisson's ratio for which `c_d <= c` (first-order boundary stencils).
pub const NU_STABLE: f64 = 0.25;
/// Largest Poisson's ratio for which `c_d <= 2c`.
pub const NU_LIMIT: f64 = 5.0 / 11.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CflStatus {
    Ok,
    /// Beyond the first-order stencil bound but below the hard limit.
    Warning,
}

/// `dt = dx / c` with lattice velocity `c = sqrt(3) c_s`.
pub fn derive_timestep(material: &Material, dx: f64) -> f64 {
    dx / (3f64.sqrt() * material.cs())
}

pub fn check_cfl(material: &Material) -> Result<CflStatus> {
    let nu = material.nu();
    let tol = 1e-12;
    if nu <= NU_STABLE + tol {
        Ok(CflStatus::Ok)
    } else if nu <= NU_LIMIT + tol {
        Ok(CflStatus::Warning)
    } else {
        Err(Error::CflViolation { nu })
    }
}

/// Where the displacement gradient feeding the source is sampled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTiming {
    /// Gradient of `u(t)`, taken before the displacement update.
    #[default]
    Lagged,
    /// Gradient re-evaluated from `u(t + dt)` after the update.
    Updated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeCondition {
    pub kind: BcKind,
    /// Prescribed momentum (Dirichlet) or traction (Neumann).
    pub load: Load,
}

impl EdgeCondition {
    pub fn clamped() -> Self {
        Self {
            kind: BcKind::Dirichlet,
            load: Load::zero(),
        }
    }

    pub fn free() -> Self {
        Self {
            kind: BcKind::Neumann,
            load: Load::zero(),
        }
    }

    pub fn dirichlet(load: Load) -> Self {
        Self {
            kind: BcKind::Dirichlet,
            load,
        }
    }

    pub fn neumann(load: Load) -> Self {
        Self {
            kind: BcKind::Neumann,
            load,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeConditions {
    pub left: EdgeCondition,
    pub right: EdgeCondition,
    pub bottom: EdgeCondition,
    pub top: EdgeCondition,
}

impl EdgeConditions {
    pub fn all(condition: EdgeCondition) -> Self {
        Self {
            left: condition,
            right: condition,
            bottom: condition,
            top: condition,
        }
    }

    pub fn get(&self, edge: Edge) -> &EdgeCondition {
        match edge {
            Edge::Left => &self.left,
            Edge::Right => &self.right,
            Edge::Bottom => &self.bottom,
            Edge::Top => &self.top,
        }
    }

    pub fn get_mut(&mut self, edge: Edge) -> &mut EdgeCondition {
        match edge {
            Edge::Left => &mut self.left,
            Edge::Right => &mut self.right,
            Edge::Bottom => &mut self.bottom,
            Edge::Top => &mut self.top,
        }
    }

    fn edges_of(&self, kind: BcKind) -> Vec<Edge> {
        Edge::ALL
            .into_iter()
            .filter(|&e| self.get(e).kind == kind)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub width: f64,
    pub height: f64,
    pub dx: f64,
    pub material: Material,
    /// BGK relaxation time in units of the time step.
    pub tau: f64,
    pub t_max: f64,
    pub snapshot_every: usize,
    #[serde(default)]
    pub body_force: [f64; 2],
    pub boundaries: EdgeConditions,
    #[serde(default)]
    pub source_timing: SourceTiming,
    #[serde(default)]
    pub extrapolation: Extrapolation,
}

impl RunConfig {
    pub fn dt(&self) -> f64 {
        derive_timestep(&self.material, self.dx)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(
            self.width,
            self.height,
            self.dx,
            &self.boundaries.edges_of(BcKind::Dirichlet),
            &self.boundaries.edges_of(BcKind::Neumann),
        )
    }

    /// Checks parameter ranges and the CFL condition.
    pub fn validate(&self) -> Result<CflStatus> {
        if !(self.tau > 0.5 && self.tau.is_finite()) {
            return Err(Error::UnstableRelaxation { tau: self.tau });
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be non-negative, got {}",
                self.t_max
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidParameter(
                "snapshot_every must be at least 1".into(),
            ));
        }
        if self.body_force.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("body force must be finite".into()));
        }
        self.grid()?;
        let status = check_cfl(&self.material)?;
        if status == CflStatus::Warning {
            warn!(
                "Poisson's ratio {:.4} exceeds {NU_STABLE}: the time step is outside the first-order CFL bound",
                self.material.nu()
            );
        }
        Ok(status)
    }

    /// Number of steps `run` takes to reach `t_max`.
    pub fn step_count(&self) -> usize {
        steps_to_reach(self.t_max, self.dt())
    }
}

pub(crate) fn steps_to_reach(t: f64, dt: f64) -> usize {
    let n = t / dt;
    let rounded = n.round();
    if (n - rounded).abs() < 1e-9 * rounded.max(1.0) {
        rounded as usize
    } else {
        n.ceil() as usize
    }
}

#[derive(Debug, Clone)]
struct BoundaryEntry {
    node: usize,
    kind: BcKind,
    normal: Vec2,
    edges: [Option<Edge>; 2],
    crossing: Vec<usize>,
}

/// Full solver state.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: RunConfig,
    scheme: LatticeScheme,
    grid: Grid,
    dt: f64,
    f: Populations,
    f_next: Populations,
    /// Lattice moments at the start of the current step.
    r: Vec<f64>,
    j_prev: Vec<Vec2>,
    /// Momentum after the last completed step.
    j: Vec<Vec2>,
    u: Vec<Vec2>,
    h: Vec<Tensor2>,
    p: Vec<Tensor2>,
    pi_law: Vec<Tensor2>,
    stress_sum: Vec<Tensor2>,
    div: Vec<Vec2>,
    s: Vec<Vec2>,
    boundary: Vec<BoundaryEntry>,
    step: usize,
}

impl Simulation {
    /// Equilibrium start at rest: `f = f_eq(0, 0, 0)`, zero fields.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let scheme = LatticeScheme::new(config.material.cs())?;
        let dt = config.dt();
        let n = grid.len();
        let f0 = equilibrium(&crate::collision::Moments::zero(), &scheme);
        let boundary = grid
            .boundary_nodes()
            .iter()
            .map(|&node| {
                let b = grid.boundary_node(node).expect("listed boundary node");
                BoundaryEntry {
                    node,
                    kind: b.kind,
                    normal: b.normal(),
                    edges: b.edges,
                    crossing: grid.crossing_directions(node).collect(),
                }
            })
            .collect();
        let mut sim = Self {
            scheme,
            dt,
            f: Populations::filled(n, f0),
            f_next: Populations::filled(n, f0),
            r: vec![0.0; n],
            j_prev: vec![Vec2::zeros(); n],
            j: vec![Vec2::zeros(); n],
            u: vec![Vec2::zeros(); n],
            h: vec![Tensor2::zeros(); n],
            p: vec![Tensor2::zeros(); n],
            pi_law: vec![Tensor2::zeros(); n],
            stress_sum: vec![Tensor2::zeros(); n],
            div: vec![Vec2::zeros(); n],
            s: vec![Vec2::zeros(); n],
            boundary,
            step: 0,
            grid,
            config,
        };
        sim.update_stresses()?;
        Ok(sim)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scheme(&self) -> &LatticeScheme {
        &self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn populations(&self) -> &Populations {
        &self.f
    }

    pub fn displacement(&self) -> &[Vec2] {
        &self.u
    }

    pub fn momentum(&self) -> &[Vec2] {
        &self.j
    }

    pub fn displacement_gradient(&self) -> &[Tensor2] {
        &self.h
    }

    /// Constitutive stress from the most recent gradient evaluation.
    pub fn stress(&self) -> &[Tensor2] {
        &self.p
    }

    pub fn source(&self) -> &[Vec2] {
        &self.s
    }

    /// Zeroth moment of the current populations.
    pub fn r(&self) -> Vec<f64> {
        self.f.as_slice().iter().map(|f| f.iter().sum()).collect()
    }

    pub fn max_momentum(&self) -> f64 {
        self.j.iter().map(|j| j.norm()).fold(0.0, f64::max)
    }

    /// Overrides the current source field; the next collision uses it.
    pub fn set_source(&mut self, s: Vec<Vec2>) -> Result<()> {
        if s.len() != self.grid.len() {
            return Err(Error::SizeMismatch {
                expected: self.grid.len(),
                actual: s.len(),
            });
        }
        self.s = s;
        Ok(())
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        let tau = self.config.tau * dt;
        let t_next = (self.step + 1) as f64 * dt;

        self.collide_phase(tau);
        stream(&self.f, &mut self.f_next, &self.grid, StreamEdges::Open);
        self.boundary_phase(t_next);

        if self.config.source_timing == SourceTiming::Lagged {
            self.update_stresses()?;
        }
        self.update_source();
        self.update_displacement();
        if self.config.source_timing == SourceTiming::Updated {
            self.update_stresses()?;
            self.update_source();
        }

        std::mem::swap(&mut self.f, &mut self.f_next);
        self.step += 1;
        self.check_finite()
    }

    fn collide_phase(&mut self, tau: f64) {
        let dt = self.dt;
        let scheme = &self.scheme;
        self.f
            .as_mut_slice()
            .par_iter_mut()
            .zip(self.r.par_iter_mut())
            .zip(self.j_prev.par_iter_mut())
            .zip(self.s.par_iter())
            .for_each(|(((f, r), j), s)| {
                let m = compute_moments(f, *s, dt, scheme);
                *r = m.r;
                *j = m.j;
                let feq = equilibrium(&m, scheme);
                let psi = forcing(*s, scheme);
                *f = collide(f, &feq, &psi, tau, dt);
            });
    }

    fn prescribed(&self, entry: &BoundaryEntry, t: f64) -> Vec2 {
        let loads = entry
            .edges
            .iter()
            .flatten()
            .map(|&e| self.config.boundaries.get(e))
            .filter(|c| c.kind == entry.kind)
            .map(|c| c.load.value(t));
        match (entry.kind, entry.edges[1].is_some()) {
            (_, false) => loads.sum(),
            (BcKind::Dirichlet, true) => {
                let (sum, count) = loads.fold((Vec2::zeros(), 0.0), |(s, c), v| (s + v, c + 1.0));
                sum / count
            }
            // Edge tractions T_a = P n_a, T_b = P n_b give P n = (T_a + T_b) / sqrt(2)
            // for the diagonal normal.
            (BcKind::Neumann, true) => loads.sum::<Vec2>() * FRAC_1_SQRT_2,
        }
    }

    fn boundary_phase(&mut self, t: f64) {
        for entry in &self.boundary {
            let node = entry.node;
            let value = self.prescribed(entry, t);
            let f_coll = self.f[node];
            let out = &mut self.f_next[node];
            match entry.kind {
                BcKind::Dirichlet => dirichlet_rule(
                    &f_coll,
                    value,
                    entry.crossing.iter().copied(),
                    &self.scheme,
                    out,
                ),
                BcKind::Neumann => {
                    let order = self.config.extrapolation;
                    let p_bd = extrapolate(order, &self.p, node, &self.grid);
                    let pi_bd = extrapolate(order, &self.pi_law, node, &self.grid);
                    let pi_star = traction_to_pi(value, entry.normal, &p_bd, &pi_bd);
                    // The lattice conserves tr(Pi) - 4 cs^2 r, so the boundary
                    // density follows from the imposed flux. Extrapolating r
                    // instead excites a growing sawtooth mode along free edges.
                    let r_bd = pi_star.trace() / (4.0 * self.scheme.cs2());
                    neumann_rule(
                        &f_coll,
                        r_bd,
                        &pi_star,
                        entry.crossing.iter().copied(),
                        &self.scheme,
                        out,
                    );
                }
            }
        }
    }

    fn update_stresses(&mut self) -> Result<()> {
        gradient_into(&self.u, &self.grid, &mut self.h);
        let material = self.config.material;
        self.h
            .par_iter()
            .zip(self.p.par_iter_mut())
            .zip(self.pi_law.par_iter_mut())
            .zip(self.stress_sum.par_iter_mut())
            .enumerate()
            .try_for_each(|(node, (((h, p), pi), sum))| {
                *p = material.first_piola(h).map_err(|e| match e {
                    Error::InvertedElement { jacobian, .. } => Error::InvertedElement {
                        jacobian,
                        node: Some(node),
                    },
                    other => other,
                })?;
                *pi = material.momentum_flux(h);
                *sum = *p + *pi;
                Ok(())
            })
    }

    fn update_source(&mut self) {
        divergence_into(&self.stress_sum, &self.grid, &mut self.div);
        let b = Vec2::new(self.config.body_force[0], self.config.body_force[1])
            * self.config.material.rho0;
        self.s
            .par_iter_mut()
            .zip(self.div.par_iter())
            .for_each(|(s, d)| *s = b + d);
    }

    fn update_displacement(&mut self) {
        let dt = self.dt;
        let half = 0.5 * dt / self.config.material.rho0;
        let scheme = &self.scheme;
        self.f_next
            .as_slice()
            .par_iter()
            .zip(self.s.par_iter())
            .zip(self.j.par_iter_mut())
            .zip(self.j_prev.par_iter())
            .zip(self.u.par_iter_mut())
            .for_each(|((((f, s), j), j_prev), u)| {
                let mut first = Vec2::zeros();
                for (q, &fq) in f.iter().enumerate().take(Q) {
                    first += scheme.velocity(q) * fq;
                }
                *j = first + s * (0.5 * dt);
                *u += (*j + j_prev) * half;
            });
    }

    fn check_finite(&self) -> Result<()> {
        let diverged = |field: &'static str, node: usize| Error::Diverged {
            step: self.step,
            time: self.time(),
            field,
            node,
        };
        if let Some(node) = self
            .f
            .as_slice()
            .par_iter()
            .position_first(|f| f.iter().any(|v| !v.is_finite()))
        {
            return Err(diverged("populations", node));
        }
        for (name, field) in [
            ("displacement", &self.u),
            ("momentum", &self.j),
            ("source", &self.s),
        ] {
            if let Some(node) = field
                .par_iter()
                .position_first(|v| !(v.x.is_finite() && v.y.is_finite()))
            {
                return Err(diverged(name, node));
            }
        }
        if let Some(node) = self
            .p
            .par_iter()
            .position_first(|p| p.iter().any(|v| !v.is_finite()))
        {
            return Err(diverged("stress", node));
        }
        Ok(())
    }
}

/// Read-only view handed to observers.
pub struct Frame<'a> {
    pub step: usize,
    pub time: f64,
    pub sim: &'a Simulation,
}

pub trait Observer {
    fn observe(&mut self, frame: &Frame<'_>) -> Result<()>;

    /// Called once when the run ends, including when it aborts.
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub dt: f64,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
    pub max_momentum: f64,
}

mod duration_secs {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }
}

/// Runs until `t >= t_max`, calling observers at step 0, every
/// `snapshot_every` steps and at the final step.
pub fn run(config: RunConfig, observers: &mut [&mut dyn Observer]) -> Result<RunSummary> {
    let start = Instant::now();
    let total = config.step_count();
    let every = config.snapshot_every;
    let mut sim = Simulation::new(config)?;

    let result = (|| {
        notify(observers, &sim)?;
        while sim.step_index() < total {
            sim.step()?;
            if sim.step_index() % every == 0 || sim.step_index() == total {
                notify(observers, &sim)?;
            }
        }
        Ok(())
    })();

    let flushed: Result<()> = observers.iter_mut().try_for_each(|o| o.finish());
    result?;
    flushed?;

    debug!(
        "completed {} steps in {:?}",
        sim.step_index(),
        start.elapsed()
    );
    Ok(RunSummary {
        steps: sim.step_index(),
        final_time: sim.time(),
        dt: sim.dt(),
        wall_time: start.elapsed(),
        max_momentum: sim.max_momentum(),
    })
}

fn notify(observers: &mut [&mut dyn Observer], sim: &Simulation) -> Result<()> {
    let frame = Frame {
        step: sim.step_index(),
        time: sim.time(),
        sim,
    };
    observers.iter_mut().try_for_each(|o| o.observe(&frame))
}
