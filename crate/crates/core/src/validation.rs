//! Error metrics, homogeneous-deformation oracles and lattice refinement
//! studies.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::constitutive::{Material, Tensor2};
use crate::error::{Error, Result};
use crate::fdops::Vec2;
use crate::solver::{RunConfig, Simulation};

/// Relative grid errors of a displacement field against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `(1/n) |du|_2 / |u|_2`.
    pub e2: f64,
    /// `|du|_inf / |u|_2`, with the max norm taken over both components.
    pub einf: f64,
    pub n: usize,
    pub t: f64,
}

fn norm2(field: impl Iterator<Item = Vec2>) -> f64 {
    field.map(|v| v.norm_squared()).sum::<f64>().sqrt()
}

pub fn grid_error(u_lb: &[Vec2], u_ref: &[Vec2]) -> Result<ErrorReport> {
    if u_lb.len() != u_ref.len() {
        return Err(Error::SizeMismatch {
            expected: u_ref.len(),
            actual: u_lb.len(),
        });
    }
    let reference = norm2(u_ref.iter().copied());
    if reference.is_nan() || reference <= 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    let delta = || u_lb.iter().zip(u_ref).map(|(a, b)| a - b);
    let n = u_ref.len();
    let dev_inf = delta()
        .map(|d| d.x.abs().max(d.y.abs()))
        .fold(0.0, f64::max);
    Ok(ErrorReport {
        e2: norm2(delta()) / reference / n as f64,
        einf: dev_inf / reference,
        n,
        t: f64::NAN,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OracleState {
    /// Principal stretches of `F = diag(l1, l2)`.
    Tension { stretch: [f64; 2] },
    /// Simple shear `F = I + gamma e1 (x) e2`.
    Shear { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSolution {
    pub state: OracleState,
    pub converged: bool,
    /// Tension: norm of the stress residual. Shear: traction magnitude left
    /// on the free vertical sides, a measure of how far the ideal state is
    /// from satisfying them.
    pub residual: f64,
    pub iterations: usize,
}

impl OracleSolution {
    pub fn deformation_gradient(&self) -> Tensor2 {
        match self.state {
            OracleState::Tension { stretch } => Tensor2::new(stretch[0], 0.0, 0.0, stretch[1]),
            OracleState::Shear { gamma } => Tensor2::new(1.0, gamma, 0.0, 1.0),
        }
    }

    /// Homogeneous displacement `(F - I)(X - origin)`.
    pub fn displacement(&self, x: Vec2, origin: Vec2) -> Vec2 {
        (self.deformation_gradient() - Tensor2::identity()) * (x - origin)
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-12;
const ORACLE_MAX_ITERATIONS: usize = 100;

/// Homogeneous uniaxial state with nominal stress `sigma` along `X2` and
/// traction-free lateral faces: solves `P11(F) = 0, P22(F) = sigma` for
/// `F = diag(l1, l2)` by damped Newton with a finite-difference Jacobian.
pub fn tension_oracle(material: &Material, sigma: f64) -> OracleSolution {
    let residual = |x: [f64; 2]| -> Option<Vec2> {
        let h = Tensor2::new(x[0] - 1.0, 0.0, 0.0, x[1] - 1.0);
        let p = material.first_piola(&h).ok()?;
        let r = Vec2::new(p[(0, 0)], p[(1, 1)] - sigma);
        (r.x.is_finite() && r.y.is_finite()).then_some(r)
    };
    let mut x = [1.0, 1.0];
    let mut r = residual(x).expect("reference state is admissible");
    let mut iterations = 0;
    while r.norm() >= ORACLE_TOLERANCE && iterations < ORACLE_MAX_ITERATIONS {
        iterations += 1;
        let mut jac = Tensor2::zeros();
        for k in 0..2 {
            let step = 1e-7 * x[k].abs().max(1.0);
            let (mut plus, mut minus) = (x, x);
            plus[k] += step;
            minus[k] -= step;
            let (Some(rp), Some(rm)) = (residual(plus), residual(minus)) else {
                break;
            };
            jac.set_column(k, &((rp - rm) / (2.0 * step)));
        }
        let Some(dir) = jac.try_inverse().map(|inv| -(inv * r)) else {
            break;
        };
        let mut damping = 1.0;
        let mut accepted = false;
        while damping > 1e-6 {
            let trial = [x[0] + damping * dir.x, x[1] + damping * dir.y];
            if trial[0] > 0.0 && trial[1] > 0.0 {
                if let Some(rt) = residual(trial) {
                    if rt.norm() < r.norm() || rt.norm() < ORACLE_TOLERANCE {
                        x = trial;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    OracleSolution {
        state: OracleState::Tension { stretch: x },
        converged: r.norm() < ORACLE_TOLERANCE,
        residual: r.norm(),
        iterations,
    }
}

/// Ideal simple shear for a top-edge displacement `u_star` over `height`.
pub fn shear_oracle(material: &Material, u_star: f64, height: f64) -> OracleSolution {
    let gamma = u_star / height;
    let h = Tensor2::new(0.0, gamma, 0.0, 0.0);
    let (converged, residual) = match material.first_piola(&h) {
        Ok(p) => (true, p.column(0).norm()),
        Err(_) => (false, f64::INFINITY),
    };
    OracleSolution {
        state: OracleState::Shear { gamma },
        converged,
        residual,
        iterations: 0,
    }
}

/// Displacement field at time `t`, linearly interpolated between the two
/// steps that bracket it.
pub fn displacement_at(config: &RunConfig, t: f64) -> Result<Vec<Vec2>> {
    let mut sim = Simulation::new(config.clone())?;
    let mut prev = sim.displacement().to_vec();
    let mut t_prev = sim.time();
    while sim.time() < t {
        prev.copy_from_slice(sim.displacement());
        t_prev = sim.time();
        sim.step()?;
    }
    if sim.time() == t_prev {
        return Ok(prev);
    }
    let w = (t - t_prev) / (sim.time() - t_prev);
    Ok(prev
        .iter()
        .zip(sim.displacement())
        .map(|(a, b)| a * (1.0 - w) + b * w)
        .collect())
}

/// Time average of `probe` over `[t0, t1]` (trapezoidal in the step times).
pub fn time_average(
    config: &RunConfig,
    t0: f64,
    t1: f64,
    mut probe: impl FnMut(&Simulation) -> f64,
) -> Result<f64> {
    let mut sim = Simulation::new(config.clone())?;
    while sim.time() + sim.dt() <= t0 {
        sim.step()?;
    }
    let mut prev = probe(&sim);
    let (mut sum, mut span) = (0.0, 0.0);
    while sim.time() < t1 {
        sim.step()?;
        let value = probe(&sim);
        sum += 0.5 * (prev + value) * sim.dt();
        span += sim.dt();
        prev = value;
    }
    Ok(sum / span)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    /// Coarse runs, each compared with the finest one.
    pub rows: Vec<ConvergenceRow>,
    pub reference_dx: f64,
    pub order_e2: f64,
    pub order_einf: f64,
}

/// Least-squares slope of `log(y)` over `log(x)`.
pub fn fit_order(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Runs `base` at each spacing up to `t_eval` and measures the grid errors
/// of the coarser runs against the finest, restricted to the coarse nodes.
pub fn convergence_study(
    base: &RunConfig,
    spacings: &[f64],
    t_eval: f64,
) -> Result<ConvergenceStudy> {
    if spacings.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "a refinement study needs at least 3 spacings, got {}",
            spacings.len()
        )));
    }
    let mut sorted = spacings.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for pair in sorted.windows(2) {
        if ((pair[0] / pair[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "spacings must halve successively, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }

    let runs: Vec<(RunConfig, Vec<Vec2>)> = sorted
        .par_iter()
        .map(|&dx| {
            let config = RunConfig { dx, ..base.clone() };
            let u = displacement_at(&config, t_eval)?;
            Ok((config, u))
        })
        .collect::<Result<_>>()?;

    let (fine_config, fine_u) = runs.last().expect("at least three runs");
    let fine_grid = fine_config.grid()?;
    let mut rows = Vec::new();
    for (config, u) in &runs[..runs.len() - 1] {
        let grid = config.grid()?;
        let ratio = (config.dx / fine_config.dx).round() as usize;
        let restricted: Vec<Vec2> = (0..grid.len())
            .map(|node| {
                let (ix, iy) = grid.coords(node);
                fine_u[fine_grid.index(ix * ratio, iy * ratio)]
            })
            .collect();
        let mut report = grid_error(u, &restricted)?;
        report.t = t_eval;
        rows.push(ConvergenceRow {
            dx: config.dx,
            report,
        });
    }
    let dxs: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let e2: Vec<f64> = rows.iter().map(|r| r.report.e2).collect();
    let einf: Vec<f64> = rows.iter().map(|r| r.report.einf).collect();
    Ok(ConvergenceStudy {
        order_e2: fit_order(&dxs, &e2),
        order_einf: fit_order(&dxs, &einf),
        reference_dx: fine_config.dx,
        rows,
    })
}

/// One line of the error table written by refinement and comparison runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub preset: String,
    pub dx: f64,
    pub nu: f64,
    pub tau: f64,
    pub t: f64,
    pub e2: f64,
    pub einf: f64,
}

pub const ERROR_CSV_HEADER: &str = "preset,dx,nu,tau,t,E2,Einf";

pub fn write_error_csv(mut out: impl Write, rows: &[ErrorRow]) -> std::io::Result<()> {
    writeln!(out, "{ERROR_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:e},{:e}",
            r.preset, r.dx, r.nu, r.tau, r.t, r.e2, r.einf
        )?;
    }
    Ok(())
}

pub fn write_error_csv_file(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_error_csv(std::io::BufWriter::new(file), rows).map_err(|e| Error::io(path, e))
}

/// Momentum history of a long dynamic run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Time of the last completed step.
    pub t_reached: f64,
    pub t_max: f64,
    /// Error that stopped the run early, if any.
    pub failure: Option<String>,
    pub times: Vec<f64>,
    /// Largest `|j|` over the boundary nodes after each step.
    pub boundary_momentum: Vec<f64>,
}

impl StabilityReport {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// No blow-up over the final fifth of the run: the history stays finite,
    /// does not grow monotonically, and stays within twice its earlier maximum.
    pub fn bounded(&self) -> bool {
        let y = &self.boundary_momentum;
        if !self.completed() || y.len() < 10 || y.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let split = y.len() - y.len() / 5;
        let earlier = y[..split].iter().copied().fold(0.0, f64::max);
        let last = &y[split..];
        let later = last.iter().copied().fold(0.0, f64::max);
        let monotone = last.windows(2).all(|w| w[1] > w[0]);
        !monotone && later <= 2.0 * earlier
    }

    /// Peak times of the boundary momentum, smoothed over `window` time units.
    pub fn peaks(&self, window: f64, rel_prominence: f64) -> Vec<f64> {
        let y = &self.boundary_momentum;
        if y.len() < 3 {
            return Vec::new();
        }
        let dt = (self.times[y.len() - 1] - self.times[0]) / (y.len() - 1) as f64;
        let smooth = moving_average(y, ((window / dt).round() as usize).max(1));
        let threshold = rel_prominence * smooth.iter().copied().fold(0.0, f64::max);
        find_peaks(&smooth, threshold)
            .into_iter()
            .map(|i| self.times[i])
            .collect()
    }
}

/// Runs `config` to its end time, recording boundary momentum. Divergence is
/// reported in the result rather than returned as an error.
pub fn stability_run(config: &RunConfig) -> Result<StabilityReport> {
    let mut sim = Simulation::new(config.clone())?;
    let boundary = sim.grid().boundary_nodes().to_vec();
    let steps = config.step_count();
    let mut report = StabilityReport {
        t_reached: 0.0,
        t_max: config.t_max,
        failure: None,
        times: Vec::with_capacity(steps),
        boundary_momentum: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        if let Err(e) = sim.step() {
            report.failure = Some(e.to_string());
            break;
        }
        let j = sim.momentum();
        report.times.push(sim.time());
        report
            .boundary_momentum
            .push(boundary.iter().map(|&n| j[n].norm()).fold(0.0, f64::max));
        report.t_reached = sim.time();
    }
    Ok(report)
}

/// Centred moving average of width `w`, truncated at the ends.
fn moving_average(y: &[f64], w: usize) -> Vec<f64> {
    let half = w / 2;
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + w - half).min(y.len());
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Indices of local maxima whose topographic prominence reaches `threshold`.
fn find_peaks(y: &[f64], threshold: f64) -> Vec<usize> {
    (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .filter(|&i| {
            let base = |range: &mut dyn Iterator<Item = usize>| {
                let mut low = y[i];
                for k in range {
                    if y[k] > y[i] {
                        break;
                    }
                    low = low.min(y[k]);
                }
                low
            };
            let left = base(&mut (0..i).rev());
            let right = base(&mut (i + 1..y.len()));
            y[i] - left.max(right) >= threshold
        })
        .collect()
}
