//! Bounce-back (Dirichlet) and anti-bounce-back (Neumann) boundary rules.
//!
//! Both rules fill the population slots that streaming could not reach: for
//! every direction `q` whose target lies outside the grid, the incoming slot
//! `opposite(q)` of the same node is rebuilt from the post-collision value
//! `f_q`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::collision::{equilibrium, Moments};
use crate::constitutive::Tensor2;
use crate::d2q9::{Grid, LatticeScheme, OPPOSITE, Q};
use crate::fdops::Vec2;

/// Bounce-back with momentum correction, imposing `j*` on the node.
pub fn dirichlet_rule(
    f_coll: &[f64; Q],
    j_star: Vec2,
    crossing: impl IntoIterator<Item = usize>,
    scheme: &LatticeScheme,
    out: &mut [f64; Q],
) {
    let cs2 = scheme.cs2();
    for q in crossing {
        let correction = 2.0 / cs2 * scheme.weight(q) * scheme.velocity(q).dot(&j_star);
        out[OPPOSITE[q]] = f_coll[q] - correction;
    }
}

/// Anti-bounce-back imposing the momentum flux `pi_star`.
pub fn neumann_rule(
    f_coll: &[f64; Q],
    r_bd: f64,
    pi_star: &Tensor2,
    crossing: impl IntoIterator<Item = usize>,
    scheme: &LatticeScheme,
    out: &mut [f64; Q],
) {
    let even = equilibrium(
        &Moments {
            r: r_bd,
            j: Vec2::zeros(),
            pi: *pi_star,
        },
        scheme,
    );
    for q in crossing {
        out[OPPOSITE[q]] = -f_coll[q] + 2.0 * even[q];
    }
}

/// Momentum flux to impose on a Neumann node carrying traction `t_star`.
///
/// In the frame spanned by the normal `n` and the tangent, the first row and
/// column of the flux are replaced by the quasi-traction
/// `-T* + (P + Pi) n`; the tangential-tangential entry is taken from `pi_bd`.
pub fn traction_to_pi(t_star: Vec2, n: Vec2, p_bd: &Tensor2, pi_bd: &Tensor2) -> Tensor2 {
    let tangent = Vec2::new(-n.y, n.x);
    let pi_tt = tangent.dot(&(pi_bd * tangent));
    assemble_flux(t_star, n, &(p_bd + pi_bd), pi_tt)
}

fn assemble_flux(t_star: Vec2, n: Vec2, flux: &Tensor2, pi_tt: f64) -> Tensor2 {
    let tangent = Vec2::new(-n.y, n.x);
    // Rows of `rot` are the frame axes, so `rot * v` gives frame components.
    let rot = Tensor2::from_rows(&[n.transpose(), tangent.transpose()]);
    let quasi = rot * (-t_star + flux * n);
    let local = Tensor2::new(quasi.x, quasi.y, quasi.y, pi_tt);
    rot.transpose() * local * rot
}

/// How boundary values of `P` and `Pi` are obtained from the interior.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Two-point linear extrapolation along the inward normal.
    #[default]
    Linear,
    /// Value of the nearest node along the inward normal.
    Constant,
}

/// Linear extrapolation onto a boundary node from the two nearest nodes along
/// the inward lattice normal; falls back to the nearest node alone when the
/// grid is only two nodes deep. Interior nodes return their own value.
pub fn extrapolate_to_boundary<T>(field: &[T], node: usize, grid: &Grid) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    extrapolate(Extrapolation::Linear, field, node, grid)
}

pub fn extrapolate<T>(order: Extrapolation, field: &[T], node: usize, grid: &Grid) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let Some(b) = grid.boundary_node(node) else {
        return field[node];
    };
    let inward = [-b.outward[0], -b.outward[1]];
    let Some(first) = grid.offset(node, inward) else {
        return field[node];
    };
    if order == Extrapolation::Constant {
        return field[first];
    }
    match grid.offset(node, [2 * inward[0], 2 * inward[1]]) {
        Some(second) => field[first] * 2.0 - field[second],
        None => field[first],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::compute_moments;
    use crate::d2q9::{BcKind, Edge};
    use proptest::prelude::*;

    fn scheme() -> LatticeScheme {
        LatticeScheme::new(1.0).unwrap()
    }

    const F: [f64; Q] = [0.3, 0.11, -0.2, 0.05, 0.4, -0.07, 0.02, 0.13, -0.01];

    #[test]
    fn homogeneous_dirichlet_is_pure_bounce_back() {
        let s = scheme();
        let mut out = [f64::NAN; Q];
        dirichlet_rule(&F, Vec2::zeros(), [2, 5, 6], &s, &mut out);
        assert_eq!(out[4], F[2]);
        assert_eq!(out[7], F[5]);
        assert_eq!(out[8], F[6]);
        assert!(out[0].is_nan() && out[1].is_nan());
    }

    #[test]
    fn moving_wall_correction() {
        let s = scheme();
        let alpha = 0.03;
        let j = Vec2::new(alpha, 0.0);
        let mut out = [0.0; Q];
        dirichlet_rule(&F, j, [2, 5, 6], &s, &mut out);
        for (q, qbar) in [(2, 4), (5, 7), (6, 8)] {
            let expected = F[q] - 2.0 / s.cs2() * s.weight(q) * s.velocity(q).x * alpha;
            assert!((out[qbar] - expected).abs() < 1e-15);
        }
        // Direction 2 has no x component, so it bounces back unchanged.
        assert_eq!(out[4], F[2]);
    }

    #[test]
    fn bounce_back_conserves_pair_sums() {
        let s = scheme();
        let mut out = F;
        dirichlet_rule(&F, Vec2::zeros(), [1, 3], &s, &mut out);
        assert_eq!(out[1] + out[3], F[1] + F[3]);
    }

    #[test]
    fn neumann_reconstruction_is_twice_even_equilibrium() {
        let s = LatticeScheme::new(0.8).unwrap();
        let r = 0.013;
        let pi = Tensor2::new(-0.2, 0.05, 0.05, 0.1);
        let feq = equilibrium(
            &Moments {
                r,
                j: Vec2::zeros(),
                pi,
            },
            &s,
        );
        let zero = [0.0; Q];
        let mut out = [0.0; Q];
        neumann_rule(&zero, r, &pi, 1..Q, &s, &mut out);
        for q in 1..Q {
            assert!((out[OPPOSITE[q]] - 2.0 * feq[OPPOSITE[q]]).abs() < 1e-15);
        }
        // Direction pairs reproduce the imposed flux when summed with f_q = feq_q.
        let mut f = feq;
        neumann_rule(&feq, r, &pi, [1, 2, 5, 6, 8], &s, &mut f);
        let m = compute_moments(&f, Vec2::zeros(), 0.0, &s);
        assert!((m.pi - pi).abs().max() < 1e-15);
        assert!((m.r - r).abs() < 1e-15);
    }

    #[test]
    fn quiescent_free_surface_is_fixed_point() {
        let s = scheme();
        let f = equilibrium(&Moments::zero(), &s);
        let mut out = f;
        let pi_star = traction_to_pi(
            Vec2::zeros(),
            Vec2::new(0.0, 1.0),
            &Tensor2::zeros(),
            &Tensor2::zeros(),
        );
        neumann_rule(&f, 0.0, &pi_star, [2, 5, 6], &s, &mut out);
        assert_eq!(out, f);
    }

    #[test]
    fn traction_conversion_axis_aligned() {
        let sigma = 0.175;
        let pi = traction_to_pi(
            Vec2::new(0.0, sigma),
            Vec2::new(0.0, 1.0),
            &Tensor2::zeros(),
            &Tensor2::zeros(),
        );
        assert!((pi - Tensor2::new(0.0, 0.0, 0.0, -sigma)).abs().max() < 1e-16);
        let pi = traction_to_pi(
            Vec2::new(sigma, 0.0),
            Vec2::new(1.0, 0.0),
            &Tensor2::zeros(),
            &Tensor2::zeros(),
        );
        assert!((pi - Tensor2::new(-sigma, 0.0, 0.0, 0.0)).abs().max() < 1e-16);
    }

    #[test]
    fn traction_free_consistent_state() {
        let pi_bd = Tensor2::new(0.3, -0.1, -0.1, 0.7);
        let p_bd = -pi_bd;
        let n = Vec2::new(0.0, -1.0);
        let pi = traction_to_pi(Vec2::zeros(), n, &p_bd, &pi_bd);
        assert!((pi - Tensor2::new(0.3, 0.0, 0.0, 0.0)).abs().max() < 1e-15);
    }

    #[test]
    fn imposed_flux_carries_quasi_traction() {
        let n = Vec2::new(0.6, 0.8);
        let t = Vec2::new(0.2, -0.1);
        let p = Tensor2::new(0.4, 0.1, -0.2, 0.3);
        let pi_bd = Tensor2::new(-0.5, 0.05, 0.05, -0.2);
        let pi = traction_to_pi(t, n, &p, &pi_bd);
        assert!((pi - pi.transpose()).abs().max() < 1e-15);
        let expected = -t + (p + pi_bd) * n;
        assert!((pi * n - expected).norm() < 1e-15);
    }

    #[test]
    fn extrapolation() {
        let g = Grid::new(
            1.0,
            1.0,
            0.25,
            &[Edge::Left],
            &[Edge::Right, Edge::Top, Edge::Bottom],
        )
        .unwrap();
        let constant = vec![2.5; g.len()];
        for &n in g.boundary_nodes() {
            assert_eq!(extrapolate_to_boundary(&constant, n, &g), 2.5);
        }
        let linear: Vec<f64> = (0..g.len()).map(|n| 3.0 * g.position(n).y - 1.0).collect();
        for ix in 1..4 {
            let top = g.index(ix, 4);
            assert!((extrapolate_to_boundary(&linear, top, &g) - linear[top]).abs() < 1e-14);
        }
        let diag: Vec<f64> = (0..g.len()).map(|n| g.position(n).sum()).collect();
        let corner = g.index(4, 4);
        assert!((extrapolate_to_boundary(&diag, corner, &g) - 2.0).abs() < 1e-14);
        assert_eq!(
            g.boundary_node(g.index(0, 0)).unwrap().kind,
            BcKind::Dirichlet
        );
    }

    #[test]
    fn two_node_column_extrapolation() {
        let g = Grid::new(1.0, 1.0, 0.5, &[], &Edge::ALL).unwrap();
        // Three nodes deep: values 1 and 3 on the first and second inward nodes.
        let mut field = vec![0.0; g.len()];
        field[g.index(1, 1)] = 1.0;
        field[g.index(1, 0)] = 3.0;
        assert_eq!(extrapolate_to_boundary(&field, g.index(1, 2), &g), -1.0);
        let g = Grid::new(0.5, 0.5, 0.5, &[], &Edge::ALL).unwrap();
        let field = vec![1.0, 2.0, 3.0, 4.0];
        // Only one node inward along the diagonal.
        assert_eq!(extrapolate_to_boundary(&field, 0, &g), 4.0);
    }

    fn rot(theta: f64) -> Tensor2 {
        let (s, c) = theta.sin_cos();
        Tensor2::new(c, -s, s, c)
    }

    proptest! {
        #[test]
        fn traction_conversion_is_rotation_equivariant(
            theta in 0.0f64..std::f64::consts::TAU,
            phi in 0.0f64..std::f64::consts::TAU,
            t in prop::array::uniform2(-1.0f64..1.0),
            p in prop::array::uniform4(-1.0f64..1.0),
            pi in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let n = Vec2::new(phi.cos(), phi.sin());
            let t = Vec2::new(t[0], t[1]);
            let p = Tensor2::new(p[0], p[1], p[2], p[3]);
            let pi = Tensor2::new(pi[0], pi[1], pi[1], pi[2]);
            let r = rot(theta);
            let lhs = traction_to_pi(r * t, r * n, &(r * p * r.transpose()), &(r * pi * r.transpose()));
            let rhs = r * traction_to_pi(t, n, &p, &pi) * r.transpose();
            prop_assert!((lhs - rhs).abs().max() < 1e-13);
        }
    }
}
