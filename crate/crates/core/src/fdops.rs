//! Finite-difference gradient and divergence on the node grid.
//!
//! Interior nodes use second-order central differences, nodes on a boundary
//! row or column use first-order one-sided differences pointing inward. The
//! stencils never reach outside the grid.

use std::ops::{Mul, Sub};

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::constitutive::Tensor2;
use crate::d2q9::Grid;

pub type Vec2 = Vector2<f64>;
pub type ScalarField = Vec<f64>;
pub type VectorField = Vec<Vec2>;
pub type TensorField = Vec<Tensor2>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Derivative of `field` along `axis` at `node`.
#[inline]
pub fn partial<T>(field: &[T], grid: &Grid, axis: Axis, node: usize) -> T
where
    T: Copy + Sub<Output = T> + Mul<f64, Output = T>,
{
    let (ix, iy) = grid.coords(node);
    let (i, n, stride) = match axis {
        Axis::X => (ix, grid.nx(), 1),
        Axis::Y => (iy, grid.ny(), grid.nx()),
    };
    let h = grid.dx();
    if i == 0 {
        (field[node + stride] - field[node]) * (1.0 / h)
    } else if i == n - 1 {
        (field[node] - field[node - stride]) * (1.0 / h)
    } else {
        (field[node + stride] - field[node - stride]) * (0.5 / h)
    }
}

/// `H[a][b] = d u_a / d X_b`, written into `out`.
pub fn gradient_into(u: &[Vec2], grid: &Grid, out: &mut [Tensor2]) {
    debug_assert_eq!(u.len(), grid.len());
    out.par_iter_mut().enumerate().for_each(|(node, h)| {
        let dx = partial(u, grid, Axis::X, node);
        let dy = partial(u, grid, Axis::Y, node);
        *h = Tensor2::from_columns(&[dx, dy]);
    });
}

pub fn gradient(u: &[Vec2], grid: &Grid) -> TensorField {
    let mut out = vec![Tensor2::zeros(); grid.len()];
    gradient_into(u, grid, &mut out);
    out
}

/// `(div T)_a = d T_ab / d X_b`, written into `out`.
pub fn divergence_into(t: &[Tensor2], grid: &Grid, out: &mut [Vec2]) {
    debug_assert_eq!(t.len(), grid.len());
    out.par_iter_mut().enumerate().for_each(|(node, d)| {
        let dx = partial(t, grid, Axis::X, node);
        let dy = partial(t, grid, Axis::Y, node);
        *d = dx.column(0) + dy.column(1);
    });
}

pub fn divergence(t: &[Tensor2], grid: &Grid) -> VectorField {
    let mut out = vec![Vec2::zeros(); grid.len()];
    divergence_into(t, grid, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d2q9::Edge;

    fn grid(w: f64, h: f64, dx: f64) -> Grid {
        Grid::new(w, h, dx, &[], &Edge::ALL).unwrap()
    }

    fn sample<T>(g: &Grid, f: impl Fn(Vec2) -> T) -> Vec<T> {
        (0..g.len()).map(|n| f(g.position(n))).collect()
    }

    #[test]
    fn constant_fields_have_zero_derivatives() {
        let g = grid(1.0, 0.5, 0.125);
        let h = gradient(&vec![Vec2::new(0.3, -2.0); g.len()], &g);
        assert!(h.iter().all(|h| *h == Tensor2::zeros()));
        let d = divergence(&vec![Tensor2::new(1.0, 2.0, 3.0, 4.0); g.len()], &g);
        assert!(d.iter().all(|d| *d == Vec2::zeros()));
    }

    #[test]
    fn affine_fields_are_exact() {
        let g = grid(1.0, 0.75, 0.25);
        let a = Tensor2::new(0.3, -0.7, 1.1, 0.25);
        let u = sample(&g, |x| a * x + Vec2::new(0.5, -0.5));
        for h in gradient(&u, &g) {
            assert!((h - a).abs().max() < 1e-14);
        }
        let b = 1.7;
        let t = sample(&g, |x| Tensor2::new(b * x.x, 0.0, 0.0, 0.0));
        for d in divergence(&t, &g) {
            assert!((d - Vec2::new(b, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn quadratic_hand_values() {
        let g = grid(1.0, 1.0, 0.25);
        let u = sample(&g, |x| Vec2::new(x.x * x.x, 0.0));
        let h = gradient(&u, &g);
        assert!((h[g.index(2, 1)][(0, 0)] - 1.0).abs() < 1e-15);
        assert!((h[g.index(0, 1)][(0, 0)] - 0.25).abs() < 1e-15);

        let t = sample(&g, |x| Tensor2::new(0.0, x.y * x.y, 0.0, 0.0));
        let d = divergence(&t, &g);
        assert!((d[g.index(1, 2)].x - 1.0).abs() < 1e-15);
        assert_eq!(d[g.index(1, 2)].y, 0.0);
    }

    #[test]
    fn divergence_of_gradient_of_linear_field_vanishes() {
        let g = grid(2.0, 1.0, 0.25);
        let u = sample(&g, |x| Vec2::new(2.0 * x.x - x.y, 0.5 * x.y));
        let d = divergence(&gradient(&u, &g), &g);
        assert!(d.iter().all(|d| d.norm() < 1e-13));
    }

    fn observed_orders(interior: bool) -> Vec<f64> {
        // Error of d/dx exp(x) cos(y) at a fixed physical location.
        let errs: Vec<f64> = [0.05, 0.025, 0.0125]
            .iter()
            .map(|&dx| {
                let g = grid(1.0, 1.0, dx);
                let u = sample(&g, |x| Vec2::new(x.x.exp() * x.y.cos(), 0.0));
                let h = gradient(&u, &g);
                let (ix, iy) = if interior {
                    ((0.5 / dx).round() as usize, (0.5 / dx).round() as usize)
                } else {
                    (0, (0.5 / dx).round() as usize)
                };
                let x = g.position(g.index(ix, iy));
                let exact = x.x.exp() * x.y.cos();
                (h[g.index(ix, iy)][(0, 0)] - exact).abs()
            })
            .collect();
        errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }

    #[test]
    fn convergence_orders() {
        for p in observed_orders(true) {
            assert!((p - 2.0).abs() < 0.1, "interior order {p}");
        }
        for p in observed_orders(false) {
            assert!((p - 1.0).abs() < 0.1, "boundary order {p}");
        }
    }
}
