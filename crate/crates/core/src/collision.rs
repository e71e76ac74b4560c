//! Moments, equilibrium, forcing, BGK collision and streaming.

use crate::constitutive::Tensor2;
use crate::d2q9::{Grid, LatticeScheme, DIRECTIONS, Q};
use crate::fdops::Vec2;

/// Zeroth, first and second moments of the populations at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub r: f64,
    pub j: Vec2,
    pub pi: Tensor2,
}

impl Moments {
    pub fn zero() -> Self {
        Self {
            r: 0.0,
            j: Vec2::zeros(),
            pi: Tensor2::zeros(),
        }
    }
}

/// Moments of `f`, with the half-step source correction on `j` only.
#[inline]
pub fn compute_moments(f: &[f64; Q], s: Vec2, dt: f64, scheme: &LatticeScheme) -> Moments {
    let mut m = Moments::zero();
    for (q, &fq) in f.iter().enumerate() {
        let c = scheme.velocity(q);
        m.r += fq;
        m.j += c * fq;
        m.pi += c * c.transpose() * fq;
    }
    m.j += s * (0.5 * dt);
    m
}

/// Second-order Hermite equilibrium reproducing `(r, j, Pi)` exactly for
/// symmetric `Pi`.
#[inline]
pub fn equilibrium(m: &Moments, scheme: &LatticeScheme) -> [f64; Q] {
    let cs2 = scheme.cs2();
    let a = m.pi - Tensor2::identity() * (m.r * cs2);
    let tr_a = a.trace();
    let mut feq = [0.0; Q];
    for (q, out) in feq.iter_mut().enumerate() {
        let c = scheme.velocity(q);
        let second = (c.dot(&(a * c)) - cs2 * tr_a) / (2.0 * cs2 * cs2);
        *out = scheme.weight(q) * (m.r + c.dot(&m.j) / cs2 + second);
    }
    feq
}

/// Source projection `w_q c_q . S / cs^2`.
#[inline]
pub fn forcing(s: Vec2, scheme: &LatticeScheme) -> [f64; Q] {
    let cs2 = scheme.cs2();
    let mut psi = [0.0; Q];
    for (q, out) in psi.iter_mut().enumerate() {
        *out = scheme.weight(q) * scheme.velocity(q).dot(&s) / cs2;
    }
    psi
}

/// BGK relaxation with half-corrected forcing. `tau` and `dt` share units.
#[inline]
pub fn collide(f: &[f64; Q], feq: &[f64; Q], psi: &[f64; Q], tau: f64, dt: f64) -> [f64; Q] {
    let omega = dt / tau;
    let force = (1.0 - 0.5 * omega) * dt;
    let mut out = [0.0; Q];
    for q in 0..Q {
        out[q] = f[q] - omega * (f[q] - feq[q]) + force * psi[q];
    }
    out
}

/// One population vector per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    data: Vec<[f64; Q]>,
}

impl Populations {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            data: vec![[0.0; Q]; nodes],
        }
    }

    pub fn filled(nodes: usize, value: [f64; Q]) -> Self {
        Self {
            data: vec![value; nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[[f64; Q]] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [[f64; Q]] {
        &mut self.data
    }

    pub fn total(&self) -> f64 {
        self.data.iter().flatten().sum()
    }
}

impl std::ops::Index<usize> for Populations {
    type Output = [f64; Q];

    fn index(&self, node: usize) -> &[f64; Q] {
        &self.data[node]
    }
}

impl std::ops::IndexMut<usize> for Populations {
    fn index_mut(&mut self, node: usize) -> &mut [f64; Q] {
        &mut self.data[node]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEdges {
    /// Populations leaving the grid are dropped; the slots they would have
    /// filled on the opposite side are left for the boundary rules.
    Open,
    Periodic,
}

/// Push streaming `next[x + c_q][q] = current[x][q]`.
pub fn stream(current: &Populations, next: &mut Populations, grid: &Grid, edges: StreamEdges) {
    debug_assert_eq!(current.len(), grid.len());
    debug_assert_eq!(next.len(), grid.len());
    let (nx, ny) = (grid.nx() as i64, grid.ny() as i64);
    for node in 0..grid.len() {
        let f = &current[node];
        next[node][0] = f[0];
        for q in 1..Q {
            let target = match edges {
                StreamEdges::Open => grid.neighbor(node, q),
                StreamEdges::Periodic => {
                    let (ix, iy) = grid.coords(node);
                    let x = (ix as i64 + i64::from(DIRECTIONS[q][0])).rem_euclid(nx);
                    let y = (iy as i64 + i64::from(DIRECTIONS[q][1])).rem_euclid(ny);
                    Some(grid.index(x as usize, y as usize))
                }
            };
            if let Some(t) = target {
                next[t][q] = f[q];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d2q9::{Edge, WEIGHTS};
    use proptest::prelude::*;

    fn scheme() -> LatticeScheme {
        LatticeScheme::new(1.3).unwrap()
    }

    #[test]
    fn moments_of_weights() {
        let s = LatticeScheme::new(1.0).unwrap();
        let m = compute_moments(&WEIGHTS, Vec2::zeros(), 0.1, &s);
        assert!((m.r - 1.0).abs() < 1e-15);
        assert!(m.j.norm() < 1e-15);
        assert!((m.pi - Tensor2::identity()).abs().max() < 1e-15);
    }

    #[test]
    fn half_force_correction() {
        let m = compute_moments(&[0.0; Q], Vec2::new(1.0, 0.0), 0.1, &scheme());
        assert_eq!(m.r, 0.0);
        assert_eq!(m.j, Vec2::new(0.05, 0.0));
        assert_eq!(m.pi, Tensor2::zeros());
    }

    #[test]
    fn equilibrium_of_rest_state_is_weights() {
        let s = scheme();
        let feq = equilibrium(
            &Moments {
                r: 1.0,
                j: Vec2::zeros(),
                pi: Tensor2::identity() * s.cs2(),
            },
            &s,
        );
        for q in 0..Q {
            assert!((feq[q] - WEIGHTS[q]).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_of_zero_moments_is_zero() {
        let feq = equilibrium(&Moments::zero(), &scheme());
        assert!(feq.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn collide_fixtures() {
        let f = [0.1, 0.2, -0.3, 0.4, 0.0, 0.05, -0.02, 0.3, 0.7];
        let feq = [0.3, -0.1, 0.2, 0.0, 0.1, 0.5, 0.01, -0.2, 0.4];
        let psi = [0.0, 0.5, -0.5, 0.25, 0.1, 0.2, 0.3, -0.1, 0.05];
        let zero = [0.0; Q];
        assert_eq!(collide(&f, &f, &zero, 0.55, 0.1), f);
        let dt = 0.1;
        let out = collide(&f, &feq, &psi, dt, dt);
        for q in 0..Q {
            assert!((out[q] - (feq[q] + 0.5 * psi[q] * dt)).abs() < 1e-15);
        }
        let tau = 0.37;
        let out = collide(&f, &feq, &zero, tau, dt);
        for q in 0..Q {
            let lhs = out[q] - feq[q];
            let rhs = (1.0 - dt / tau) * (f[q] - feq[q]);
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn collision_conserves_mass_without_forcing() {
        let s = scheme();
        let f = [0.1, 0.2, -0.3, 0.4, 0.0, 0.05, -0.02, 0.3, 0.7];
        let m = compute_moments(&f, Vec2::zeros(), 0.1, &s);
        let feq = equilibrium(&m, &s);
        let out = collide(&f, &feq, &[0.0; Q], 0.055, 0.1);
        let before: f64 = f.iter().sum();
        let after: f64 = out.iter().sum();
        assert!((before - after).abs() < 1e-14);
    }

    #[test]
    fn streaming_moves_populations() {
        let g = Grid::new(1.0, 1.0, 0.25, &[], &Edge::ALL).unwrap();
        let mut cur = Populations::zeros(g.len());
        cur[g.index(1, 2)][1] = 1.0;
        let mut next = Populations::zeros(g.len());
        stream(&cur, &mut next, &g, StreamEdges::Open);
        assert_eq!(next[g.index(2, 2)][1], 1.0);
        assert_eq!(next.total(), 1.0);
    }

    #[test]
    fn periodic_streaming_preserves_uniform_state() {
        let g = Grid::new(1.0, 0.5, 0.125, &[], &Edge::ALL).unwrap();
        let cur = Populations::filled(g.len(), WEIGHTS);
        let mut next = Populations::zeros(g.len());
        stream(&cur, &mut next, &g, StreamEdges::Periodic);
        assert_eq!(cur, next);
    }

    #[test]
    fn open_streaming_conserves_interior_transfers() {
        let g = Grid::new(1.0, 1.0, 0.125, &[], &Edge::ALL).unwrap();
        let mut cur = Populations::zeros(g.len());
        let mut expected = 0.0;
        for node in 0..g.len() {
            for q in 0..Q {
                let v = ((node * 31 + q * 7) % 13) as f64 - 6.0;
                cur[node][q] = v;
                if q == 0 || g.neighbor(node, q).is_some() {
                    expected += v;
                }
            }
        }
        let mut next = Populations::zeros(g.len());
        stream(&cur, &mut next, &g, StreamEdges::Open);
        assert!((next.total() - expected).abs() < 1e-12);
    }

    fn moments() -> impl Strategy<Value = Moments> {
        (
            -1.0f64..1.0,
            prop::array::uniform2(-1.0f64..1.0),
            prop::array::uniform3(-1.0f64..1.0),
        )
            .prop_map(|(r, [jx, jy], [a, b, c])| Moments {
                r,
                j: Vec2::new(jx, jy),
                pi: Tensor2::new(a, b, b, c),
            })
    }

    proptest! {
        #[test]
        fn moment_round_trip(m in moments(), cs in 0.2f64..3.0) {
            let s = LatticeScheme::new(cs).unwrap();
            let back = compute_moments(&equilibrium(&m, &s), Vec2::zeros(), 0.1, &s);
            prop_assert!((back.r - m.r).abs() < 1e-12);
            prop_assert!((back.j - m.j).norm() < 1e-12);
            prop_assert!((back.pi - m.pi).abs().max() < 1e-12);
        }

        #[test]
        fn forcing_moments(sx in -5.0f64..5.0, sy in -5.0f64..5.0, cs in 0.2f64..3.0) {
            let s = LatticeScheme::new(cs).unwrap();
            let f = Vec2::new(sx, sy);
            let psi = forcing(f, &s);
            let zeroth: f64 = psi.iter().sum();
            let first = (0..Q).fold(Vec2::zeros(), |acc, q| acc + s.velocity(q) * psi[q]);
            prop_assert!(zeroth.abs() < 1e-13);
            prop_assert!((first - f).norm() < 1e-12);
        }

        #[test]
        fn periodic_streaming_is_a_bijection(seed in 0u64..1000) {
            let g = Grid::new(0.75, 0.5, 0.125, &[], &Edge::ALL).unwrap();
            let mut cur = Populations::zeros(g.len());
            for node in 0..g.len() {
                for q in 0..Q {
                    cur[node][q] = ((seed as usize + node * 17 + q * 5) % 23) as f64 * 0.1;
                }
            }
            let mut next = Populations::zeros(g.len());
            stream(&cur, &mut next, &g, StreamEdges::Periodic);
            let mut a: Vec<f64> = cur.as_slice().iter().flatten().copied().collect();
            let mut b: Vec<f64> = next.as_slice().iter().flatten().copied().collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
