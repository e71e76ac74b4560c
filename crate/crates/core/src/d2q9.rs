//! D2Q9 velocity set and the rectangular node grid.
//!
//! Direction numbering:
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```
//! Nodes sit on cell vertices, so boundary nodes lie exactly on the physical
//! boundary of the domain.

use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const Q: usize = 9;

/// Integer lattice offsets of the nine directions.
pub const DIRECTIONS: [[i32; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

pub const WEIGHTS: [f64; Q] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

pub const OPPOSITE: [usize; Q] = [0, 3, 4, 1, 2, 7, 8, 5, 6];

/// Index of the direction pointing the other way.
pub fn opposite(q: usize) -> Result<usize> {
    OPPOSITE
        .get(q)
        .copied()
        .ok_or(Error::DirectionOutOfRange(q))
}

/// D2Q9 scheme scaled to a lattice velocity `c = sqrt(3) * cs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeScheme {
    c: f64,
    cs: f64,
    velocities: [Vector2<f64>; Q],
}

impl LatticeScheme {
    pub fn new(cs: f64) -> Result<Self> {
        if !(cs > 0.0 && cs.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shear wave speed must be positive, got {cs}"
            )));
        }
        let c = 3f64.sqrt() * cs;
        let velocities = DIRECTIONS.map(|[x, y]| Vector2::new(f64::from(x) * c, f64::from(y) * c));
        Ok(Self { c, cs, velocities })
    }

    /// Lattice velocity `dx / dt`.
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn cs(&self) -> f64 {
        self.cs
    }

    pub fn cs2(&self) -> f64 {
        self.cs * self.cs
    }

    #[inline]
    pub fn velocity(&self, q: usize) -> Vector2<f64> {
        self.velocities[q]
    }

    pub fn velocities(&self) -> &[Vector2<f64>; Q] {
        &self.velocities
    }

    #[inline]
    pub fn weight(&self, q: usize) -> f64 {
        WEIGHTS[q]
    }

    pub fn opposite(&self, q: usize) -> Result<usize> {
        opposite(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn outward(self) -> [i32; 2] {
        match self {
            Edge::Left => [-1, 0],
            Edge::Right => [1, 0],
            Edge::Bottom => [0, -1],
            Edge::Top => [0, 1],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Classification of a node lying on the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryNode {
    pub kind: BcKind,
    /// Outward lattice normal, one of the eight non-rest directions.
    pub outward: [i32; 2],
    /// Edges the node belongs to; corners carry two.
    pub edges: [Option<Edge>; 2],
}

impl BoundaryNode {
    pub fn is_corner(&self) -> bool {
        self.edges[1].is_some()
    }

    /// Outward unit normal.
    pub fn normal(&self) -> Vector2<f64> {
        Vector2::new(f64::from(self.outward[0]), f64::from(self.outward[1])).normalize()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeClass {
    Interior,
    Boundary(BoundaryNode),
}

/// Regular vertex-centred grid over `[0, width] x [0, height]`.
#[derive(Debug, Clone)]
pub struct Grid {
    nx: usize,
    ny: usize,
    dx: f64,
    edge_kinds: [BcKind; 4],
    classes: Vec<NodeClass>,
    boundary: Vec<usize>,
}

fn node_count(extent: f64, dx: f64) -> Result<usize> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "domain extent must be positive, got {extent}"
        )));
    }
    let cells = extent / dx;
    let rounded = cells.round();
    if rounded < 1.0 || (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::NonCommensurate { extent, dx });
    }
    Ok(rounded as usize + 1)
}

impl Grid {
    pub fn new(
        width: f64,
        height: f64,
        dx: f64,
        dirichlet_edges: &[Edge],
        neumann_edges: &[Edge],
    ) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lattice spacing must be positive, got {dx}"
            )));
        }
        let nx = node_count(width, dx)?;
        let ny = node_count(height, dx)?;

        let mut assigned: [Option<BcKind>; 4] = [None; 4];
        for (edges, kind) in [
            (dirichlet_edges, BcKind::Dirichlet),
            (neumann_edges, BcKind::Neumann),
        ] {
            for &edge in edges {
                if assigned[edge.index()].replace(kind).is_some() {
                    return Err(Error::DoublyAssignedEdge(edge));
                }
            }
        }
        let mut edge_kinds = [BcKind::Neumann; 4];
        for edge in Edge::ALL {
            edge_kinds[edge.index()] = assigned[edge.index()].ok_or(Error::UnassignedEdge(edge))?;
        }

        let mut classes = Vec::with_capacity(nx * ny);
        let mut boundary = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let horizontal = if ix == 0 {
                    Some(Edge::Left)
                } else if ix == nx - 1 {
                    Some(Edge::Right)
                } else {
                    None
                };
                let vertical = if iy == 0 {
                    Some(Edge::Bottom)
                } else if iy == ny - 1 {
                    Some(Edge::Top)
                } else {
                    None
                };
                let class = match (horizontal, vertical) {
                    (None, None) => NodeClass::Interior,
                    (Some(e), None) | (None, Some(e)) => NodeClass::Boundary(BoundaryNode {
                        kind: edge_kinds[e.index()],
                        outward: e.outward(),
                        edges: [Some(e), None],
                    }),
                    (Some(a), Some(b)) => {
                        let kind = if edge_kinds[a.index()] == BcKind::Dirichlet
                            || edge_kinds[b.index()] == BcKind::Dirichlet
                        {
                            BcKind::Dirichlet
                        } else {
                            BcKind::Neumann
                        };
                        NodeClass::Boundary(BoundaryNode {
                            kind,
                            outward: [a.outward()[0], b.outward()[1]],
                            edges: [Some(a), Some(b)],
                        })
                    }
                };
                if matches!(class, NodeClass::Boundary(_)) {
                    boundary.push(classes.len());
                }
                classes.push(class);
            }
        }

        Ok(Self {
            nx,
            ny,
            dx,
            edge_kinds,
            classes,
            boundary,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> f64 {
        (self.nx - 1) as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        (self.ny - 1) as f64 * self.dx
    }

    pub fn edge_kind(&self, edge: Edge) -> BcKind {
        self.edge_kinds[edge.index()]
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    #[inline]
    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    /// Reference-configuration position of a node.
    pub fn position(&self, node: usize) -> Vector2<f64> {
        let (ix, iy) = self.coords(node);
        Vector2::new(ix as f64 * self.dx, iy as f64 * self.dx)
    }

    /// Node reached by moving `offset` lattice steps, if it exists.
    #[inline]
    pub fn offset(&self, node: usize, offset: [i32; 2]) -> Option<usize> {
        let (ix, iy) = self.coords(node);
        let x = ix as i64 + i64::from(offset[0]);
        let y = iy as i64 + i64::from(offset[1]);
        if x < 0 || y < 0 || x >= self.nx as i64 || y >= self.ny as i64 {
            None
        } else {
            Some(self.index(x as usize, y as usize))
        }
    }

    /// Streaming target of direction `q`, `None` if it leaves the grid.
    #[inline]
    pub fn neighbor(&self, node: usize, q: usize) -> Option<usize> {
        self.offset(node, DIRECTIONS[q])
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn boundary_node(&self, node: usize) -> Option<BoundaryNode> {
        match self.classes[node] {
            NodeClass::Boundary(b) => Some(b),
            NodeClass::Interior => None,
        }
    }

    /// Indices of all boundary nodes in ascending order.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Directions whose streaming target lies outside the grid.
    pub fn crossing_directions(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (1..Q).filter(move |&q| self.neighbor(node, q).is_none())
    }

    /// Nodes on one edge, ordered along the edge.
    pub fn edge_nodes(&self, edge: Edge) -> Vec<usize> {
        match edge {
            Edge::Left => (0..self.ny).map(|iy| self.index(0, iy)).collect(),
            Edge::Right => (0..self.ny).map(|iy| self.index(self.nx - 1, iy)).collect(),
            Edge::Bottom => (0..self.nx).map(|ix| self.index(ix, 0)).collect(),
            Edge::Top => (0..self.nx).map(|ix| self.index(ix, self.ny - 1)).collect(),
        }
    }
}
