//! Uniform grid on the unit square, its boundary parametrization, and the
//! node masks used for the subdomain Ω′ and the Runge disk D.
//!
//! Nodes are indexed row-major: node `(i, j)` sits at `(i h, j h)` and has
//! id `j * n + i`. The boundary is walked counterclockwise from the origin,
//! so the arclength of the k-th boundary node is `k h` and the last one sits
//! at `4 - h`.

use crate::error::{Error, Result};

/// A point in the plane.
pub type Point = [f64; 2];

/// Smallest admissible number of nodes per side.
pub const MIN_NODES: usize = 8;

// Membership tests use a small slack so that nodes landing on a mask edge
// in exact arithmetic are not lost to rounding.
const EDGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Grid2D {
    n: usize,
    h: f64,
    boundary_order: Vec<usize>,
    boundary_pos: Vec<Option<usize>>,
}

impl Grid2D {
    /// Builds an `n × n` node grid over `[0, 1]²`.
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Config(format!(
                "grid.n must be at least {MIN_NODES}, got {n}"
            )));
        }
        let h = exact_mesh_width(n);
        let m = n - 1;
        let mut order = Vec::with_capacity(4 * m);
        order.extend(0..m);
        order.extend((0..m).map(|j| j * n + m));
        order.extend((1..=m).rev().map(|i| m * n + i));
        order.extend((1..=m).rev().map(|j| j * n));
        let mut pos = vec![None; n * n];
        for (k, &id) in order.iter().enumerate() {
            pos[id] = Some(k);
        }
        Ok(Self {
            n,
            h,
            boundary_order: order,
            boundary_pos: pos,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh width `1 / (n - 1)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn num_interior(&self) -> usize {
        (self.n - 2) * (self.n - 2)
    }

    pub fn perimeter(&self) -> f64 {
        4.0
    }

    #[inline]
    pub fn id(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, id: usize) -> (usize, usize) {
        (id % self.n, id / self.n)
    }

    /// Coordinate of lattice index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    #[inline]
    pub fn point(&self, id: usize) -> Point {
        let (i, j) = self.ij(id);
        [self.coord(i), self.coord(j)]
    }

    #[inline]
    pub fn is_boundary(&self, id: usize) -> bool {
        self.boundary_pos[id].is_some()
    }

    /// Position of a node in [`boundary_order`](Self::boundary_order), if it is a boundary node.
    pub fn boundary_position(&self, id: usize) -> Option<usize> {
        self.boundary_pos[id]
    }

    /// Boundary node ids, counterclockwise from `(0, 0)`.
    pub fn boundary_order(&self) -> &[usize] {
        &self.boundary_order
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary_order.len()
    }

    /// Arclength of the k-th boundary node.
    pub fn arclength(&self, k: usize) -> f64 {
        k as f64 / (self.n - 1) as f64
    }

    pub fn interior_ids(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (1..n - 1).flat_map(move |j| (1..n - 1).map(move |i| j * n + i))
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.num_nodes())
            .map(|id| {
                let [x, y] = self.point(id);
                f(x, y)
            })
            .collect()
    }

    /// Samples `f(x, y)` at the boundary nodes in boundary order.
    pub fn sample_boundary(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.boundary_order
            .iter()
            .map(|&id| {
                let [x, y] = self.point(id);
                f(x, y)
            })
            .collect()
    }

    /// Restriction of a nodal vector to the boundary, in boundary order.
    pub fn trace(&self, values: &[f64]) -> Vec<f64> {
        self.boundary_order.iter().map(|&id| values[id]).collect()
    }
}

/// Picks `h` so that `h * (n - 1) == 1` holds in floating point whenever a
/// neighbour of the rounded quotient allows it.
fn exact_mesh_width(n: usize) -> f64 {
    let m = (n - 1) as f64;
    let h = 1.0 / m;
    [h, h.next_up(), h.next_down()]
        .into_iter()
        .find(|c| c * m == 1.0)
        .unwrap_or(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskKind {
    Rectangle { lo: Point, hi: Point },
    Disk { center: Point, radius: f64 },
}

/// A set of grid nodes, stored both as a membership table and as a sorted id list.
#[derive(Debug, Clone)]
pub struct SubdomainMask {
    member: Vec<bool>,
    nodes: Vec<usize>,
    kind: MaskKind,
}

impl SubdomainMask {
    /// Closed box `[lo, hi]` strictly inside the square.
    pub fn rect(grid: &Grid2D, lo: Point, hi: Point) -> Result<Self> {
        for c in 0..2 {
            if !(lo[c] < hi[c]) {
                return Err(Error::Config(format!(
                    "degenerate box: lo {lo:?} must be below hi {hi:?}"
                )));
            }
            if !(lo[c] > 0.0 && hi[c] < 1.0) {
                return Err(Error::Config(format!(
                    "box [{lo:?}, {hi:?}] must lie strictly inside (0,1)^2"
                )));
            }
        }
        Ok(Self::from_predicate(
            grid,
            MaskKind::Rectangle { lo, hi },
            |[x, y]| {
                x >= lo[0] - EDGE_SLACK
                    && x <= hi[0] + EDGE_SLACK
                    && y >= lo[1] - EDGE_SLACK
                    && y <= hi[1] + EDGE_SLACK
            },
        ))
    }

    /// Closed disk `|x - center| <= radius`, compactly inside the square and
    /// at least four mesh widths in radius.
    pub fn disk(grid: &Grid2D, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0)
            || center
                .iter()
                .any(|&c| c - radius <= 0.0 || c + radius >= 1.0)
        {
            return Err(Error::Config(format!(
                "disk B({center:?}, {radius}) must lie compactly inside (0,1)^2"
            )));
        }
        if radius < 4.0 * grid.h() {
            return Err(Error::Config(format!(
                "disk radius {radius} is below 4h = {}",
                4.0 * grid.h()
            )));
        }
        let r2 = radius * radius;
        Ok(Self::from_predicate(
            grid,
            MaskKind::Disk { center, radius },
            |[x, y]| {
                let (dx, dy) = (x - center[0], y - center[1]);
                dx * dx + dy * dy <= r2 * (1.0 + EDGE_SLACK)
            },
        ))
    }

    /// Every node of the grid, boundary included.
    pub fn full(grid: &Grid2D) -> Self {
        Self::from_predicate(
            grid,
            MaskKind::Rectangle {
                lo: [0.0, 0.0],
                hi: [1.0, 1.0],
            },
            |_| true,
        )
    }

    fn from_predicate(grid: &Grid2D, kind: MaskKind, pred: impl Fn(Point) -> bool) -> Self {
        let member: Vec<bool> = (0..grid.num_nodes())
            .map(|id| pred(grid.point(id)))
            .collect();
        let nodes = member
            .iter()
            .enumerate()
            .filter_map(|(id, &m)| m.then_some(id))
            .collect();
        Self {
            member,
            nodes,
            kind,
        }
    }

    #[inline]
    pub fn contains(&self, id: usize) -> bool {
        self.member[id]
    }

    /// Member node ids in increasing order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    /// Membership table indexed by node id.
    pub fn membership(&self) -> &[bool] {
        &self.member
    }
}
