//! Structured grids over intervals, rectangles and masked disks.
//!
//! Every grid is a tensor-product lattice (one or two axes). Nodes are tagged
//! [`NodeClass::Interior`], [`NodeClass::Boundary`] or [`NodeClass::Exterior`];
//! Dirichlet data lives on boundary nodes and unknowns on interior nodes.
//!
//! Disks use a staircase mask: a node is interior iff it lies strictly inside
//! the circle, and boundary iff it is not interior but has an interior stencil
//! neighbour. Boundary values on a disk are taken at the radial projection of
//! the node onto the circle.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Geometric domain a grid is built over.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    Boundary,
    Exterior,
}

impl NodeClass {
    pub fn as_char(self) -> char {
        match self {
            NodeClass::Interior => 'I',
            NodeClass::Boundary => 'B',
            NodeClass::Exterior => 'E',
        }
    }
}

/// Interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Left,
    Right,
}

/// Rectangle side. Corners belong to exactly one side, claimed in the order
/// bottom, right, top, left: both bottom corners are `Bottom`, the top-right
/// corner is `Right` and the top-left corner is `Top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }
}

/// Boundary parameter of a boundary node.
///
/// Rectangle arclength runs counterclockwise along each side: bottom from
/// `x0`, right from `y0`, top from `x1`, left from `y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryParam {
    Endpoint(End),
    Side { side: Side, arclength: f64 },
    /// Polar angle in `[0, 2π)` about the disk centre.
    Angle(f64),
}

impl BoundaryParam {
    /// Point on the geometric boundary described by this parameter.
    pub fn to_coord(&self, domain: &Domain) -> [f64; 2] {
        match (*self, domain) {
            (BoundaryParam::Endpoint(End::Left), Domain::Interval { a, .. }) => [*a, 0.0],
            (BoundaryParam::Endpoint(End::Right), Domain::Interval { b, .. }) => [*b, 0.0],
            (BoundaryParam::Side { side, arclength }, Domain::Rectangle { x0, x1, y0, y1 }) => {
                match side {
                    Side::Bottom => [x0 + arclength, *y0],
                    Side::Right => [*x1, y0 + arclength],
                    Side::Top => [x1 - arclength, *y1],
                    Side::Left => [*x0, y1 - arclength],
                }
            }
            (BoundaryParam::Angle(theta), Domain::Disk { center, radius }) => [
                center[0] + radius * theta.cos(),
                center[1] + radius * theta.sin(),
            ],
            (param, domain) => panic!("boundary parameter {param:?} does not belong to {domain:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub node: usize,
    /// Point on the geometric boundary where data is evaluated.
    pub coord: [f64; 2],
    pub param: BoundaryParam,
}

/// One lattice axis, stored as midpoint and half-width so that coordinates of
/// symmetric domains are exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis {
    mid: f64,
    half: f64,
    n: usize,
}

impl Axis {
    fn coord(&self, i: usize) -> f64 {
        if i == 0 {
            self.mid - self.half
        } else if i + 1 == self.n {
            self.mid + self.half
        } else {
            let offset = (2 * i) as f64 - (self.n - 1) as f64;
            self.mid + self.half * offset / (self.n - 1) as f64
        }
    }

    fn spacing(&self) -> f64 {
        2.0 * self.half / (self.n - 1) as f64
    }
}

/// Immutable structured grid with node classification.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    axes: Vec<Axis>,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    boundary: Vec<BoundaryPoint>,
    /// node -> position in `interior`, `u32::MAX` otherwise
    local: Vec<u32>,
    /// per interior node: interior positions of the W, E, S, N neighbours
    stencil: Vec<[u32; 4]>,
}

pub(crate) const NOT_INTERIOR: u32 = u32::MAX;

impl Grid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn nx(&self) -> usize {
        self.axes[0].n
    }

    /// Number of rows; 1 for one-dimensional grids.
    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.n)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Spacing per axis; the second entry repeats the first in 1D.
    pub fn spacing(&self) -> [f64; 2] {
        let hx = self.axes[0].spacing();
        [hx, self.axes.get(1).map_or(hx, Axis::spacing)]
    }

    /// Smallest spacing over all axes.
    pub fn h(&self) -> f64 {
        let [hx, hy] = self.spacing();
        hx.min(hy)
    }

    pub fn origin(&self) -> [f64; 2] {
        [self.axes[0].coord(0), self.axes.get(1).map_or(0.0, |a| a.coord(0))]
    }

    /// Lattice extent along each axis.
    pub fn extent(&self) -> [f64; 2] {
        let wx = 2.0 * self.axes[0].half;
        [wx, self.axes.get(1).map_or(wx, |a| 2.0 * a.half)]
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.classes[node]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx(), node / self.nx())
    }

    pub fn coord(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.ij(node);
        [self.axes[0].coord(i), self.axes.get(1).map_or(0.0, |a| a.coord(j))]
    }

    /// Interior nodes in ascending node order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Position of `node` among the interior nodes.
    pub fn interior_index(&self, node: usize) -> Option<usize> {
        match self.local[node] {
            NOT_INTERIOR => None,
            k => Some(k as usize),
        }
    }

    /// Interior positions of the west, east, south and north neighbours of the
    /// `k`-th interior node; `None` where the neighbour is a boundary node or
    /// the axis does not exist.
    pub(crate) fn raw_stencil(&self) -> &[[u32; 4]] {
        &self.stencil
    }

    /// Boundary nodes in their documented order (see [`Grid::boundary_points`]).
    pub fn boundary_nodes(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.boundary.iter().map(|p| p.node)
    }

    /// Every boundary node exactly once.
    ///
    /// Ordering: intervals left then right; rectangles counterclockwise from
    /// the bottom-left corner; disks by increasing angle.
    pub fn boundary_points(&self) -> &[BoundaryPoint] {
        &self.boundary
    }

    /// Stencil neighbours that exist in the lattice, as (node, axis) pairs.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (i, j) = self.ij(node);
        let nx = self.nx();
        let ny = self.ny();
        let mut out = [(usize::MAX, 0); 4];
        if i > 0 {
            out[0] = (node - 1, 0);
        }
        if i + 1 < nx {
            out[1] = (node + 1, 0);
        }
        if self.dim() == 2 {
            if j > 0 {
                out[2] = (node - nx, 1);
            }
            if j + 1 < ny {
                out[3] = (node + nx, 1);
            }
        }
        out.into_iter().filter(|&(n, _)| n != usize::MAX)
    }

    /// Whether the node belongs to the closed domain (interior or boundary).
    pub fn in_domain(&self, node: usize) -> bool {
        self.classes[node] != NodeClass::Exterior
    }

    /// Volume element `h^d`.
    pub fn cell_volume(&self) -> f64 {
        let [hx, hy] = self.spacing();
        if self.dim() == 1 {
            hx
        } else {
            hx * hy
        }
    }

    /// Quadrature weight of a node: `h^d` inside, halved on boundary nodes and
    /// quartered on rectangle corners; zero outside the domain.
    pub fn quadrature_weight(&self, node: usize) -> f64 {
        let v = self.cell_volume();
        match self.classes[node] {
            NodeClass::Interior => v,
            NodeClass::Exterior => 0.0,
            NodeClass::Boundary => {
                if let Domain::Rectangle { .. } = self.domain {
                    let (i, j) = self.ij(node);
                    let corner_x = i == 0 || i + 1 == self.nx();
                    let corner_y = j == 0 || j + 1 == self.ny();
                    if corner_x && corner_y {
                        return 0.25 * v;
                    }
                }
                0.5 * v
            }
        }
    }

    /// Node classification export: a header line followed by one row of
    /// class characters per grid row, bottom row first.
    pub fn export_mask(&self) -> String {
        let [hx, hy] = self.spacing();
        let [x0, y0] = self.origin();
        let mut s = String::new();
        if self.dim() == 1 {
            let _ = writeln!(s, "# dims={} h={} origin={}", self.nx(), hx, x0);
        } else {
            let _ = writeln!(
                s,
                "# dims={},{} h={},{} origin={},{}",
                self.nx(),
                self.ny(),
                hx,
                hy,
                x0,
                y0
            );
        }
        for row in self.classes.chunks(self.nx()) {
            s.extend(row.iter().map(|c| c.as_char()));
            s.push('\n');
        }
        s
    }

    /// Structural equality of two grids (same lattice and classification).
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.axes == other.axes && self.classes == other.classes
    }

    fn finish(domain: Domain, axes: Vec<Axis>, classes: Vec<NodeClass>, boundary: Vec<BoundaryPoint>) -> Self {
        let mut local = vec![NOT_INTERIOR; classes.len()];
        let mut interior = Vec::new();
        for (node, class) in classes.iter().enumerate() {
            if *class == NodeClass::Interior {
                local[node] = interior.len() as u32;
                interior.push(node);
            }
        }
        let nx = axes[0].n;
        let two_d = axes.len() == 2;
        let stencil = interior
            .iter()
            .map(|&node| {
                let mut s = [NOT_INTERIOR; 4];
                s[0] = local[node - 1];
                s[1] = local[node + 1];
                if two_d {
                    s[2] = local[node - nx];
                    s[3] = local[node + nx];
                }
                s
            })
            .collect();
        Grid {
            domain,
            axes,
            classes,
            interior,
            boundary,
            local,
            stencil,
        }
    }
}

/// Builds a grid with `n` nodes per axis over the domain (for disks, over its
/// bounding box).
pub fn build_grid(domain: &Domain, n: usize) -> Result<Grid> {
    if n < 3 {
        return Err(Error::InvalidDomain(format!("need at least 3 nodes per axis, got {n}")));
    }
    if n > u32::MAX as usize / n {
        return Err(Error::InvalidDomain(format!("grid with {n} nodes per axis is too large")));
    }
    match *domain {
        Domain::Interval { a, b } => {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidDomain(format!("interval [{a}, {b}] has no length")));
            }
            let axis = Axis { mid: 0.5 * (a + b), half: 0.5 * (b - a), n };
            let mut classes = vec![NodeClass::Interior; n];
            classes[0] = NodeClass::Boundary;
            classes[n - 1] = NodeClass::Boundary;
            let boundary = vec![
                BoundaryPoint { node: 0, coord: [a, 0.0], param: BoundaryParam::Endpoint(End::Left) },
                BoundaryPoint { node: n - 1, coord: [b, 0.0], param: BoundaryParam::Endpoint(End::Right) },
            ];
            Ok(Grid::finish(domain.clone(), vec![axis], classes, boundary))
        }
        Domain::Rectangle { x0, x1, y0, y1 } => {
            let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
            if !(finite && x1 > x0 && y1 > y0) {
                return Err(Error::InvalidDomain(format!(
                    "rectangle [{x0}, {x1}]x[{y0}, {y1}] has zero area"
                )));
            }
            let ax = Axis { mid: 0.5 * (x0 + x1), half: 0.5 * (x1 - x0), n };
            let ay = Axis { mid: 0.5 * (y0 + y1), half: 0.5 * (y1 - y0), n };
            let mut classes = vec![NodeClass::Interior; n * n];
            for j in 0..n {
                for i in 0..n {
                    if i == 0 || j == 0 || i + 1 == n || j + 1 == n {
                        classes[j * n + i] = NodeClass::Boundary;
                    }
                }
            }
            let mut boundary = Vec::with_capacity(4 * (n - 1));
            let mut push = |i: usize, j: usize, side: Side| {
                let (x, y) = (ax.coord(i), ay.coord(j));
                let arclength = match side {
                    Side::Bottom => x - x0,
                    Side::Right => y - y0,
                    Side::Top => x1 - x,
                    Side::Left => y1 - y,
                };
                boundary.push(BoundaryPoint {
                    node: j * n + i,
                    coord: [x, y],
                    param: BoundaryParam::Side { side, arclength },
                });
            };
            for i in 0..n {
                push(i, 0, Side::Bottom);
            }
            for j in 1..n {
                push(n - 1, j, Side::Right);
            }
            for i in (0..n - 1).rev() {
                push(i, n - 1, Side::Top);
            }
            for j in (1..n - 1).rev() {
                push(0, j, Side::Left);
            }
            Ok(Grid::finish(domain.clone(), vec![ax, ay], classes, boundary))
        }
        Domain::Disk { center, radius } => {
            let finite = center.iter().all(|v| v.is_finite()) && radius.is_finite();
            if !(finite && radius > 0.0) {
                return Err(Error::InvalidDomain(format!("disk radius {radius} must be positive")));
            }
            let ax = Axis { mid: center[0], half: radius, n };
            let ay = Axis { mid: center[1], half: radius, n };
            // In doubled integer offsets from the centre the radius is exactly
            // n - 1, so the inside test is exact and reflection symmetric.
            let off = |i: usize| (2 * i) as i64 - (n as i64 - 1);
            let r2 = (n as i64 - 1).pow(2);
            let inside = |i: usize, j: usize| {
                let (di, dj) = (off(i), off(j));
                di * di + dj * dj < r2
            };
            let mut classes = vec![NodeClass::Exterior; n * n];
            for j in 0..n {
                for i in 0..n {
                    if inside(i, j) {
                        classes[j * n + i] = NodeClass::Interior;
                    }
                }
            }
            let mut boundary = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let node = j * n + i;
                    if classes[node] == NodeClass::Interior {
                        continue;
                    }
                    let touches = (i > 0 && inside(i - 1, j))
                        || (i + 1 < n && inside(i + 1, j))
                        || (j > 0 && inside(i, j - 1))
                        || (j + 1 < n && inside(i, j + 1));
                    if touches {
                        classes[node] = NodeClass::Boundary;
                        let (dx, dy) = (off(i) as f64, off(j) as f64);
                        let mut theta = dy.atan2(dx);
                        if theta < 0.0 {
                            theta += TAU;
                        }
                        if theta >= TAU {
                            theta = 0.0;
                        }
                        let param = BoundaryParam::Angle(theta);
                        boundary.push(BoundaryPoint { node, coord: param.to_coord(domain), param });
                    }
                }
            }
            if boundary.is_empty() {
                return Err(Error::InvalidDomain(format!(
                    "disk of radius {radius} contains no interior node at n={n}"
                )));
            }
            boundary.sort_by(|p, q| {
                let (BoundaryParam::Angle(a), BoundaryParam::Angle(b)) = (p.param, q.param) else {
                    unreachable!()
                };
                a.total_cmp(&b).then(p.node.cmp(&q.node))
            });
            Ok(Grid::finish(domain.clone(), vec![ax, ay], classes, boundary))
        }
    }
}
