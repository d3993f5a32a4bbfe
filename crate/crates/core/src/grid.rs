//! Regular lattices on `[-1, 1]^2` restricted to a domain, with wide-stencil
//! neighborhoods and the interior / pinned node partition.
//!
//! Lattice points inside the domain are the candidates for interior nodes.
//! Lattice points outside the domain that touch an inside point (8-connectivity)
//! form the boundary layer, pinned to zero. For the square this layer is
//! exactly the frame of the box.

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};

const NO_NODE: usize = usize::MAX;

/// Number of sampled unit directions used for the directional error.
pub const DIRECTION_SAMPLES: usize = 360;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Pinned,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Interior => "interior",
            NodeKind::Pinned => "pinned",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    domain: DomainSpec,
    n: usize,
    stencil_radius: usize,
    h: f64,
    nodes: Vec<Point>,
    lattice: Vec<[usize; 2]>,
    node_at: Vec<usize>,
    pinned: Vec<Option<f64>>,
    interior: Vec<usize>,
    // CSR neighbor lists, empty for pinned nodes.
    offsets: Vec<usize>,
    neighbor_index: Vec<usize>,
    neighbor_dist: Vec<f64>,
    // Positions (within a neighbor list) of point-symmetric neighbor pairs.
    pair_offsets: Vec<usize>,
    pairs: Vec<[u16; 2]>,
}

/// Lattice coordinate of index `k` on an `n`-point axis over `[-1, 1]`.
///
/// Written as a single division so that representable coordinates such as
/// `0.5` come out exact.
pub fn lattice_coord(k: usize, n: usize) -> f64 {
    (2.0 * k as f64 - (n - 1) as f64) / (n - 1) as f64
}

pub fn build_grid(domain: &DomainSpec, n: usize, stencil_radius: usize) -> Result<Grid> {
    if n < 5 {
        return Err(Error::InvalidGrid(format!("n must be at least 5, got {n}")));
    }
    if stencil_radius < 1 {
        return Err(Error::InvalidGrid("stencil radius must be at least 1".into()));
    }
    if stencil_radius >= n {
        return Err(Error::InvalidGrid(format!(
            "stencil radius {stencil_radius} exceeds the lattice size {n}"
        )));
    }
    let coords: Vec<f64> = (0..n).map(|k| lattice_coord(k, n)).collect();
    let inside: Vec<bool> = (0..n * n)
        .map(|k| domain.contains([coords[k % n], coords[k / n]]))
        .collect();

    for k in 0..n {
        for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
            if inside[idx] {
                return Err(Error::InvalidDomain(
                    "domain touches the frame of the computational box".into(),
                ));
            }
        }
    }

    let touches_inside = |ix: usize, iy: usize| {
        let (x0, x1) = (ix.saturating_sub(1), (ix + 1).min(n - 1));
        let (y0, y1) = (iy.saturating_sub(1), (iy + 1).min(n - 1));
        (y0..=y1).any(|y| (x0..=x1).any(|x| inside[y * n + x]))
    };

    let mut nodes = Vec::new();
    let mut lattice = Vec::new();
    let mut pinned = Vec::new();
    let mut node_at = vec![NO_NODE; n * n];
    for iy in 0..n {
        for ix in 0..n {
            let k = iy * n + ix;
            let kind = if inside[k] {
                None
            } else if touches_inside(ix, iy) {
                Some(0.0)
            } else {
                continue;
            };
            node_at[k] = nodes.len();
            nodes.push([coords[ix], coords[iy]]);
            lattice.push([ix, iy]);
            pinned.push(kind);
        }
    }

    let h = 2.0 / (n - 1) as f64;
    for p in domain.punctures() {
        let ix = ((p[0] + 1.0) / h).round() as usize;
        let iy = ((p[1] + 1.0) / h).round() as usize;
        let node = node_at[iy.min(n - 1) * n + ix.min(n - 1)];
        if node != NO_NODE {
            pinned[node] = Some(0.0);
        }
    }

    let mut grid = Grid {
        domain: domain.clone(),
        n,
        stencil_radius,
        h,
        nodes,
        lattice,
        node_at,
        pinned,
        interior: Vec::new(),
        offsets: Vec::new(),
        neighbor_index: Vec::new(),
        neighbor_dist: Vec::new(),
        pair_offsets: Vec::new(),
        pairs: Vec::new(),
    };
    grid.rebuild_neighbors()?;
    if grid.interior.is_empty() {
        return Err(Error::NoInteriorNodes(n));
    }
    Ok(grid)
}

impl Grid {
    fn rebuild_neighbors(&mut self) -> Result<()> {
        let (n, s) = (self.n, self.stencil_radius as isize);
        let m = self.nodes.len();
        self.interior.clear();
        self.offsets.clear();
        self.neighbor_index.clear();
        self.neighbor_dist.clear();
        self.pair_offsets.clear();
        self.pairs.clear();
        self.offsets.push(0);
        self.pair_offsets.push(0);

        let mut local_offsets: Vec<[isize; 2]> = Vec::new();
        for i in 0..m {
            if self.pinned[i].is_none() {
                self.interior.push(i);
                let [ix, iy] = self.lattice[i];
                local_offsets.clear();
                for b in -s..=s {
                    for a in -s..=s {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        let (x, y) = (ix as isize + a, iy as isize + b);
                        if x < 0 || y < 0 || x >= n as isize || y >= n as isize {
                            continue;
                        }
                        let j = self.node_at[y as usize * n + x as usize];
                        if j == NO_NODE {
                            continue;
                        }
                        let xi = self.nodes[i];
                        let xj = self.nodes[j];
                        self.neighbor_index.push(j);
                        self.neighbor_dist.push((xi[0] - xj[0]).hypot(xi[1] - xj[1]));
                        local_offsets.push([a, b]);
                    }
                }
                let count = local_offsets.len();
                if count < 4 {
                    return Err(Error::InvalidGrid(format!(
                        "interior node {i} has only {count} neighbors"
                    )));
                }
                for p in 0..count {
                    let [a, b] = local_offsets[p];
                    if let Some(q) = local_offsets[p + 1..]
                        .iter()
                        .position(|&o| o == [-a, -b])
                    {
                        self.pairs.push([p as u16, (p + 1 + q) as u16]);
                    }
                }
            }
            self.offsets.push(self.neighbor_index.len());
            self.pair_offsets.push(self.pairs.len());
        }
        Ok(())
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lattice points per axis.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn stencil_radius(&self) -> usize {
        self.stencil_radius
    }

    /// Lattice spacing `h = 2 / (n - 1)`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    /// Integer lattice position `(ix, iy)` of node `i`.
    pub fn lattice_position(&self, i: usize) -> [usize; 2] {
        self.lattice[i]
    }

    /// Node sitting at lattice position `(ix, iy)`, if that point belongs to the grid.
    pub fn node_at(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix >= self.n || iy >= self.n {
            return None;
        }
        match self.node_at[iy * self.n + ix] {
            NO_NODE => None,
            j => Some(j),
        }
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        if self.pinned[i].is_some() {
            NodeKind::Pinned
        } else {
            NodeKind::Interior
        }
    }

    pub fn pinned_value(&self, i: usize) -> Option<f64> {
        self.pinned[i]
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i].is_some()
    }

    /// Interior node indices in ascending order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn pinned(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pinned
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }

    /// Neighbor indices (ascending) and their distances for node `i`.
    pub fn neighbors(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.neighbor_index[r.clone()], &self.neighbor_dist[r])
    }

    pub fn neighbor_count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Position pairs `(p, q)`, `p < q`, inside the neighbor list of `i` whose
    /// offsets are point reflections of each other.
    pub fn opposite_pairs(&self, i: usize) -> &[[u16; 2]] {
        &self.pairs[self.pair_offsets[i]..self.pair_offsets[i + 1]]
    }

    /// Grid node closest to `p` (ties to the smaller index).
    pub fn nearest_node(&self, p: Point) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, x) in self.nodes.iter().enumerate() {
            let d = (x[0] - p[0]).hypot(x[1] - p[1]);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    pub fn with_pinned(&self, assignments: &[(usize, f64)]) -> Result<Grid> {
        set_pinned(self, assignments)
    }
}

/// Moves the listed nodes into the pinned set with the given values.
pub fn set_pinned(grid: &Grid, assignments: &[(usize, f64)]) -> Result<Grid> {
    let mut out = grid.clone();
    if assignments.is_empty() {
        return Ok(out);
    }
    let mut changed = false;
    for &(i, v) in assignments {
        if i >= out.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: out.len(),
            });
        }
        if !v.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite pinned value for node {i}")));
        }
        changed |= out.pinned[i].is_none();
        out.pinned[i] = Some(v);
    }
    if changed {
        out.rebuild_neighbors()?;
    }
    Ok(out)
}

/// Spatial and directional stencil errors of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilErrors {
    /// Largest neighbor distance.
    pub dx: f64,
    /// Largest distance from a unit direction to the nearest normalized offset.
    pub dtheta: f64,
}

/// Errors for a list of offsets `x_i - x_j`.
pub fn stencil_errors(offsets: &[Point]) -> StencilErrors {
    let dx = offsets
        .iter()
        .map(|v| v[0].hypot(v[1]))
        .fold(0.0, f64::max);
    let units: Vec<Point> = offsets
        .iter()
        .map(|v| {
            let r = v[0].hypot(v[1]);
            [v[0] / r, v[1] / r]
        })
        .collect();
    let mut dtheta = 0.0_f64;
    for k in 0..DIRECTION_SAMPLES {
        let t = (k as f64 + 0.5) * std::f64::consts::TAU / DIRECTION_SAMPLES as f64;
        let (sy, sx) = t.sin_cos();
        let nearest = units
            .iter()
            .map(|u| (sx - u[0]).hypot(sy - u[1]))
            .fold(f64::INFINITY, f64::min);
        dtheta = dtheta.max(nearest);
    }
    StencilErrors { dx, dtheta }
}

/// Stencil errors of every interior node, as `(node, errors)`.
pub fn grid_errors(grid: &Grid) -> Vec<(usize, StencilErrors)> {
    grid.interior()
        .iter()
        .map(|&i| {
            let xi = grid.node(i);
            let offsets: Vec<Point> = grid
                .neighbors(i)
                .0
                .iter()
                .map(|&j| {
                    let xj = grid.node(j);
                    [xi[0] - xj[0], xi[1] - xj[1]]
                })
                .collect();
            (i, stencil_errors(&offsets))
        })
        .collect()
}
