use std::f64::consts::PI;

use super::DomainSpec;
use crate::error::{LakeError, Result};
use crate::vec2::Vec2;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    OuterBoundary,
    IslandBoundary(usize),
}

impl NodeTag {
    pub fn is_boundary(self) -> bool {
        !matches!(self, NodeTag::Interior)
    }
}

/// Logical structure of the node set.
///
/// Cartesian grids hold `(nx + 1) × (ny + 1)` nodes including the boundary.
/// Polar grids hold rings `r_j = r0 + j·dr`, `j = 0..=nr`, each with `ntheta`
/// nodes; on the disk ring 0 degenerates to a single centre node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    Cartesian { nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64 },
    Polar { nr: usize, ntheta: usize, r0: f64, dr: f64, dtheta: f64, center: bool },
}

/// A link between two nodes of the flux-form stencil. `conductance` is the
/// dual-face length divided by the node distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

/// Tensor-product cubic interpolation stencil: 16 node indices and weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub idx: [usize; 16],
    pub w: [f64; 16],
}

impl Stencil {
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for s in 0..16 {
            acc += self.w[s] * values[self.idx[s]];
        }
        acc
    }

    #[inline]
    pub fn bounds(&self, values: &[f64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in &self.idx {
            lo = lo.min(values[i]);
            hi = hi.max(values[i]);
        }
        (lo, hi)
    }
}

#[inline]
fn lagrange4(t: f64) -> [f64; 4] {
    let t1 = t - 1.0;
    let t2 = t - 2.0;
    let t3 = t - 3.0;
    [-t1 * t2 * t3 / 6.0, t * t2 * t3 / 2.0, -t * t1 * t3 / 2.0, t * t1 * t2 / 6.0]
}

/// First node and weights of a 4-point stencil on nodes `0..=n`, shifted
/// inwards near the ends so that it never extrapolates.
#[inline]
fn clamped_axis(pos: f64, n: usize) -> (usize, [f64; 4]) {
    let pos = pos.clamp(0.0, n as f64);
    let i0 = (pos.floor() as usize).clamp(1, n - 2);
    let start = i0 - 1;
    (start, lagrange4(pos - start as f64))
}

/// Structured node set with dual-cell measures and boundary tags.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: DomainSpec,
    layout: Layout,
    points: Vec<Vec2>,
    measures: Vec<f64>,
    tags: Vec<NodeTag>,
    edges: Vec<Edge>,
    normals: Vec<(usize, Vec2)>,
}

/// Build the grid for `spec` with per-axis cell counts: `(nx, ny)` for
/// rectangles, `(nr, ntheta)` for the disk and the annulus.
pub fn build_grid(spec: DomainSpec, resolution: [usize; 2]) -> Result<Grid> {
    Grid::new(spec, resolution)
}

impl Grid {
    pub fn new(spec: DomainSpec, resolution: [usize; 2]) -> Result<Grid> {
        spec.validate()?;
        let axes = match spec {
            DomainSpec::Rectangle { .. } => ["x", "y"],
            _ => ["r", "theta"],
        };
        for (n, axis) in resolution.iter().zip(axes) {
            if *n < MIN_RESOLUTION {
                return Err(LakeError::Resolution { axis, got: *n, min: MIN_RESOLUTION });
            }
        }
        match spec {
            DomainSpec::Rectangle { width, height } => Ok(Self::cartesian(spec, width, height, resolution)),
            DomainSpec::UnitDisk => Self::polar(spec, 0.0, resolution),
            DomainSpec::Annulus { inner_radius } => Self::polar(spec, inner_radius, resolution),
        }
    }

    fn cartesian(domain: DomainSpec, width: f64, height: f64, [nx, ny]: [usize; 2]) -> Grid {
        let (hx, hy) = (width / nx as f64, height / ny as f64);
        let (x0, y0) = (-0.5 * width, -0.5 * height);
        let layout = Layout::Cartesian { nx, ny, x0, y0, hx, hy };
        let n = (nx + 1) * (ny + 1);
        let mut points = Vec::with_capacity(n);
        let mut measures = Vec::with_capacity(n);
        let mut tags = Vec::with_capacity(n);
        let half = |k: usize, m: usize| if k == 0 || k == m { 0.5 } else { 1.0 };
        for i in 0..=nx {
            for j in 0..=ny {
                // Snap the far edge so boundary nodes sit exactly on it.
                let x = if i == nx { -x0 } else { x0 + i as f64 * hx };
                let y = if j == ny { -y0 } else { y0 + j as f64 * hy };
                points.push(Vec2::new(x, y));
                measures.push(hx * hy * half(i, nx) * half(j, ny));
                let boundary = i == 0 || i == nx || j == 0 || j == ny;
                tags.push(if boundary { NodeTag::OuterBoundary } else { NodeTag::Interior });
            }
        }
        let idx = |i: usize, j: usize| i * (ny + 1) + j;
        let mut edges = Vec::with_capacity(2 * n);
        for i in 0..=nx {
            for j in 0..=ny {
                if i < nx {
                    edges.push(Edge { a: idx(i, j), b: idx(i + 1, j), conductance: hy * half(j, ny) / hx });
                }
                if j < ny {
                    edges.push(Edge { a: idx(i, j), b: idx(i, j + 1), conductance: hx * half(i, nx) / hy });
                }
            }
        }
        let mut normals = Vec::new();
        for j in 0..=ny {
            normals.push((idx(0, j), Vec2::new(-1.0, 0.0)));
            normals.push((idx(nx, j), Vec2::new(1.0, 0.0)));
        }
        for i in 0..=nx {
            normals.push((idx(i, 0), Vec2::new(0.0, -1.0)));
            normals.push((idx(i, ny), Vec2::new(0.0, 1.0)));
        }
        Grid { domain, layout, points, measures, tags, edges, normals }
    }

    fn polar(domain: DomainSpec, r0: f64, [nr, ntheta]: [usize; 2]) -> Result<Grid> {
        if ntheta % 2 != 0 {
            return Err(LakeError::InvalidDomain(format!("polar grids need an even angular count, got {ntheta}")));
        }
        let center = r0 == 0.0;
        let dr = (1.0 - r0) / nr as f64;
        let dtheta = 2.0 * PI / ntheta as f64;
        let layout = Layout::Polar { nr, ntheta, r0, dr, dtheta, center };
        let radius = |j: usize| if j == nr { 1.0 } else { r0 + j as f64 * dr };
        let mut points = Vec::new();
        let mut measures = Vec::new();
        let mut tags = Vec::new();
        let first_ring = if center {
            points.push(Vec2::ZERO);
            measures.push(PI * 0.25 * dr * dr);
            tags.push(NodeTag::Interior);
            1
        } else {
            0
        };
        for j in first_ring..=nr {
            let r = radius(j);
            let (lo, hi) = (if j == 0 { r } else { r - 0.5 * dr }, if j == nr { r } else { r + 0.5 * dr });
            let m = 0.5 * (hi * hi - lo * lo) * dtheta;
            let tag = if j == nr {
                NodeTag::OuterBoundary
            } else if j == 0 {
                NodeTag::IslandBoundary(0)
            } else {
                NodeTag::Interior
            };
            for k in 0..ntheta {
                points.push(Vec2::polar(r, k as f64 * dtheta));
                measures.push(m);
                tags.push(tag);
            }
        }
        let mut grid = Grid { domain, layout, points, measures, tags, edges: Vec::new(), normals: Vec::new() };
        let mut edges = Vec::new();
        for j in 0..nr {
            let r_face = r0 + (j as f64 + 0.5) * dr;
            let g = r_face * dtheta / dr;
            for k in 0..ntheta {
                if center && j == 0 {
                    edges.push(Edge { a: 0, b: grid.ring_index(1, k), conductance: g });
                } else {
                    edges.push(Edge { a: grid.ring_index(j, k), b: grid.ring_index(j + 1, k), conductance: g });
                }
            }
        }
        for j in first_ring..=nr {
            let r = radius(j);
            let len = if j == 0 || j == nr { 0.5 * dr } else { dr };
            let g = len / (r * dtheta);
            for k in 0..ntheta {
                edges.push(Edge { a: grid.ring_index(j, k), b: grid.ring_index(j, k + 1), conductance: g });
            }
        }
        let mut normals = Vec::new();
        for k in 0..ntheta {
            let e_r = Vec2::polar(1.0, k as f64 * dtheta);
            normals.push((grid.ring_index(nr, k), e_r));
            if !center {
                normals.push((grid.ring_index(0, k), -e_r));
            }
        }
        grid.edges = edges;
        grid.normals = normals;
        Ok(grid)
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(node, outward unit normal)` for every boundary node; rectangle
    /// corners appear once per adjacent side.
    pub fn boundary_normals(&self) -> &[(usize, Vec2)] {
        &self.normals
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Cell-measure quadrature of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.measures.iter().zip(values).map(|(m, v)| m * v).sum()
    }

    /// Characteristic spacing: the smaller axis step, with the angular step
    /// measured on the outer circle for polar grids.
    pub fn spacing(&self) -> f64 {
        match self.layout {
            Layout::Cartesian { hx, hy, .. } => hx.min(hy),
            Layout::Polar { dr, dtheta, .. } => dr.min(dtheta),
        }
    }

    /// Node index of ring `j`, angle `k` (taken modulo `ntheta`) on a polar grid.
    #[inline]
    pub fn ring_index(&self, j: usize, k: usize) -> usize {
        match self.layout {
            Layout::Polar { ntheta, center: true, .. } => {
                if j == 0 {
                    0
                } else {
                    1 + (j - 1) * ntheta + k % ntheta
                }
            }
            Layout::Polar { ntheta, center: false, .. } => j * ntheta + k % ntheta,
            Layout::Cartesian { .. } => panic!("ring_index on a Cartesian grid"),
        }
    }

    /// Node index of column `i`, row `j` on a Cartesian grid.
    #[inline]
    pub fn cart_index(&self, i: usize, j: usize) -> usize {
        match self.layout {
            Layout::Cartesian { ny, .. } => i * (ny + 1) + j,
            Layout::Polar { .. } => panic!("cart_index on a polar grid"),
        }
    }

    /// Nodes of island `i` in counter-clockwise order.
    pub fn island_contour(&self, island: usize) -> Result<Vec<usize>> {
        let count = self.domain.island_count();
        if island >= count {
            return Err(LakeError::IslandIndex { index: island, count });
        }
        match self.layout {
            Layout::Polar { ntheta, .. } => Ok((0..ntheta).map(|k| self.ring_index(0, k)).collect()),
            Layout::Cartesian { .. } => unreachable!("rectangles have no islands"),
        }
    }

    /// Interpolation stencil at `p`. Points outside the grid are treated as
    /// lying on the nearest boundary row.
    pub fn stencil(&self, p: Vec2) -> Stencil {
        let mut idx = [0usize; 16];
        let mut w = [0.0f64; 16];
        match self.layout {
            Layout::Cartesian { nx, ny, x0, y0, hx, hy } => {
                let (si, wx) = clamped_axis((p.x - x0) / hx, nx);
                let (sj, wy) = clamped_axis((p.y - y0) / hy, ny);
                for a in 0..4 {
                    for b in 0..4 {
                        idx[4 * a + b] = (si + a) * (ny + 1) + sj + b;
                        w[4 * a + b] = wx[a] * wy[b];
                    }
                }
            }
            Layout::Polar { nr, ntheta, r0, dr, dtheta, center } => {
                let r = p.norm();
                let mut theta = p.y.atan2(p.x);
                if theta < 0.0 {
                    theta += 2.0 * PI;
                }
                let phi = theta / dtheta;
                let k0 = (phi.floor() as usize).min(ntheta - 1);
                let wt = lagrange4(phi - k0 as f64 + 1.0);
                let cols = [k0 + ntheta - 1, k0, k0 + 1, k0 + 2];
                let pos = ((r - r0) / dr).clamp(0.0, nr as f64);
                let (start, wr): (isize, [f64; 4]) = if center {
                    let j0 = (pos.floor() as usize).min(nr - 2) as isize;
                    (j0 - 1, lagrange4(pos - (j0 - 1) as f64))
                } else {
                    let (s, wr) = clamped_axis(pos, nr);
                    (s as isize, wr)
                };
                for a in 0..4 {
                    let j = start + a as isize;
                    for b in 0..4 {
                        // Row -1 is row 1 seen through the pole.
                        idx[4 * a + b] = if j < 0 {
                            self.ring_index(1, cols[b] + ntheta / 2)
                        } else {
                            self.ring_index(j as usize, cols[b])
                        };
                        w[4 * a + b] = wr[a] * wt[b];
                    }
                }
            }
        }
        Stencil { idx, w }
    }

    #[inline]
    pub fn interpolate(&self, values: &[f64], p: Vec2) -> f64 {
        self.stencil(p).apply(values)
    }

    /// Cubic interpolation clipped to the range of the 4×4 stencil values.
    #[inline]
    pub fn interpolate_clipped(&self, values: &[f64], p: Vec2) -> f64 {
        let s = self.stencil(p);
        let (lo, hi) = s.bounds(values);
        s.apply(values).clamp(lo, hi)
    }
}
