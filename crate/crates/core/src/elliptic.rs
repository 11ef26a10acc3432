//! Weighted stream-function problems `−∇·(b⁻¹∇ψ) = ω`.
//!
//! The operator is assembled in flux form on the grid's edge list: every edge
//! contributes `w_e (ψ_a − ψ_b)` to both endpoints, with `w_e` the geometric
//! conductance times the harmonic mean of `1/b` at the two nodes. The matrix is
//! therefore symmetric, and the discrete Green and energy identities hold
//! exactly for the discrete island fluxes defined here.

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{LakeError, Result};
use crate::field::ScalarField;
use crate::geometry::{distance_to_boundary, Bathymetry, Grid, Layout, NodeTag};
use crate::vec2::Vec2;

/// Above this many unknowns the solver switches to conjugate gradients.
pub const DIRECT_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverBackend {
    /// Direct factorization up to [`DIRECT_LIMIT`] unknowns, CG above.
    Auto,
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on `‖r‖₂ / ‖f‖₂` accepted from any solve.
    pub tolerance: f64,
    pub backend: SolverBackend,
    /// Iteration cap for conjugate gradients.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-10, backend: SolverBackend::Auto, max_iterations: 20_000 }
    }
}

#[derive(Debug, Clone)]
struct Csr {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            *yi = acc;
        });
    }
}

const NOT_UNKNOWN: usize = usize::MAX;

/// Assembled and factorized operator `−∇·(b⁻¹∇·)` with homogeneous Dirichlet
/// rows on every boundary node.
pub struct EllipticSolver {
    grid: Arc<Grid>,
    bathymetry: Bathymetry,
    depth: Vec<f64>,
    weights: Vec<f64>,
    unknown_of: Vec<usize>,
    nodes: Vec<usize>,
    matrix: Csr,
    diagonal: Vec<f64>,
    factor: Option<Llt<usize, f64>>,
    options: SolverOptions,
}

impl std::fmt::Debug for EllipticSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticSolver")
            .field("unknowns", &self.nodes.len())
            .field("direct", &self.factor.is_some())
            .field("options", &self.options)
            .finish()
    }
}

impl EllipticSolver {
    pub fn new(grid: Arc<Grid>, bathymetry: &Bathymetry) -> Result<Self> {
        Self::with_options(grid, bathymetry, SolverOptions::default())
    }

    pub fn with_options(grid: Arc<Grid>, bathymetry: &Bathymetry, options: SolverOptions) -> Result<Self> {
        bathymetry.check_positive(&grid)?;
        let depth: Vec<f64> = grid.points().iter().map(|p| bathymetry.depth(*p)).collect();
        let weights: Vec<f64> = grid.edges().iter().map(|e| e.conductance * 2.0 / (depth[e.a] + depth[e.b])).collect();

        let mut unknown_of = vec![NOT_UNKNOWN; grid.len()];
        let mut nodes = Vec::new();
        for (i, tag) in grid.tags().iter().enumerate() {
            if !tag.is_boundary() {
                unknown_of[i] = nodes.len();
                nodes.push(i);
            }
        }
        let n = nodes.len();

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut diagonal = vec![0.0; n];
        for (e, w) in grid.edges().iter().zip(&weights) {
            let (ua, ub) = (unknown_of[e.a], unknown_of[e.b]);
            if ua != NOT_UNKNOWN {
                diagonal[ua] += w;
            }
            if ub != NOT_UNKNOWN {
                diagonal[ub] += w;
            }
            if ua != NOT_UNKNOWN && ub != NOT_UNKNOWN {
                rows[ua].push((ub, -w));
                rows[ub].push((ua, -w));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            row.push((i, diagonal[i]));
            row.sort_by_key(|(c, _)| *c);
            let mut last = NOT_UNKNOWN;
            for &(c, v) in row.iter() {
                if c == last {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                    last = c;
                }
            }
            row_ptr.push(col.len());
        }
        let matrix = Csr { row_ptr, col, val };

        let direct = match options.backend {
            SolverBackend::Direct => true,
            SolverBackend::ConjugateGradient => false,
            SolverBackend::Auto => n <= DIRECT_LIMIT,
        };
        let factor = if direct && n > 0 { Some(factorize(&matrix, n)?) } else { None };

        Ok(EllipticSolver {
            grid,
            bathymetry: bathymetry.clone(),
            depth,
            weights,
            unknown_of,
            nodes,
            matrix,
            diagonal,
            factor,
            options,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bathymetry(&self) -> &Bathymetry {
        &self.bathymetry
    }

    /// Depth at every node.
    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn options(&self) -> SolverOptions {
        self.options
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_direct(&self) -> bool {
        self.factor.is_some()
    }

    /// The full operator applied at every node, boundary nodes included:
    /// `(Aψ)_a = Σ_e w_e (ψ_a − ψ_other)`. At interior nodes this is the
    /// cell-integrated `−∇·(b⁻¹∇ψ)`.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; psi.len()];
        for (e, w) in self.grid.edges().iter().zip(&self.weights) {
            let f = w * (psi[e.a] - psi[e.b]);
            out[e.a] += f;
            out[e.b] -= f;
        }
        out
    }

    /// Discrete `∫ ∇u·∇v / b`.
    pub fn dirichlet_form(&self, u: &[f64], v: &[f64]) -> f64 {
        self.grid.edges().iter().zip(&self.weights).map(|(e, w)| w * (u[e.a] - u[e.b]) * (v[e.a] - v[e.b])).sum()
    }

    /// Discrete `∫_{∂Iᵢ} b⁻¹ ∂ψ/∂ν` with `ν` the outward normal of the
    /// fluid domain, for a `ψ` that solved the problem with source `omega`:
    /// the operator residual summed over the island's nodes.
    pub fn island_flux(&self, psi: &ScalarField, omega: &ScalarField, island: usize) -> Result<f64> {
        let count = self.grid.domain().island_count();
        if island >= count {
            return Err(LakeError::IslandIndex { index: island, count });
        }
        let a = self.apply(psi.values());
        let m = self.grid.measures();
        let w = omega.values();
        Ok(self
            .grid
            .tags()
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == NodeTag::IslandBoundary(island))
            .map(|(i, _)| a[i] - m[i] * w[i])
            .sum())
    }

    /// `ψ` with `−∇·(b⁻¹∇ψ) = ω` in the interior and `ψ = 0` on every
    /// boundary node.
    pub fn solve_dirichlet(&self, omega: &ScalarField) -> Result<ScalarField> {
        self.check_field(omega)?;
        let m = self.grid.measures();
        let w = omega.values();
        let rhs: Vec<f64> = self.nodes.iter().map(|&i| m[i] * w[i]).collect();
        let x = self.solve_system(&rhs)?;
        Ok(ScalarField::from_raw(self.grid.clone(), self.scatter(&x, None)))
    }

    /// Discretely `b⁻¹`-harmonic function with the given boundary values.
    pub fn solve_harmonic(&self, boundary: &[f64]) -> Result<ScalarField> {
        if boundary.len() != self.grid.len() {
            return Err(LakeError::LengthMismatch("boundary data", boundary.len(), self.grid.len()));
        }
        let mut rhs = vec![0.0; self.nodes.len()];
        for (e, w) in self.grid.edges().iter().zip(&self.weights) {
            let (ua, ub) = (self.unknown_of[e.a], self.unknown_of[e.b]);
            if ua != NOT_UNKNOWN && ub == NOT_UNKNOWN {
                rhs[ua] += w * boundary[e.b];
            } else if ub != NOT_UNKNOWN && ua == NOT_UNKNOWN {
                rhs[ub] += w * boundary[e.a];
            }
        }
        let x = self.solve_system(&rhs)?;
        Ok(ScalarField::from_raw(self.grid.clone(), self.scatter(&x, Some(boundary))))
    }

    /// Column `G_b(·, y)`: the response to a unit mass at `y`, spread over
    /// the nodes with the weights of the interpolation stencil at `y`.
    ///
    /// Spreading with the transpose of interpolation makes
    /// `greens_sample(y).at(x)` and `greens_sample(x).at(y)` equal up to
    /// round-off. Weights falling on boundary nodes are dropped, which is the
    /// Dirichlet condition itself.
    pub fn greens_sample(&self, y: Vec2) -> Result<ScalarField> {
        let domain = self.grid.domain();
        let d = distance_to_boundary(&domain, y)?;
        let cell = match self.grid.layout() {
            Layout::Cartesian { hx, hy, .. } => hx.max(hy),
            Layout::Polar { dr, .. } => dr,
        };
        if d < 2.0 * cell {
            return Err(LakeError::SourceNearBoundary { x: y.x, y: y.y, cells: d / cell });
        }
        let stencil = self.grid.stencil(y);
        let mut rhs = vec![0.0; self.nodes.len()];
        for (node, w) in stencil.idx.iter().zip(&stencil.w) {
            let u = self.unknown_of[*node];
            if u != NOT_UNKNOWN {
                rhs[u] += w;
            }
        }
        let x = self.solve_system(&rhs)?;
        Ok(ScalarField::from_raw(self.grid.clone(), self.scatter(&x, None)))
    }

    fn check_field(&self, f: &ScalarField) -> Result<()> {
        if f.values().len() != self.grid.len() {
            return Err(LakeError::LengthMismatch("source field", f.values().len(), self.grid.len()));
        }
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(LakeError::NonFinite("source field"));
        }
        Ok(())
    }

    fn scatter(&self, x: &[f64], boundary: Option<&[f64]>) -> Vec<f64> {
        let mut out = match boundary {
            Some(b) => b.to_vec(),
            None => vec![0.0; self.grid.len()],
        };
        for (k, &i) in self.nodes.iter().enumerate() {
            out[i] = x[k];
        }
        out
    }

    /// Solve the interior system for a right-hand side indexed by unknown.
    pub fn solve_system(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.nodes.len();
        let norm_f = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_f == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let x = match &self.factor {
            Some(llt) => {
                let mut x = rhs.to_vec();
                direct_solve(llt, &mut x);
                let mut r = self.residual(&x, rhs);
                if norm(&r) > self.options.tolerance * norm_f {
                    // One step of iterative refinement absorbs round-off growth.
                    direct_solve(llt, &mut r);
                    for (xi, ri) in x.iter_mut().zip(&r) {
                        *xi += ri;
                    }
                }
                x
            }
            None => self.conjugate_gradient(rhs, norm_f)?,
        };
        let res = norm(&self.residual(&x, rhs)) / norm_f;
        if !(res <= self.options.tolerance) {
            return Err(LakeError::NoConvergence { iterations: 0, residual: res });
        }
        Ok(x)
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; x.len()];
        self.matrix.mul(x, &mut ax);
        rhs.iter().zip(&ax).map(|(f, a)| f - a).collect()
    }

    fn conjugate_gradient(&self, rhs: &[f64], norm_f: f64) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diagonal).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        // Iterate to a slightly tighter bound than the acceptance check so the
        // recomputed residual clears it.
        let target = 0.5 * self.options.tolerance * norm_f;
        for it in 0..self.options.max_iterations {
            if norm(&r) <= target {
                return Ok(x);
            }
            self.matrix.mul(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / self.diagonal[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            if !rz.is_finite() {
                return Err(LakeError::NoConvergence { iterations: it + 1, residual: f64::NAN });
            }
        }
        let res = norm(&r) / norm_f;
        if res <= self.options.tolerance {
            Ok(x)
        } else {
            Err(LakeError::NoConvergence { iterations: self.options.max_iterations, residual: res })
        }
    }
}

fn factorize(matrix: &Csr, n: usize) -> Result<Llt<usize, f64>> {
    let mut triplets = Vec::with_capacity(matrix.val.len() / 2 + n);
    for i in 0..n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col[k];
            if j >= i {
                triplets.push(Triplet::new(j, i, matrix.val[k]));
            }
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| LakeError::Factorization(format!("{e:?}")))?;
    a.sp_cholesky(Side::Lower).map_err(|e| LakeError::Factorization(format!("{e:?}")))
}

fn direct_solve(llt: &Llt<usize, f64>, x: &mut [f64]) {
    let n = x.len();
    let mut m = Mat::<f64>::from_fn(n, 1, |i, _| x[i]);
    llt.solve_in_place(m.as_mut());
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = m[(i, 0)];
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Harmonic basis attached to the islands.
///
/// `phi[i]` is discretely `b⁻¹`-harmonic, equal to 1 on island `i` and 0 on
/// every other boundary component; `psi[i] = Σⱼ D⁻¹ᵢⱼ phi[j]` has unit flux
/// through island `i` and zero flux through the others.
#[derive(Debug, Clone)]
pub struct IslandBasis {
    pub phi: Vec<ScalarField>,
    pub d_matrix: Vec<Vec<f64>>,
    pub d_inverse: Vec<Vec<f64>>,
    pub psi: Vec<ScalarField>,
}

impl IslandBasis {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

pub fn island_basis(solver: &EllipticSolver) -> Result<IslandBasis> {
    let grid = solver.grid();
    let m = grid.domain().island_count();
    let mut phi = Vec::with_capacity(m);
    for i in 0..m {
        let boundary: Vec<f64> =
            grid.tags().iter().map(|t| if *t == NodeTag::IslandBoundary(i) { 1.0 } else { 0.0 }).collect();
        phi.push(solver.solve_harmonic(&boundary)?);
    }
    if m == 0 {
        return Ok(IslandBasis { phi, d_matrix: vec![], d_inverse: vec![], psi: vec![] });
    }
    let d = Mat::<f64>::from_fn(m, m, |i, j| solver.dirichlet_form(phi[i].values(), phi[j].values()));
    let llt = d.llt(Side::Lower).map_err(|_| LakeError::SingularIslandMatrix)?;
    let inv = llt.solve(Mat::<f64>::identity(m, m));
    if (0..m).any(|i| (0..m).any(|j| !inv[(i, j)].is_finite())) {
        return Err(LakeError::SingularIslandMatrix);
    }
    let d_matrix: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| d[(i, j)]).collect()).collect();
    let d_inverse: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| inv[(i, j)]).collect()).collect();
    let psi = (0..m)
        .map(|i| {
            let mut f = ScalarField::zeros(grid.clone());
            for (j, p) in phi.iter().enumerate() {
                f.axpy(d_inverse[i][j], p);
            }
            f
        })
        .collect();
    Ok(IslandBasis { phi, d_matrix, d_inverse, psi })
}

/// `𝒦ᵦ[ω]`: the solution with zero flux through every island.
pub fn zero_flux_stream(solver: &EllipticSolver, basis: &IslandBasis, omega: &ScalarField) -> Result<ScalarField> {
    let mut psi = solver.solve_dirichlet(omega)?;
    for (phi, psi_i) in basis.phi.iter().zip(&basis.psi) {
        let c = weighted_pairing(solver.grid(), phi.values(), omega.values());
        psi.axpy(c, psi_i);
    }
    Ok(psi)
}

/// Full stream function `ψ = 𝒦ᵦ[ω] + Σ Γᵢ ψᵢ`, whose flux through island `i`
/// is `Γᵢ`.
pub fn assemble_stream(
    solver: &EllipticSolver,
    basis: &IslandBasis,
    omega: &ScalarField,
    circulations: &[f64],
) -> Result<ScalarField> {
    if circulations.len() != basis.len() {
        return Err(LakeError::LengthMismatch("circulations", circulations.len(), basis.len()));
    }
    let mut psi = zero_flux_stream(solver, basis, omega)?;
    for (g, psi_i) in circulations.iter().zip(&basis.psi) {
        psi.axpy(*g, psi_i);
    }
    Ok(psi)
}

/// `∫ f g` by cell-measure quadrature.
pub fn weighted_pairing(grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
    grid.measures().iter().zip(f).zip(g).map(|((m, a), b)| m * a * b).sum()
}
