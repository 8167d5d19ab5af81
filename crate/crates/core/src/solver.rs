//! Finite-difference discretization of `L u = -div(a ∇u) + q u` on the unit
//! square with Dirichlet data, and the discrete calculus (gradient,
//! Laplacian, norms) the rest of the crate is built on.
//!
//! Scalar diffusion uses the conservative 5-point scheme with harmonic-mean
//! face coefficients. A full symmetric matrix `a` adds centered mixed
//! differences for the off-diagonal entry, giving a 9-point stencil. Both
//! schemes produce a symmetric matrix on the interior unknowns.
//!
//! Linear systems are solved with Jacobi-preconditioned conjugate gradients
//! when `q >= 0`. When `q` takes negative values, or CG detects loss of
//! positive definiteness, a banded LU factorization with partial pivoting is
//! used instead; it is computed once per operator and shared by every solve.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{Grid2D, SubdomainMask};

/// Diffusion tensor per node.
#[derive(Debug, Clone)]
pub enum Diffusion {
    /// `a(x) = s(x) I`
    Scalar(Vec<f64>),
    /// Symmetric `[[a11, a12], [a12, a22]]`.
    Matrix {
        a11: Vec<f64>,
        a12: Vec<f64>,
        a22: Vec<f64>,
    },
}

/// The pair `(a, q)` together with the bound `Λ` they are declared to satisfy.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    diffusion: Diffusion,
    q: Vec<f64>,
    lambda: Option<f64>,
}

impl CoefficientField {
    /// `a = I`, `q = 0`.
    pub fn laplace(grid: &Grid2D) -> Self {
        Self::scalar(vec![1.0; grid.num_nodes()], vec![0.0; grid.num_nodes()])
    }

    pub fn scalar(a: Vec<f64>, q: Vec<f64>) -> Self {
        Self {
            diffusion: Diffusion::Scalar(a),
            q,
            lambda: None,
        }
    }

    pub fn matrix(a11: Vec<f64>, a12: Vec<f64>, a22: Vec<f64>, q: Vec<f64>) -> Self {
        Self {
            diffusion: Diffusion::Matrix { a11, a12, a22 },
            q,
            lambda: None,
        }
    }

    /// Declares `Λ`; assembly then checks the coefficients against it.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Smallest eigenvalue of `a` at a node.
    pub fn min_eigenvalue(&self, id: usize) -> f64 {
        match &self.diffusion {
            Diffusion::Scalar(s) => s[id],
            Diffusion::Matrix { a11, a12, a22 } => {
                let (p, r, s) = (a11[id], a12[id], a22[id]);
                let mean = 0.5 * (p + s);
                let half_diff = 0.5 * (p - s);
                mean - (half_diff * half_diff + r * r).sqrt()
            }
        }
    }

    fn max_entry(&self, id: usize) -> f64 {
        match &self.diffusion {
            Diffusion::Scalar(s) => s[id].abs(),
            Diffusion::Matrix { a11, a12, a22 } => {
                a11[id].abs().max(a12[id].abs()).max(a22[id].abs())
            }
        }
    }

    /// The declared `Λ`, or the smallest `Λ >= 1` consistent with the
    /// ellipticity and sup-norm bounds when none was declared.
    pub fn lambda_bound(&self) -> f64 {
        if let Some(l) = self.lambda {
            return l;
        }
        let mut l = 1.0f64;
        for id in 0..self.q.len() {
            l = l
                .max(1.0 / self.min_eigenvalue(id))
                .max(self.max_entry(id))
                .max(self.q[id].abs());
        }
        l
    }

    fn validate(&self, grid: &Grid2D) -> Result<()> {
        let nn = grid.num_nodes();
        let lens_ok = self.q.len() == nn
            && match &self.diffusion {
                Diffusion::Scalar(s) => s.len() == nn,
                Diffusion::Matrix { a11, a12, a22 } => {
                    a11.len() == nn && a12.len() == nn && a22.len() == nn
                }
            };
        if !lens_ok {
            return Err(Error::InvalidInput(format!(
                "coefficient arrays do not match the {nn} grid nodes"
            )));
        }
        let lambda = self.lambda.unwrap_or(f64::INFINITY);
        if self.lambda.is_some_and(|l| !(l >= 1.0)) {
            return Err(Error::Config(format!("Lambda must be >= 1, got {lambda}")));
        }
        for id in 0..nn {
            let (i, j) = grid.ij(id);
            let min_eig = self.min_eigenvalue(id);
            let bound = 1.0 / lambda;
            if !(min_eig > 0.0) || min_eig < bound {
                return Err(Error::Ellipticity {
                    i,
                    j,
                    min_eig,
                    bound,
                });
            }
            if !self.q[id].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "q is not finite at node ({i}, {j})"
                )));
            }
            if self.max_entry(id) > lambda || self.q[id].abs() > lambda {
                return Err(Error::InvalidInput(format!(
                    "coefficient sup-norm exceeds Lambda = {lambda} at node ({i}, {j})"
                )));
            }
        }
        Ok(())
    }
}

/// Tolerances for the linear solves.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Required `‖A u − b‖∞ / ‖b‖∞`.
    pub rtol: f64,
    /// Iteration cap; `None` means `20 n`.
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Trivial,
    ConjugateGradient,
    BandedLu,
}

/// Diagnostics from one solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    pub residual: f64,
}

/// Sparse symmetric matrix on the interior unknowns plus the coupling of each
/// interior row to the Dirichlet boundary values.
#[derive(Debug)]
pub struct DiscreteOperator {
    grid: Grid2D,
    interior: Vec<usize>,
    // interior-to-interior part, columns are interior ordinals
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    // interior-to-boundary part, columns are boundary positions
    brow_ptr: Vec<usize>,
    bcols: Vec<usize>,
    bvals: Vec<f64>,
    diag: Vec<f64>,
    definite: bool,
    options: SolverOptions,
    lu: OnceLock<std::result::Result<BandLu, f64>>,
}

impl Clone for DiscreteOperator {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            interior: self.interior.clone(),
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.clone(),
            brow_ptr: self.brow_ptr.clone(),
            bcols: self.bcols.clone(),
            bvals: self.bvals.clone(),
            diag: self.diag.clone(),
            definite: self.definite,
            options: self.options,
            lu: OnceLock::new(),
        }
    }
}

/// Assembles the discrete operator for `coeff` on `grid`.
pub fn assemble(grid: &Grid2D, coeff: &CoefficientField) -> Result<DiscreteOperator> {
    assemble_with(grid, coeff, SolverOptions::default())
}

pub fn assemble_with(
    grid: &Grid2D,
    coeff: &CoefficientField,
    options: SolverOptions,
) -> Result<DiscreteOperator> {
    coeff.validate(grid)?;
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let interior: Vec<usize> = grid.interior_ids().collect();
    let mut ordinal = vec![usize::MAX; grid.num_nodes()];
    for (k, &id) in interior.iter().enumerate() {
        ordinal[id] = k;
    }

    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut brow_ptr = vec![0];
    let mut bcols = Vec::new();
    let mut bvals = Vec::new();
    let mut diag = Vec::with_capacity(interior.len());

    for &id in &interior {
        let (i, j) = grid.ij(id);
        // stencil[(dj + 1) * 3 + (di + 1)]
        let mut stencil = [0.0f64; 9];
        let at =
            |di: isize, dj: isize| ((i as isize + di) as usize) + ((j as isize + dj) as usize) * n;
        match coeff.diffusion() {
            Diffusion::Scalar(s) => {
                for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let face = harmonic_mean(s[id], s[at(di, dj)]);
                    stencil[((dj + 1) * 3 + di + 1) as usize] -= face * inv_h2;
                    stencil[4] += face * inv_h2;
                }
            }
            Diffusion::Matrix { a11, a12, a22 } => {
                for (di, dj, a) in [(1, 0, a11), (-1, 0, a11), (0, 1, a22), (0, -1, a22)] {
                    let face = 0.5 * (a[id] + a[at(di, dj)]);
                    stencil[((dj + 1) * 3 + di + 1) as usize] -= face * inv_h2;
                    stencil[4] += face * inv_h2;
                }
                let c = 0.25 * inv_h2;
                let (e, w, nn, s) = (a12[at(1, 0)], a12[at(-1, 0)], a12[at(0, 1)], a12[at(0, -1)]);
                stencil[8] -= (e + nn) * c;
                stencil[0] -= (w + s) * c;
                stencil[2] += (e + s) * c;
                stencil[6] += (w + nn) * c;
            }
        }
        stencil[4] += coeff.q()[id];
        diag.push(stencil[4]);
        for dj in -1isize..=1 {
            for di in -1isize..=1 {
                let v = stencil[((dj + 1) * 3 + di + 1) as usize];
                if v == 0.0 && (di, dj) != (0, 0) {
                    continue;
                }
                let nb = at(di, dj);
                match grid.boundary_position(nb) {
                    Some(pos) => {
                        bcols.push(pos);
                        bvals.push(v);
                    }
                    None => {
                        cols.push(ordinal[nb]);
                        vals.push(v);
                    }
                }
            }
        }
        row_ptr.push(cols.len());
        brow_ptr.push(bcols.len());
    }

    let definite = coeff.q().iter().all(|&q| q >= 0.0);
    Ok(DiscreteOperator {
        grid: grid.clone(),
        interior,
        row_ptr,
        cols,
        vals,
        brow_ptr,
        bcols,
        bvals,
        diag,
        definite,
        options,
        lu: OnceLock::new(),
    })
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn options(&self) -> SolverOptions {
        self.options
    }

    pub fn num_unknowns(&self) -> usize {
        self.interior.len()
    }

    /// Node ids of the unknowns, in matrix row order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Interior row `r` as `(interior column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Boundary coupling of row `r` as `(boundary position, value)` pairs.
    pub fn boundary_row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.brow_ptr[r]..self.brow_ptr[r + 1];
        self.bcols[span.clone()]
            .iter()
            .copied()
            .zip(self.bvals[span].iter().copied())
    }

    /// Number of stored entries (interior and boundary) in row `r`.
    pub fn row_nnz(&self, r: usize) -> usize {
        (self.row_ptr[r + 1] - self.row_ptr[r]) + (self.brow_ptr[r + 1] - self.brow_ptr[r])
    }

    fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// Applies the full stencil to a nodal field, returning `(L_h f)` at each
    /// interior node in row order.
    pub fn apply(&self, f: &ScalarField) -> Vec<f64> {
        let v = f.values();
        (0..self.interior.len())
            .map(|r| {
                let inner: f64 = self.row(r).map(|(c, a)| a * v[self.interior[c]]).sum();
                let outer: f64 = self
                    .boundary_row(r)
                    .map(|(p, a)| a * v[self.grid.boundary_order()[p]])
                    .sum();
                inner + outer
            })
            .collect()
    }

    /// Solves `L u = 0` in the interior with `u = g` on the boundary.
    ///
    /// `g` is given in boundary order.
    pub fn solve_dirichlet(&self, g: &[f64]) -> Result<ScalarField> {
        self.solve_with_source(None, g).map(|(u, _)| u)
    }

    /// Solves `L u = f` in the interior with `u = g` on the boundary and
    /// returns the solver diagnostics alongside the solution.
    pub fn solve_with_source(
        &self,
        source: Option<&ScalarField>,
        g: &[f64],
    ) -> Result<(ScalarField, SolveReport)> {
        if g.len() != self.grid.num_boundary() {
            return Err(Error::InvalidInput(format!(
                "boundary data has {} values, grid has {} boundary nodes",
                g.len(),
                self.grid.num_boundary()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("boundary data is not finite".into()));
        }
        if let Some(f) = source {
            if !f.same_grid(&self.grid) || !f.is_finite() {
                return Err(Error::InvalidInput(
                    "source term must be finite and live on the operator's grid".into(),
                ));
            }
        }
        let mut rhs: Vec<f64> = (0..self.interior.len())
            .map(|r| -self.boundary_row(r).map(|(p, a)| a * g[p]).sum::<f64>())
            .collect();
        if let Some(f) = source {
            for (r, b) in rhs.iter_mut().enumerate() {
                *b += f.get(self.interior[r]);
            }
        }

        let (x, report) = self.solve_interior(&rhs)?;

        let mut u = ScalarField::zeros(&self.grid);
        let vals = u.values_mut();
        for (k, &id) in self.grid.boundary_order().iter().enumerate() {
            vals[id] = g[k];
        }
        for (r, &id) in self.interior.iter().enumerate() {
            vals[id] = x[r];
        }
        Ok((u, report))
    }

    fn solve_interior(&self, rhs: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let scale = inf_norm(rhs);
        if scale == 0.0 {
            return Ok((
                vec![0.0; rhs.len()],
                SolveReport {
                    method: SolveMethod::Trivial,
                    iterations: 0,
                    residual: 0.0,
                },
            ));
        }
        if self.definite {
            match self.pcg(rhs, scale) {
                Ok(done) => return Ok(done),
                Err(CgFailure::Indefinite) => {}
                Err(CgFailure::Stalled {
                    iterations,
                    residual,
                }) => {
                    return Err(Error::NonConvergence {
                        iterations,
                        residual,
                    });
                }
            }
        }
        self.direct(rhs, scale)
    }

    fn pcg(
        &self,
        b: &[f64],
        scale: f64,
    ) -> std::result::Result<(Vec<f64>, SolveReport), CgFailure> {
        let size = b.len();
        let tol = self.options.rtol * scale;
        let max_iter = self.options.max_iter.unwrap_or(20 * self.grid.n());
        let inv_diag: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut x = vec![0.0; size];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; size];
        let mut rz = dot(&r, &z);
        let mut residual = inf_norm(&r);

        for it in 1..=max_iter {
            self.matvec(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(CgFailure::Indefinite);
            }
            let alpha = rz / pap;
            for k in 0..size {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            residual = inf_norm(&r);
            if residual <= tol {
                // confirm against the true residual before accepting
                self.matvec(&x, &mut ap);
                for k in 0..size {
                    r[k] = b[k] - ap[k];
                }
                residual = inf_norm(&r);
                if residual <= tol {
                    return Ok((
                        x,
                        SolveReport {
                            method: SolveMethod::ConjugateGradient,
                            iterations: it,
                            residual: residual / scale,
                        },
                    ));
                }
            }
            for k in 0..size {
                z[k] = r[k] * inv_diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..size {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(CgFailure::Stalled {
            iterations: max_iter,
            residual: residual / scale,
        })
    }

    fn direct(&self, b: &[f64], scale: f64) -> Result<(Vec<f64>, SolveReport)> {
        let lu = self
            .lu
            .get_or_init(|| BandLu::factor(self))
            .as_ref()
            .map_err(|&pivot_ratio| Error::Singular { pivot_ratio })?;
        let mut x = lu.solve(b);
        let mut ax = vec![0.0; b.len()];
        let mut residual = 0.0;
        for pass in 0..3 {
            self.matvec(&x, &mut ax);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            residual = inf_norm(&r) / scale;
            if residual <= self.options.rtol {
                return Ok((
                    x,
                    SolveReport {
                        method: SolveMethod::BandedLu,
                        iterations: pass,
                        residual,
                    },
                ));
            }
            let dx = lu.solve(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
        }
        Err(Error::NonConvergence {
            iterations: 3,
            residual,
        })
    }
}

enum CgFailure {
    Indefinite,
    Stalled { iterations: usize, residual: f64 },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Pivot ratio below which a factorization is declared singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Banded LU with partial pivoting, LAPACK-style: the upper band widens to
/// `kl + ku` to absorb row interchanges.
#[derive(Debug)]
struct BandLu {
    size: usize,
    kl: usize,
    width: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn factor(op: &DiscreteOperator) -> std::result::Result<Self, f64> {
        let size = op.num_unknowns();
        let m = op.grid.n() - 2;
        let kl = m + 1;
        let ku = m + 1;
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            size,
            kl,
            width,
            ab: vec![0.0; size * width],
            piv: vec![0; size],
        };
        for r in 0..size {
            for (c, v) in op.row(r) {
                *lu.at(r, c) += v;
            }
        }
        let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
        for k in 0..size {
            let last = (k + kl + 1).min(size);
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for r in k + 1..last {
                let v = lu.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            lu.piv[k] = p;
            let cend = (k + kl + ku + 1).min(size);
            if p != k {
                for c in k..cend {
                    let t = lu.get(k, c);
                    *lu.at(k, c) = lu.get(p, c);
                    *lu.at(p, c) = t;
                }
            }
            let pivot = lu.get(k, k);
            pmin = pmin.min(pivot.abs());
            pmax = pmax.max(pivot.abs());
            if pivot == 0.0 {
                return Err(0.0);
            }
            for r in k + 1..last {
                let l = lu.get(r, k) / pivot;
                *lu.at(r, k) = l;
                if l != 0.0 {
                    for c in k + 1..cend {
                        let u = lu.get(k, c);
                        *lu.at(r, c) -= l * u;
                    }
                }
            }
        }
        let ratio = pmin / pmax;
        if ratio < SINGULAR_PIVOT_RATIO {
            return Err(ratio);
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + (c + self.kl - r)
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> f64 {
        self.ab[self.idx(r, c)]
    }

    #[inline]
    fn at(&mut self, r: usize, c: usize) -> &mut f64 {
        let i = self.idx(r, c);
        &mut self.ab[i]
    }

    #[allow(clippy::needless_range_loop)]
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.size;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for r in k + 1..(k + self.kl + 1).min(n) {
                x[r] -= self.get(r, k) * xk;
            }
        }
        let reach = self.width - self.kl - 1;
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in k + 1..(k + reach + 1).min(n) {
                acc -= self.get(k, c) * x[c];
            }
            x[k] = acc / self.get(k, k);
        }
        x
    }
}

/// Solves `Δu = rhs` with `u = g` on the boundary (5-point Laplacian).
pub fn solve_poisson(grid: &Grid2D, rhs: &ScalarField, g: &[f64]) -> Result<ScalarField> {
    if !rhs.is_finite() {
        return Err(Error::InvalidInput(
            "Poisson right-hand side is not finite".into(),
        ));
    }
    let op = assemble(grid, &CoefficientField::laplace(grid))?;
    // the operator discretizes -Δ
    let source = rhs.scaled(-1.0);
    op.solve_with_source(Some(&source), g).map(|(u, _)| u)
}

/// Discrete gradient: central differences inside, second-order one-sided
/// differences on the boundary.
pub fn gradient(grid: &Grid2D, f: &ScalarField) -> VectorField {
    let mut gx = vec![0.0; grid.num_nodes()];
    let mut gy = vec![0.0; grid.num_nodes()];
    for id in 0..grid.num_nodes() {
        [gx[id], gy[id]] = gradient_at(grid, f.values(), id);
    }
    VectorField { x: gx, y: gy }
}

/// The gradient stencil of [`gradient`] at a single node. Reads at most two
/// neighbours in each axis direction.
#[inline]
pub fn gradient_at(grid: &Grid2D, v: &[f64], id: usize) -> [f64; 2] {
    let n = grid.n();
    let inv2h = 0.5 / grid.h();
    let (i, j) = grid.ij(id);
    // derivative along the axis with node stride `stride`, `k` = index on that axis
    let diff = |k: usize, stride: usize| -> f64 {
        if k == 0 {
            (-3.0 * v[id] + 4.0 * v[id + stride] - v[id + 2 * stride]) * inv2h
        } else if k == n - 1 {
            (3.0 * v[id] - 4.0 * v[id - stride] + v[id - 2 * stride]) * inv2h
        } else {
            (v[id + stride] - v[id - stride]) * inv2h
        }
    };
    [diff(i, 1), diff(j, n)]
}

/// 5-point Laplacian at interior nodes; the boundary ring is left at zero.
pub fn laplacian(grid: &Grid2D, f: &ScalarField) -> ScalarField {
    let n = grid.n();
    let v = f.values();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut out = ScalarField::zeros(grid);
    let o = out.values_mut();
    for id in grid.interior_ids() {
        o[id] = (v[id + 1] + v[id - 1] + v[id + n] + v[id - n] - 4.0 * v[id]) * inv_h2;
    }
    out
}

/// Discrete `L²`, `H¹` and `L∞` norms over a mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
}

pub fn norms(grid: &Grid2D, f: &ScalarField, mask: &SubdomainMask) -> Result<Norms> {
    if mask.is_empty() {
        return Err(Error::InvalidInput("norm over an empty mask".into()));
    }
    let grad = gradient(grid, f);
    let w = grid.h() * grid.h();
    let (mut s0, mut s1, mut linf) = (0.0, 0.0, 0.0f64);
    for &id in mask.nodes() {
        let v = f.get(id);
        s0 += v * v;
        s1 += grad.x[id] * grad.x[id] + grad.y[id] * grad.y[id];
        linf = linf.max(v.abs());
    }
    let l2sq = w * s0;
    Ok(Norms {
        l2: l2sq.sqrt(),
        h1: (l2sq + w * s1).sqrt(),
        linf,
    })
}
