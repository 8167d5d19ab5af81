//! Realizing local solutions on a disk by global ones.
//!
//! Given a local solution `h` on `D`, find coefficients `c` so that the
//! global solution `u = Σ c_k z_k` (with `z_k` the solution for boundary mode
//! `e_k`) is close to `h` in `L²(D)` while `‖Σ c_k e_k‖_σ` stays small. The
//! two goals are traded off with a Tikhonov weight `λ`:
//!
//! ```text
//! min_c ‖Σ c_k z_k − h‖²_{L²(D)} + λ Σ_k c_k² / σ_k²
//! ```

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::boundary::{BoundaryBasis, BoundaryFunction};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid2D, MaskKind, Point, SubdomainMask};
use crate::solver::{assemble_with, norms, CoefficientField, DiscreteOperator, SolverOptions};

/// Relative eigenvalue floor of the scaled Gram matrix.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Global solutions `z_1, …, z_K` for the boundary modes.
#[derive(Debug, Clone)]
pub struct Dictionary {
    op: DiscreteOperator,
    coeff: CoefficientField,
    fields: Vec<ScalarField>,
}

/// Solves one Dirichlet problem per mode `e_1, …, e_K`, in parallel over `k`.
pub fn build_dictionary(
    grid: &Grid2D,
    coeff: &CoefficientField,
    basis: &BoundaryBasis,
) -> Result<Dictionary> {
    build_dictionary_with(grid, coeff, basis, SolverOptions::default())
}

pub fn build_dictionary_with(
    grid: &Grid2D,
    coeff: &CoefficientField,
    basis: &BoundaryBasis,
    options: SolverOptions,
) -> Result<Dictionary> {
    let op = assemble_with(grid, coeff, options)?;
    let k_total = basis.len();
    let fields = (1..=k_total)
        .into_par_iter()
        .map(|k| op.solve_dirichlet(&BoundaryFunction::one_hot(k_total, k).evaluate(grid)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dictionary {
        op,
        coeff: coeff.clone(),
        fields,
    })
}

impl Dictionary {
    pub fn grid(&self) -> &Grid2D {
        self.op.grid()
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    pub fn coefficients(&self) -> &CoefficientField {
        &self.coeff
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// `z_k` for a 1-based mode index.
    pub fn field(&self, k: usize) -> &ScalarField {
        &self.fields[k - 1]
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    /// The dictionary of the first `k` modes.
    pub fn truncated(&self, k: usize) -> Result<Dictionary> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidInput(format!(
                "cannot truncate a {}-mode dictionary to {k} modes",
                self.len()
            )));
        }
        Ok(Dictionary {
            op: self.op.clone(),
            coeff: self.coeff.clone(),
            fields: self.fields[..k].to_vec(),
        })
    }

    /// `Σ c_k z_k` on the whole grid.
    pub fn combine(&self, c: &[f64]) -> ScalarField {
        let mut u = ScalarField::zeros(self.grid());
        for (z, &ck) in self.fields.iter().zip(c) {
            if ck != 0.0 {
                u.axpy(ck, z);
            }
        }
        u
    }
}

/// Which local solution to manufacture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetKind {
    /// `z_k` restricted to the disk (1-based).
    DictionaryMember { k: usize },
    /// `−(1/2π) log|x − pole|` with the pole in `Ω ∖ D̄`.
    FundamentalSolution { pole: Point },
    /// `Re (x + iy)^m`, or the imaginary part, for `m ≤ 4`.
    HarmonicPoly { degree: u32, imaginary: bool },
}

/// A local solution on a disk `D`.
///
/// `h` holds the target on `D` and a two-node ring around it; every other node
/// is zero and carries no meaning.
#[derive(Debug, Clone)]
pub struct LocalTarget {
    pub h: ScalarField,
    pub disk: SubdomainMask,
    pub h1_norm: f64,
    pub l2_norm: f64,
    /// `max_D |L_h h| / ‖h‖_{∞,D}` over interior nodes of `D`.
    pub residual: f64,
}

/// Builds a target on the disk `B(center, radius)` and checks that it solves
/// the dictionary's equation on the disk to within `100 h²` (relative).
pub fn make_target(
    dict: &Dictionary,
    center: Point,
    radius: f64,
    kind: TargetKind,
) -> Result<LocalTarget> {
    let grid = dict.grid();
    let disk = SubdomainMask::disk(grid, center, radius)?;
    let h = match kind {
        TargetKind::DictionaryMember { k } => {
            if k == 0 || k > dict.len() {
                return Err(Error::InvalidInput(format!(
                    "dictionary member {k} outside 1..={}",
                    dict.len()
                )));
            }
            dict.field(k).clone()
        }
        TargetKind::FundamentalSolution { pole } => {
            if !(pole.iter().all(|&p| p > 0.0 && p < 1.0)) {
                return Err(Error::InvalidInput(format!(
                    "pole {pole:?} must lie inside the unit square"
                )));
            }
            let dist = (pole[0] - center[0]).hypot(pole[1] - center[1]);
            if dist <= radius {
                return Err(Error::InvalidInput(format!(
                    "pole {pole:?} lies in the closed disk B({center:?}, {radius})"
                )));
            }
            let reach = radius + 2.5 * grid.h();
            let mut f = ScalarField::zeros(grid);
            for (id, v) in f.values_mut().iter_mut().enumerate() {
                let [x, y] = grid.point(id);
                if (x - center[0]).hypot(y - center[1]) <= reach {
                    *v = -(x - pole[0]).hypot(y - pole[1]).ln() / (2.0 * PI);
                }
            }
            f
        }
        TargetKind::HarmonicPoly { degree, imaginary } => {
            if degree > 4 {
                return Err(Error::InvalidInput(format!(
                    "harmonic polynomial degree {degree} exceeds 4"
                )));
            }
            ScalarField::from_fn(grid, |x, y| {
                let (mut re, mut im) = (1.0, 0.0);
                for _ in 0..degree {
                    (re, im) = (re * x - im * y, re * y + im * x);
                }
                if imaginary {
                    im
                } else {
                    re
                }
            })
        }
    };
    if !disk.nodes().iter().all(|&id| h.get(id).is_finite()) {
        return Err(Error::InvalidInput(
            "target is not finite on the disk".into(),
        ));
    }

    let linf = disk
        .nodes()
        .iter()
        .map(|&id| h.get(id).abs())
        .fold(0.0, f64::max);
    let lh = dict.op.apply(&h);
    let worst = dict
        .op
        .interior_nodes()
        .iter()
        .zip(&lh)
        .filter(|(id, _)| disk.contains(**id))
        .map(|(_, r)| r.abs())
        .fold(0.0, f64::max);
    let residual = if linf > 0.0 { worst / linf } else { worst };
    let tol = 100.0 * grid.h() * grid.h();
    if !(residual <= tol) {
        return Err(Error::InvalidInput(format!(
            "target does not solve the local equation: relative residual {residual:e} > {tol:e}"
        )));
    }
    let nm = norms(grid, &h, &disk)?;
    if nm.h1 == 0.0 {
        return Err(Error::InvalidInput("target vanishes on the disk".into()));
    }
    Ok(LocalTarget {
        h,
        disk,
        h1_norm: nm.h1,
        l2_norm: nm.l2,
        residual,
    })
}

/// Outcome of one regularized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RungeResult {
    pub c: Vec<f64>,
    /// `‖Σ c_k z_k − h‖_{L²(D)} / ‖h‖_{H¹(D)}`.
    pub eps_achieved: f64,
    /// `‖Σ c_k e_k‖_σ / ‖h‖_{H¹(D)}`.
    pub boundary_cost: f64,
    pub lambda: f64,
    /// Eigen-directions dropped by the floor.
    pub floored: usize,
}

fn disk_of(target: &LocalTarget) -> Result<(Point, f64)> {
    match target.disk.kind() {
        MaskKind::Disk { center, radius } => Ok((center, radius)),
        MaskKind::Rectangle { .. } => {
            Err(Error::InvalidInput("target domain is not a disk".into()))
        }
    }
}

/// Tikhonov fit of `target` by the dictionary, with penalty weights `σ_k`.
///
/// The normal equations are solved in the scaled variable `ĉ_k = c_k / σ_k`,
/// where they read `(S G S + λ I) ĉ = S b`. Eigenvalues below
/// [`EIGEN_FLOOR`] times the trace are dropped and counted in
/// [`RungeResult::floored`]. At `λ = 0` any dropped direction is reported as
/// [`Error::SingularGram`].
pub fn approximate(
    target: &LocalTarget,
    dict: &Dictionary,
    sigmas: &[f64],
    lambda: f64,
) -> Result<RungeResult> {
    let grid = dict.grid();
    disk_of(target)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "lambda must be non-negative, got {lambda}"
        )));
    }
    if !target.h.same_grid(grid) {
        return Err(Error::InvalidInput(
            "target and dictionary grids differ".into(),
        ));
    }
    let k = dict.len();
    if sigmas.len() < k || sigmas[..k].iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "need {k} positive penalty weights, got {}",
            sigmas.len()
        )));
    }
    let sigmas = &sigmas[..k];
    let w = grid.h() * grid.h();
    let nodes = target.disk.nodes();

    // A[i, k] = σ_k z_k(x_i), so S G S = w AᵀA
    let a = DMatrix::from_fn(nodes.len(), k, |i, j| {
        sigmas[j] * dict.fields[j].get(nodes[i])
    });
    let hv = DVector::from_iterator(nodes.len(), nodes.iter().map(|&id| target.h.get(id)));
    let mut m = a.tr_mul(&a) * w;
    let rhs = a.tr_mul(&hv) * w;
    for i in 0..k {
        m[(i, i)] += lambda;
    }
    let floor = EIGEN_FLOOR * m.trace();
    let eig = SymmetricEigen::new(m);
    let floored = eig.eigenvalues.iter().filter(|&&e| e < floor).count();
    if lambda == 0.0 && floored > 0 {
        return Err(Error::SingularGram { floored, total: k });
    }
    let proj = eig.eigenvectors.tr_mul(&rhs);
    let mut scaled = DVector::zeros(k);
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e >= floor {
            scaled += eig.eigenvectors.column(i) * (proj[i] / e);
        }
    }
    let c: Vec<f64> = scaled.iter().zip(sigmas).map(|(s, sg)| s * sg).collect();

    let u = dict.combine(&c);
    let err2: f64 = nodes
        .iter()
        .map(|&id| {
            let r = u.get(id) - target.h.get(id);
            r * r
        })
        .sum();
    let sigma_norm = c
        .iter()
        .zip(sigmas)
        .map(|(ck, s)| (ck / s) * (ck / s))
        .sum::<f64>()
        .sqrt();
    Ok(RungeResult {
        eps_achieved: (w * err2).sqrt() / target.h1_norm,
        boundary_cost: sigma_norm / target.h1_norm,
        c,
        lambda,
        floored,
    })
}

/// One point of the `(ε, C)` tradeoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub eps_achieved: f64,
    pub boundary_cost: f64,
}

/// Runs [`approximate`] for each weight; weights must be positive and are
/// expected in descending order.
pub fn tradeoff_curve(
    target: &LocalTarget,
    dict: &Dictionary,
    sigmas: &[f64],
    lambdas: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::Config(format!(
            "tradeoff weights must be positive, got {bad}"
        )));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            approximate(target, dict, sigmas, lambda).map(|r| TradeoffPoint {
                lambda,
                eps_achieved: r.eps_achieved,
                boundary_cost: r.boundary_cost,
            })
        })
        .collect()
}
