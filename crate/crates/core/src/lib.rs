//! Random Dirichlet data for elliptic equations on the unit square.
//!
//! The crate solves `−div(a∇u) + qu = 0` by finite differences, draws
//! boundary conditions from a spectral random model, and measures how often
//! a few random solutions satisfy non-vanishing constraints on an interior
//! subdomain. On top of that sit a regularized Runge approximation and two
//! hybrid-imaging reconstructions (QPAT and conductivity) that consume those
//! constraints.
//!
//! ```
//! use randbc::grid::Grid2D;
//! use randbc::solver::{assemble, CoefficientField};
//!
//! # fn main() -> randbc::error::Result<()> {
//! let grid = Grid2D::new(17)?;
//! let op = assemble(&grid, &CoefficientField::laplace(&grid))?;
//! let u = op.solve_dirichlet(&grid.sample_boundary(|x, y| x * x - y * y))?;
//! assert!(u.get(grid.id(8, 8)).abs() < 1e-8);
//! # Ok(())
//! # }
//! ```
//!
//! The guide in `book/` walks through every module; its code listings run
//! as doc-tests of this crate.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli;
pub mod config;
pub mod constraints;
pub mod error;
pub mod experiments;
pub mod expr;
pub mod field;
pub mod grid;
pub mod inverse;
pub mod rng;
pub mod runge;
pub mod solver;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    mod boundary {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/runge.md")]
    mod runge {}
    #[doc = include_str!("../../../book/src/inverse.md")]
    mod inverse {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
