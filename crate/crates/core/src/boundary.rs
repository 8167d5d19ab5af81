//! Random Dirichlet data `φ = Σ a_k e_k` on the boundary of the unit square.
//!
//! The modes `e_k` are the real trigonometric system in the arclength
//! `s ∈ [0, 4)`, normalized in `L²(∂Ω)`:
//!
//! ```text
//! e_1      = 1/2
//! e_{2m}   = cos(2π m s / 4) / √2
//! e_{2m+1} = sin(2π m s / 4) / √2
//! ```
//!
//! Coefficients are independent with mean zero and variance `σ_k²`, where
//! `σ_k = c k^{-s}`. Three sub-Gaussian laws are available: Gaussian,
//! Rademacher (`±σ_k`) and uniform on `[-√3 σ_k, √3 σ_k]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// The first `K` boundary modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryBasis {
    k: usize,
}

impl BoundaryBasis {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("bc.K must be at least 1".into()));
        }
        Ok(Self { k })
    }

    /// Truncation order `K`.
    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trigonometric frequency of mode `k` (1-based).
    pub fn frequency(k: usize) -> usize {
        k / 2
    }

    /// Mode `k` (1-based) at arclength `s`.
    pub fn mode(k: usize, s: f64) -> f64 {
        debug_assert!(k >= 1);
        if k == 1 {
            return 0.5;
        }
        let theta = 2.0 * PI * Self::frequency(k) as f64 * s / 4.0;
        if k.is_multiple_of(2) {
            theta.cos() * FRAC_1_SQRT_2
        } else {
            theta.sin() * FRAC_1_SQRT_2
        }
    }

    /// Mode values on the boundary nodes: `K` rows in boundary order.
    pub fn tabulate(&self, grid: &Grid2D) -> Vec<Vec<f64>> {
        (1..=self.k)
            .map(|k| {
                (0..grid.num_boundary())
                    .map(|p| Self::mode(k, grid.arclength(p)))
                    .collect()
            })
            .collect()
    }

    /// Largest entry of `G − I`, where `G` is the Gram matrix of the modes
    /// under the boundary quadrature with weight `h`.
    pub fn gram_deviation(&self, grid: &Grid2D) -> f64 {
        let table = self.tabulate(grid);
        let h = grid.h();
        let mut worst = 0.0f64;
        for a in 0..self.k {
            for b in 0..self.k {
                let g: f64 = table[a]
                    .iter()
                    .zip(&table[b])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * h;
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

/// Coefficient law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    Rademacher,
    Uniform,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Rademacher, Family::Uniform];

    /// One draw with mean zero and standard deviation `sigma`.
    pub fn draw<R: Rng + ?Sized>(self, sigma: f64, rng: &mut R) -> f64 {
        match self {
            Family::Gaussian => sigma * rng.sample::<f64, _>(StandardNormal),
            Family::Rademacher => {
                if rng.random_bool(0.5) {
                    sigma
                } else {
                    -sigma
                }
            }
            Family::Uniform => {
                let b = 3f64.sqrt() * sigma;
                rng.random_range(-b..=b)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Rademacher => "rademacher",
            Family::Uniform => "uniform",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "rademacher" => Ok(Family::Rademacher),
            "uniform" => Ok(Family::Uniform),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected gaussian, rademacher or uniform)"
            ))),
        }
    }
}

/// Coefficients `a_1, …, a_K` of a boundary function.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    pub coeffs: Vec<f64>,
}

impl BoundaryFunction {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(k: usize) -> Self {
        Self {
            coeffs: vec![0.0; k],
        }
    }

    /// `a_k = 1` for one mode (1-based), zero elsewhere.
    pub fn one_hot(k_total: usize, k: usize) -> Self {
        let mut coeffs = vec![0.0; k_total];
        coeffs[k - 1] = 1.0;
        Self { coeffs }
    }

    /// Values on the boundary nodes, in boundary order.
    pub fn evaluate(&self, grid: &Grid2D) -> Vec<f64> {
        (0..grid.num_boundary())
            .map(|p| {
                let s = grid.arclength(p);
                self.coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(k, a)| a * BoundaryBasis::mode(k + 1, s))
                    .sum()
            })
            .collect()
    }

    /// Spectral `H^{1/2}` stand-in: `(Σ_k (1 + m(k)²)^{1/2} a_k²)^{1/2}`.
    pub fn surrogate_h12_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let m = BoundaryBasis::frequency(i + 1) as f64;
                (1.0 + m * m).sqrt() * a * a
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// A law for boundary coefficient vectors.
///
/// [`RandomBoundaryModel`] is the production implementation; experiments are
/// generic over this trait so that tests can inject degenerate laws.
pub trait CoefficientSampler: Sync {
    /// Number of coefficients per draw.
    fn dimension(&self) -> usize;

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> BoundaryFunction;

    /// `E[a_k²]`; the coefficients must be uncorrelated with mean zero.
    fn second_moments(&self) -> Vec<f64>;
}

/// The measure `ν`: basis, spectral decay `σ_k = c k^{-s}` and coefficient law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomBoundaryModel {
    basis: BoundaryBasis,
    c: f64,
    s: f64,
    family: Family,
}

impl RandomBoundaryModel {
    pub fn new(k: usize, c: f64, s: f64, family: Family) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!(
                "bc.sigma.c must be positive, got {c}"
            )));
        }
        if !(s > 1.0 && s.is_finite()) {
            return Err(Error::Config(format!(
                "bc.sigma.s must exceed 1 for a summable spectrum, got {s}"
            )));
        }
        Ok(Self {
            basis: BoundaryBasis::new(k)?,
            c,
            s,
            family,
        })
    }

    /// `K = 33`, `σ_k = k^{-1.5}`.
    pub fn default_with(family: Family) -> Self {
        Self::new(33, 1.0, 1.5, family).expect("default model is valid")
    }

    pub fn basis(&self) -> BoundaryBasis {
        self.basis
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn decay(&self) -> (f64, f64) {
        (self.c, self.s)
    }

    /// `σ_k` for a 1-based mode index.
    pub fn sigma(&self, k: usize) -> f64 {
        self.c * (k as f64).powf(-self.s)
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (1..=self.basis.len()).map(|k| self.sigma(k)).collect()
    }

    /// `‖φ‖_σ = (Σ_k a_k² / σ_k²)^{1/2}`.
    pub fn sigma_norm(&self, bf: &BoundaryFunction) -> f64 {
        bf.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = self.sigma(i + 1);
                a * a / (s * s)
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl CoefficientSampler for RandomBoundaryModel {
    fn dimension(&self) -> usize {
        self.basis.len()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> BoundaryFunction {
        BoundaryFunction {
            coeffs: (1..=self.basis.len())
                .map(|k| self.family.draw(self.sigma(k), rng))
                .collect(),
        }
    }

    fn second_moments(&self) -> Vec<f64> {
        self.sigmas().iter().map(|s| s * s).collect()
    }
}

/// Sample variances per mode and the largest absolute off-diagonal correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    pub variances: Vec<f64>,
    pub max_offdiag_correlation: f64,
}

/// Unbiased variance estimates of the coefficients across samples.
pub fn empirical_covariance(samples: &[BoundaryFunction]) -> Result<Covariance> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples for a covariance, got {}",
            samples.len()
        )));
    }
    let k = samples[0].coeffs.len();
    if samples.iter().any(|s| s.coeffs.len() != k) {
        return Err(Error::InvalidInput(
            "samples have different truncation orders".into(),
        ));
    }
    let m = samples.len() as f64;
    let mean: Vec<f64> = (0..k)
        .map(|i| samples.iter().map(|s| s.coeffs[i]).sum::<f64>() / m)
        .collect();
    let mut cov = vec![0.0; k * k];
    for s in samples {
        for a in 0..k {
            let da = s.coeffs[a] - mean[a];
            for b in a..k {
                cov[a * k + b] += da * (s.coeffs[b] - mean[b]);
            }
        }
    }
    for v in cov.iter_mut() {
        *v /= m - 1.0;
    }
    let variances: Vec<f64> = (0..k).map(|a| cov[a * k + a]).collect();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in a + 1..k {
            let denom = (variances[a] * variances[b]).sqrt();
            if denom > 0.0 {
                worst = worst.max((cov[a * k + b] / denom).abs());
            }
        }
    }
    Ok(Covariance {
        variances,
        max_offdiag_correlation: worst,
    })
}
