//! Monte-Carlo checks of the random-boundary results: success probability of
//! the constraint event, the variance identity, and tail/concentration shapes.
//!
//! Each repetition draws from its own stream (see [`crate::rng`]) and results
//! are folded in repetition order, so every table is a pure function of the
//! inputs and the master seed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::boundary::{BoundaryFunction, CoefficientSampler};
use crate::constraints::{
    extract_cover, max_abs, zeta_eval, ConstraintField, ConstraintMap, CoverLabeling,
};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid2D, Point, SubdomainMask};
use crate::rng::{stream, Purpose};
use crate::runge::Dictionary;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Smallest number of repetitions accepted by [`success_curve`].
pub const MIN_REPETITIONS: usize = 50;

/// Smallest sample size accepted by [`tail_check`].
pub const MIN_TAIL_SAMPLES: usize = 1000;

/// How trial solutions are produced from sampled boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSource {
    /// `u = Σ a_k z_k` from the dictionary. Exact by linearity.
    #[default]
    Dictionary,
    /// One Dirichlet solve per boundary function.
    DirectSolve,
}

/// One Monte-Carlo setting of the constraint experiment.
#[derive(Debug, Clone, Copy)]
pub struct TrialConfig<'a, S> {
    pub dict: &'a Dictionary,
    pub sampler: &'a S,
    pub map: ConstraintMap,
    /// Number of measurements `N`.
    pub measurements: usize,
    pub mask: &'a SubdomainMask,
    pub source: FieldSource,
}

impl<S: CoefficientSampler> TrialConfig<'_, S> {
    pub fn validate(&self) -> Result<()> {
        if self.measurements == 0 {
            return Err(Error::Config(
                "the number of measurements must be at least 1".into(),
            ));
        }
        if self.sampler.dimension() != self.dict.len() {
            return Err(Error::Config(format!(
                "sampler draws {} coefficients but the dictionary has {} modes",
                self.sampler.dimension(),
                self.dict.len()
            )));
        }
        if self.mask.is_empty() {
            return Err(Error::Config("the subdomain mask is empty".into()));
        }
        Ok(())
    }

    /// `N ≥ n`, the regime in which the success bound is stated for `d = 2`.
    pub fn in_theorem_regime(&self) -> bool {
        self.measurements >= self.map.arity()
    }

    fn grid(&self) -> &Grid2D {
        self.dict.grid()
    }

    fn solution(&self, bf: &BoundaryFunction) -> Result<ScalarField> {
        match self.source {
            FieldSource::Dictionary => Ok(self.dict.combine(&bf.coeffs)),
            FieldSource::DirectSolve => self
                .dict
                .operator()
                .solve_dirichlet(&bf.evaluate(self.grid())),
        }
    }

    /// Constraint fields of measurements `1..=count`. Draws are consumed
    /// measurement by measurement, so a smaller count sees a prefix.
    fn measurement_fields<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
    ) -> Result<Vec<ConstraintField>> {
        (0..count)
            .map(|_| {
                let tuple = (0..self.map.arity())
                    .map(|_| self.solution(&self.sampler.draw(rng)))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&ScalarField> = tuple.iter().collect();
                zeta_eval(&self.map, &refs, self.grid(), self.mask)
            })
            .collect()
    }
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// `min_{Ω′} max_l |ζ^l|`.
    pub min_max: f64,
    /// Cover at the reference threshold, if one was requested.
    pub labels: Option<CoverLabeling>,
}

impl TrialOutcome {
    pub fn success_at(&self, tau: f64) -> bool {
        self.min_max >= tau
    }
}

/// Aggregates measured constraint fields into an outcome.
pub fn outcome_from_fields(
    fields: &[ConstraintField],
    tau_ref: Option<f64>,
) -> Result<TrialOutcome> {
    let min_max = max_abs(fields)?.min;
    let labels = tau_ref.map(|t| extract_cover(fields, t)).transpose()?;
    Ok(TrialOutcome { min_max, labels })
}

/// The `N` constraint fields of trial `index`.
pub fn trial_fields<S: CoefficientSampler>(
    cfg: &TrialConfig<'_, S>,
    master_seed: u64,
    index: u64,
) -> Result<Vec<ConstraintField>> {
    cfg.validate()?;
    let mut rng = stream(master_seed, Purpose::Trial, index);
    cfg.measurement_fields(&mut rng, cfg.measurements)
}

/// Runs trial `index` of the experiment seeded by `master_seed`.
pub fn run_trial<S: CoefficientSampler>(
    cfg: &TrialConfig<'_, S>,
    master_seed: u64,
    index: u64,
    tau_ref: Option<f64>,
) -> Result<TrialOutcome> {
    outcome_from_fields(&trial_fields(cfg, master_seed, index)?, tau_ref)
}

/// `min_max` of trial `index` for every `N` in `n_values`, all computed from
/// prefixes of one draw sequence. Non-decreasing in `N` by construction.
pub fn run_nested<S: CoefficientSampler>(
    cfg: &TrialConfig<'_, S>,
    n_values: &[usize],
    master_seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let largest = n_values.iter().copied().max().unwrap_or(0);
    let cfg = TrialConfig {
        measurements: largest,
        ..*cfg
    };
    cfg.validate()?;
    let mut rng = stream(master_seed, Purpose::Trial, index);
    let fields = cfg.measurement_fields(&mut rng, largest)?;
    // running max over measurements, then its min over Ω′ at each prefix length
    let mut running = vec![0.0f64; cfg.mask.len()];
    let mut by_count = Vec::with_capacity(largest);
    for f in &fields {
        for (r, v) in running.iter_mut().zip(&f.values) {
            *r = r.max(v.abs());
        }
        by_count.push(running.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(n_values.iter().map(|&n| by_count[n - 1]).collect())
}

/// The success threshold of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// The 5th percentile of `min_max` at the largest `N`.
    Auto,
    Fixed(f64),
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threshold::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t >= 0.0 && t.is_finite() => Ok(Threshold::Fixed(t)),
            _ => Err(Error::Config(format!(
                "threshold must be `auto` or a non-negative number, got `{s}`"
            ))),
        }
    }
}

/// `sorted[⌊0.05 M⌋]`: at least 95% of the values are `>=` the result.
pub fn calibrate_tau(min_max: &[f64]) -> f64 {
    let mut sorted = min_max.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[(0.05 * sorted.len() as f64).floor() as usize]
}

/// Wilson score interval for `k` successes out of `m`.
pub fn wilson_interval(k: usize, m: usize, z: f64) -> (f64, f64) {
    let m = m as f64;
    let p = k as f64 / m;
    let z2 = z * z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = z / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub n: usize,
    pub successes: usize,
    pub m: usize,
    pub rate: f64,
    pub lo95: f64,
    pub hi95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCurve {
    pub tau: f64,
    pub rows: Vec<CurveRow>,
    /// `min_max[m][i]` for repetition `m` at `n_values[i]`.
    pub min_max: Vec<Vec<f64>>,
}

impl SuccessCurve {
    /// The same trials scored at another threshold.
    pub fn rescored(&self, tau: f64) -> SuccessCurve {
        let m = self.min_max.len();
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let successes = self.min_max.iter().filter(|t| t[i] >= tau).count();
                let (lo95, hi95) = wilson_interval(successes, m, Z95);
                CurveRow {
                    n: row.n,
                    successes,
                    m,
                    rate: successes as f64 / m as f64,
                    lo95,
                    hi95,
                }
            })
            .collect();
        SuccessCurve {
            tau,
            rows,
            min_max: self.min_max.clone(),
        }
    }
}

/// `M` coupled repetitions at each `N`; repetition `m` uses the stream
/// `(master_seed, Trial, m)` and the trial at `N` reads its first `N` tuples.
pub fn success_curve<S: CoefficientSampler>(
    cfg: &TrialConfig<'_, S>,
    n_values: &[usize],
    m: usize,
    tau: Threshold,
    master_seed: u64,
) -> Result<SuccessCurve> {
    if m < MIN_REPETITIONS {
        return Err(Error::Config(format!(
            "at least {MIN_REPETITIONS} repetitions are required, got {m}"
        )));
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::Config(
            "N values must be non-empty and positive".into(),
        ));
    }
    let min_max = (0..m as u64)
        .into_par_iter()
        .map(|rep| run_nested(cfg, n_values, master_seed, rep))
        .collect::<Result<Vec<_>>>()?;
    let tau = match tau {
        Threshold::Fixed(t) => t,
        Threshold::Auto => {
            let last = n_values
                .iter()
                .enumerate()
                .max_by_key(|(_, n)| **n)
                .map(|(i, _)| i)
                .unwrap_or(0);
            calibrate_tau(&min_max.iter().map(|t| t[last]).collect::<Vec<_>>())
        }
    };
    let blank = SuccessCurve {
        tau,
        rows: n_values
            .iter()
            .map(|&n| CurveRow {
                n,
                successes: 0,
                m,
                rate: 0.0,
                lo95: 0.0,
                hi95: 0.0,
            })
            .collect(),
        min_max,
    };
    Ok(blank.rescored(tau))
}

/// Resolves probe points to grid nodes in the interior.
fn probe_nodes(grid: &Grid2D, points: &[Point]) -> Result<Vec<usize>> {
    let last = grid.n() - 1;
    points
        .iter()
        .map(|p| {
            if !p.iter().all(|&c| c > 0.0 && c < 1.0) {
                return Err(Error::Config(format!(
                    "probe point {p:?} is not inside the square"
                )));
            }
            let i = (p[0] * last as f64).round() as usize;
            let j = (p[1] * last as f64).round() as usize;
            Ok(grid.id(i.clamp(1, last - 1), j.clamp(1, last - 1)))
        })
        .collect()
}

/// `ζ(z_k)` at one node for a linear map, or `ζ(z_j, z_k)` for a bilinear one
/// (flattened row-major).
fn dictionary_values(map: &ConstraintMap, dict: &Dictionary, id: usize) -> Vec<f64> {
    let grid = dict.grid();
    let z = dict.fields();
    match map.arity() {
        1 => z.iter().map(|f| map.eval_at(grid, &[f], id)).collect(),
        _ => z
            .iter()
            .flat_map(|a| z.iter().map(move |b| map.eval_at(grid, &[a, b], id)))
            .collect(),
    }
}

/// Largest `K` for the two-argument series, which sums `K²` terms.
pub const MAX_BILINEAR_K: usize = 8;

fn check_probe_map(map: &ConstraintMap, dict: &Dictionary) -> Result<()> {
    match map.arity() {
        1 => Ok(()),
        2 if dict.len() <= MAX_BILINEAR_K => Ok(()),
        2 => Err(Error::Config(format!(
            "two-argument series needs K <= {MAX_BILINEAR_K}, got K = {}",
            dict.len()
        ))),
        got => Err(Error::Arity {
            kind: map.kind().name(),
            expected: 1,
            got,
        }),
    }
}

/// `ζ(u₁, …, u_n)(x)` for a fresh draw, by linearity in each argument.
fn probe_value<S: CoefficientSampler, R: Rng + ?Sized>(
    table: &[f64],
    arity: usize,
    sampler: &S,
    rng: &mut R,
) -> f64 {
    let a = sampler.draw(rng).coeffs;
    if arity == 1 {
        return a.iter().zip(table).map(|(ak, zk)| ak * zk).sum();
    }
    let b = sampler.draw(rng).coeffs;
    let k = a.len();
    (0..k)
        .map(|j| a[j] * (0..k).map(|l| b[l] * table[j * k + l]).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceRow {
    pub x: f64,
    pub y: f64,
    pub mc: f64,
    pub series: f64,
    pub z: f64,
}

/// Compares `E ζ(u)(x)²` estimated from `M` draws with the dictionary series
/// `Σ_k σ_k² ζ(z_k)(x)²` (or its two-argument analogue for `K ≤ 8`).
pub fn variance_identity_check<S: CoefficientSampler>(
    dict: &Dictionary,
    sampler: &S,
    map: &ConstraintMap,
    points: &[Point],
    m: usize,
    master_seed: u64,
) -> Result<Vec<VarianceRow>> {
    check_probe_map(map, dict)?;
    if sampler.dimension() != dict.len() {
        return Err(Error::Config("sampler and dictionary sizes differ".into()));
    }
    if m < 2 {
        return Err(Error::Config("need at least 2 draws".into()));
    }
    let grid = dict.grid();
    let var = sampler.second_moments();
    let nodes = probe_nodes(grid, points)?;
    nodes
        .iter()
        .enumerate()
        .map(|(p, &id)| {
            let table = dictionary_values(map, dict, id);
            let k = dict.len();
            let series: f64 = if map.arity() == 1 {
                table.iter().zip(&var).map(|(z, s)| s * z * z).sum()
            } else {
                table
                    .iter()
                    .enumerate()
                    .map(|(jl, z)| var[jl / k] * var[jl % k] * z * z)
                    .sum()
            };
            let samples: Vec<f64> = (0..m as u64)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(master_seed, Purpose::Variance, p as u64 * m as u64 + i);
                    probe_value(&table, map.arity(), sampler, &mut rng).powi(2)
                })
                .collect();
            let mc = samples.iter().sum::<f64>() / m as f64;
            let sd =
                (samples.iter().map(|x| (x - mc).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
            let stderr = sd / (m as f64).sqrt();
            let z = if stderr > 0.0 {
                (mc - series) / stderr
            } else if mc == series {
                0.0
            } else {
                (mc - series).signum() * f64::INFINITY
            };
            let [x, y] = grid.point(id);
            Ok(VarianceRow {
                x,
                y,
                mc,
                series,
                z,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub t: f64,
    /// `P(‖φ‖ ≥ t)` over the sample.
    pub survival: f64,
    /// `2 exp(−ĉ t²)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub c_hat: f64,
    pub rows: Vec<TailRow>,
    pub dominated: bool,
}

/// Largest `c` with `survival(t) <= 2 exp(−c · shape(t))` on every row, shaved
/// by one part in `10¹²` so the inequality survives rounding.
fn fit_rate(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    points
        .filter(|&(shape, s)| shape > 0.0 && s > 0.0)
        .map(|(shape, s)| (2.0 / s).ln() / shape)
        .fold(f64::INFINITY, f64::min)
        * (1.0 - 1e-12)
}

/// Evenly spaced `t` in `(0, max]`.
pub fn auto_t_grid(max: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| max * i as f64 / points as f64)
        .collect()
}

/// Empirical survival of the surrogate `H^{1/2}` norm and the largest `ĉ` for
/// which `2 exp(−ĉ t²)` dominates it on `t_grid` (24 points up to the sample
/// maximum when empty).
pub fn tail_check<S: CoefficientSampler>(
    sampler: &S,
    m: usize,
    t_grid: &[f64],
    master_seed: u64,
) -> Result<TailReport> {
    if m < MIN_TAIL_SAMPLES {
        return Err(Error::Config(format!(
            "tail check needs at least {MIN_TAIL_SAMPLES} samples, got {m}"
        )));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::Config(
            "tail grid values must be finite and non-negative".into(),
        ));
    }
    let mut norms: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(master_seed, Purpose::Tail, i);
            sampler.draw(&mut rng).surrogate_h12_norm()
        })
        .collect();
    norms.sort_by(f64::total_cmp);
    let grid = if t_grid.is_empty() {
        auto_t_grid(norms[m - 1], 24)
    } else {
        t_grid.to_vec()
    };
    let survival: Vec<f64> = grid
        .iter()
        .map(|&t| (m - norms.partition_point(|&v| v < t)) as f64 / m as f64)
        .collect();
    let c_hat = fit_rate(grid.iter().zip(&survival).map(|(t, s)| (t * t, *s)));
    let rows: Vec<TailRow> = grid
        .iter()
        .zip(&survival)
        .map(|(&t, &s)| TailRow {
            t,
            survival: s,
            bound: 2.0 * (-c_hat * t * t).exp(),
        })
        .collect();
    let dominated = rows.iter().all(|r| r.survival <= r.bound);
    Ok(TailReport {
        c_hat,
        rows,
        dominated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub n: usize,
    pub t: f64,
    /// `P(|N⁻¹ Σ_l X_l − μ̂| ≥ t)` over the repetitions.
    pub empirical: f64,
    /// `2 exp(−Ĉ min(N t², (tN)^{1/n}))`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    /// Series value of `E X`.
    pub mu_hat: f64,
    pub c_hat: f64,
    pub rows: Vec<ConcentrationRow>,
    /// 90% quantile of the deviation for each `N`.
    pub quantiles: Vec<(usize, f64)>,
    pub dominated: bool,
}

/// Deviation of the empirical mean of `X_l = ζ(u^l)(x)²` from its series
/// value, for each `N`, against the two-regime concentration shape.
#[allow(clippy::too_many_arguments)]
pub fn concentration_check<S: CoefficientSampler>(
    dict: &Dictionary,
    sampler: &S,
    map: &ConstraintMap,
    point: Point,
    n_values: &[usize],
    t_values: &[f64],
    m: usize,
    master_seed: u64,
) -> Result<ConcentrationReport> {
    if map.arity() != 1 {
        return Err(Error::Arity {
            kind: map.kind().name(),
            expected: 1,
            got: map.arity(),
        });
    }
    if n_values.is_empty() || n_values.contains(&0) || m < 2 {
        return Err(Error::Config(
            "need positive N values and at least 2 repetitions".into(),
        ));
    }
    let id = probe_nodes(dict.grid(), &[point])?[0];
    let table = dictionary_values(map, dict, id);
    let mu_hat: f64 = table
        .iter()
        .zip(sampler.second_moments())
        .map(|(z, s)| s * z * z)
        .sum();
    let largest = *n_values.iter().max().unwrap();
    // deviations[rep][i] for N = n_values[i], nested within a repetition
    let deviations: Vec<Vec<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(master_seed, Purpose::Concentration, rep);
            let mut prefix = Vec::with_capacity(largest);
            let mut acc = 0.0;
            for _ in 0..largest {
                acc += probe_value(&table, 1, sampler, &mut rng).powi(2);
                prefix.push(acc);
            }
            n_values
                .iter()
                .map(|&n| (prefix[n - 1] / n as f64 - mu_hat).abs())
                .collect()
        })
        .collect();

    let arity = map.arity() as f64;
    let shape = |n: usize, t: f64| (n as f64 * t * t).min((t * n as f64).powf(1.0 / arity));
    let mut cells = Vec::new();
    for (i, &n) in n_values.iter().enumerate() {
        for &t in t_values {
            let hits = deviations.iter().filter(|d| d[i] >= t).count();
            cells.push((n, t, hits as f64 / m as f64));
        }
    }
    let c_hat = fit_rate(cells.iter().map(|&(n, t, p)| (shape(n, t), p)));
    let rows: Vec<ConcentrationRow> = cells
        .iter()
        .map(|&(n, t, empirical)| ConcentrationRow {
            n,
            t,
            empirical,
            bound: 2.0 * (-c_hat * shape(n, t)).exp(),
        })
        .collect();
    let quantiles = n_values
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut d: Vec<f64> = deviations.iter().map(|r| r[i]).collect();
            d.sort_by(f64::total_cmp);
            (n, d[((0.9 * m as f64).ceil() as usize).min(m) - 1])
        })
        .collect();
    let dominated = rows.iter().all(|r| r.empirical <= r.bound);
    Ok(ConcentrationReport {
        mu_hat,
        c_hat,
        rows,
        quantiles,
        dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{Family, RandomBoundaryModel};
    use crate::constraints::ConstraintKind;
    use crate::runge::build_dictionary;
    use crate::solver::CoefficientField;

    /// Only the first mode is random; the others are fixed at zero.
    struct SingleMode {
        k: usize,
        sigma: f64,
        family: Family,
    }

    impl CoefficientSampler for SingleMode {
        fn dimension(&self) -> usize {
            self.k
        }

        fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> BoundaryFunction {
            let mut bf = BoundaryFunction::zero(self.k);
            bf.coeffs[0] = self.family.draw(self.sigma, rng);
            bf
        }

        fn second_moments(&self) -> Vec<f64> {
            let mut v = vec![0.0; self.k];
            v[0] = self.sigma * self.sigma;
            v
        }
    }

    /// Always returns the same coefficients.
    struct Fixed(BoundaryFunction);

    impl CoefficientSampler for Fixed {
        fn dimension(&self) -> usize {
            self.0.coeffs.len()
        }

        fn draw<R: Rng + ?Sized>(&self, _: &mut R) -> BoundaryFunction {
            self.0.clone()
        }

        fn second_moments(&self) -> Vec<f64> {
            vec![0.0; self.0.coeffs.len()]
        }
    }

    fn dict(n: usize, k: usize) -> Dictionary {
        let g = Grid2D::new(n).unwrap();
        let model = RandomBoundaryModel::new(k, 1.0, 1.5, Family::Gaussian).unwrap();
        build_dictionary(&g, &CoefficientField::laplace(&g), &model.basis()).unwrap()
    }

    fn omega_prime(g: &Grid2D) -> SubdomainMask {
        SubdomainMask::rect(g, [0.25, 0.25], [0.75, 0.75]).unwrap()
    }

    #[test]
    fn constant_data_gives_its_absolute_value() {
        let d = dict(17, 5);
        let mask = omega_prime(d.grid());
        // φ ≡ -0.7 is a multiple of e_1 = 1/2
        let sampler = Fixed(BoundaryFunction::new(vec![-1.4, 0.0, 0.0, 0.0, 0.0]));
        let cfg = TrialConfig {
            dict: &d,
            sampler: &sampler,
            map: ConstraintMap::new(ConstraintKind::Nodal),
            measurements: 3,
            mask: &mask,
            source: FieldSource::DirectSolve,
        };
        let out = run_trial(&cfg, 1, 0, None).unwrap();
        assert!((out.min_max - 0.7).abs() < 1e-9, "{}", out.min_max);
    }

    #[test]
    fn injected_coordinate_fields_hit_the_witness() {
        let g = Grid2D::new(33).unwrap();
        let mask = omega_prime(&g);
        let x1 = ScalarField::from_fn(&g, |x, _| x);
        let x2 = ScalarField::from_fn(&g, |_, y| y);
        let map = ConstraintMap::new(ConstraintKind::Jacobian);
        let f = zeta_eval(&map, &[&x1, &x2], &g, &mask).unwrap();
        let out = outcome_from_fields(&[f], Some(0.5)).unwrap();
        assert!((out.min_max - 1.0).abs() <= 1e-12);
        assert!(out.labels.unwrap().complete);
    }

    #[test]
    fn trials_are_reproducible_across_pools() {
        let d = dict(17, 9);
        let mask = omega_prime(d.grid());
        let model = RandomBoundaryModel::new(9, 1.0, 1.5, Family::Gaussian).unwrap();
        let cfg = TrialConfig {
            dict: &d,
            sampler: &model,
            map: ConstraintMap::new(ConstraintKind::Critical),
            measurements: 4,
            mask: &mask,
            source: FieldSource::Dictionary,
        };
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| success_curve(&cfg, &[1, 2, 4], 50, Threshold::Auto, 42).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let single = run_trial(&cfg, 42, 7, None).unwrap();
        assert_eq!(single.min_max.to_bits(), a.min_max[7][2].to_bits());
    }

    #[test]
    fn direct_solves_agree_with_synthesis() {
        let d = dict(17, 9);
        let mask = omega_prime(d.grid());
        let model = RandomBoundaryModel::new(9, 1.0, 1.5, Family::Uniform).unwrap();
        let mut cfg = TrialConfig {
            dict: &d,
            sampler: &model,
            map: ConstraintMap::new(ConstraintKind::Jacobian),
            measurements: 2,
            mask: &mask,
            source: FieldSource::Dictionary,
        };
        let a = run_trial(&cfg, 5, 0, None).unwrap().min_max;
        cfg.source = FieldSource::DirectSolve;
        let b = run_trial(&cfg, 5, 0, None).unwrap().min_max;
        assert!((a - b).abs() <= 1e-7 * a.abs().max(1e-3), "{a} vs {b}");
    }

    #[test]
    fn curve_invariants() {
        let d = dict(17, 9);
        let mask = omega_prime(d.grid());
        let model = RandomBoundaryModel::new(9, 1.0, 1.5, Family::Gaussian).unwrap();
        let cfg = TrialConfig {
            dict: &d,
            sampler: &model,
            map: ConstraintMap::new(ConstraintKind::Nodal),
            measurements: 1,
            mask: &mask,
            source: FieldSource::Dictionary,
        };
        let ns = [1, 2, 4, 8];
        assert!(success_curve(&cfg, &ns, 10, Threshold::Auto, 0).is_err());
        let zero = success_curve(&cfg, &ns, 60, Threshold::Fixed(0.0), 3).unwrap();
        assert!(zero.rows.iter().all(|r| r.rate == 1.0));
        for trial in &zero.min_max {
            assert!(trial.windows(2).all(|w| w[0] <= w[1]));
        }
        // calibrated at N = 1: rates cannot decrease along a coupled curve
        let first: Vec<f64> = zero.min_max.iter().map(|t| t[0]).collect();
        let tau = calibrate_tau(&first);
        let curve = zero.rescored(tau);
        assert!(curve
            .rows
            .windows(2)
            .all(|w| w[0].successes <= w[1].successes));
        let auto = success_curve(&cfg, &ns, 60, Threshold::Auto, 3).unwrap();
        assert!(auto.rows[3].rate >= 0.95);
    }

    #[test]
    fn wilson_matches_hand_values() {
        let (lo, hi) = wilson_interval(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.071348).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(190, 200, Z95);
        // independent evaluation of the score interval
        let (p, m, z): (f64, f64, f64) = (0.95, 200.0, Z95);
        let c = (p + z * z / (2.0 * m)) / (1.0 + z * z / m);
        let w = z * (p * (1.0 - p) / m + z * z / (4.0 * m * m)).sqrt() / (1.0 + z * z / m);
        assert!((lo - (c - w)).abs() < 1e-15 && (hi - (c + w)).abs() < 1e-15);
        assert!(lo < 0.95 && hi > 0.95);
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!("auto".parse::<Threshold>().unwrap(), Threshold::Auto);
        assert_eq!("0.25".parse::<Threshold>().unwrap(), Threshold::Fixed(0.25));
        assert!("-1".parse::<Threshold>().is_err());
    }

    #[test]
    fn single_mode_variance_is_exact_in_the_series() {
        let d = dict(17, 5);
        let sampler = SingleMode {
            k: 5,
            sigma: 0.8,
            family: Family::Gaussian,
        };
        let map = ConstraintMap::new(ConstraintKind::Nodal);
        let rows = variance_identity_check(&d, &sampler, &map, &[[0.5, 0.5], [0.3, 0.6]], 1000, 9)
            .unwrap();
        for r in rows {
            // z_1 ≡ 1/2, so the series is σ²/4
            assert!((r.series - 0.16).abs() < 1e-9);
            assert!(r.z.abs() <= 5.0, "{r:?}");
        }
    }

    #[test]
    fn deterministic_zero_data() {
        let d = dict(17, 5);
        let sampler = Fixed(BoundaryFunction::zero(5));
        let map = ConstraintMap::new(ConstraintKind::Critical);
        let rows = variance_identity_check(&d, &sampler, &map, &[[0.5, 0.5]], 100, 1).unwrap();
        assert_eq!((rows[0].mc, rows[0].series, rows[0].z), (0.0, 0.0, 0.0));
        let rep = concentration_check(&d, &sampler, &map, [0.5, 0.5], &[1, 4], &[0.0, 0.1], 100, 1)
            .unwrap();
        for r in &rep.rows {
            let expect = if r.t == 0.0 { 1.0 } else { 0.0 };
            assert_eq!(r.empirical, expect);
        }
        assert!(rep.quantiles.iter().all(|q| q.1 == 0.0));
    }

    #[test]
    fn full_model_variance_at_the_centre() {
        let d = dict(33, 17);
        let model = RandomBoundaryModel::new(17, 1.0, 1.5, Family::Gaussian).unwrap();
        let map = ConstraintMap::new(ConstraintKind::Nodal);
        let rows = variance_identity_check(&d, &model, &map, &[[0.5, 0.5]], 10_000, 11).unwrap();
        assert!(rows[0].z.abs() <= 5.0, "{:?}", rows[0]);
    }

    #[test]
    fn bilinear_series_path() {
        let d = dict(17, 5);
        let model = RandomBoundaryModel::new(5, 1.0, 1.5, Family::Rademacher).unwrap();
        let map = ConstraintMap::new(ConstraintKind::Jacobian);
        let rows = variance_identity_check(&d, &model, &map, &[[0.4, 0.5]], 4000, 2).unwrap();
        assert!(
            rows[0].series > 0.0 && rows[0].z.abs() <= 5.0,
            "{:?}",
            rows[0]
        );
        let big = self::dict(17, 9);
        let m9 = RandomBoundaryModel::new(9, 1.0, 1.5, Family::Gaussian).unwrap();
        assert!(variance_identity_check(&big, &m9, &map, &[[0.5, 0.5]], 100, 2).is_err());
        let aug = ConstraintMap::new(ConstraintKind::Augmented);
        assert!(matches!(
            variance_identity_check(&d, &model, &aug, &[[0.5, 0.5]], 100, 2),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn single_mode_gaussian_tail() {
        let sigma: f64 = 0.6;
        let sampler = SingleMode {
            k: 3,
            sigma,
            family: Family::Gaussian,
        };
        let rep = tail_check(&sampler, 10_000, &[], 4).unwrap();
        assert!(rep.dominated);
        let reference = 1.0 / (2.0 * sigma * sigma);
        assert!(
            rep.c_hat > reference / 2.0 && rep.c_hat < reference * 2.0,
            "{}",
            rep.c_hat
        );
        assert!(tail_check(&sampler, 10, &[], 4).is_err());
    }

    #[test]
    fn single_mode_rademacher_tail_is_a_step() {
        let sampler = SingleMode {
            k: 3,
            sigma: 0.5,
            family: Family::Rademacher,
        };
        let rep = tail_check(&sampler, 2000, &[0.25, 0.5, 0.75, 1.0], 4).unwrap();
        let s: Vec<f64> = rep.rows.iter().map(|r| r.survival).collect();
        assert_eq!(s, vec![1.0, 1.0, 0.0, 0.0]);
        assert!(rep.dominated && rep.c_hat > 0.0);
    }

    #[test]
    fn concentration_sharpens_with_more_measurements() {
        let d = dict(17, 9);
        let model = RandomBoundaryModel::new(9, 1.0, 1.5, Family::Gaussian).unwrap();
        let map = ConstraintMap::new(ConstraintKind::Nodal);
        let rep = concentration_check(
            &d,
            &model,
            &map,
            [0.5, 0.5],
            &[1, 64],
            &[0.0, 0.05, 0.1, 0.2],
            500,
            8,
        )
        .unwrap();
        assert!(rep.quantiles[1].1 < rep.quantiles[0].1);
        assert!(rep.dominated && rep.c_hat > 0.0);
        assert!(rep
            .rows
            .iter()
            .filter(|r| r.t == 0.0)
            .all(|r| r.empirical == 1.0));
    }
}
