//! The non-zero constraint maps and their evaluation on Ω′.
//!
//! | kind        | arity | value at x                               |
//! |-------------|-------|------------------------------------------|
//! | `nodal`     | 1     | `u(x)`                                   |
//! | `critical`  | 1     | `d · ∇u(x)`                              |
//! | `jacobian`  | 2     | `det[∇u₁ ∇u₂](x)`                        |
//! | `augmented` | 3     | `det[(u_i, ∂₁u_i, ∂₂u_i)ᵢ](x)` (columns) |
//!
//! Every map is multilinear and local: its value at a node only reads the
//! node and the gradient stencil around it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid2D, SubdomainMask};
use crate::solver::gradient_at;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Nodal,
    Critical,
    Jacobian,
    Augmented,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::Nodal,
        ConstraintKind::Critical,
        ConstraintKind::Jacobian,
        ConstraintKind::Augmented,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Nodal => "nodal",
            ConstraintKind::Critical => "critical",
            ConstraintKind::Jacobian => "jacobian",
            ConstraintKind::Augmented => "augmented",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown constraint `{s}` (expected nodal, critical, jacobian or augmented)"
                ))
            })
    }
}

/// A constraint map `ζ` with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintMap {
    kind: ConstraintKind,
    direction: [f64; 2],
}

impl ConstraintMap {
    pub fn new(kind: ConstraintKind) -> Self {
        Self {
            kind,
            direction: [1.0, 0.0],
        }
    }

    /// Critical-point map along a unit direction.
    pub fn critical_along(direction: [f64; 2]) -> Result<Self> {
        let norm = direction[0].hypot(direction[1]);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config(format!("invalid direction {direction:?}")));
        }
        Ok(Self {
            kind: ConstraintKind::Critical,
            direction: [direction[0] / norm, direction[1] / norm],
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn direction(&self) -> [f64; 2] {
        self.direction
    }

    /// Number of solutions the map consumes.
    pub fn arity(&self) -> usize {
        match self.kind {
            ConstraintKind::Nodal | ConstraintKind::Critical => 1,
            ConstraintKind::Jacobian => 2,
            ConstraintKind::Augmented => 3,
        }
    }

    /// Value at one node; `fields.len()` must equal the arity.
    pub fn eval_at(&self, grid: &Grid2D, fields: &[&ScalarField], id: usize) -> f64 {
        match self.kind {
            ConstraintKind::Nodal => fields[0].get(id),
            ConstraintKind::Critical => {
                let [gx, gy] = gradient_at(grid, fields[0].values(), id);
                self.direction[0] * gx + self.direction[1] * gy
            }
            ConstraintKind::Jacobian => {
                let a = gradient_at(grid, fields[0].values(), id);
                let b = gradient_at(grid, fields[1].values(), id);
                signed_det(&mut [a, b])
            }
            ConstraintKind::Augmented => {
                let mut cols = [[0.0; 3]; 3];
                for (c, f) in cols.iter_mut().zip(fields) {
                    let [gx, gy] = gradient_at(grid, f.values(), id);
                    *c = [f.get(id), gx, gy];
                }
                signed_det(&mut cols)
            }
        }
    }
}

trait Column: Copy {
    fn cmp_bits(&self, other: &Self) -> Ordering;
    fn det(cols: &[Self]) -> f64;
}

impl Column for [f64; 2] {
    fn cmp_bits(&self, other: &Self) -> Ordering {
        self[0]
            .total_cmp(&other[0])
            .then(self[1].total_cmp(&other[1]))
    }

    fn det(c: &[Self]) -> f64 {
        c[0][0] * c[1][1] - c[0][1] * c[1][0]
    }
}

impl Column for [f64; 3] {
    fn cmp_bits(&self, other: &Self) -> Ordering {
        (0..3)
            .map(|i| self[i].total_cmp(&other[i]))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }

    fn det(c: &[Self]) -> f64 {
        c[0][0] * (c[1][1] * c[2][2] - c[2][1] * c[1][2])
            - c[1][0] * (c[0][1] * c[2][2] - c[2][1] * c[0][2])
            + c[2][0] * (c[0][1] * c[1][2] - c[1][1] * c[0][2])
    }
}

/// Determinant of a set of columns, evaluated on a canonical column order.
///
/// Sorting first makes a column swap flip the sign exactly in floating point,
/// and repeated columns give exactly zero.
fn signed_det<C: Column>(cols: &mut [C]) -> f64 {
    let mut negate = false;
    // insertion sort, tracking parity
    for i in 1..cols.len() {
        let mut j = i;
        while j > 0 {
            match cols[j - 1].cmp_bits(&cols[j]) {
                Ordering::Greater => {
                    cols.swap(j - 1, j);
                    negate = !negate;
                    j -= 1;
                }
                Ordering::Equal => return 0.0,
                Ordering::Less => break,
            }
        }
    }
    let d = C::det(cols);
    if negate {
        -d
    } else {
        d
    }
}

/// Values of `ζ(u₁, …, u_n)` at the nodes of a mask, in mask order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintField {
    pub values: Vec<f64>,
}

fn check_fields(map: &ConstraintMap, fields: &[&ScalarField], grid: &Grid2D) -> Result<()> {
    if fields.len() != map.arity() {
        return Err(Error::Arity {
            kind: map.kind().name(),
            expected: map.arity(),
            got: fields.len(),
        });
    }
    if fields.iter().any(|f| !f.same_grid(grid)) {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    Ok(())
}

/// Evaluates `map` on the tuple `fields` at every node of `mask`.
pub fn zeta_eval(
    map: &ConstraintMap,
    fields: &[&ScalarField],
    grid: &Grid2D,
    mask: &SubdomainMask,
) -> Result<ConstraintField> {
    check_fields(map, fields, grid)?;
    Ok(ConstraintField {
        values: mask
            .nodes()
            .iter()
            .map(|&id| map.eval_at(grid, fields, id))
            .collect(),
    })
}

/// Pointwise `max_l |ζ^l|` and its minimum over the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAbs {
    pub values: Vec<f64>,
    pub min: f64,
}

pub fn max_abs(fields: &[ConstraintField]) -> Result<MaxAbs> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidInput("max over an empty set of measurements".into()))?;
    let len = first.values.len();
    if fields.iter().any(|f| f.values.len() != len) {
        return Err(Error::InvalidInput(
            "constraint fields use different masks".into(),
        ));
    }
    let values: Vec<f64> = (0..len)
        .map(|p| fields.iter().fold(0.0f64, |m, f| m.max(f.values[p].abs())))
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MaxAbs { values, min })
}

/// Which measurement covers each node of Ω′.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverLabeling {
    /// 1-based index of the measurement with the largest `|ζ|` at each mask
    /// node; ties go to the smallest index.
    pub labels: Vec<usize>,
    pub threshold: f64,
    /// `max_l |ζ^l| >= threshold` at every node.
    pub complete: bool,
    /// Number of nodes below the threshold.
    pub uncovered: usize,
}

pub fn extract_cover(fields: &[ConstraintField], tau: f64) -> Result<CoverLabeling> {
    if !(tau > 0.0) {
        return Err(Error::Config(format!(
            "cover threshold must be positive, got {tau}"
        )));
    }
    let max = max_abs(fields)?;
    let labels = (0..max.values.len())
        .map(|p| {
            let mut best = 0;
            for (l, f) in fields.iter().enumerate().skip(1) {
                if f.values[p].abs() > fields[best].values[p].abs() {
                    best = l;
                }
            }
            best + 1
        })
        .collect();
    let uncovered = max.values.iter().filter(|&&v| v < tau).count();
    Ok(CoverLabeling {
        labels,
        threshold: tau,
        complete: uncovered == 0,
        uncovered,
    })
}

/// Minimum over the mask of `ζ` evaluated on the constant-coefficient
/// witnesses `1`, `d·x`, `(x₁, x₂)` and `(1, x₁, x₂)`.
pub fn witness_check(map: &ConstraintMap, grid: &Grid2D, mask: &SubdomainMask) -> Result<f64> {
    let one = ScalarField::from_fn(grid, |_, _| 1.0);
    let x1 = ScalarField::from_fn(grid, |x, _| x);
    let x2 = ScalarField::from_fn(grid, |_, y| y);
    let [d1, d2] = map.direction();
    let along = ScalarField::from_fn(grid, |x, y| d1 * x + d2 * y);
    let tuple: Vec<&ScalarField> = match map.kind() {
        ConstraintKind::Nodal => vec![&one],
        ConstraintKind::Critical => vec![&along],
        ConstraintKind::Jacobian => vec![&x1, &x2],
        ConstraintKind::Augmented => vec![&one, &x1, &x2],
    };
    let field = zeta_eval(map, &tuple, grid, mask)?;
    Ok(field.values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Discrete `C^{0,1/2}` seminorm over the mask:
/// `max |f(p) − f(q)| / |p − q|^{1/2}` over member pairs.
pub fn holder_seminorm(field: &ConstraintField, grid: &Grid2D, mask: &SubdomainMask) -> f64 {
    let pts: Vec<[f64; 2]> = mask.nodes().iter().map(|&id| grid.point(id)).collect();
    let mut best = 0.0f64;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d = (pts[a][0] - pts[b][0]).hypot(pts[a][1] - pts[b][1]);
            best = best.max((field.values[a] - field.values[b]).abs() / d.sqrt());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(n: usize) -> (Grid2D, SubdomainMask) {
        let g = Grid2D::new(n).unwrap();
        let m = SubdomainMask::rect(&g, [0.25, 0.25], [0.75, 0.75]).unwrap();
        (g, m)
    }

    fn cf(values: Vec<f64>) -> ConstraintField {
        ConstraintField { values }
    }

    #[test]
    fn jacobian_of_coordinates_is_one() {
        let (g, m) = setup(33);
        let x1 = ScalarField::from_fn(&g, |x, _| x);
        let x2 = ScalarField::from_fn(&g, |_, y| y);
        let z = zeta_eval(
            &ConstraintMap::new(ConstraintKind::Jacobian),
            &[&x1, &x2],
            &g,
            &m,
        )
        .unwrap();
        assert!(z.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn repeated_argument_gives_exact_zero() {
        let (g, m) = setup(33);
        let u = ScalarField::from_fn(&g, |x, y| (3.0 * x).sin() * y.exp());
        let jac = ConstraintMap::new(ConstraintKind::Jacobian);
        assert!(zeta_eval(&jac, &[&u, &u], &g, &m)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
        let v = ScalarField::from_fn(&g, |x, y| x * y);
        let aug = ConstraintMap::new(ConstraintKind::Augmented);
        assert!(zeta_eval(&aug, &[&u, &v, &u], &g, &m)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn critical_of_x2_vanishes() {
        let (g, m) = setup(33);
        let x2 = ScalarField::from_fn(&g, |_, y| y);
        let z = zeta_eval(
            &ConstraintMap::new(ConstraintKind::Critical),
            &[&x2],
            &g,
            &m,
        )
        .unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let diag = ConstraintMap::critical_along([1.0, 1.0]).unwrap();
        let z = zeta_eval(&diag, &[&x2], &g, &m).unwrap();
        assert!(z.values.iter().all(|v| (v - 0.5f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let (g, m) = setup(17);
        let u = ScalarField::zeros(&g);
        let err = zeta_eval(
            &ConstraintMap::new(ConstraintKind::Augmented),
            &[&u, &u],
            &g,
            &m,
        );
        assert!(matches!(
            err,
            Err(Error::Arity {
                expected: 3,
                got: 2,
                ..
            })
        ));
    }

    #[test]
    fn max_abs_examples() {
        let r = max_abs(&[cf(vec![1.0; 5])]).unwrap();
        assert_eq!(r.values, vec![1.0; 5]);
        assert_eq!(r.min, 1.0);
        let (g, m) = setup(17);
        let plus: Vec<f64> = m.nodes().iter().map(|&id| g.point(id)[0] - 0.5).collect();
        let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
        let r = max_abs(&[cf(plus.clone()), cf(minus)]).unwrap();
        for (a, b) in r.values.iter().zip(&plus) {
            assert_eq!(*a, b.abs());
        }
        assert_eq!(r.min, 0.0);
        assert!(max_abs(&[]).is_err());
    }

    #[test]
    fn cover_examples() {
        let c = extract_cover(&[cf(vec![1.0; 4])], 0.5).unwrap();
        assert_eq!(c.labels, vec![1; 4]);
        assert!(c.complete);

        let (g, m) = setup(17);
        let plus: Vec<f64> = m.nodes().iter().map(|&id| g.point(id)[0] - 0.5).collect();
        let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
        let c = extract_cover(&[cf(plus), cf(minus)], 0.1).unwrap();
        assert!(!c.complete);
        assert!(c.uncovered > 0);
        // ties at equal magnitude go to the first measurement
        assert!(c.labels.iter().all(|&l| l == 1));

        let c = extract_cover(&[cf(vec![0.5, -0.2, 1.0]), cf(vec![0.6, 0.3, -2.0])], 0.1).unwrap();
        assert_eq!(c.labels, vec![2, 2, 2]);
        assert!(extract_cover(&[cf(vec![1.0])], 0.0).is_err());
    }

    #[test]
    fn witnesses_reach_one() {
        let (g, m) = setup(65);
        for kind in ConstraintKind::ALL {
            let v = witness_check(&ConstraintMap::new(kind), &g, &m).unwrap();
            assert!((v - 1.0).abs() <= 1e-12, "{kind}: {v}");
            assert!(v >= 1.0 - 10.0 * g.h());
        }
        assert_eq!(
            witness_check(&ConstraintMap::new(ConstraintKind::Nodal), &g, &m).unwrap(),
            1.0
        );
    }

    #[test]
    fn locality_of_evaluation() {
        let (g, m) = setup(17);
        let u = ScalarField::from_fn(&g, |x, y| (2.0 * x + y).sin());
        let v = ScalarField::from_fn(&g, |x, y| x * x - y);
        let map = ConstraintMap::new(ConstraintKind::Jacobian);
        let base = zeta_eval(&map, &[&u, &v], &g, &m).unwrap();
        let target = g.id(8, 8);
        let pos = m.nodes().iter().position(|&id| id == target).unwrap();
        let mut far = u.clone();
        // outside the 2-node neighbourhood
        far.values_mut()[g.id(11, 8)] += 5.0;
        far.values_mut()[g.id(8, 5)] -= 3.0;
        far.values_mut()[g.id(9, 9)] += 1.0;
        let after = zeta_eval(&map, &[&far, &v], &g, &m).unwrap();
        assert_eq!(after.values[pos].to_bits(), base.values[pos].to_bits());
        let mut near = u.clone();
        near.values_mut()[g.id(9, 8)] += 1.0;
        let after = zeta_eval(&map, &[&near, &v], &g, &m).unwrap();
        assert_ne!(after.values[pos], base.values[pos]);
    }

    #[test]
    fn hadamard_bound_holds() {
        let (g, m) = setup(33);
        let u1 = ScalarField::from_fn(&g, |x, y| (3.0 * x).sin() + y * y);
        let u2 = ScalarField::from_fn(&g, |x, y| x * y + (2.0 * y).cos());
        let z = zeta_eval(
            &ConstraintMap::new(ConstraintKind::Jacobian),
            &[&u1, &u2],
            &g,
            &m,
        )
        .unwrap();
        let gmax = |f: &ScalarField| {
            m.nodes()
                .iter()
                .map(|&id| {
                    let [a, b] = gradient_at(&g, f.values(), id);
                    a.hypot(b)
                })
                .fold(0.0, f64::max)
        };
        let bound = 2.0 * gmax(&u1) * gmax(&u2);
        assert!(z.values.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn holder_seminorm_of_linear_field() {
        let (g, m) = setup(17);
        let lin = cf(m.nodes().iter().map(|&id| g.point(id)[0]).collect());
        // |x - y| / |x - y|^{1/2} is maximal at the largest separation
        let s = holder_seminorm(&lin, &g, &m);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-12);
    }

    fn field_from(g: &Grid2D, c: &[f64]) -> ScalarField {
        ScalarField::from_fn(g, |x, y| {
            c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * (c[5] * x).sin() * (y * c[5]).cos()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn multilinear_and_antisymmetric(
            a in proptest::collection::vec(-2.0f64..2.0, 6),
            b in proptest::collection::vec(-2.0f64..2.0, 6),
            c in proptest::collection::vec(-2.0f64..2.0, 6),
            d in proptest::collection::vec(-2.0f64..2.0, 6),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let (g, m) = setup(17);
            let (u, v, w, z) = (field_from(&g, &a), field_from(&g, &b), field_from(&g, &c), field_from(&g, &d));
            let mut mix = u.scaled(alpha);
            mix.axpy(beta, &v);
            for kind in ConstraintKind::ALL {
                let map = ConstraintMap::new(kind);
                let rest: Vec<&ScalarField> = [&w, &z].into_iter().take(map.arity() - 1).collect();
                let with = |first: &ScalarField| {
                    let mut t = vec![first];
                    t.extend(rest.iter().copied());
                    zeta_eval(&map, &t, &g, &m).unwrap().values
                };
                let lhs = with(&mix);
                let (zu, zv) = (with(&u), with(&v));
                for p in 0..lhs.len() {
                    let rhs = alpha * zu[p] + beta * zv[p];
                    let scale = (alpha * zu[p]).abs() + (beta * zv[p]).abs() + 1e-300;
                    prop_assert!((lhs[p] - rhs).abs() <= 1e-12 * scale.max(1.0), "{kind}: {} vs {rhs}", lhs[p]);
                }
            }
            let jac = ConstraintMap::new(ConstraintKind::Jacobian);
            let f = zeta_eval(&jac, &[&u, &v], &g, &m).unwrap().values;
            let s = zeta_eval(&jac, &[&v, &u], &g, &m).unwrap().values;
            for p in 0..f.len() {
                prop_assert_eq!(f[p], -s[p]);
            }
            let aug = ConstraintMap::new(ConstraintKind::Augmented);
            let f = zeta_eval(&aug, &[&u, &v, &w], &g, &m).unwrap().values;
            for perm in [[1, 0, 2], [0, 2, 1], [2, 1, 0]] {
                let t = [&u, &v, &w];
                let s = zeta_eval(&aug, &[t[perm[0]], t[perm[1]], t[perm[2]]], &g, &m).unwrap().values;
                for p in 0..f.len() {
                    prop_assert_eq!(f[p], -s[p]);
                }
            }
        }
    }
}
