//! Node-wise expressions in `x` and `y` for configuration values.
//!
//! Syntax is that of `evalexpr` (`^` is the power operator, integer literals
//! divide as integers, so write `1.0/2`). The variables `x`, `y` (also `x1`,
//! `x2`) and `pi` are predefined, as are `exp`, `log`, `sqrt`, `abs`, `sin`,
//! `cos`, `tanh` and `min`/`max` of two arguments.

use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables,
    DefaultNumericTypes, EvalexprError, Function, HashMapContext, Node, Value,
};

use crate::error::{Error, Result};
use crate::grid::Grid2D;

type Ctx = HashMapContext<DefaultNumericTypes>;
type Unary = fn(f64) -> f64;

/// A parsed expression.
#[derive(Debug, Clone)]
pub struct Expr {
    src: String,
    tree: Node<DefaultNumericTypes>,
}

fn unary(f: fn(f64) -> f64) -> Function<DefaultNumericTypes> {
    Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?))))
}

fn binary(f: fn(f64, f64) -> f64) -> Function<DefaultNumericTypes> {
    Function::new(move |arg: &Value<DefaultNumericTypes>| {
        let t = arg.as_tuple()?;
        if t.len() != 2 {
            return Err(EvalexprError::WrongFunctionArgumentAmount {
                expected: 2..=2,
                actual: t.len(),
            });
        }
        Ok(Value::Float(f(t[0].as_number()?, t[1].as_number()?)))
    })
}

fn context() -> Ctx {
    let mut ctx = Ctx::new();
    let unaries: [(&str, Unary); 7] = [
        ("exp", f64::exp),
        ("log", f64::ln),
        ("sqrt", f64::sqrt),
        ("abs", f64::abs),
        ("sin", f64::sin),
        ("cos", f64::cos),
        ("tanh", f64::tanh),
    ];
    for (name, f) in unaries {
        ctx.set_function(name.into(), unary(f))
            .expect("hash map context is mutable");
    }
    ctx.set_function("min".into(), binary(f64::min))
        .expect("mutable");
    ctx.set_function("max".into(), binary(f64::max))
        .expect("mutable");
    ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
        .expect("mutable");
    ctx
}

impl Expr {
    /// Parses `src` and checks that it evaluates to a number at `(0.5, 0.5)`.
    pub fn parse(src: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(src)
            .map_err(|e| Error::Config(format!("cannot parse expression `{src}`: {e}")))?;
        let expr = Self {
            src: src.to_string(),
            tree,
        };
        expr.eval(0.5, 0.5)?;
        Ok(expr)
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.eval_in(&mut context(), x, y)
    }

    fn eval_in(&self, ctx: &mut Ctx, x: f64, y: f64) -> Result<f64> {
        for (name, v) in [("x", x), ("y", y), ("x1", x), ("x2", y)] {
            ctx.set_value(name.into(), Value::Float(v))
                .expect("mutable");
        }
        self.tree
            .eval_number_with_context(ctx)
            .map_err(|e| Error::Config(format!("cannot evaluate `{}`: {e}", self.src)))
    }

    /// Values at every node, row-major.
    pub fn sample(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        let mut ctx = context();
        (0..grid.num_nodes())
            .map(|id| {
                let [x, y] = grid.point(id);
                self.eval_in(&mut ctx, x, y)
            })
            .collect()
    }

    /// Values at the boundary nodes, in boundary order.
    pub fn sample_boundary(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        let mut ctx = context();
        grid.boundary_order()
            .iter()
            .map(|&id| {
                let [x, y] = grid.point(id);
                self.eval_in(&mut ctx, x, y)
            })
            .collect()
    }
}

/// Splits on `sep` outside parentheses.
pub fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_common_forms() {
        let e = Expr::parse("1 + 0.5*exp(-50*((x-0.5)^2 + (y-0.5)^2))").unwrap();
        assert!((e.eval(0.5, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(Expr::parse("1").unwrap().eval(0.2, 0.3).unwrap(), 1.0);
        assert_eq!(Expr::parse("x1 * x2").unwrap().eval(0.5, 4.0).unwrap(), 2.0);
        assert_eq!(
            Expr::parse("max(x, y)").unwrap().eval(0.5, 4.0).unwrap(),
            4.0
        );
        let s = Expr::parse("sin(pi*x)").unwrap().eval(0.5, 0.0).unwrap();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("z").is_err());
        assert!(Expr::parse("\"text\"").is_err());
    }

    #[test]
    fn samples_in_grid_order() {
        let g = Grid2D::new(9).unwrap();
        let v = Expr::parse("x + 10*y").unwrap().sample(&g).unwrap();
        assert_eq!(v[g.id(2, 3)], g.coord(2) + 10.0 * g.coord(3));
        let b = Expr::parse("x").unwrap().sample_boundary(&g).unwrap();
        assert_eq!(b, g.sample_boundary(|x, _| x));
    }

    #[test]
    fn top_level_split() {
        assert_eq!(
            split_top_level("x1, max(x, y)", ','),
            vec!["x1", "max(x, y)"]
        );
        assert_eq!(split_top_level("a", ';'), vec!["a"]);
    }
}
