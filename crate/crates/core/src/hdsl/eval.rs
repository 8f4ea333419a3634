use std::collections::BTreeMap;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
}

impl EvalError {
    pub fn is_domain(&self) -> bool {
        matches!(self, EvalError::Domain(_))
    }
}

/// Variable bindings for a single evaluation. All values are finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalEnv {
    values: BTreeMap<String, f64>,
}

impl EvalEnv {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`; non-finite values are rejected as a domain error.
    pub fn set(&mut self, name: impl Into<String>, value: f64) -> Result<(), EvalError> {
        let name = name.into();
        if !value.is_finite() {
            return Err(EvalError::Domain(format!("variable {name} bound to {value}")));
        }
        self.values.insert(name, value);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Result<Self, EvalError> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Evaluates `expr` under `env`.
pub fn eval(expr: &Expr, env: &EvalEnv) -> Result<f64, EvalError> {
    let names: Vec<&str> = env.names().collect();
    let values: Vec<f64> = env.values.values().copied().collect();
    BoundExpr::bind(expr, &names)?.eval(&values)
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// An expression with its variables resolved to positional slots, for
/// evaluating one heuristic many times against the same variable layout.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    root: Node,
    arity: usize,
}

impl BoundExpr {
    /// Resolves every variable of `expr` against `vars`. Fails on the first
    /// identifier that is not declared.
    pub fn bind(expr: &Expr, vars: &[&str]) -> Result<BoundExpr, EvalError> {
        fn go(expr: &Expr, vars: &[&str]) -> Result<Node, EvalError> {
            Ok(match expr {
                Expr::Number(v) => Node::Const(*v),
                Expr::Var(name) => Node::Slot(
                    vars.iter()
                        .position(|v| v == name)
                        .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
                ),
                Expr::Neg(inner) => Node::Neg(Box::new(go(inner, vars)?)),
                Expr::Binary(op, lhs, rhs) => {
                    Node::Binary(*op, Box::new(go(lhs, vars)?), Box::new(go(rhs, vars)?))
                }
                Expr::Call(func, args) => Node::Call(
                    *func,
                    args.iter().map(|a| go(a, vars)).collect::<Result<_, _>>()?,
                ),
            })
        }
        Ok(BoundExpr { root: go(expr, vars)?, arity: vars.len() })
    }

    /// Evaluates with `values[i]` bound to the i-th declared variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        assert_eq!(values.len(), self.arity, "value slice does not match bound variables");
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(EvalError::Domain(format!("non-finite input {bad}")));
        }
        eval_node(&self.root, values)
    }
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("{what} produced {v}")))
    }
}

fn truth(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, EvalError> {
    match node {
        Node::Const(v) => Ok(*v),
        Node::Slot(i) => Ok(values[*i]),
        Node::Neg(inner) => Ok(-eval_node(inner, values)?),
        Node::Binary(op, lhs, rhs) => {
            let a = eval_node(lhs, values)?;
            let b = eval_node(rhs, values)?;
            match op {
                BinOp::Add => finite(a + b, "addition"),
                BinOp::Sub => finite(a - b, "subtraction"),
                BinOp::Mul => finite(a * b, "multiplication"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::Domain("division by zero".into()))
                    } else {
                        finite(a / b, "division")
                    }
                }
            }
        }
        // `if` only evaluates the branch it takes.
        Node::Call(Func::If, args) => {
            if eval_node(&args[0], values)? != 0.0 {
                eval_node(&args[1], values)
            } else {
                eval_node(&args[2], values)
            }
        }
        Node::Call(func, args) => {
            let a = eval_node(&args[0], values)?;
            let b = match args.get(1) {
                Some(arg) => eval_node(arg, values)?,
                None => 0.0,
            };
            match func {
                Func::Min => Ok(a.min(b)),
                Func::Max => Ok(a.max(b)),
                Func::Abs => Ok(a.abs()),
                Func::Log => {
                    if a <= 0.0 {
                        Err(EvalError::Domain(format!("log of {a}")))
                    } else {
                        finite(a.ln(), "log")
                    }
                }
                Func::Exp => finite(a.exp(), "exp"),
                Func::Pow => finite(a.powf(b), "pow"),
                Func::Lt => Ok(truth(a < b)),
                Func::Le => Ok(truth(a <= b)),
                Func::Gt => Ok(truth(a > b)),
                Func::Ge => Ok(truth(a >= b)),
                Func::Eq => Ok(truth(a == b)),
                Func::If => unreachable!(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn env(pairs: &[(&str, f64)]) -> EvalEnv {
        let mut env = EvalEnv::new();
        for (k, v) in pairs {
            env.set(*k, *v).unwrap();
        }
        env
    }

    fn run(text: &str, pairs: &[(&str, f64)]) -> Result<f64, EvalError> {
        eval(&parse(text).unwrap(), &env(pairs))
    }

    #[test]
    fn arithmetic() {
        assert_eq!(run("cap - item", &[("cap", 7.0), ("item", 4.0)]), Ok(3.0));
        assert_eq!(run("2 * (3 + 4) / 7", &[]), Ok(2.0));
    }

    #[test]
    fn conditional_takes_false_branch() {
        let r = run("if(ge(cap, item), -(cap - item), -1000000)", &[("cap", 3.0), ("item", 5.0)]);
        assert_eq!(r, Ok(-1000000.0));
        let r = run("if(ge(cap, item), -(cap - item), -1000000)", &[("cap", 8.0), ("item", 5.0)]);
        assert_eq!(r, Ok(-3.0));
    }

    #[test]
    fn untaken_branch_is_not_evaluated() {
        assert_eq!(run("if(0, log(0), 1)", &[]), Ok(1.0));
    }

    #[test]
    fn comparisons_are_zero_one() {
        assert_eq!(run("lt(1, 2) + le(2, 2) + gt(1, 2) + ge(1, 2) + eq(3, 3)", &[]), Ok(3.0));
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let r = run("item / (cap - cap)", &[("cap", 2.0), ("item", 1.0)]);
        assert!(r.unwrap_err().is_domain());
    }

    #[test]
    fn domain_errors() {
        assert!(run("log(0)", &[]).unwrap_err().is_domain());
        assert!(run("log(-1)", &[]).unwrap_err().is_domain());
        assert!(run("exp(1000)", &[]).unwrap_err().is_domain());
        assert!(run("pow(-1, 0.5)", &[]).unwrap_err().is_domain());
        assert!(run("pow(10, 400)", &[]).unwrap_err().is_domain());
        assert!(run("pow(10, 300) * pow(10, 10)", &[]).unwrap_err().is_domain());
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(
            run("cap + bogus", &[("cap", 1.0)]),
            Err(EvalError::UnboundVariable("bogus".into()))
        );
    }

    #[test]
    fn env_rejects_non_finite() {
        assert!(EvalEnv::new().set("x", f64::NAN).is_err());
        assert!(EvalEnv::new().set("x", f64::INFINITY).is_err());
    }

    #[test]
    fn bound_expression_matches_env_evaluation() {
        let e = parse("max(cap - item, index) / (n_bins + 1)").unwrap();
        let bound = BoundExpr::bind(&e, &["cap", "item", "index", "n_bins"]).unwrap();
        let by_slots = bound.eval(&[10.0, 3.0, 2.0, 4.0]).unwrap();
        let by_env = eval(
            &e,
            &env(&[("cap", 10.0), ("item", 3.0), ("index", 2.0), ("n_bins", 4.0)]),
        )
        .unwrap();
        assert_eq!(by_slots.to_bits(), by_env.to_bits());
    }
}
