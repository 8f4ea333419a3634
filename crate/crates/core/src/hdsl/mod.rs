//! Heuristic expression language.
//!
//! A heuristic is a single arithmetic expression over a small set of
//! problem-declared variables (for bin packing: `cap`, `item`, `index`,
//! `n_bins`). Comparisons and the conditional are named functions that work
//! on reals: comparisons return `1.0`/`0.0` and `if(c, a, b)` picks `a` when
//! `c` is non-zero.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | atom
//! atom    := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```

mod eval;
mod mutate;
mod parser;
mod print;

use std::fmt;

pub use eval::{eval, BoundExpr, EvalEnv, EvalError};
pub use mutate::{mutate, random_expr};
pub use parser::{parse, ParseError, ParseErrorKind};

/// Default upper bound on the node count of any heuristic.
pub const DEFAULT_MAX_SIZE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Built-in functions. There are no user-defined functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Min,
    Max,
    Abs,
    Log,
    Exp,
    Pow,
    If,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Min,
        Func::Max,
        Func::Abs,
        Func::Log,
        Func::Exp,
        Func::Pow,
        Func::If,
        Func::Lt,
        Func::Le,
        Func::Gt,
        Func::Ge,
        Func::Eq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::Log => "log",
            Func::Exp => "exp",
            Func::Pow => "pow",
            Func::If => "if",
            Func::Lt => "lt",
            Func::Le => "le",
            Func::Gt => "gt",
            Func::Ge => "ge",
            Func::Eq => "eq",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Abs | Func::Log | Func::Exp => 1,
            Func::If => 3,
            _ => 2,
        }
    }

    /// Case-insensitive lookup.
    pub fn from_name(name: &str) -> Option<Func> {
        let lower = name.to_ascii_lowercase();
        Func::ALL.into_iter().find(|f| f.name() == lower)
    }
}

/// Abstract syntax tree of a heuristic expression.
///
/// `Number` literals are finite and non-negative; negative constants are
/// written as `Neg(Number)` so that printing and re-parsing preserves the
/// tree exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn num(value: f64) -> Expr {
        Expr::Number(value)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(func.arity(), args.len());
        Expr::Call(func, args)
    }

    /// Node count of the tree.
    pub fn complexity(&self) -> usize {
        match self {
            Expr::Number(_) | Expr::Var(_) => 1,
            Expr::Neg(inner) => 1 + inner.complexity(),
            Expr::Binary(_, lhs, rhs) => 1 + lhs.complexity() + rhs.complexity(),
            Expr::Call(_, args) => 1 + args.iter().map(Expr::complexity).sum::<usize>(),
        }
    }

    /// Distinct variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(name) = e {
                if !out.contains(&name.as_str()) {
                    out.push(name.as_str());
                }
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Number(_) | Expr::Var(_) => {}
            Expr::Neg(inner) => inner.visit(f),
            Expr::Binary(_, lhs, rhs) => {
                lhs.visit(f);
                rhs.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Checks the node-count bound.
    pub fn check_size(&self, max_size: usize) -> Result<(), SizeError> {
        let size = self.complexity();
        if size > max_size {
            Err(SizeError { size, max_size })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Canonical text form of an expression.
pub fn print(expr: &Expr) -> String {
    print::print(expr)
}

/// Node count of an expression.
pub fn complexity(expr: &Expr) -> usize {
    expr.complexity()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("expression has {size} nodes, limit is {max_size}")]
pub struct SizeError {
    pub size: usize,
    pub max_size: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_counts_every_node() {
        assert_eq!(parse("cap").unwrap().complexity(), 1);
        assert_eq!(parse("cap - item").unwrap().complexity(), 3);
        assert_eq!(parse("min(cap, item) * 2").unwrap().complexity(), 5);
        assert_eq!(parse("-(cap - item)").unwrap().complexity(), 4);
    }

    #[test]
    fn variables_are_deduplicated_in_order() {
        let e = parse("item + cap * item - index").unwrap();
        assert_eq!(e.variables(), vec!["item", "cap", "index"]);
    }

    #[test]
    fn size_bound() {
        let e = parse("cap - item").unwrap();
        assert!(e.check_size(3).is_ok());
        assert_eq!(e.check_size(2), Err(SizeError { size: 3, max_size: 2 }));
    }

    #[test]
    fn function_lookup_ignores_case() {
        assert_eq!(Func::from_name("MIN"), Some(Func::Min));
        assert_eq!(Func::from_name("If"), Some(Func::If));
        assert_eq!(Func::from_name("sqrt"), None);
    }
}
