use rand::seq::SliceRandom;
use rand::Rng;

use super::{BinOp, Expr, Func};

const MAX_ATTEMPTS: usize = 16;
const SUBTREE_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    PerturbNumber,
    SwapOperator,
    ReplaceLeaf,
    ReplaceSubtree,
}

fn random_constant<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(0..=100u32)) / 10.0
}

fn random_leaf<R: Rng + ?Sized>(rng: &mut R, vars: &[&str]) -> Expr {
    if !vars.is_empty() && rng.gen_bool(0.6) {
        Expr::var(*vars.choose(rng).expect("non-empty"))
    } else {
        Expr::num(random_constant(rng))
    }
}

/// Random expression of depth at most `max_depth` over `vars` (a leaf has
/// depth 0).
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, vars: &[&str], max_depth: usize) -> Expr {
    if max_depth == 0 || rng.gen_bool(0.3) {
        return random_leaf(rng, vars);
    }
    let d = max_depth - 1;
    match rng.gen_range(0..10) {
        0 => Expr::neg(random_expr(rng, vars, d)),
        1..=6 => {
            let op = *BinOp::ALL.choose(rng).expect("non-empty");
            Expr::binary(op, random_expr(rng, vars, d), random_expr(rng, vars, d))
        }
        _ => {
            let func = *Func::ALL.choose(rng).expect("non-empty");
            let args = (0..func.arity()).map(|_| random_expr(rng, vars, d)).collect();
            Expr::Call(func, args)
        }
    }
}

fn preorder_matching(expr: &Expr, pred: &impl Fn(&Expr) -> bool) -> Vec<usize> {
    fn go(e: &Expr, pred: &impl Fn(&Expr) -> bool, next: &mut usize, out: &mut Vec<usize>) {
        if pred(e) {
            out.push(*next);
        }
        *next += 1;
        match e {
            Expr::Number(_) | Expr::Var(_) => {}
            Expr::Neg(inner) => go(inner, pred, next, out),
            Expr::Binary(_, lhs, rhs) => {
                go(lhs, pred, next, out);
                go(rhs, pred, next, out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| go(a, pred, next, out)),
        }
    }
    let mut out = Vec::new();
    go(expr, pred, &mut 0, &mut out);
    out
}

fn node_at_mut(expr: &mut Expr, target: usize) -> &mut Expr {
    fn go<'a>(e: &'a mut Expr, target: usize, next: &mut usize) -> Option<&'a mut Expr> {
        if *next == target {
            return Some(e);
        }
        *next += 1;
        match e {
            Expr::Number(_) | Expr::Var(_) => None,
            Expr::Neg(inner) => go(inner, target, next),
            Expr::Binary(_, lhs, rhs) => {
                if let Some(found) = go(lhs, target, next) {
                    return Some(found);
                }
                go(rhs, target, next)
            }
            Expr::Call(_, args) => args.iter_mut().find_map(|a| go(a, target, next)),
        }
    }
    go(expr, target, &mut 0).expect("node index in range")
}

fn is_leaf(e: &Expr) -> bool {
    matches!(e, Expr::Number(_) | Expr::Var(_))
}

fn apply<R: Rng + ?Sized>(expr: &Expr, edit: Edit, rng: &mut R, vars: &[&str]) -> Expr {
    let mut out = expr.clone();
    match edit {
        Edit::PerturbNumber => {
            let sites = preorder_matching(expr, &|e| matches!(e, Expr::Number(v) if *v != 0.0));
            let site = *sites.choose(rng).expect("applicable");
            if let Expr::Number(v) = node_at_mut(&mut out, site) {
                *v *= rng.gen_range(0.5..1.5);
            }
        }
        Edit::SwapOperator => {
            let sites = preorder_matching(expr, &|e| matches!(e, Expr::Binary(..)));
            let site = *sites.choose(rng).expect("applicable");
            if let Expr::Binary(op, ..) = node_at_mut(&mut out, site) {
                let others: Vec<BinOp> = BinOp::ALL.into_iter().filter(|o| o != op).collect();
                *op = *others.choose(rng).expect("three alternatives");
            }
        }
        Edit::ReplaceLeaf => {
            let sites = preorder_matching(expr, &is_leaf);
            let site = *sites.choose(rng).expect("every tree has a leaf");
            *node_at_mut(&mut out, site) = random_leaf(rng, vars);
        }
        Edit::ReplaceSubtree => {
            let site = rng.gen_range(0..expr.complexity());
            *node_at_mut(&mut out, site) = random_expr(rng, vars, SUBTREE_DEPTH);
        }
    }
    out
}

/// Applies exactly one random syntactic edit to `expr`.
///
/// The edit is drawn uniformly from those applicable: scale a non-zero
/// constant by U(0.5, 1.5), swap a binary operator, replace a leaf with a
/// random variable or constant, or replace a subtree with a random
/// expression of depth at most 2. New leaves only use `vars`. Edits that
/// push the tree over `max_size` are redrawn a bounded number of times
/// before falling back to a leaf replacement.
pub fn mutate<R: Rng + ?Sized>(expr: &Expr, rng: &mut R, vars: &[&str], max_size: usize) -> Expr {
    let mut edits = vec![Edit::ReplaceLeaf, Edit::ReplaceSubtree];
    if !preorder_matching(expr, &|e| matches!(e, Expr::Number(v) if *v != 0.0)).is_empty() {
        edits.push(Edit::PerturbNumber);
    }
    if !preorder_matching(expr, &|e| matches!(e, Expr::Binary(..))).is_empty() {
        edits.push(Edit::SwapOperator);
    }
    for _ in 0..MAX_ATTEMPTS {
        let edit = *edits.choose(rng).expect("non-empty");
        let candidate = apply(expr, edit, rng, vars);
        if candidate.complexity() <= max_size {
            return candidate;
        }
    }
    if expr.complexity() <= max_size {
        apply(expr, Edit::ReplaceLeaf, rng, vars)
    } else {
        random_leaf(rng, vars)
    }
}
