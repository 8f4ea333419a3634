use super::Expr;

const PREC_ADD: u8 = 1;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(expr: &Expr) -> u8 {
    match expr {
        Expr::Number(v) if *v < 0.0 => PREC_UNARY,
        Expr::Number(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Binary(op, ..) => op.precedence(),
    }
}

fn number(v: f64, out: &mut String) {
    use std::fmt::Write;
    // Display on f64 is the shortest string that parses back to the same bits
    // and never uses exponent notation.
    let v = if v == 0.0 { 0.0 } else { v };
    let _ = write!(out, "{v}");
}

fn child(expr: &Expr, min_prec: u8, out: &mut String) {
    if precedence(expr) < min_prec {
        out.push('(');
        write_expr(expr, out);
        out.push(')');
    } else {
        write_expr(expr, out);
    }
}

fn write_expr(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Number(v) if *v < 0.0 => {
            out.push('-');
            number(-v, out);
        }
        Expr::Number(v) => number(*v, out),
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push('-');
            child(inner, PREC_UNARY, out);
        }
        Expr::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            child(lhs, prec, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            // Right operand at equal precedence needs parentheses to keep
            // the tree shape under left associativity.
            child(rhs, prec + 1, out);
        }
        Expr::Call(func, args) => {
            out.push_str(func.name());
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                child(arg, PREC_ADD, out);
            }
            out.push(')');
        }
    }
}

pub(super) fn print(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::{parse, BinOp, Func};
    use super::*;

    fn v(name: &str) -> Expr {
        Expr::var(name)
    }

    #[test]
    fn minimal_parentheses() {
        let e = Expr::binary(BinOp::Sub, v("cap"), Expr::binary(BinOp::Mul, v("item"), Expr::num(2.0)));
        assert_eq!(print(&e), "cap - item * 2");
        let e = Expr::neg(Expr::binary(BinOp::Sub, v("cap"), v("item")));
        assert_eq!(print(&e), "-(cap - item)");
        let e = Expr::binary(BinOp::Mul, Expr::binary(BinOp::Sub, v("cap"), v("item")), Expr::num(2.0));
        assert_eq!(print(&e), "(cap - item) * 2");
    }

    #[test]
    fn right_nested_same_precedence_keeps_parens() {
        let e = Expr::binary(BinOp::Sub, v("a"), Expr::binary(BinOp::Sub, v("b"), v("c")));
        assert_eq!(print(&e), "a - (b - c)");
        let e = Expr::binary(BinOp::Sub, Expr::binary(BinOp::Sub, v("a"), v("b")), v("c"));
        assert_eq!(print(&e), "a - b - c");
        let e = Expr::binary(BinOp::Div, v("a"), Expr::binary(BinOp::Mul, v("b"), v("c")));
        assert_eq!(print(&e), "a / (b * c)");
    }

    #[test]
    fn functions_print_lowercase_with_spaced_commas() {
        let e = parse("MAX(cap,ITEM)").unwrap();
        assert_eq!(print(&e), "max(cap, ITEM)");
        let e = Expr::call(Func::If, vec![v("a"), Expr::neg(v("b")), Expr::num(1000000.0)]);
        assert_eq!(print(&e), "if(a, -b, 1000000)");
    }

    #[test]
    fn numbers_round_trip_without_exponents() {
        for x in [0.0, 0.1, 2.5, 1e-7, 123456789.125, 1e21, f64::MAX] {
            let text = print(&Expr::num(x));
            assert!(!text.contains('e'), "{text}");
            assert_eq!(parse(&text).unwrap(), Expr::num(x));
        }
        assert_eq!(print(&Expr::num(-0.0)), "0");
    }

    #[test]
    fn negated_operands() {
        let e = Expr::binary(BinOp::Sub, v("a"), Expr::neg(v("b")));
        assert_eq!(print(&e), "a - -b");
        assert_eq!(parse("a - -b").unwrap(), e);
        let e = Expr::neg(Expr::neg(Expr::num(2.0)));
        assert_eq!(print(&e), "--2");
        assert_eq!(parse("--2").unwrap(), e);
    }
}
