use super::{BinOp, Expr, Func};

/// Nesting limit; keeps the recursive descent off the stack guard.
const MAX_DEPTH: usize = 200;
/// Token limit; bounds the depth of left-nested operator chains.
const MAX_TOKENS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A character that starts no token.
    BadCharacter(char),
    /// A numeric literal that does not fit a finite double.
    BadNumber(String),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    UnknownFunction(String),
    WrongArity { func: &'static str, expected: usize, found: usize },
    TooDeep,
    TooLong,
}

/// Parse failure with the byte offset it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{} at position {position}", describe(.kind))]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl ParseError {
    pub fn is_lexical(&self) -> bool {
        matches!(self.kind, ParseErrorKind::BadCharacter(_) | ParseErrorKind::BadNumber(_))
    }
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::BadCharacter(c) => format!("lexical error: unexpected character {c:?}"),
        ParseErrorKind::BadNumber(text) => format!("lexical error: number {text:?} out of range"),
        ParseErrorKind::UnexpectedToken { found, expected } => {
            format!("syntax error: expected {expected}, found {found}")
        }
        ParseErrorKind::UnexpectedEnd { expected } => {
            format!("syntax error: expected {expected}, found end of input")
        }
        ParseErrorKind::UnknownFunction(name) => format!("unknown function {name:?}"),
        ParseErrorKind::WrongArity { func, expected, found } => {
            format!("syntax error: {func} takes {expected} argument(s), got {found}")
        }
        ParseErrorKind::TooDeep => "syntax error: expression nested too deeply".to_string(),
        ParseErrorKind::TooLong => format!("syntax error: more than {MAX_TOKENS} tokens"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number {n}"),
            Token::Ident(name) => format!("identifier {name:?}"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Comma => "','".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            b',' => Some(Token::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            tokens.push((tok, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lexeme = &text[start..i];
            match lexeme.parse::<f64>() {
                Ok(v) if v.is_finite() => tokens.push((Token::Number(v), start)),
                _ => {
                    return Err(ParseError {
                        kind: ParseErrorKind::BadNumber(lexeme.to_string()),
                        position: start,
                    })
                }
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((Token::Ident(text[start..i].to_string()), start));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(ParseError { kind: ParseErrorKind::BadCharacter(ch), position: start });
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error_here(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            Some(tok) => ParseErrorKind::UnexpectedToken { found: tok.describe(), expected },
            None => ParseErrorKind::UnexpectedEnd { expected },
        };
        ParseError { kind, position: self.position() }
    }

    fn expect(&mut self, want: Token, expected: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn descend(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError { kind: ParseErrorKind::TooDeep, position: self.position() })
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.descend()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            self.descend()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::neg(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.position();
        match self.peek().cloned() {
            Some(Token::Number(v)) => {
                self.pos += 1;
                Ok(Expr::Number(v))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if self.peek() != Some(&Token::LParen) {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name).ok_or(ParseError {
                    kind: ParseErrorKind::UnknownFunction(name.clone()),
                    position: start,
                })?;
                self.pos += 1;
                let mut args = vec![self.expr()?];
                while self.peek() == Some(&Token::Comma) {
                    self.pos += 1;
                    args.push(self.expr()?);
                }
                self.expect(Token::RParen, "',' or ')'")?;
                if args.len() != func.arity() {
                    return Err(ParseError {
                        kind: ParseErrorKind::WrongArity {
                            func: func.name(),
                            expected: func.arity(),
                            found: args.len(),
                        },
                        position: start,
                    });
                }
                Ok(Expr::Call(func, args))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.error_here("a number, identifier or '('")),
        }
    }
}

/// Parses DSL text into an expression tree.
///
/// Variables are not checked here; binding against a problem's variable set
/// happens in [`super::BoundExpr::bind`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.len() > MAX_TOKENS {
        return Err(ParseError { kind: ParseErrorKind::TooLong, position: tokens[MAX_TOKENS].1 });
    }
    let mut parser = Parser { tokens, pos: 0, end: text.len(), depth: 0 };
    let expr = parser.expr()?;
    if parser.peek().is_some() {
        return Err(parser.error_here("an operator or end of input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Expr {
        Expr::var(name)
    }

    #[test]
    fn precedence_binds_mul_tighter() {
        assert_eq!(
            parse("cap - item * 2").unwrap(),
            Expr::binary(BinOp::Sub, v("cap"), Expr::binary(BinOp::Mul, v("item"), Expr::num(2.0)))
        );
    }

    #[test]
    fn unary_minus_over_parenthesised_group() {
        assert_eq!(
            parse("-(cap - item)").unwrap(),
            Expr::neg(Expr::binary(BinOp::Sub, v("cap"), v("item")))
        );
    }

    #[test]
    fn subtraction_is_left_associative() {
        assert_eq!(
            parse("a - b - c").unwrap(),
            Expr::binary(BinOp::Sub, Expr::binary(BinOp::Sub, v("a"), v("b")), v("c"))
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_mul() {
        assert_eq!(
            parse("-a * b").unwrap(),
            Expr::binary(BinOp::Mul, Expr::neg(v("a")), v("b"))
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse(" min( cap ,item )").unwrap(), parse("min(cap,item)").unwrap());
        assert_eq!(parse("\tcap\n-item").unwrap(), parse("cap - item").unwrap());
    }

    #[test]
    fn unbalanced_paren_reports_end_of_input() {
        let err = parse("min(cap, item").unwrap_err();
        assert_eq!(err.position, "min(cap, item".len());
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
    }

    #[test]
    fn bad_character_is_lexical() {
        let err = parse("cap $ item").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(err.is_lexical());
    }

    #[test]
    fn unknown_function_reports_name_position() {
        let err = parse("1 + sqrt(cap)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("sqrt".into()));
        assert_eq!(err.position, 4);
    }

    #[test]
    fn wrong_arity() {
        let err = parse("if(cap, item)").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::WrongArity { func: "if", expected: 3, found: 2 }
        );
        assert!(parse("abs(cap, item)").is_err());
    }

    #[test]
    fn trailing_tokens_rejected() {
        let err = parse("cap item").unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn empty_input() {
        let err = parse("   ").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
    }

    #[test]
    fn function_names_used_as_variables() {
        assert_eq!(parse("min").unwrap(), v("min"));
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(parse("0.25").unwrap(), Expr::num(0.25));
        assert_eq!(parse(".5").unwrap(), Expr::num(0.5));
        assert_eq!(parse("3.").unwrap(), Expr::num(3.0));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}1{}", "(".repeat(1000), ")".repeat(1000));
        assert_eq!(parse(&text).unwrap_err().kind, ParseErrorKind::TooDeep);
        let negs = format!("{}1", "-".repeat(1000));
        assert_eq!(parse(&negs).unwrap_err().kind, ParseErrorKind::TooDeep);
        let long = vec!["x"; 3000].join(" + ");
        assert_eq!(parse(&long).unwrap_err().kind, ParseErrorKind::TooLong);
    }
}
