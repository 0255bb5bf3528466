//! Recursive-descent parser and evaluator for potential expressions.
//!
//! Grammar (x is the sole variable):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?        (right-associative, binds above '-')
//! atom   := number | 'x' | constant | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! Functions: sin cos tan exp log sqrt abs sinh cosh (log is natural).
//! Constants: pi, e. Every node carries its source span for error carets.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "sinh" => Some(Func::Sinh),
            "cosh" => Some(Func::Cosh),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Num(f64),
    Var,
    /// Second coordinate, accepted only by [`parse_xy`] (boundary data).
    VarY,
    Pi,
    E,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_xy(x, 0.0)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            ExprKind::Num(v) => *v,
            ExprKind::Var => x,
            ExprKind::VarY => y,
            ExprKind::Pi => std::f64::consts::PI,
            ExprKind::E => std::f64::consts::E,
            ExprKind::Neg(e) => -e.eval_xy(x, y),
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (a.eval_xy(x, y), b.eval_xy(x, y));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprKind::Call(f, e) => f.apply(e.eval_xy(x, y)),
        }
    }

    /// Structural equality ignoring spans (f64 literals compared bitwise).
    pub fn structurally_eq(&self, other: &Expr) -> bool {
        match (&self.kind, &other.kind) {
            (ExprKind::Num(a), ExprKind::Num(b)) => a.to_bits() == b.to_bits(),
            (ExprKind::Var, ExprKind::Var) => true,
            (ExprKind::VarY, ExprKind::VarY) => true,
            (ExprKind::Pi, ExprKind::Pi) => true,
            (ExprKind::E, ExprKind::E) => true,
            (ExprKind::Neg(a), ExprKind::Neg(b)) => a.structurally_eq(b),
            (ExprKind::Bin(o1, a1, b1), ExprKind::Bin(o2, a2, b2)) => {
                o1 == o2 && a1.structurally_eq(a2) && b1.structurally_eq(b2)
            }
            (ExprKind::Call(f1, a1), ExprKind::Call(f2, a2)) => {
                f1 == f2 && a1.structurally_eq(a2)
            }
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(..) => 3,
            ExprKind::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = |f: &mut fmt::Formatter<'_>, e: &Expr, need: bool| -> fmt::Result {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Var => write!(f, "x"),
            ExprKind::VarY => write!(f, "y"),
            ExprKind::Pi => write!(f, "pi"),
            ExprKind::E => write!(f, "e"),
            ExprKind::Neg(e) => {
                write!(f, "-")?;
                paren(f, e, e.precedence() < 3)
            }
            ExprKind::Bin(op, a, b) => {
                let p = self.precedence();
                match op {
                    BinOp::Pow => {
                        // right-associative: left operand needs parens at
                        // equal precedence, right operand sits at unary level
                        paren(f, a, a.precedence() <= p)?;
                        write!(f, "^")?;
                        paren(f, b, b.precedence() < 3)
                    }
                    _ => {
                        let sym = match op {
                            BinOp::Add => "+",
                            BinOp::Sub => "-",
                            BinOp::Mul => "*",
                            BinOp::Div => "/",
                            BinOp::Pow => unreachable!(),
                        };
                        paren(f, a, a.precedence() < p)?;
                        write!(f, "{sym}")?;
                        paren(f, b, b.precedence() <= p)
                    }
                }
            }
            ExprKind::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at position {}: expected {}", self.position, self.expected)
    }
}

impl std::error::Error for ParseError {}

impl ParseError {
    /// Two-line caret rendering under the offending position.
    pub fn render(&self, source: &str) -> String {
        let mut out = String::from(source);
        out.push('\n');
        out.push_str(&" ".repeat(self.position.min(source.len())));
        out.push('^');
        out.push_str(&format!(" expected {}", self.expected));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    len: usize,
    allow_y: bool,
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, Span { start, end: i + 1 }));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, Span { start, end: i + 1 }));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, Span { start, end: i + 1 }));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, Span { start, end: i + 1 }));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, Span { start, end: i + 1 }));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, Span { start, end: i + 1 }));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, Span { start, end: i + 1 }));
                i += 1;
            }
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        j = k;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let text = &src[i..j];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    position: i,
                    expected: "a number".into(),
                })?;
                toks.push((Tok::Num(v), Span { start, end: j }));
                i = j;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                toks.push((Tok::Ident(src[i..j].to_string()), Span { start, end: j }));
                i = j;
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    expected: format!("a token, found {c:?}"),
                })
            }
        }
    }
    Ok(toks)
}

impl Lexer {
    fn peek(&self) -> Option<&(Tok, Span)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, s)| s.start).unwrap_or(self.len)
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_inner(src, false)
}

/// Parse with both x and y available (planar boundary data).
pub fn parse_xy(src: &str) -> Result<Expr, ParseError> {
    parse_inner(src, true)
}

fn parse_inner(src: &str, allow_y: bool) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut lx = Lexer { toks, pos: 0, len: src.len(), allow_y };
    let e = parse_expr(&mut lx)?;
    if let Some((_, span)) = lx.peek() {
        return Err(ParseError { position: span.start, expected: "end of input".into() });
    }
    Ok(e)
}

fn parse_expr(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let mut left = parse_term(lx)?;
    while let Some((tok, _)) = lx.peek() {
        let op = match tok {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => break,
        };
        lx.next();
        let right = parse_term(lx)?;
        let span = Span { start: left.span.start, end: right.span.end };
        left = Expr { kind: ExprKind::Bin(op, Box::new(left), Box::new(right)), span };
    }
    Ok(left)
}

fn parse_term(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let mut left = parse_unary(lx)?;
    while let Some((tok, _)) = lx.peek() {
        let op = match tok {
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => break,
        };
        lx.next();
        let right = parse_unary(lx)?;
        let span = Span { start: left.span.start, end: right.span.end };
        left = Expr { kind: ExprKind::Bin(op, Box::new(left), Box::new(right)), span };
    }
    Ok(left)
}

fn parse_unary(lx: &mut Lexer) -> Result<Expr, ParseError> {
    if let Some((Tok::Minus, span)) = lx.peek() {
        let start = span.start;
        lx.next();
        let inner = parse_unary(lx)?;
        let span = Span { start, end: inner.span.end };
        return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), span });
    }
    parse_power(lx)
}

fn parse_power(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let base = parse_atom(lx)?;
    if let Some((Tok::Caret, _)) = lx.peek() {
        lx.next();
        let exp = parse_unary(lx)?;
        let span = Span { start: base.span.start, end: exp.span.end };
        return Ok(Expr { kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), span });
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> Result<Expr, ParseError> {
    let here = lx.here();
    match lx.next() {
        Some((Tok::Num(v), span)) => Ok(Expr { kind: ExprKind::Num(v), span }),
        Some((Tok::LParen, span)) => {
            let inner = parse_expr(lx)?;
            match lx.next() {
                Some((Tok::RParen, rspan)) => Ok(Expr {
                    kind: inner.kind,
                    span: Span { start: span.start, end: rspan.end },
                }),
                other => Err(ParseError {
                    position: other.map(|(_, s)| s.start).unwrap_or(lx.len),
                    expected: "')'".into(),
                }),
            }
        }
        Some((Tok::Ident(name), span)) => match name.as_str() {
            "x" => Ok(Expr { kind: ExprKind::Var, span }),
            "y" if lx.allow_y => Ok(Expr { kind: ExprKind::VarY, span }),
            "pi" => Ok(Expr { kind: ExprKind::Pi, span }),
            "e" => Ok(Expr { kind: ExprKind::E, span }),
            _ => {
                if let Some(func) = Func::from_name(&name) {
                    match lx.next() {
                        Some((Tok::LParen, _)) => {
                            let arg = parse_expr(lx)?;
                            match lx.next() {
                                Some((Tok::RParen, rspan)) => Ok(Expr {
                                    kind: ExprKind::Call(func, Box::new(arg)),
                                    span: Span { start: span.start, end: rspan.end },
                                }),
                                other => Err(ParseError {
                                    position: other.map(|(_, s)| s.start).unwrap_or(lx.len),
                                    expected: "')'".into(),
                                }),
                            }
                        }
                        other => Err(ParseError {
                            position: other.map(|(_, s)| s.start).unwrap_or(lx.len),
                            expected: format!("'(' after function {name}"),
                        }),
                    }
                } else {
                    Err(ParseError {
                        position: span.start,
                        expected: format!("a known identifier (x, pi, e, or a function), found {name:?}"),
                    })
                }
            }
        },
        Some((_, span)) => Err(ParseError {
            position: span.start,
            expected: "a number, identifier, or '('".into(),
        }),
        None => Err(ParseError { position: here, expected: "an expression".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let e = parse("sin(x)^2 + 1").unwrap();
        assert!((e.eval(0.0) - 1.0).abs() < 1e-15);
        let e = parse("2+3*x").unwrap();
        assert!((e.eval(2.0) - 8.0).abs() < 1e-15);
        match parse("2+*3") {
            Err(pe) => assert_eq!(pe.position, 2),
            ok => panic!("expected error, got {ok:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than unary minus
        let e = parse("-x^2").unwrap();
        assert!((e.eval(3.0) + 9.0).abs() < 1e-15);
        // right-associative power
        let e = parse("2^3^2").unwrap();
        assert!((e.eval(0.0) - 512.0).abs() < 1e-12);
        // exponent at unary level
        let e = parse("2^-1").unwrap();
        assert!((e.eval(0.0) - 0.5).abs() < 1e-15);
        let e = parse("2-3-4").unwrap();
        assert!((e.eval(0.0) + 5.0).abs() < 1e-15);
        let e = parse("24/4/2").unwrap();
        assert!((e.eval(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn constants_and_functions() {
        let e = parse("cos(pi)").unwrap();
        assert!((e.eval(0.0) + 1.0).abs() < 1e-15);
        let e = parse("log(e)").unwrap();
        assert!((e.eval(0.0) - 1.0).abs() < 1e-15);
        let e = parse("sqrt(abs(x))").unwrap();
        assert!((e.eval(-4.0) - 2.0).abs() < 1e-15);
        let e = parse("sinh(x)^2 - cosh(x)^2").unwrap();
        assert!((e.eval(0.7) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_identifier_rejected_with_span() {
        match parse("1 + foo(x)") {
            Err(pe) => assert_eq!(pe.position, 4),
            ok => panic!("expected error, got {ok:?}"),
        }
    }

    #[test]
    fn caret_rendering() {
        let err = parse("2+*3").unwrap_err();
        let rendered = err.render("2+*3");
        assert!(rendered.contains("2+*3\n  ^"), "{rendered}");
    }

    #[test]
    fn display_round_trips_hand_cases() {
        for src in [
            "-(x+1)",
            "-x^2",
            "(x+1)*(x-2)",
            "2.0^-x",
            "x-(1-x)",
            "x/(2*x)",
            "sin(cos(x))",
            "-(x*e)",
            "(x^2)^3",
            "1e-10*x",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let e2 = parse(&printed).unwrap();
            assert!(
                e.structurally_eq(&e2),
                "{src} printed as {printed} reparsed differently"
            );
        }
    }

    #[test]
    fn y_variable_only_in_planar_mode() {
        assert!(parse("x + y").is_err());
        let e = parse_xy("x^2 - y^2").unwrap();
        assert!((e.eval_xy(3.0, 2.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn scientific_literals() {
        let e = parse("1.5e-3 + 2E2").unwrap();
        assert!((e.eval(0.0) - 200.0015).abs() < 1e-12);
    }
}
