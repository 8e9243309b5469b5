//! Tiny expression grammar for test functions: literals, the variables `rho`
//! and `theta`, the operators + - * / ^ (^ right-associative), unary minus,
//! and the functions sqrt, sin, cos, asin, exp, log, abs. No user-defined
//! names, no assignment. Parse errors carry a byte offset for caret
//! diagnostics; printing parenthesizes so parse(print(e)) round-trips.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Rho,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Asin,
    Exp,
    Log,
    Abs,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Asin => "asin",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "asin" => Func::Asin,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Asin => x.asin(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, rho: f64, theta: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Rho) => rho,
            Expr::Var(Var::Theta) => theta,
            Expr::Neg(e) => -e.eval(rho, theta),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(rho, theta), b.eval(rho, theta));
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(rho, theta)),
        }
    }

    pub fn uses_theta(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::Theta,
            Expr::Neg(e) => e.uses_theta(),
            Expr::Bin(_, a, b) => a.uses_theta() || b.uses_theta(),
            Expr::Call(_, e) => e.uses_theta(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::Rho) => write!(f, "rho"),
            Expr::Var(Var::Theta) => write!(f, "theta"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

impl ParseError {
    /// Render the source with a caret under the offending byte.
    pub fn render(&self, source: &str) -> String {
        let mut out = String::new();
        out.push_str(source);
        out.push('\n');
        out.push_str(&" ".repeat(self.offset.min(source.len())));
        out.push_str("^ ");
        out.push_str(&self.message);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
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

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && i > start
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    message: format!("invalid number `{text}`"),
                    offset: start,
                })?;
                out.push((Tok::Num(v), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError {
                    message: format!("unexpected character `{c}`"),
                    offset: i,
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn advance(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn offset(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_prefix()?;
        while let Some((tok, _)) = self.peek() {
            let (op, lbp, rbp) = match tok {
                Tok::Plus => (BinOp::Add, 10, 11),
                Tok::Minus => (BinOp::Sub, 10, 11),
                Tok::Star => (BinOp::Mul, 20, 21),
                Tok::Slash => (BinOp::Div, 20, 21),
                Tok::Caret => (BinOp::Pow, 31, 30), // right-associative
                _ => break,
            };
            if lbp < min_bp {
                break;
            }
            self.advance();
            let rhs = self.parse_expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        match self.advance() {
            Some((Tok::Num(v), _)) => Ok(Expr::Num(v)),
            Some((Tok::Minus, _)) => {
                // unary minus binds tighter than * but looser than ^
                let inner = self.parse_expr(25)?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some((Tok::LParen, open_off)) => {
                let inner = self.parse_expr(0)?;
                match self.advance() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ParseError {
                        message: "unclosed parenthesis".into(),
                        offset: open_off,
                    }),
                }
            }
            Some((Tok::Ident(name), ident_off)) => match name.as_str() {
                "rho" => Ok(Expr::Var(Var::Rho)),
                "theta" => Ok(Expr::Var(Var::Theta)),
                other => {
                    if let Some(func) = Func::from_name(other) {
                        match self.advance() {
                            Some((Tok::LParen, _)) => {
                                let arg = self.parse_expr(0)?;
                                match self.advance() {
                                    Some((Tok::RParen, _)) => {
                                        Ok(Expr::Call(func, Box::new(arg)))
                                    }
                                    _ => Err(ParseError {
                                        message: format!("missing `)` after {other}(..."),
                                        offset: ident_off,
                                    }),
                                }
                            }
                            _ => Err(ParseError {
                                message: format!("function `{other}` needs parentheses"),
                                offset: ident_off,
                            }),
                        }
                    } else {
                        Err(ParseError {
                            message: format!(
                                "unknown name `{other}` (variables: rho, theta; functions: sqrt, sin, cos, asin, exp, log, abs)"
                            ),
                            offset: ident_off,
                        })
                    }
                }
            },
            Some((tok, tok_off)) => Err(ParseError {
                message: format!("unexpected token {tok:?}"),
                offset: tok_off,
            }),
            None => Err(ParseError {
                message: "unexpected end of expression".into(),
                offset: off,
            }),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(ParseError {
            message: "empty expression".into(),
            offset: 0,
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let expr = p.parse_expr(0)?;
    if let Some((tok, off)) = p.peek() {
        return Err(ParseError {
            message: format!("trailing input {tok:?}"),
            offset: *off,
        });
    }
    Ok(expr)
}
