//! Precedence-climbing parser for dispersion expressions.
//!
//! ```text
//! expr    = term { ("+" | "-") term }
//! term    = unary { ("*" | "/") unary }
//! unary   = "-" unary | power
//! power   = atom [ "^" unary ]              (right-associative)
//! atom    = number | ident | ident "(" expr ")" | "(" expr ")"
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ]
//! ident   = letter { letter | digit | "_" }
//! ```
//!
//! Functions: sqrt, sin, cos, exp, abs. Offsets in errors are 0-based
//! character positions.

use super::expr::{BinOp, Expr, Func};

pub const MAX_INPUT_LEN: usize = 64 * 1024;

const UNARY_BP: u8 = 5;
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown function '{name}' at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
}

impl ParseError {
    pub fn name(&self) -> &'static str {
        match self {
            ParseError::SyntaxError { .. } => "SyntaxError",
            ParseError::UnknownFunction { .. } => "UnknownFunction",
        }
    }

    pub fn offset(&self) -> usize {
        match self {
            ParseError::SyntaxError { offset, .. } | ParseError::UnknownFunction { offset, .. } => {
                *offset
            }
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        offset,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(n) => format!("identifier '{n}'"),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' | '-' | '*' | '/' | '^' => {
                let op = match c {
                    '+' => BinOp::Add,
                    '-' => BinOp::Sub,
                    '*' => BinOp::Mul,
                    '/' => BinOp::Div,
                    _ => BinOp::Pow,
                };
                toks.push((start, Tok::Op(op)));
                i += 1;
            }
            '(' => {
                toks.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((start, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme: String = chars[start..i].iter().collect();
                let value = lexeme
                    .parse::<f64>()
                    .map_err(|_| syntax(start, format!("malformed number '{lexeme}'")))?;
                toks.push((start, Tok::Num(value)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(chars[start..i].iter().collect())));
            }
            other => return Err(syntax(start, format!("unexpected character '{other}'"))),
        }
    }
    toks.push((chars.len(), Tok::End));
    Ok(toks)
}

fn infix_binding_power(op: BinOp) -> (u8, u8) {
    match op {
        BinOp::Add | BinOp::Sub => (1, 2),
        BinOp::Mul | BinOp::Div => (3, 4),
        BinOp::Pow => (7, 6),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Tok) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next() {
            (_, Tok::RParen) => Ok(()),
            (offset, tok) => Err(syntax(
                offset,
                format!("expected ')', found {}", tok.describe()),
            )),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.peek().0, "expression nested too deeply"));
        }
        let result = self.climb(min_bp);
        self.depth -= 1;
        result
    }

    fn climb(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match &self.peek().1 {
                Tok::Op(op) => *op,
                Tok::RParen | Tok::End => break,
                tok => {
                    return Err(syntax(
                        self.peek().0,
                        format!(
                            "expected operator, ')' or end of input, found {}",
                            tok.describe()
                        ),
                    ))
                }
            };
            let (lbp, rbp) = infix_binding_power(op);
            if lbp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(rbp)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            (_, Tok::Num(v)) => Ok(Expr::Num(v)),
            (offset, Tok::Ident(name)) => {
                if self.peek().1 != Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                let func =
                    Func::from_name(&name).ok_or(ParseError::UnknownFunction { name, offset })?;
                self.next();
                let arg = self.expr(0)?;
                self.expect_rparen()?;
                Ok(Expr::Call {
                    func,
                    arg: Box::new(arg),
                })
            }
            (_, Tok::LParen) => {
                let inner = self.expr(0)?;
                self.expect_rparen()?;
                Ok(inner)
            }
            (_, Tok::Op(BinOp::Sub)) => Ok(Expr::Neg(Box::new(self.expr(UNARY_BP)?))),
            (offset, tok) => Err(syntax(
                offset,
                format!(
                    "expected number, identifier, '(' or '-', found {}",
                    tok.describe()
                ),
            )),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    if text.len() > MAX_INPUT_LEN {
        return Err(syntax(MAX_INPUT_LEN, "expression longer than 64 KiB"));
    }
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        depth: 0,
    };
    let e = p.expr(0)?;
    match p.peek() {
        (_, Tok::End) => Ok(e),
        (offset, tok) => Err(syntax(*offset, format!("unexpected {}", tok.describe()))),
    }
}
