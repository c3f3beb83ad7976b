//! Reader for the theory language:
//!
//! ```text
//! theory cmon {
//!   op e : 0;
//!   op m : 2;
//!   eq (2) m(x0,x1) = m(x1,x0);
//! }
//! ```
//!
//! `xN` is a variable, a bare identifier is a constant, and `//` starts a
//! comment. Printing goes through `Display` on `Presentation`.

use std::fmt;

use lawvere_core::theory::{Equation, OpSym, Presentation, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Nat(n) => write!(f, "`{n}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '/' {
            bump(&mut chars);
            if chars.peek() != Some(&'/') {
                return Err(ParseError { kind: ErrorKind::Syntax, line: l, column: col, message: "unexpected `/`".into() });
            }
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(char::is_ascii_digit) {
                s.push(bump(&mut chars).expect("peeked"));
            }
            let n = s.parse().map_err(|_| ParseError {
                kind: ErrorKind::Syntax,
                line: l,
                column: col,
                message: format!("number `{s}` is too large"),
            })?;
            out.push(Spanned { tok: Tok::Nat(n), line: l, column: col });
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|&c| c.is_alphanumeric() || c == '_') {
                s.push(bump(&mut chars).expect("peeked"));
            }
            out.push(Spanned { tok: Tok::Ident(s), line: l, column: col });
        } else if "{}():;,=".contains(c) {
            bump(&mut chars);
            out.push(Spanned { tok: Tok::Punct(c), line: l, column: col });
        } else {
            return Err(ParseError { kind: ErrorKind::Syntax, line: l, column: col, message: format!("unexpected character `{c}`") });
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column });
    Ok(out)
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// A term as written, with the position of every symbol.
enum RawTerm {
    Var(usize, usize, usize),
    App(String, Vec<RawTerm>, usize, usize),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(at: &Spanned, expected: &str) -> ParseError {
        ParseError {
            kind: ErrorKind::Syntax,
            line: at.line,
            column: at.column,
            message: format!("expected {expected}, found {}", at.tok),
        }
    }

    fn punct(&mut self, c: char) -> Result<Spanned, ParseError> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(t)
        } else {
            Err(Self::syntax(&t, &format!("`{c}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Spanned), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            _ => Err(Self::syntax(&t, what)),
        }
    }

    fn nat(&mut self) -> Result<(u64, Spanned), ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Nat(n) => Ok((n, t)),
            _ => Err(Self::syntax(&t, "a number")),
        }
    }

    fn keyword(&mut self, word: &str) -> Result<Spanned, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == word => Ok(t),
            _ => Err(Self::syntax(&t, &format!("`{word}`"))),
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let (name, at) = self.ident("a term")?;
        if let Some(i) = variable_index(&name) {
            return Ok(RawTerm::Var(i, at.line, at.column));
        }
        let mut args = Vec::new();
        if self.peek().tok == Tok::Punct('(') {
            self.next();
            if self.peek().tok != Tok::Punct(')') {
                loop {
                    args.push(self.term()?);
                    let t = self.next();
                    match t.tok {
                        Tok::Punct(',') => continue,
                        Tok::Punct(')') => break,
                        _ => return Err(Self::syntax(&t, "`,` or `)`")),
                    }
                }
            } else {
                self.next();
            }
        }
        Ok(RawTerm::App(name, args, at.line, at.column))
    }
}

fn semantic(line: usize, column: usize, message: String) -> ParseError {
    ParseError { kind: ErrorKind::Semantic, line, column, message }
}

fn resolve(t: &RawTerm, ops: &[OpSym], context: usize) -> Result<Term, ParseError> {
    match t {
        RawTerm::Var(i, line, column) => {
            if *i >= context {
                return Err(semantic(*line, *column, format!("variable x{i} is outside the context of size {context}")));
            }
            Ok(Term::Var(*i))
        }
        RawTerm::App(name, args, line, column) => {
            let op = ops
                .iter()
                .find(|o| o.name == *name)
                .ok_or_else(|| semantic(*line, *column, format!("undeclared operation `{name}`")))?;
            if op.arity != args.len() {
                return Err(semantic(
                    *line,
                    *column,
                    format!("arity mismatch: `{name}` takes {} arguments, got {}", op.arity, args.len()),
                ));
            }
            let args = args.iter().map(|a| resolve(a, ops, context)).collect::<Result<_, _>>()?;
            Ok(Term::App(name.clone(), args))
        }
    }
}

/// Parses one theory. A presentation matching a built-in theory up to the
/// order and orientation of its equations gets that theory's normalizer.
pub fn parse_theory(source: &str) -> Result<Presentation, ParseError> {
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    p.keyword("theory")?;
    let (name, _) = p.ident("a theory name")?;
    p.punct('{')?;
    let mut ops: Vec<OpSym> = Vec::new();
    let mut eqs = Vec::new();
    loop {
        let t = p.next();
        match &t.tok {
            Tok::Punct('}') => break,
            Tok::Ident(k) if k == "op" => {
                let (op, at) = p.ident("an operation name")?;
                p.punct(':')?;
                let (arity, _) = p.nat()?;
                p.punct(';')?;
                if variable_index(&op).is_some() {
                    return Err(semantic(at.line, at.column, format!("`{op}` is reserved for variables")));
                }
                if ops.iter().any(|o| o.name == op) {
                    return Err(semantic(at.line, at.column, format!("operation `{op}` declared twice")));
                }
                ops.push(OpSym::new(op, arity as usize));
            }
            Tok::Ident(k) if k == "eq" => {
                p.punct('(')?;
                let (context, _) = p.nat()?;
                p.punct(')')?;
                let lhs = p.term()?;
                p.punct('=')?;
                let rhs = p.term()?;
                p.punct(';')?;
                let context = context as usize;
                eqs.push(Equation::new(context, resolve(&lhs, &ops, context)?, resolve(&rhs, &ops, context)?));
            }
            _ => return Err(Parser::syntax(&t, "`op`, `eq` or `}`")),
        }
    }
    let end = p.next();
    if end.tok != Tok::Eof {
        return Err(Parser::syntax(&end, "end of input"));
    }
    let presentation = Presentation::new(name, ops, eqs).map_err(|e| semantic(1, 1, e.to_string()))?;
    Ok(presentation.with_detected_normalizer())
}

pub fn print_theory(p: &Presentation) -> String {
    p.to_string()
}
