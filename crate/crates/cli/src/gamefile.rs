//! Game files, format v1.
//!
//! A game file is a sequence of `key = value` statements, one per line (or
//! separated by `;`). `#` starts a comment. Vectors are written as
//! whitespace- or comma-separated literals, optionally in brackets; matrices
//! either as `[[..], [..]]` or as one row per indented line after the key:
//!
//! ```text
//! format = v1
//! signature = 2 2
//! payoff =
//!     0   1  -1/2  0
//!    -1   0   3    1
//!     1/2 -3  0    2
//!     0   -1 -2    0
//! ```
//!
//! Entries are exact: integers, fractions (`-9/8`) and decimals (`0.5`) all
//! parse to rationals. Integration defaults (`t_end`, `rtol`, `atol`,
//! `max_step`) are floats.

use std::fmt;

use polyham::{format_rational, parse_rational, Matrix, PolymatrixGame, Rational, Signature};
use num_traits::{One, Zero};

pub const FORMAT_VERSION: &str = "v1";

const KEYS: [&str; 11] = [
    "format", "signature", "payoff", "skew_model", "scaling", "qtilde", "x0", "t_end", "rtol", "atol", "max_step",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrationDefaults {
    pub t_end: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameFile {
    pub signature: Signature,
    pub payoff: Matrix<Rational>,
    pub skew_model: Option<Matrix<Rational>>,
    pub scaling: Option<Vec<Rational>>,
    pub qtilde: Option<Vec<Rational>>,
    pub x0: Option<Vec<Rational>>,
    pub integration: IntegrationDefaults,
}

impl GameFile {
    pub fn game(&self) -> PolymatrixGame<Rational> {
        PolymatrixGame::new(self.signature.clone(), self.payoff.clone()).expect("validated on parse")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Eq,
    Open,
    Close,
    Comma,
    Semi,
    Newline,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Open => f.write_str("`[`"),
            Tok::Close => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
    /// First token on its line and preceded by whitespace.
    indented: bool,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut k = 0;
        let mut first = true;
        while k < chars.len() {
            let (_, c) = chars[k];
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            let column = line[..chars[k].0].chars().count() + 1;
            let indented = first && k > 0;
            first = false;
            let simple = match c {
                '=' => Some(Tok::Eq),
                '[' => Some(Tok::Open),
                ']' => Some(Tok::Close),
                ',' => Some(Tok::Comma),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            let tok = match simple {
                Some(t) => {
                    k += 1;
                    t
                }
                None => {
                    let start = k;
                    while k < chars.len() && !chars[k].1.is_whitespace() && !"=[],;#".contains(chars[k].1) {
                        k += 1;
                    }
                    let s: String = chars[start..k].iter().map(|&(_, c)| c).collect();
                    Tok::Word(s)
                }
            };
            out.push(Token {
                tok,
                line: li + 1,
                column,
                indented,
            });
        }
        let column = line.chars().count() + 1;
        out.push(Token {
            tok: Tok::Newline,
            line: li + 1,
            column,
            indented: false,
        });
    }
    let line = out.last().map_or(1, |t| t.line + 1);
    out.push(Token {
        tok: Tok::End,
        line,
        column: 1,
        indented: false,
    });
    out
}

/// A literal with its position, before interpretation.
#[derive(Debug, Clone)]
struct Lit {
    text: String,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone)]
enum Value {
    Vector(Vec<Lit>),
    Matrix(Vec<(usize, Vec<Lit>)>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax {
            line: t.line,
            column: t.column,
            expected: expected.to_string(),
            found: t.tok.to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            self.fail(expected)
        }
    }

    fn skip_blank(&mut self) {
        while matches!(self.peek().tok, Tok::Newline | Tok::Semi) {
            self.next();
        }
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek().tok, Tok::Newline | Tok::Semi | Tok::End)
    }

    fn end_statement(&mut self) -> Result<(), ParseError> {
        if self.at_statement_end() {
            Ok(())
        } else {
            self.fail("end of statement")
        }
    }

    fn literal(&mut self) -> Result<Lit, ParseError> {
        match self.peek().tok.clone() {
            Tok::Word(text) => {
                let t = self.next();
                Ok(Lit {
                    text,
                    line: t.line,
                    column: t.column,
                })
            }
            _ => self.fail("a literal"),
        }
    }

    /// `[a, b, ...]` with optional commas.
    fn bracketed(&mut self) -> Result<Vec<Lit>, ParseError> {
        self.expect(Tok::Open, "`[`")?;
        let mut out = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Close => {
                    self.next();
                    return Ok(out);
                }
                Tok::Comma if !out.is_empty() => {
                    self.next();
                }
                Tok::Word(_) => out.push(self.literal()?),
                _ => return self.fail("a literal or `]`"),
            }
        }
    }

    /// Bare literals up to the end of the statement.
    fn bare_row(&mut self) -> Result<Vec<Lit>, ParseError> {
        let mut out = Vec::new();
        while !self.at_statement_end() {
            match self.peek().tok {
                Tok::Comma if !out.is_empty() => {
                    self.next();
                }
                Tok::Word(_) => out.push(self.literal()?),
                _ => return self.fail("a literal"),
            }
        }
        Ok(out)
    }

    fn vector(&mut self) -> Result<Vec<Lit>, ParseError> {
        let v = if self.peek().tok == Tok::Open {
            self.bracketed()?
        } else {
            self.bare_row()?
        };
        if v.is_empty() {
            return self.fail("at least one entry");
        }
        self.end_statement()?;
        Ok(v)
    }

    fn matrix(&mut self) -> Result<Vec<(usize, Vec<Lit>)>, ParseError> {
        let mut rows = Vec::new();
        if self.peek().tok == Tok::Open {
            let open = self.next();
            loop {
                match self.peek().tok {
                    Tok::Open => {
                        let line = self.peek().line;
                        rows.push((line, self.bracketed()?));
                    }
                    Tok::Comma if !rows.is_empty() => {
                        self.next();
                    }
                    Tok::Close => {
                        self.next();
                        break;
                    }
                    Tok::Newline => {
                        self.next();
                    }
                    _ => return self.fail("`[` starting a row, or `]`"),
                }
            }
            if rows.is_empty() {
                return Err(ParseError::Syntax {
                    line: open.line,
                    column: open.column,
                    expected: "at least one row".into(),
                    found: "`[]`".into(),
                });
            }
            return self.end_statement().map(|_| rows);
        }
        if self.peek().tok != Tok::Newline {
            return self.fail("`[` or a new line followed by indented rows");
        }
        self.next();
        while self.peek().indented {
            let line = self.peek().line;
            let row = if self.peek().tok == Tok::Open {
                self.bracketed()?
            } else {
                self.bare_row()?
            };
            if self.peek().tok != Tok::End {
                self.expect(Tok::Newline, "end of line")?;
            }
            rows.push((line, row));
        }
        if rows.is_empty() {
            return self.fail("an indented matrix row");
        }
        Ok(rows)
    }
}

struct Statement {
    key: String,
    line: usize,
    value: Value,
}

fn statements(text: &str) -> Result<Vec<Statement>, ParseError> {
    let mut p = Parser { toks: tokenize(text), pos: 0 };
    let mut out: Vec<Statement> = Vec::new();
    loop {
        p.skip_blank();
        if p.peek().tok == Tok::End {
            return Ok(out);
        }
        let key = match p.peek().tok.clone() {
            Tok::Word(w) if KEYS.contains(&w.as_str()) => w,
            Tok::Word(_) => return p.fail(&format!("a key (one of {})", KEYS.join(", "))),
            _ => return p.fail("a key"),
        };
        let head = p.next();
        if out.iter().any(|s| s.key == key) {
            return Err(ParseError::Syntax {
                line: head.line,
                column: head.column,
                expected: "each key at most once".into(),
                found: format!("second `{key}`"),
            });
        }
        if out.is_empty() && key != "format" {
            return Err(ParseError::Syntax {
                line: head.line,
                column: head.column,
                expected: format!("`format = {FORMAT_VERSION}` as the first statement"),
                found: format!("`{key}`"),
            });
        }
        p.expect(Tok::Eq, "`=`")?;
        let value = match key.as_str() {
            "payoff" | "skew_model" => Value::Matrix(p.matrix()?),
            _ => Value::Vector(p.vector()?),
        };
        out.push(Statement {
            key,
            line: head.line,
            value,
        });
    }
}

fn semantic<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Semantic {
        line,
        message: message.into(),
    })
}

fn syntax_at<T>(lit: &Lit, expected: &str) -> Result<T, ParseError> {
    Err(ParseError::Syntax {
        line: lit.line,
        column: lit.column,
        expected: expected.into(),
        found: format!("`{}`", lit.text),
    })
}

fn rational(lit: &Lit) -> Result<Rational, ParseError> {
    parse_rational(&lit.text).or_else(|_| syntax_at(lit, "a rational literal"))
}

fn single(key: &str, lits: &[Lit]) -> Result<Lit, ParseError> {
    match lits {
        [one] => Ok(one.clone()),
        [_, second, ..] => syntax_at(second, &format!("a single value for `{key}`")),
        [] => unreachable!("vectors are non-empty"),
    }
}

fn positive_float(key: &str, line: usize, lits: &[Lit]) -> Result<f64, ParseError> {
    let lit = single(key, lits)?;
    let v: f64 = lit.text.replace('\u{2212}', "-").parse().or_else(|_| syntax_at(&lit, "a number"))?;
    if !(v.is_finite() && v > 0.0) {
        return semantic(line, format!("`{key}` must be positive and finite, got {}", lit.text));
    }
    Ok(v)
}

fn rational_vector(key: &str, line: usize, lits: &[Lit], len: usize) -> Result<Vec<Rational>, ParseError> {
    let v = lits.iter().map(rational).collect::<Result<Vec<_>, _>>()?;
    if v.len() != len {
        return semantic(line, format!("`{key}` has {} entries, expected {len}", v.len()));
    }
    Ok(v)
}

fn rational_matrix(key: &str, line: usize, rows: &[(usize, Vec<Lit>)], n: usize) -> Result<Matrix<Rational>, ParseError> {
    let mut out = Vec::with_capacity(n);
    for (k, (row_line, lits)) in rows.iter().enumerate() {
        let row = lits.iter().map(rational).collect::<Result<Vec<_>, _>>()?;
        if row.len() != n {
            return semantic(
                *row_line,
                format!("`{key}` row {} has {} entries, expected {n}", k + 1, row.len()),
            );
        }
        out.push(row);
    }
    if out.len() != n {
        return semantic(line, format!("`{key}` has {} rows, expected {n}", out.len()));
    }
    Ok(Matrix::from_rows(out).expect("rows checked"))
}

pub fn parse_game_file(text: &str) -> Result<GameFile, ParseError> {
    let stmts = statements(text)?;
    let end_line = text.lines().count() + 1;
    let find = |key: &str| stmts.iter().find(|s| s.key == key);
    let vector = |s: &Statement| match &s.value {
        Value::Vector(v) => v.clone(),
        Value::Matrix(_) => unreachable!("only matrix keys hold matrices"),
    };
    let matrix = |s: &Statement| match &s.value {
        Value::Matrix(m) => m.clone(),
        Value::Vector(_) => unreachable!("matrix keys always hold matrices"),
    };

    let Some(format) = find("format") else {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            expected: format!("`format = {FORMAT_VERSION}`"),
            found: "end of input".into(),
        });
    };
    let version = single("format", &vector(format))?;
    if version.text != FORMAT_VERSION {
        return syntax_at(&version, &format!("format version `{FORMAT_VERSION}`"));
    }
    let required = |key: &str| {
        find(key).ok_or_else(|| ParseError::Syntax {
            line: end_line,
            column: 1,
            expected: format!("a `{key}` statement"),
            found: "end of input".into(),
        })
    };

    let sig_stmt = required("signature")?;
    let mut parts = Vec::new();
    for (k, lit) in vector(sig_stmt).iter().enumerate() {
        let v: usize = lit.text.parse().or_else(|_| syntax_at(lit, "a non-negative integer"))?;
        if v == 0 {
            return semantic(sig_stmt.line, format!("signature entry {} is zero", k + 1));
        }
        parts.push(v);
    }
    let signature = Signature::new(parts).expect("entries checked");
    let n = signature.total();
    let p = signature.groups();

    let pay = required("payoff")?;
    let payoff = rational_matrix("payoff", pay.line, &matrix(pay), n)?;

    let skew_model = match find("skew_model") {
        Some(s) => {
            let m = rational_matrix("skew_model", s.line, &matrix(s), n)?;
            if !m.is_skew(0.0) {
                return semantic(s.line, "`skew_model` is not skew-symmetric");
            }
            Some(m)
        }
        None => None,
    };
    let scaling = match find("scaling") {
        Some(s) => {
            let v = rational_vector("scaling", s.line, &vector(s), p)?;
            if let Some(k) = v.iter().position(|x| x.is_zero()) {
                return semantic(s.line, format!("scaling entry {} is zero", k + 1));
            }
            Some(v)
        }
        None => None,
    };
    let qtilde = match find("qtilde") {
        Some(s) => Some(rational_vector("qtilde", s.line, &vector(s), n)?),
        None => None,
    };
    let x0 = match find("x0") {
        Some(s) => {
            let v = rational_vector("x0", s.line, &vector(s), n)?;
            if let Some(k) = v.iter().position(|x| x < &Rational::zero()) {
                return semantic(s.line, format!("x0 entry {} is negative", k + 1));
            }
            for (g, block) in signature.blocks().enumerate() {
                let sum: Rational = v[block].iter().sum();
                if !sum.is_one() {
                    return semantic(s.line, format!("x0 block {} sums to {}, expected 1", g + 1, format_rational(&sum)));
                }
            }
            Some(v)
        }
        None => None,
    };
    let float = |key: &str| find(key).map(|s| positive_float(key, s.line, &vector(s))).transpose();
    let integration = IntegrationDefaults {
        t_end: float("t_end")?,
        rtol: float("rtol")?,
        atol: float("atol")?,
        max_step: float("max_step")?,
    };
    Ok(GameFile {
        signature,
        payoff,
        skew_model,
        scaling,
        qtilde,
        x0,
        integration,
    })
}

fn write_vector(out: &mut String, key: &str, v: &[Rational]) {
    let items: Vec<String> = v.iter().map(format_rational).collect();
    out.push_str(&format!("{key} = {}\n", items.join(" ")));
}

fn write_matrix(out: &mut String, key: &str, m: &Matrix<Rational>) {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| format_rational(&m[(i, j)])).collect())
        .collect();
    let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(1);
    out.push_str(&format!("{key} =\n"));
    for row in cells {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&format!("    {}\n", padded.join("  ")));
    }
}

fn float_literal(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Canonical text form; `parse_game_file` reads it back unchanged.
pub fn serialize_game_file(file: &GameFile) -> String {
    let mut out = format!("format = {FORMAT_VERSION}\n");
    let parts: Vec<String> = file.signature.parts().iter().map(|k| k.to_string()).collect();
    out.push_str(&format!("signature = {}\n", parts.join(" ")));
    write_matrix(&mut out, "payoff", &file.payoff);
    if let Some(m) = &file.skew_model {
        write_matrix(&mut out, "skew_model", m);
    }
    if let Some(v) = &file.scaling {
        write_vector(&mut out, "scaling", v);
    }
    if let Some(v) = &file.qtilde {
        write_vector(&mut out, "qtilde", v);
    }
    if let Some(v) = &file.x0 {
        write_vector(&mut out, "x0", v);
    }
    let d = &file.integration;
    for (key, v) in [("t_end", d.t_end), ("rtol", d.rtol), ("atol", d.atol), ("max_step", d.max_step)] {
        if let Some(v) = v {
            out.push_str(&format!("{key} = {}\n", float_literal(v)));
        }
    }
    out
}
