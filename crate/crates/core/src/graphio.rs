//! Graph files and coordinate import.
//!
//! A graph file is line oriented:
//!
//! ```text
//! udgraph radicands=1,3,5,11,15,33,55,165 vertices=2 edges=1 saturated=1
//! v 0 0 0
//! v 1 1/1:1 0
//! e 0 1
//! ```
//!
//! Coordinates use the canonical element syntax, so files round-trip
//! exactly. Lines starting with `c` are comments.

use std::io::{self, BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::{FieldContext, FieldElement, FieldError};
use crate::geometry::Point;
use crate::udgraph::{GraphError, UnitDistanceGraph};

#[derive(Debug, Error)]
pub enum GraphFileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn write_graph<W: Write>(g: &UnitDistanceGraph, w: W) -> io::Result<()> {
    let mut w = io::BufWriter::new(w);
    let rads: Vec<String> = g
        .context()
        .radicands()
        .iter()
        .map(|r| r.get().to_string())
        .collect();
    writeln!(
        w,
        "udgraph radicands={} vertices={} edges={} saturated={}",
        rads.join(","),
        g.num_vertices(),
        g.num_edges(),
        g.is_saturated() as u8
    )?;
    for (i, p) in g.points().iter().enumerate() {
        writeln!(w, "v {i} {} {}", p.x.to_canonical(), p.y.to_canonical())?;
    }
    for &(a, b) in g.edges() {
        writeln!(w, "e {a} {b}")?;
    }
    w.flush()
}

pub fn graph_to_string(g: &UnitDistanceGraph) -> String {
    let mut v = Vec::new();
    write_graph(g, &mut v).expect("writing to a Vec cannot fail");
    String::from_utf8(v).expect("graph files are ASCII")
}

/// Reads a graph file. Every listed edge is re-verified exactly; the
/// saturation flag in the header must match the edge set.
pub fn read_graph<R: BufRead>(r: R) -> Result<UnitDistanceGraph, GraphFileError> {
    let syntax = |line: usize, reason: &str| GraphFileError::Syntax {
        line,
        reason: reason.to_string(),
    };
    let mut header: Option<(FieldContext, usize, usize, bool)> = None;
    let mut points = Vec::new();
    let mut edges = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        match toks[0] {
            "udgraph" => {
                let mut rads = None;
                let (mut n, mut m, mut sat) = (None, None, None);
                for kv in &toks[1..] {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| syntax(lineno, "expected key=value"))?;
                    match k {
                        "radicands" => {
                            let rs: Result<Vec<u64>, _> =
                                v.split(',').map(|x| x.parse::<u64>()).collect();
                            rads = Some(rs.map_err(|_| syntax(lineno, "bad radicand list"))?);
                        }
                        "vertices" => n = v.parse().ok(),
                        "edges" => m = v.parse().ok(),
                        "saturated" => sat = Some(v == "1" || v == "true"),
                        _ => return Err(syntax(lineno, &format!("unknown header key {k:?}"))),
                    }
                }
                let ctx = FieldContext::from_radicands(
                    &rads.ok_or_else(|| syntax(lineno, "missing radicands"))?,
                )?;
                header = Some((
                    ctx,
                    n.ok_or_else(|| syntax(lineno, "missing vertex count"))?,
                    m.ok_or_else(|| syntax(lineno, "missing edge count"))?,
                    sat.unwrap_or(true),
                ));
            }
            "v" => {
                let (ctx, ..) = header
                    .as_ref()
                    .ok_or_else(|| syntax(lineno, "vertex before header"))?;
                if toks.len() != 4 {
                    return Err(syntax(lineno, "expected `v id x y`"));
                }
                let id: usize = toks[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad vertex id"))?;
                if id != points.len() {
                    return Err(syntax(lineno, "vertex ids must be dense and increasing"));
                }
                let x = FieldElement::parse_canonical(ctx, toks[2])?;
                let y = FieldElement::parse_canonical(ctx, toks[3])?;
                points.push(Point::new(x, y)?);
            }
            "e" => {
                if toks.len() != 3 {
                    return Err(syntax(lineno, "expected `e u v`"));
                }
                let a: usize = toks[1]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad edge endpoint"))?;
                let b: usize = toks[2]
                    .parse()
                    .map_err(|_| syntax(lineno, "bad edge endpoint"))?;
                edges.push((a, b));
            }
            other => return Err(syntax(lineno, &format!("unknown record {other:?}"))),
        }
    }
    let (ctx, n, m, sat) = header.ok_or_else(|| syntax(0, "missing udgraph header"))?;
    if points.len() != n || edges.len() != m {
        return Err(syntax(0, "vertex or edge count does not match the header"));
    }
    let g = UnitDistanceGraph::with_edges(&ctx, points, edges)?;
    if g.is_saturated() != sat {
        return Err(syntax(0, "saturation flag does not match the edge set"));
    }
    Ok(g)
}

pub fn parse_graph(s: &str) -> Result<UnitDistanceGraph, GraphFileError> {
    read_graph(s.as_bytes())
}

/// Evaluates a coordinate expression such as `(sqrt(33)+1)/(2*sqrt(3))`,
/// `-1/2`, `3/4*√11` or the canonical form `1/2:3`.
///
/// Division is allowed by nonzero elements with a single term.
pub fn parse_expr(ctx: &FieldContext, s: &str) -> Result<FieldElement, FieldError> {
    if s.contains(':') {
        return FieldElement::parse_canonical(ctx, s);
    }
    let mut p = ExprParser {
        ctx,
        src: s,
        chars: s.char_indices().collect(),
        pos: 0,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

struct ExprParser<'a> {
    ctx: &'a FieldContext,
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl ExprParser<'_> {
    fn err(&self, reason: &str) -> FieldError {
        FieldError::Parse {
            input: self.src.to_string(),
            reason: format!(
                "{reason} at offset {}",
                self.chars.get(self.pos).map_or(self.src.len(), |c| c.0)
            ),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FieldElement, FieldError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.checked_add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FieldElement, FieldError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.checked_mul(&self.factor()?)?;
            } else if self.eat('/') {
                let d = self.factor()?;
                acc = acc.checked_mul(&self.reciprocal(&d)?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn reciprocal(&self, d: &FieldElement) -> Result<FieldElement, FieldError> {
        let terms = d.terms();
        if terms.len() != 1 {
            return Err(self.err("division by zero or by a multi-term element"));
        }
        let (r, q) = &terms[0];
        // 1/(q√r) = √r/(q·r)
        let coeff = BigRational::one() / (q * BigRational::from_integer(BigInt::from(r.get())));
        FieldElement::term(self.ctx, coeff, r.get())
    }

    fn factor(&mut self) -> Result<FieldElement, FieldError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.factor()
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(v)
            }
            Some('√') => {
                self.pos += 1;
                let arg = self.factor()?;
                self.sqrt(&arg)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                if name != "sqrt" {
                    return Err(self.err(&format!("unknown function {name:?}")));
                }
                if !self.eat('(') {
                    return Err(self.err("expected `(` after sqrt"));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                self.sqrt(&arg)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].1.is_ascii_digit() || self.chars[self.pos].1 == '.')
                {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
                let q = parse_decimal(&lit).ok_or_else(|| self.err("bad number"))?;
                Ok(FieldElement::from_rational(self.ctx, q))
            }
            _ => Err(self.err("expected a number, `sqrt` or `(`")),
        }
    }

    fn sqrt(&self, arg: &FieldElement) -> Result<FieldElement, FieldError> {
        let q = arg
            .as_rational()
            .ok_or_else(|| self.err("square root of an irrational value"))?;
        crate::exactnum::sqrt_rational(&q, self.ctx)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    match s.split_once('.') {
        None => Some(BigRational::from_integer(s.parse().ok()?)),
        Some((i, f)) => {
            if f.contains('.') || (i.is_empty() && f.is_empty()) {
                return None;
            }
            let digits = format!("{i}{f}");
            let n: BigInt = digits.parse().ok()?;
            let d = num_traits::pow(BigInt::from(10), f.len());
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
    }
}

/// Parses a plain coordinate list: one point per line, the two coordinates
/// separated by whitespace, a comma or a semicolon (`x y`, `x, y`,
/// `(x, y)`). Blank lines and lines starting with `#` or `c ` are skipped.
pub fn import_points(ctx: &FieldContext, text: &str) -> Result<Vec<Point>, GraphFileError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("c ") || t == "c" {
            continue;
        }
        if t.starts_with('(') && t.ends_with(')') && split_top(&t[1..t.len() - 1]).is_some() {
            t = &t[1..t.len() - 1];
        }
        let (xs, ys) = split_top(t).ok_or_else(|| GraphFileError::Syntax {
            line: i + 1,
            reason: "expected two coordinates".into(),
        })?;
        let x = parse_expr(ctx, xs)?;
        let y = parse_expr(ctx, ys)?;
        out.push(Point::new(x, y)?);
    }
    Ok(out)
}

/// Splits at the first top-level `,`/`;`, or else at top-level whitespace
/// between two complete expressions.
fn split_top(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => return Some((s[..i].trim(), s[i + 1..].trim())),
            _ => {}
        }
    }
    // Whitespace split: the cut must not sit next to a binary operator.
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                let before = s[..i].trim_end();
                let after = s[i..].trim_start();
                let ends_op = before.ends_with(['+', '-', '*', '/', '√']);
                let starts_op = after.starts_with(['+', '*', '/', ')']);
                if !before.is_empty() && !after.is_empty() && !ends_op && !starts_op {
                    return Some((before, after));
                }
            }
            _ => {}
        }
    }
    None
}

/// Imports a coordinate list and rebuilds all unit-distance edges.
pub fn import_graph(ctx: &FieldContext, text: &str) -> Result<UnitDistanceGraph, GraphFileError> {
    Ok(UnitDistanceGraph::from_points(
        ctx,
        import_points(ctx, text)?,
    ))
}
