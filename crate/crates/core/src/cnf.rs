//! Literals, clauses, assignments and the DIMACS CNF text format.

use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// A DIMACS literal: a nonzero integer, negative for negated variables.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn new(dimacs: i32) -> Self {
        assert!(dimacs != 0, "literal 0 is the clause terminator");
        Lit(dimacs)
    }

    pub fn pos(var: u32) -> Self {
        Lit::new(var as i32)
    }

    pub fn neg(var: u32) -> Self {
        Lit::new(-(var as i32))
    }

    /// 1-based variable index.
    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Dense code `2·(var−1) + sign`, used for indexing.
    pub fn code(self) -> usize {
        ((self.var() as usize - 1) << 1) | self.is_negative() as usize
    }

    pub fn from_code(code: usize) -> Self {
        let v = (code >> 1) as i32 + 1;
        Lit(if code & 1 == 1 { -v } else { v })
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Clause = Vec<Lit>;

/// A truth assignment over variables `1..=num_vars`; `None` is unassigned.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Self {
        Assignment {
            values: vec![None; num_vars as usize],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        Assignment {
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn set(&mut self, var: u32, value: bool) {
        let i = var as usize - 1;
        if i >= self.values.len() {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values.get(var as usize - 1).copied().flatten()
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.get(lit.var()).map(|v| v != lit.is_negative())
    }

    pub fn satisfies_clause(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit_value(l) == Some(true))
    }

    /// Index of the first clause not satisfied, if any.
    pub fn first_falsified<'a>(
        &self,
        clauses: impl IntoIterator<Item = &'a Clause>,
    ) -> Option<usize> {
        clauses.into_iter().position(|c| !self.satisfies_clause(c))
    }

    /// Literals that are true, in variable order.
    pub fn true_lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values.iter().enumerate().filter_map(|(i, v)| {
            v.map(|b| {
                if b {
                    Lit::pos(i as u32 + 1)
                } else {
                    Lit::neg(i as u32 + 1)
                }
            })
        })
    }
}

/// A CNF formula.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(num_vars: u32) -> Self {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn from_clauses(clauses: Vec<Clause>) -> Self {
        let num_vars = clauses.iter().flatten().map(|l| l.var()).max().unwrap_or(0);
        Cnf { num_vars, clauses }
    }

    /// Parses integer lists; handy in tests.
    pub fn from_dimacs_lists(lists: &[&[i32]]) -> Self {
        Self::from_clauses(
            lists
                .iter()
                .map(|c| c.iter().map(|&l| Lit::new(l)).collect())
                .collect(),
        )
    }

    pub fn add_clause(&mut self, clause: Clause) {
        for l in &clause {
            self.num_vars = self.num_vars.max(l.var());
        }
        self.clauses.push(clause);
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn write_dimacs<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        let mut line = String::new();
        for c in &self.clauses {
            line.clear();
            for l in c {
                line.push_str(&l.0.to_string());
                line.push(' ');
            }
            line.push('0');
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut out = Vec::new();
        self.write_dimacs(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("DIMACS output is ASCII")
    }

    /// Reads DIMACS CNF. Comment lines start with `c`; clauses may span lines.
    pub fn read_dimacs<R: BufRead>(r: R) -> Result<Cnf, DimacsError> {
        let mut header: Option<(u32, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let parts: Vec<&str> = t.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(DimacsError::Syntax(lineno + 1, "bad header".into()));
                }
                let v = parts[2]
                    .parse()
                    .map_err(|_| DimacsError::Syntax(lineno + 1, "bad variable count".into()))?;
                let c = parts[3]
                    .parse()
                    .map_err(|_| DimacsError::Syntax(lineno + 1, "bad clause count".into()))?;
                header = Some((v, c));
                continue;
            }
            if header.is_none() {
                return Err(DimacsError::Syntax(
                    lineno + 1,
                    "clause before header".into(),
                ));
            }
            for tok in t.split_whitespace() {
                let x: i32 = tok
                    .parse()
                    .map_err(|_| DimacsError::Syntax(lineno + 1, format!("bad literal {tok:?}")))?;
                if x == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Lit::new(x));
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let (num_vars, count) = header.ok_or(DimacsError::MissingHeader)?;
        if count != clauses.len() {
            return Err(DimacsError::ClauseCount {
                declared: count,
                found: clauses.len(),
            });
        }
        if let Some(l) = clauses.iter().flatten().find(|l| l.var() > num_vars) {
            return Err(DimacsError::VariableOutOfRange(l.to_dimacs()));
        }
        Ok(Cnf { num_vars, clauses })
    }

    pub fn parse_dimacs(s: &str) -> Result<Cnf, DimacsError> {
        Self::read_dimacs(s.as_bytes())
    }
}

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCount { declared: usize, found: usize },
    #[error("literal {0} exceeds the declared variable count")]
    VariableOutOfRange(i32),
}
