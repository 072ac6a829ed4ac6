//! DRAT proofs: storage, the text and binary formats, forward checking,
//! and backward checking with proof trimming and unsatisfiable-core
//! extraction.
//!
//! Backward checking first replays the proof without verification until
//! unit propagation at the root reaches a conflict. It then walks the proof
//! in reverse, verifying only lemmas that were used ("marked") by the
//! conflict analysis of a later verified step. Propagation during the
//! backward walk prefers marked clauses, which keeps cores small.

use std::collections::HashMap;
use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::cnf::{Cnf, Lit};
use crate::encode::{pinned_anchors, ClauseTag, ColoringCnf};
use crate::udgraph::{UnitDistanceGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Add,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step<'a> {
    pub kind: StepKind,
    pub clause: &'a [Lit],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RawStep {
    kind: StepKind,
    start: usize,
    len: u32,
}

/// A sequence of clause additions and deletions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DratProof {
    lits: Vec<Lit>,
    steps: Vec<RawStep>,
}

/// Receives proof steps as a solver produces them.
pub trait ProofSink {
    fn add(&mut self, clause: &[Lit]);
    fn delete(&mut self, clause: &[Lit]);
}

impl ProofSink for DratProof {
    fn add(&mut self, clause: &[Lit]) {
        self.push(StepKind::Add, clause);
    }
    fn delete(&mut self, clause: &[Lit]) {
        self.push(StepKind::Delete, clause);
    }
}

/// Streams text DRAT to a writer. The first I/O error is kept and later
/// steps are dropped.
pub struct TextProofWriter<W: Write> {
    out: io::BufWriter<W>,
    error: Option<io::Error>,
    steps: u64,
    line: String,
}

impl<W: Write> TextProofWriter<W> {
    pub fn new(w: W) -> Self {
        TextProofWriter {
            out: io::BufWriter::with_capacity(1 << 16, w),
            error: None,
            steps: 0,
            line: String::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn write(&mut self, prefix: &str, clause: &[Lit]) {
        if self.error.is_some() {
            return;
        }
        self.line.clear();
        self.line.push_str(prefix);
        for l in clause {
            self.line.push_str(&l.to_dimacs().to_string());
            self.line.push(' ');
        }
        self.line.push_str("0\n");
        if let Err(e) = self.out.write_all(self.line.as_bytes()) {
            self.error = Some(e);
        }
        self.steps += 1;
    }

    /// Flushes and returns the inner writer, or the first error.
    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

impl<W: Write> ProofSink for TextProofWriter<W> {
    fn add(&mut self, clause: &[Lit]) {
        self.write("", clause);
    }
    fn delete(&mut self, clause: &[Lit]) {
        self.write("d ", clause);
    }
}

#[derive(Debug, Error)]
pub enum DratError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("proof line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("binary proof byte {offset}: {reason}")]
    Binary { offset: usize, reason: String },
}

impl DratProof {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, kind: StepKind, clause: &[Lit]) {
        self.steps.push(RawStep {
            kind,
            start: self.lits.len(),
            len: clause.len() as u32,
        });
        self.lits.extend_from_slice(clause);
    }

    pub fn push_add(&mut self, clause: &[Lit]) {
        self.push(StepKind::Add, clause);
    }

    pub fn push_delete(&mut self, clause: &[Lit]) {
        self.push(StepKind::Delete, clause);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, i: usize) -> Step<'_> {
        let s = self.steps[i];
        Step {
            kind: s.kind,
            clause: &self.lits[s.start..s.start + s.len as usize],
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = Step<'_>> + '_ {
        (0..self.steps.len()).map(|i| self.step(i))
    }

    pub fn num_additions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.kind == StepKind::Add)
            .count()
    }

    pub fn num_deletions(&self) -> usize {
        self.steps.len() - self.num_additions()
    }

    pub fn contains_empty_clause(&self) -> bool {
        self.steps
            .iter()
            .any(|s| s.kind == StepKind::Add && s.len == 0)
    }

    fn max_var(&self) -> u32 {
        self.lits.iter().map(|l| l.var()).max().unwrap_or(0)
    }

    pub fn write_text<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = TextProofWriter::new(w);
        for s in self.steps() {
            match s.kind {
                StepKind::Add => out.add(s.clause),
                StepKind::Delete => out.delete(s.clause),
            }
        }
        out.finish().map(|_| ())
    }

    pub fn to_text(&self) -> String {
        let mut v = Vec::new();
        self.write_text(&mut v)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(v).expect("DRAT text is ASCII")
    }

    pub fn write_binary<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(w);
        for s in self.steps() {
            out.write_all(&[if s.kind == StepKind::Add { b'a' } else { b'd' }])?;
            for l in s.clause {
                let mut u = 2 * l.var() + l.is_negative() as u32;
                while u > 127 {
                    out.write_all(&[(u & 127) as u8 | 128])?;
                    u >>= 7;
                }
                out.write_all(&[u as u8])?;
            }
            out.write_all(&[0])?;
        }
        out.flush()
    }

    /// Reads text DRAT: one step per clause, `d` marks deletions.
    pub fn read_text<R: BufRead>(r: R) -> Result<DratProof, DratError> {
        let mut p = DratProof::new();
        let mut current = Vec::new();
        let mut deleting = false;
        let mut open = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') {
                continue;
            }
            for tok in t.split_whitespace() {
                if tok == "d" {
                    if open {
                        return Err(DratError::Syntax {
                            line: lineno + 1,
                            reason: "deletion marker inside a clause".into(),
                        });
                    }
                    deleting = true;
                    open = true;
                    continue;
                }
                let x: i32 = tok.parse().map_err(|_| DratError::Syntax {
                    line: lineno + 1,
                    reason: format!("bad literal {tok:?}"),
                })?;
                if x == 0 {
                    p.push(
                        if deleting {
                            StepKind::Delete
                        } else {
                            StepKind::Add
                        },
                        &current,
                    );
                    current.clear();
                    deleting = false;
                    open = false;
                } else {
                    current.push(Lit::new(x));
                    open = true;
                }
            }
        }
        if open {
            return Err(DratError::Syntax {
                line: 0,
                reason: "last clause is not terminated by 0".into(),
            });
        }
        Ok(p)
    }

    pub fn parse_text(s: &str) -> Result<DratProof, DratError> {
        Self::read_text(s.as_bytes())
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<DratProof, DratError> {
        let mut p = DratProof::new();
        let mut i = 0;
        let mut current = Vec::new();
        while i < bytes.len() {
            let kind = match bytes[i] {
                b'a' => StepKind::Add,
                b'd' => StepKind::Delete,
                b => {
                    return Err(DratError::Binary {
                        offset: i,
                        reason: format!("expected step marker, found {b:#04x}"),
                    })
                }
            };
            i += 1;
            current.clear();
            loop {
                let mut u: u64 = 0;
                let mut shift = 0;
                loop {
                    let b = *bytes.get(i).ok_or(DratError::Binary {
                        offset: i,
                        reason: "truncated literal".into(),
                    })?;
                    i += 1;
                    u |= ((b & 127) as u64) << shift;
                    shift += 7;
                    if b & 128 == 0 {
                        break;
                    }
                    if shift > 35 {
                        return Err(DratError::Binary {
                            offset: i,
                            reason: "literal too large".into(),
                        });
                    }
                }
                if u == 0 {
                    break;
                }
                let v = (u >> 1) as i32;
                if v == 0 {
                    return Err(DratError::Binary {
                        offset: i,
                        reason: "variable 0".into(),
                    });
                }
                current.push(Lit::new(if u & 1 == 1 { -v } else { v }));
            }
            p.push(kind, &current);
        }
        Ok(p)
    }

    /// Detects binary DRAT by its leading marker or by non-text bytes.
    pub fn parse_auto(bytes: &[u8]) -> Result<DratProof, DratError> {
        let binary = bytes.first() == Some(&b'a')
            || bytes
                .iter()
                .take(64)
                .any(|&b| !(b.is_ascii_graphic() || b.is_ascii_whitespace()));
        if binary {
            Self::parse_binary(bytes)
        } else {
            Self::read_text(bytes)
        }
    }

    pub fn read_path(path: &std::path::Path) -> Result<DratProof, DratError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::parse_auto(&bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The added clause is neither RUP nor RAT on its first literal.
    NotRedundant,
    /// All steps passed but the empty clause was never added.
    NoEmptyClause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject { step: usize, reason: RejectReason },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        *self == Verdict::Accept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Redundancy {
    Rup,
    Rat,
}

#[derive(Debug, Error)]
pub enum TrimError {
    #[error("proof step {step} is not redundant")]
    InvalidProof { step: usize },
    #[error("the proof never produces a conflict")]
    NoConflict,
    #[error("trimmed proof failed re-checking: {0:?}")]
    Recheck(Verdict),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrimStats {
    /// Lemmas verified in the backward pass.
    pub checked_steps: usize,
    /// Lemmas never marked and therefore not verified.
    pub skipped_steps: usize,
    /// Deletions of root-level reasons, ignored as in standard checkers.
    pub ignored_deletions: usize,
    /// Deletions naming a clause that is not present.
    pub unmatched_deletions: usize,
    pub rat_steps: usize,
    /// Proof steps after the first root-level conflict, never examined.
    pub tail_steps: usize,
}

#[derive(Debug, Clone)]
pub struct CoreReport {
    /// Indices into the original clause list, ascending.
    pub core_clause_indices: Vec<usize>,
    pub trimmed_proof: DratProof,
    pub stats: TrimStats,
}

impl CoreReport {
    pub fn core_cnf(&self, f: &Cnf) -> Cnf {
        Cnf {
            num_vars: f.num_vars,
            clauses: self
                .core_clause_indices
                .iter()
                .map(|&i| f.clauses[i].clone())
                .collect(),
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.core_clause_indices.binary_search(&index).is_ok()
    }

    /// Writes one `index tag` line per core clause.
    pub fn write_core_map<W: Write>(&self, tags: &[ClauseTag], mut w: W) -> io::Result<()> {
        for &i in &self.core_clause_indices {
            match tags.get(i) {
                Some(t) => writeln!(w, "{i} {t}")?,
                None => writeln!(w, "{i}")?,
            }
        }
        Ok(())
    }
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;
const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    All,
    Core,
    NonCore,
}

enum Visit {
    Done,
    Progress,
    Conflict(u32),
}

fn lit_code(l: Lit) -> u32 {
    l.code() as u32
}

fn clause_hash(lits: &[u32]) -> u64 {
    let (mut s, mut x, mut p) = (0u64, 0u64, 1u64);
    for &l in lits {
        let mut z = (l as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        s = s.wrapping_add(z);
        x ^= z;
        p = p.wrapping_mul(z | 1);
    }
    s ^ x.rotate_left(21) ^ p.rotate_left(42)
}

/// Clause database with root-level propagation shared by both checking
/// directions.
struct Db {
    lits: Vec<u32>,
    start: Vec<usize>,
    len: Vec<u32>,
    pivot: Vec<u32>,
    taut: Vec<bool>,
    active: Vec<bool>,
    marked: Vec<bool>,
    watches: Vec<Vec<(u32, u32)>>,
    units: Vec<u32>,
    vals: Vec<i8>,
    reason: Vec<u32>,
    tpos: Vec<u32>,
    trail: Vec<u32>,
    head_core: usize,
    head_all: usize,
    cone: Vec<bool>,
    seen: Vec<bool>,
    top_len: usize,
    core_first: bool,
    /// A root-level conflict, once found.
    conflict: Option<u32>,
    by_hash: HashMap<u64, Vec<u32>>,
}

impl Db {
    fn new(num_vars: u32) -> Self {
        let n = num_vars as usize;
        Db {
            lits: Vec::new(),
            start: Vec::new(),
            len: Vec::new(),
            pivot: Vec::new(),
            taut: Vec::new(),
            active: Vec::new(),
            marked: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            units: Vec::new(),
            vals: vec![UNDEF; 2 * n],
            reason: vec![NONE; n],
            tpos: vec![0; n],
            trail: Vec::new(),
            head_core: 0,
            head_all: 0,
            cone: vec![false; n],
            seen: vec![false; n],
            top_len: 0,
            core_first: false,
            conflict: None,
            by_hash: HashMap::new(),
        }
    }

    /// Stores a clause (duplicates removed, order kept) without attaching.
    fn store(&mut self, clause: &[Lit]) -> u32 {
        let id = self.start.len() as u32;
        let s = self.lits.len();
        let mut taut = false;
        for &l in clause {
            let c = lit_code(l);
            let existing = &self.lits[s..];
            if existing.contains(&c) {
                continue;
            }
            if existing.contains(&(c ^ 1)) {
                taut = true;
            }
            self.lits.push(c);
        }
        self.start.push(s);
        self.len.push((self.lits.len() - s) as u32);
        self.pivot
            .push(clause.first().map(|&l| lit_code(l)).unwrap_or(NONE));
        self.taut.push(taut);
        self.active.push(false);
        self.marked.push(false);
        id
    }

    fn clause(&self, id: u32) -> &[u32] {
        let s = self.start[id as usize];
        &self.lits[s..s + self.len[id as usize] as usize]
    }

    /// Literals with the pivot first, as they appeared in the input.
    fn clause_lits(&self, id: u32) -> Vec<Lit> {
        let c = self.clause(id);
        let p = self.pivot[id as usize];
        let mut out: Vec<Lit> = Vec::with_capacity(c.len());
        if p != NONE {
            out.push(Lit::from_code(p as usize));
        }
        out.extend(
            c.iter()
                .filter(|&&l| l != p)
                .map(|&l| Lit::from_code(l as usize)),
        );
        out
    }

    fn hash_of(&self, id: u32) -> u64 {
        clause_hash(self.clause(id))
    }

    fn index(&mut self, id: u32) {
        let h = self.hash_of(id);
        self.by_hash.entry(h).or_default().push(id);
    }

    fn unindex(&mut self, id: u32) {
        let h = self.hash_of(id);
        if let Some(v) = self.by_hash.get_mut(&h) {
            if let Some(p) = v.iter().rposition(|&x| x == id) {
                v.remove(p);
            }
        }
    }

    /// Most recent active clause with the same literal set.
    fn find(&self, clause: &[Lit]) -> Option<u32> {
        let mut key: Vec<u32> = clause.iter().map(|&l| lit_code(l)).collect();
        key.sort_unstable();
        key.dedup();
        let ids = self.by_hash.get(&clause_hash(&key))?;
        ids.iter().rev().copied().find(|&id| {
            if !self.active[id as usize] || self.len[id as usize] as usize != key.len() {
                return false;
            }
            let mut c = self.clause(id).to_vec();
            c.sort_unstable();
            c == key
        })
    }

    #[inline]
    fn enqueue(&mut self, lit: u32, reason: u32) {
        self.vals[lit as usize] = TRUE;
        self.vals[(lit ^ 1) as usize] = FALSE;
        self.reason[(lit >> 1) as usize] = reason;
        self.tpos[(lit >> 1) as usize] = self.trail.len() as u32;
        self.trail.push(lit);
    }

    fn backtrack(&mut self, to: usize) {
        for i in to..self.trail.len() {
            let l = self.trail[i];
            let v = (l >> 1) as usize;
            self.vals[l as usize] = UNDEF;
            self.vals[(l ^ 1) as usize] = UNDEF;
            self.reason[v] = NONE;
            self.cone[v] = false;
        }
        self.trail.truncate(to);
        self.head_core = self.head_core.min(to);
        self.head_all = self.head_all.min(to);
    }

    /// Activates a clause at the root and propagates its consequences.
    fn attach(&mut self, id: u32) {
        let i = id as usize;
        self.active[i] = true;
        if self.taut[i] {
            return;
        }
        let n = self.len[i] as usize;
        if n == 0 {
            self.conflict.get_or_insert(id);
            return;
        }
        if n == 1 {
            self.units.push(id);
            let l = self.clause(id)[0];
            match self.vals[l as usize] {
                UNDEF => self.enqueue(l, id),
                FALSE => {
                    self.conflict.get_or_insert(id);
                }
                _ => {}
            }
            return;
        }
        // Watch non-false literals; fall back to the latest false one.
        let s = self.start[i];
        let key = |db: &Db, l: u32| -> (u8, u32) {
            match db.vals[l as usize] {
                FALSE => (1, u32::MAX - db.tpos[(l >> 1) as usize]),
                _ => (0, 0),
            }
        };
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by_key(|&k| key(self, self.lits[s + k]));
        let (first, second) = (idx[0], idx[1]);
        self.lits.swap(s, s + first);
        let second = if second == 0 { first } else { second };
        self.lits.swap(s + 1, s + second);
        let (a, b) = (self.lits[s], self.lits[s + 1]);
        self.watches[a as usize].push((id, b));
        self.watches[b as usize].push((id, a));
        let (va, vb) = (self.vals[a as usize], self.vals[b as usize]);
        if va == FALSE {
            self.conflict.get_or_insert(id);
        } else if vb == FALSE && va == UNDEF {
            self.enqueue(a, id);
        }
    }

    fn detach(&mut self, id: u32) {
        let i = id as usize;
        self.active[i] = false;
        if self.taut[i] || self.len[i] < 2 {
            return;
        }
        let s = self.start[i];
        for w in [self.lits[s], self.lits[s + 1]] {
            let ws = &mut self.watches[w as usize];
            if let Some(p) = ws.iter().position(|&(c, _)| c == id) {
                ws.swap_remove(p);
            }
        }
    }

    fn is_reason(&self, id: u32) -> bool {
        if !self.active[id as usize] || self.taut[id as usize] {
            return false;
        }
        self.clause(id)
            .iter()
            .any(|&l| self.vals[l as usize] == TRUE && self.reason[(l >> 1) as usize] == id)
    }

    fn visit(&mut self, f: u32, mode: Mode) -> Visit {
        let mut ws = std::mem::take(&mut self.watches[f as usize]);
        let n = ws.len();
        let (mut i, mut j) = (0, 0);
        let mut result = Visit::Done;
        'outer: while i < n {
            let (id, blocker) = ws[i];
            i += 1;
            let relevant = match mode {
                Mode::All => true,
                Mode::Core => self.marked[id as usize],
                Mode::NonCore => !self.marked[id as usize],
            };
            if !relevant || self.vals[blocker as usize] == TRUE {
                ws[j] = (id, blocker);
                j += 1;
                continue;
            }
            let s = self.start[id as usize];
            let len = self.len[id as usize] as usize;
            if self.lits[s] == f {
                self.lits.swap(s, s + 1);
            }
            let first = self.lits[s];
            if first != blocker && self.vals[first as usize] == TRUE {
                ws[j] = (id, first);
                j += 1;
                continue;
            }
            for k in 2..len {
                let l = self.lits[s + k];
                if self.vals[l as usize] != FALSE {
                    self.lits[s + 1] = l;
                    self.lits[s + k] = f;
                    self.watches[l as usize].push((id, first));
                    continue 'outer;
                }
            }
            ws[j] = (id, first);
            j += 1;
            if self.vals[first as usize] == FALSE {
                result = Visit::Conflict(id);
                break;
            }
            self.enqueue(first, id);
            if mode == Mode::NonCore {
                result = Visit::Progress;
                break;
            }
        }
        while i < n {
            ws[j] = ws[i];
            j += 1;
            i += 1;
        }
        ws.truncate(j);
        self.watches[f as usize] = ws;
        result
    }

    fn propagate(&mut self) -> Option<u32> {
        if !self.core_first {
            while self.head_all < self.trail.len() {
                let f = self.trail[self.head_all] ^ 1;
                self.head_all += 1;
                if let Visit::Conflict(c) = self.visit(f, Mode::All) {
                    return Some(c);
                }
            }
            self.head_core = self.head_all;
            return None;
        }
        loop {
            while self.head_core < self.trail.len() {
                let f = self.trail[self.head_core] ^ 1;
                self.head_core += 1;
                if let Visit::Conflict(c) = self.visit(f, Mode::Core) {
                    return Some(c);
                }
            }
            let mut progressed = false;
            while self.head_all < self.trail.len() {
                let f = self.trail[self.head_all] ^ 1;
                match self.visit(f, Mode::NonCore) {
                    Visit::Conflict(c) => return Some(c),
                    Visit::Progress => {
                        progressed = true;
                        break;
                    }
                    Visit::Done => self.head_all += 1,
                }
            }
            if !progressed {
                return None;
            }
        }
    }

    /// Marks every clause in the implication cone of a conflict. Root-level
    /// literals whose cone is already marked are skipped.
    fn analyze(&mut self, confl: Option<u32>, start_var: Option<u32>) {
        let mut pending = 0usize;
        if let Some(c) = confl {
            self.marked[c as usize] = true;
            let s = self.start[c as usize];
            for k in 0..self.len[c as usize] as usize {
                let v = (self.lits[s + k] >> 1) as usize;
                if !self.seen[v] && !self.cone[v] {
                    self.seen[v] = true;
                    pending += 1;
                }
            }
        }
        if let Some(v) = start_var {
            let v = v as usize;
            if !self.seen[v] && !self.cone[v] {
                self.seen[v] = true;
                pending += 1;
            }
        }
        let mut i = self.trail.len();
        while pending > 0 {
            i -= 1;
            let v = (self.trail[i] >> 1) as usize;
            if !self.seen[v] {
                continue;
            }
            self.seen[v] = false;
            pending -= 1;
            if i < self.top_len {
                self.cone[v] = true;
            }
            let r = self.reason[v];
            if r == NONE {
                continue;
            }
            self.marked[r as usize] = true;
            let s = self.start[r as usize];
            for k in 0..self.len[r as usize] as usize {
                let u = (self.lits[s + k] >> 1) as usize;
                if u != v && !self.seen[u] && !self.cone[u] {
                    self.seen[u] = true;
                    pending += 1;
                }
            }
        }
    }

    /// Reverse unit propagation test; on success marks the antecedents when
    /// `mark` is set.
    fn rup(&mut self, clause: &[u32], mark: bool) -> bool {
        if let Some(c) = self.conflict {
            if mark {
                self.top_len = self.trail.len();
                self.analyze(Some(c), None);
            }
            return true;
        }
        let saved = self.trail.len();
        self.top_len = saved;
        let mut ok = false;
        for &l in clause {
            match self.vals[l as usize] {
                TRUE => {
                    if mark {
                        self.analyze(None, Some(l >> 1));
                    }
                    ok = true;
                    break;
                }
                FALSE => {}
                _ => self.enqueue(l ^ 1, NONE),
            }
        }
        if !ok {
            if let Some(c) = self.propagate() {
                if mark {
                    self.analyze(Some(c), None);
                }
                ok = true;
            }
        }
        self.backtrack(saved);
        ok
    }

    /// RAT on the stored pivot: every resolvent with a clause containing the
    /// negated pivot must be RUP.
    fn rat(&mut self, id: u32, mark: bool) -> bool {
        let p = self.pivot[id as usize];
        if p == NONE {
            return false;
        }
        let lemma = self.clause(id).to_vec();
        let np = p ^ 1;
        let candidates: Vec<u32> = (0..self.start.len() as u32)
            .filter(|&c| {
                c != id
                    && self.active[c as usize]
                    && !self.taut[c as usize]
                    && self.clause(c).contains(&np)
            })
            .collect();
        for c in candidates {
            let mut res = lemma.clone();
            let mut taut = false;
            for &l in self.clause(c) {
                if l == np {
                    continue;
                }
                if lemma.contains(&(l ^ 1)) {
                    taut = true;
                    break;
                }
                if !res.contains(&l) {
                    res.push(l);
                }
            }
            if taut {
                continue;
            }
            if !self.rup(&res, mark) {
                return false;
            }
        }
        true
    }

    /// Clears the root assignment and rebuilds it from the active clauses.
    fn recompute(&mut self) -> Option<u32> {
        self.backtrack(0);
        self.conflict = None;
        let units = std::mem::take(&mut self.units);
        let mut kept = Vec::with_capacity(units.len());
        for id in units {
            if !self.active[id as usize] {
                continue;
            }
            kept.push(id);
            let l = self.clause(id)[0];
            match self.vals[l as usize] {
                UNDEF => self.enqueue(l, id),
                FALSE => {
                    self.conflict.get_or_insert(id);
                }
                _ => {}
            }
        }
        self.units = kept;
        if self.conflict.is_some() {
            return self.conflict;
        }
        let c = self.propagate();
        if let Some(c) = c {
            self.conflict = Some(c);
        }
        c
    }
}

fn load(f: &Cnf, p: &DratProof) -> Db {
    let nv = f.num_vars.max(p.max_var()).max(
        f.clauses
            .iter()
            .flatten()
            .map(|l| l.var())
            .max()
            .unwrap_or(0),
    );
    let mut db = Db::new(nv);
    for c in &f.clauses {
        db.store(c);
    }
    db
}

/// Classifies `clause` against `f`, or `None` if it is not redundant.
pub fn redundancy(f: &Cnf, clause: &[Lit]) -> Option<Redundancy> {
    let mut p = DratProof::new();
    p.push_add(clause);
    let mut db = load(f, &p);
    for i in 0..f.clauses.len() as u32 {
        db.attach(i);
        db.index(i);
    }
    if db.conflict.is_none() {
        if let Some(c) = db.propagate() {
            db.conflict = Some(c);
        }
    }
    let id = db.store(clause);
    let lits = db.clause(id).to_vec();
    if db.rup(&lits, false) {
        Some(Redundancy::Rup)
    } else if db.rat(id, false) {
        Some(Redundancy::Rat)
    } else {
        None
    }
}

/// Forward check: every addition must be RUP or RAT on its first literal,
/// and the empty clause must be added.
pub fn check(f: &Cnf, p: &DratProof) -> Verdict {
    let mut db = load(f, p);
    for i in 0..f.clauses.len() as u32 {
        db.attach(i);
        db.index(i);
    }
    if db.conflict.is_none() {
        if let Some(c) = db.propagate() {
            db.conflict = Some(c);
        }
    }
    for (i, step) in p.steps().enumerate() {
        match step.kind {
            StepKind::Add => {
                let id = db.store(step.clause);
                if db.conflict.is_none() {
                    let lits = db.clause(id).to_vec();
                    if !db.rup(&lits, false) && !db.rat(id, false) {
                        return Verdict::Reject {
                            step: i,
                            reason: RejectReason::NotRedundant,
                        };
                    }
                }
                if step.clause.is_empty() {
                    return Verdict::Accept;
                }
                db.attach(id);
                db.index(id);
                if db.conflict.is_none() {
                    if let Some(c) = db.propagate() {
                        db.conflict = Some(c);
                    }
                }
            }
            StepKind::Delete => {
                if let Some(id) = db.find(step.clause) {
                    if !db.is_reason(id) {
                        db.detach(id);
                        db.unindex(id);
                    }
                }
            }
        }
    }
    Verdict::Reject {
        step: p.len(),
        reason: RejectReason::NoEmptyClause,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    /// Addition of the clause with this id.
    Added(u32),
    /// Deletion applied to this clause.
    Deleted(u32),
    Ignored,
}

/// Backward check with trimming. Returns the clauses of `f` used by the
/// refutation and the proof restricted to used lemmas. The result is
/// re-checked forward against the core before being returned.
pub fn trim(f: &Cnf, p: &DratProof) -> Result<CoreReport, TrimError> {
    let rep = trim_unchecked(f, p)?;
    let verdict = check(&rep.core_cnf(f), &rep.trimmed_proof);
    if !verdict.is_accept() {
        return Err(TrimError::Recheck(verdict));
    }
    Ok(rep)
}

/// [`trim`] without the final forward re-check.
pub fn trim_unchecked(f: &Cnf, p: &DratProof) -> Result<CoreReport, TrimError> {
    let m = f.clauses.len();
    let mut db = load(f, p);
    let mut stats = TrimStats::default();
    for i in 0..m as u32 {
        db.attach(i);
        db.index(i);
    }
    if db.conflict.is_none() {
        if let Some(c) = db.propagate() {
            db.conflict = Some(c);
        }
    }

    // Forward replay without verification until the first root conflict.
    let mut fates: Vec<Fate> = Vec::with_capacity(p.len());
    let mut end = 0;
    if db.conflict.is_none() {
        for (i, step) in p.steps().enumerate() {
            end = i + 1;
            match step.kind {
                StepKind::Add => {
                    if step.clause.is_empty() {
                        // A conflict would already have been found.
                        return Err(TrimError::InvalidProof { step: i });
                    }
                    let id = db.store(step.clause);
                    fates.push(Fate::Added(id));
                    db.attach(id);
                    db.index(id);
                    if db.conflict.is_none() {
                        if let Some(c) = db.propagate() {
                            db.conflict = Some(c);
                        }
                    }
                    if db.conflict.is_some() {
                        break;
                    }
                }
                StepKind::Delete => match db.find(step.clause) {
                    Some(id) if db.is_reason(id) => {
                        stats.ignored_deletions += 1;
                        fates.push(Fate::Ignored);
                    }
                    Some(id) => {
                        db.detach(id);
                        db.unindex(id);
                        fates.push(Fate::Deleted(id));
                    }
                    None => {
                        stats.unmatched_deletions += 1;
                        fates.push(Fate::Ignored);
                    }
                },
            }
        }
        if db.conflict.is_none() {
            return Err(TrimError::NoConflict);
        }
    }
    stats.tail_steps = p.len() - end;
    db.by_hash = HashMap::new();

    db.core_first = true;
    db.top_len = db.trail.len();
    let confl = db.conflict.expect("conflict found above");
    db.analyze(Some(confl), None);

    for i in (0..fates.len()).rev() {
        match fates[i] {
            Fate::Ignored => {}
            Fate::Deleted(id) => {
                db.attach(id);
                if db.conflict.is_none() {
                    if let Some(c) = db.propagate() {
                        db.conflict = Some(c);
                    }
                }
                debug_assert!(db.conflict.is_none());
            }
            Fate::Added(id) => {
                if db.is_reason(id) {
                    db.detach(id);
                    db.recompute();
                } else {
                    db.detach(id);
                    if db.conflict == Some(id) {
                        db.conflict = None;
                    }
                    if db.conflict.is_some() {
                        db.recompute();
                    }
                }
                if db.conflict.is_some() {
                    // Root propagation without this lemma still conflicts,
                    // which the forward replay rules out.
                    return Err(TrimError::InvalidProof { step: i });
                }
                if !db.marked[id as usize] {
                    stats.skipped_steps += 1;
                    continue;
                }
                stats.checked_steps += 1;
                let lits = db.clause(id).to_vec();
                if !db.rup(&lits, true) {
                    if db.rat(id, true) {
                        stats.rat_steps += 1;
                    } else {
                        return Err(TrimError::InvalidProof { step: i });
                    }
                }
            }
        }
    }

    let core_clause_indices: Vec<usize> = (0..m).filter(|&i| db.marked[i]).collect();
    let mut trimmed = DratProof::new();
    for fate in &fates {
        match *fate {
            Fate::Added(id) if db.marked[id as usize] => trimmed.push_add(&db.clause_lits(id)),
            Fate::Deleted(id) if db.marked[id as usize] => trimmed.push_delete(&db.clause_lits(id)),
            _ => {}
        }
    }
    if !trimmed
        .steps
        .last()
        .is_some_and(|s| s.kind == StepKind::Add && s.len == 0)
    {
        trimmed.push_add(&[]);
    }
    Ok(CoreReport {
        core_clause_indices,
        trimmed_proof: trimmed,
        stats,
    })
}

/// Keeps the vertices whose at-least-one-color clause is in the core, plus
/// any symmetry-breaking anchors, and restores all unit-distance edges among
/// them.
pub fn core_to_subgraph(
    g: &UnitDistanceGraph,
    f: &ColoringCnf,
    rep: &CoreReport,
) -> UnitDistanceGraph {
    let core = rep.core_clause_indices.iter().map(|&i| &f.tags[i]);
    g.induced(&core_vertices(
        g,
        core,
        f.tags.iter().any(|t| matches!(t, ClauseTag::Symmetry(..))),
    ))
}

/// Vertices whose ALO clause is among `core`, plus every pinned anchor of
/// `g` when the formula used symmetry breaking. Keeping all pinned anchors
/// makes the induced subgraph pin exactly the same anchors, so the core is
/// a subformula of the subgraph's encoding.
pub fn core_vertices<'a>(
    g: &UnitDistanceGraph,
    core: impl IntoIterator<Item = &'a ClauseTag>,
    symmetry_breaking: bool,
) -> Vec<VertexId> {
    let mut keep: Vec<VertexId> = core
        .into_iter()
        .filter_map(|t| match *t {
            ClauseTag::Alo(v) => Some(v),
            _ => None,
        })
        .collect();
    if symmetry_breaking {
        keep.extend(pinned_anchors(g).into_iter().map(|(v, _)| v));
    }
    keep.sort_unstable();
    keep.dedup();
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(lists: &[&[i32]]) -> Cnf {
        Cnf::from_dimacs_lists(lists)
    }

    fn proof(text: &str) -> DratProof {
        DratProof::parse_text(text).unwrap()
    }

    #[test]
    fn text_and_binary_round_trip() {
        let p = proof("1 -2 0\nd 3 0\n0\n");
        assert_eq!(p.len(), 3);
        assert_eq!(p.step(1).kind, StepKind::Delete);
        assert_eq!(p.to_text(), "1 -2 0\nd 3 0\n0\n");
        let mut bin = Vec::new();
        p.write_binary(&mut bin).unwrap();
        assert_eq!(bin[0], b'a');
        assert_eq!(DratProof::parse_auto(&bin).unwrap(), p);
        assert_eq!(DratProof::parse_auto(p.to_text().as_bytes()).unwrap(), p);
        let big = {
            let mut q = DratProof::new();
            q.push_add(&[Lit::new(-100_000), Lit::new(70)]);
            q
        };
        let mut bin = Vec::new();
        big.write_binary(&mut bin).unwrap();
        assert_eq!(DratProof::parse_binary(&bin).unwrap(), big);
    }

    #[test]
    fn text_errors() {
        assert!(DratProof::parse_text("1 2").is_err());
        assert!(DratProof::parse_text("1 x 0").is_err());
        assert!(DratProof::parse_text("1 d 0").is_err());
    }

    #[test]
    fn trivial_refutations() {
        assert_eq!(check(&cnf(&[&[1], &[-1]]), &proof("0\n")), Verdict::Accept);
        assert_eq!(
            check(&cnf(&[&[1], &[-1, 2], &[-2]]), &proof("0\n")),
            Verdict::Accept
        );
        assert_eq!(
            check(&cnf(&[&[1, 2]]), &proof("0\n")),
            Verdict::Reject {
                step: 0,
                reason: RejectReason::NotRedundant
            }
        );
        assert_eq!(
            check(&cnf(&[&[1], &[-1]]), &proof("")),
            Verdict::Reject {
                step: 0,
                reason: RejectReason::NoEmptyClause
            }
        );
    }

    #[test]
    fn rat_on_first_literal() {
        let f = cnf(&[&[-1, -2]]);
        assert_eq!(
            redundancy(&f, &[Lit::new(1), Lit::new(2)]),
            Some(Redundancy::Rat)
        );
        assert_eq!(
            redundancy(&f, &[Lit::new(-1), Lit::new(-2), Lit::new(3)]),
            Some(Redundancy::Rup)
        );
        let g = cnf(&[&[-1, 2]]);
        assert_eq!(redundancy(&g, &[Lit::new(1)]), None);
    }

    #[test]
    fn rat_lemma_inside_refutation() {
        // x1 is fresh in the formula, so (x1) is RAT; the rest follows.
        let f = cnf(&[&[2, 3], &[-2, 3], &[2, -3], &[-2, -3]]);
        let p = proof("1 0\n2 0\n0\n");
        assert_eq!(check(&f, &p), Verdict::Accept);
        let rep = trim(&f, &p).unwrap();
        assert_eq!(rep.core_clause_indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deletions_of_reasons_are_ignored() {
        let f = cnf(&[&[1], &[-1, 2], &[-2, -1]]);
        assert_eq!(check(&f, &proof("d -1 2 0\n0\n")), Verdict::Accept);
    }

    #[test]
    fn trim_drops_unused_lemma_and_clause() {
        let f = cnf(&[&[1], &[-1], &[2, 3]]);
        let rep = trim(&f, &proof("2 0\n0\n")).unwrap();
        assert_eq!(rep.core_clause_indices, vec![0, 1]);
        assert_eq!(rep.trimmed_proof.to_text(), "0\n");
    }

    #[test]
    fn trim_of_minimal_refutation_is_identity() {
        let f = cnf(&[&[1], &[-1]]);
        let rep = trim(&f, &proof("0\n")).unwrap();
        assert_eq!(rep.core_clause_indices, vec![0, 1]);
        assert_eq!(rep.trimmed_proof, proof("0\n"));
    }

    #[test]
    fn trim_rejects_bogus_lemma() {
        let sat = cnf(&[&[1, 2], &[-1, 2], &[1, -2]]);
        assert!(matches!(
            trim(&sat, &proof("-1 0\n0\n")),
            Err(TrimError::InvalidProof { step: 0 })
        ));
        assert!(matches!(
            trim(&sat, &proof("2 0\n0\n")),
            Err(TrimError::InvalidProof { step: 1 })
        ));
        let f = cnf(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        assert!(matches!(
            trim(&f, &proof("3 0\n")),
            Err(TrimError::NoConflict)
        ));
        assert!(trim(&f, &proof("2 0\n0\n")).is_ok());
    }

    #[test]
    fn trim_handles_deleted_then_needed() {
        // Lemma (2) is derived, then (1 2) and (-1 2) are deleted; the
        // refutation still goes through the lemma.
        let f = cnf(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]);
        let p = proof("2 0\nd 1 2 0\nd -1 2 0\n0\n");
        assert_eq!(check(&f, &p), Verdict::Accept);
        let rep = trim(&f, &p).unwrap();
        assert_eq!(rep.core_clause_indices, vec![0, 1, 2, 3]);
        assert!(rep.trimmed_proof.len() <= p.len());
    }

    #[test]
    fn writer_matches_in_memory_text() {
        let p = proof("1 -2 0\nd 1 -2 0\n0\n");
        let mut w = TextProofWriter::new(Vec::new());
        for s in p.steps() {
            match s.kind {
                StepKind::Add => w.add(s.clause),
                StepKind::Delete => w.delete(s.clause),
            }
        }
        assert_eq!(w.steps(), 3);
        assert_eq!(String::from_utf8(w.finish().unwrap()).unwrap(), p.to_text());
    }
}
