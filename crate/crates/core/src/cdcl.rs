//! Conflict-driven clause-learning SAT solver with DRAT proof output.
//!
//! Two-watched-literal propagation with blocking literals (binary clauses are
//! resolved from the watcher alone), first-UIP learning with recursive
//! minimization, VSIDS with phase saving, Luby or LBD-average restarts, and
//! learned-clause reduction ordered by LBD then activity. Every learned
//! clause is written to the proof before it is used and every removed clause
//! is written as a deletion, so the proof stream is checkable by
//! [`crate::drat`].

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Cnf, Lit};
use crate::drat::{DratProof, ProofSink};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RestartPolicy {
    /// Restart after `unit · luby(i)` conflicts.
    Luby {
        unit: u64,
    },
    /// Restart when the LBD average of the last `window` conflicts exceeds
    /// the global average by the factor `1/k`.
    Lbd {
        window: usize,
        k: f64,
    },
    Never,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Seeds random decisions (only used when `random_var_freq > 0`).
    pub seed: u64,
    pub restarts: RestartPolicy,
    pub var_decay: f64,
    pub clause_decay: f64,
    pub random_var_freq: f64,
    pub phase_saving: bool,
    /// Conflicts before the first learned-clause reduction.
    pub reduce_first: u64,
    /// Growth of the reduction interval after each reduction.
    pub reduce_inc: u64,
    /// Learned clauses with LBD at most this value are never reduced.
    pub keep_lbd: u32,
    pub max_conflicts: Option<u64>,
    pub max_time: Option<Duration>,
    pub emit_proof: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            restarts: RestartPolicy::Luby { unit: 100 },
            var_decay: 0.95,
            clause_decay: 0.999,
            random_var_freq: 0.0,
            phase_saving: true,
            reduce_first: 2000,
            reduce_inc: 300,
            keep_lbd: 2,
            max_conflicts: Some(10_000_000),
            max_time: None,
            emit_proof: true,
        }
    }
}

impl SolverConfig {
    /// Settings tuned for refutations: LBD restarts.
    pub fn for_refutation() -> Self {
        SolverConfig {
            restarts: RestartPolicy::Lbd { window: 50, k: 0.8 },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Sat,
    Unsat,
    /// The conflict or time budget ran out.
    Unknown,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub reductions: u64,
    pub learned_literals: u64,
    pub runtime: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub model: Option<Assignment>,
    pub proof: Option<DratProof>,
    pub stats: SolveStats,
}

/// Solves `cnf`, collecting the DRAT proof in memory when
/// `cfg.emit_proof` is set.
pub fn solve(cnf: &Cnf, cfg: &SolverConfig) -> SolveResult {
    let mut proof = DratProof::new();
    let mut solver = Solver::new(cfg.clone());
    let status = {
        let sink: Option<&mut dyn ProofSink> = if cfg.emit_proof {
            Some(&mut proof)
        } else {
            None
        };
        solver.add_cnf(cnf, sink);
        let sink: Option<&mut dyn ProofSink> = if cfg.emit_proof {
            Some(&mut proof)
        } else {
            None
        };
        solver.solve(sink)
    };
    let model = if status == SolveStatus::Sat {
        let m = solver.model();
        assert!(
            m.first_falsified(&cnf.clauses).is_none(),
            "internal error: model does not satisfy the input formula"
        );
        Some(m)
    } else {
        None
    };
    SolveResult {
        status,
        model,
        proof: (status == SolveStatus::Unsat && cfg.emit_proof).then_some(proof),
        stats: solver.stats.clone(),
    }
}

/// Solves while streaming the proof to `sink`.
pub fn solve_streaming(cnf: &Cnf, cfg: &SolverConfig, sink: &mut dyn ProofSink) -> SolveResult {
    let mut solver = Solver::new(cfg.clone());
    solver.add_cnf(cnf, Some(sink));
    let status = solver.solve(Some(sink));
    let model = (status == SolveStatus::Sat).then(|| solver.model());
    if let Some(m) = &model {
        assert!(m.first_falsified(&cnf.clauses).is_none());
    }
    SolveResult {
        status,
        model,
        proof: None,
        stats: solver.stats.clone(),
    }
}

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;
const NO_REASON: u32 = u32::MAX;

const HDR: usize = 4;
const FLAG_LEARNT: u32 = 1;
const FLAG_DELETED: u32 = 2;

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: u32,
    binary: bool,
}

/// Clause store: `[len, flags, lbd, activity bits, lits...]` per clause.
struct Arena {
    mem: Vec<u32>,
    wasted: usize,
}

impl Arena {
    fn alloc(&mut self, lits: &[u32], learnt: bool, lbd: u32) -> u32 {
        let cref = self.mem.len() as u32;
        self.mem.push(lits.len() as u32);
        self.mem.push(if learnt { FLAG_LEARNT } else { 0 });
        self.mem.push(lbd);
        self.mem.push(0f32.to_bits());
        self.mem.extend_from_slice(lits);
        cref
    }
    #[inline]
    fn len(&self, c: u32) -> usize {
        self.mem[c as usize] as usize
    }
    #[inline]
    fn lits(&self, c: u32) -> &[u32] {
        let s = c as usize + HDR;
        &self.mem[s..s + self.len(c)]
    }
    fn learnt(&self, c: u32) -> bool {
        self.mem[c as usize + 1] & FLAG_LEARNT != 0
    }
    fn deleted(&self, c: u32) -> bool {
        self.mem[c as usize + 1] & FLAG_DELETED != 0
    }
    fn set_deleted(&mut self, c: u32) {
        self.mem[c as usize + 1] |= FLAG_DELETED;
        self.wasted += HDR + self.len(c);
    }
    fn lbd(&self, c: u32) -> u32 {
        self.mem[c as usize + 2]
    }
    fn set_lbd(&mut self, c: u32, lbd: u32) {
        self.mem[c as usize + 2] = lbd;
    }
    fn activity(&self, c: u32) -> f32 {
        f32::from_bits(self.mem[c as usize + 3])
    }
    fn set_activity(&mut self, c: u32, a: f32) {
        self.mem[c as usize + 3] = a.to_bits();
    }
}

/// Max-heap of variables keyed by activity.
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<i32>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            pos: vec![-1; n],
        }
    }
    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] >= 0
    }
    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i] as usize] = i as i32;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }
    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i as i32;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as i32;
    }
    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = i as i32;
        self.up(i, act);
    }
    fn increased(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            let i = self.pos[v as usize] as usize;
            self.up(i, act);
        }
    }
    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().expect("nonempty");
        self.pos[top as usize] = -1;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0i32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

/// Exponential moving average used for LBD-based restarts.
struct Window {
    buf: Vec<u32>,
    next: usize,
    sum: u64,
}

impl Window {
    fn new(n: usize) -> Self {
        Window {
            buf: Vec::with_capacity(n),
            next: 0,
            sum: 0,
        }
    }
    fn push(&mut self, x: u32, cap: usize) {
        if self.buf.len() < cap {
            self.buf.push(x);
        } else {
            self.sum -= self.buf[self.next] as u64;
            self.buf[self.next] = x;
            self.next = (self.next + 1) % cap;
        }
        self.sum += x as u64;
    }
    fn full(&self, cap: usize) -> bool {
        self.buf.len() == cap
    }
    fn avg(&self) -> f64 {
        self.sum as f64 / self.buf.len().max(1) as f64
    }
    fn clear(&mut self) {
        self.buf.clear();
        self.next = 0;
        self.sum = 0;
    }
}

/// A CDCL solver instance. Clauses may be added between calls to
/// [`Solver::solve`]; the solver backtracks to the root first.
pub struct Solver {
    cfg: SolverConfig,
    num_vars: usize,
    arena: Arena,
    originals: Vec<u32>,
    learnts: Vec<u32>,
    watches: Vec<Vec<Watcher>>,
    vals: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f32,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<u8>,
    analyze_stack: Vec<u32>,
    analyze_toclear: Vec<u32>,
    lbd_stamp: Vec<u64>,
    lbd_counter: u64,
    ok: bool,
    rng: ChaCha8Rng,
    simp_assigns: usize,
    next_reduce: u64,
    reduce_interval: u64,
    lbd_recent: Window,
    lbd_total: u64,
    pub stats: SolveStats,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let next_reduce = cfg.reduce_first;
        Solver {
            num_vars: 0,
            arena: Arena {
                mem: Vec::new(),
                wasted: 0,
            },
            originals: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            vals: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::new(0),
            polarity: Vec::new(),
            seen: Vec::new(),
            analyze_stack: Vec::new(),
            analyze_toclear: Vec::new(),
            lbd_stamp: Vec::new(),
            lbd_counter: 0,
            ok: true,
            rng,
            simp_assigns: usize::MAX,
            next_reduce,
            reduce_interval: cfg.reduce_first,
            lbd_recent: Window::new(64),
            lbd_total: 0,
            stats: SolveStats::default(),
            cfg,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn ensure_vars(&mut self, n: usize) {
        if n <= self.num_vars {
            return;
        }
        let old = self.num_vars;
        self.num_vars = n;
        self.watches.resize_with(2 * n, Vec::new);
        self.vals.resize(2 * n, UNDEF);
        self.level.resize(n, 0);
        self.reason.resize(n, NO_REASON);
        self.activity.resize(n, 0.0);
        self.polarity.resize(n, false);
        self.seen.resize(n, 0);
        self.lbd_stamp.resize(n + 1, 0);
        let mut heap = VarHeap::new(n);
        std::mem::swap(&mut heap.heap, &mut self.heap.heap);
        heap.pos[..old].copy_from_slice(&self.heap.pos[..old]);
        self.heap = heap;
        for v in old..n {
            self.heap.insert(v as u32, &self.activity);
        }
    }

    /// Adds every clause of `cnf`. Variables are ranked for the first
    /// decisions by their first occurrence in the clause list.
    pub fn add_cnf(&mut self, cnf: &Cnf, mut sink: Option<&mut dyn ProofSink>) {
        let fresh = self.num_vars == 0;
        self.ensure_vars(cnf.num_vars as usize);
        if fresh && cnf.num_vars > 0 {
            let n = cnf.num_vars as usize;
            let mut rank = vec![usize::MAX; n];
            let mut next = 0;
            for c in &cnf.clauses {
                for l in c {
                    let v = l.var() as usize - 1;
                    if rank[v] == usize::MAX {
                        rank[v] = next;
                        next += 1;
                    }
                }
            }
            for v in 0..n {
                let r = if rank[v] == usize::MAX { n } else { rank[v] };
                self.activity[v] = (n - r) as f64 * 1e-12;
            }
            self.heap = VarHeap::new(n);
            for v in 0..n {
                self.heap.insert(v as u32, &self.activity);
            }
        }
        for c in &cnf.clauses {
            let s = sink.as_mut().map(|s| &mut **s as &mut dyn ProofSink);
            self.add_clause(c, s);
        }
    }

    /// Adds an input clause. Returns false once the formula is known UNSAT.
    pub fn add_clause(&mut self, clause: &[Lit], sink: Option<&mut dyn ProofSink>) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let max_var = clause.iter().map(|l| l.var() as usize).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut lits: Vec<u32> = clause.iter().map(|l| l.code() as u32).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return true;
        }
        if lits.iter().any(|&l| self.vals[l as usize] == TRUE) {
            return true;
        }
        // Non-false literals first so that they get watched.
        lits.sort_by_key(|&l| (self.vals[l as usize] == FALSE) as u8);
        let free = lits
            .iter()
            .filter(|&&l| self.vals[l as usize] != FALSE)
            .count();
        if free == 0 {
            if let Some(s) = sink {
                s.add(&[]);
            }
            self.ok = false;
            return false;
        }
        if lits.len() == 1 {
            self.enqueue(lits[0], NO_REASON);
        } else {
            let cref = self.arena.alloc(&lits, false, 0);
            self.attach(cref);
            self.originals.push(cref);
            if free == 1 {
                self.enqueue(lits[0], cref);
            }
        }
        if self.propagate() != NO_REASON {
            if let Some(s) = sink {
                s.add(&[]);
            }
            self.ok = false;
            return false;
        }
        true
    }

    fn attach(&mut self, cref: u32) {
        let lits = self.arena.lits(cref);
        let (a, b) = (lits[0], lits[1]);
        let binary = lits.len() == 2;
        self.watches[a as usize].push(Watcher {
            cref,
            blocker: b,
            binary,
        });
        self.watches[b as usize].push(Watcher {
            cref,
            blocker: a,
            binary,
        });
    }

    #[inline]
    fn enqueue(&mut self, lit: u32, reason: u32) {
        let v = (lit >> 1) as usize;
        self.vals[lit as usize] = TRUE;
        self.vals[(lit ^ 1) as usize] = FALSE;
        self.level[v] = self.trail_lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Unit propagation; returns the conflicting clause or `NO_REASON`.
    fn propagate(&mut self) -> u32 {
        let mut conflict = NO_REASON;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let n = ws.len();
            'outer: while i < n {
                let w = ws[i];
                i += 1;
                let bv = self.vals[w.blocker as usize];
                if bv == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if w.binary {
                    ws[j] = w;
                    j += 1;
                    if bv == FALSE {
                        conflict = w.cref;
                        while i < n {
                            ws[j] = ws[i];
                            j += 1;
                            i += 1;
                        }
                        break;
                    }
                    self.enqueue(w.blocker, w.cref);
                    continue;
                }
                let cref = w.cref;
                let start = cref as usize + HDR;
                let len = self.arena.mem[cref as usize] as usize;
                if self.arena.mem[start] == false_lit {
                    self.arena.mem.swap(start, start + 1);
                }
                let first = self.arena.mem[start];
                let w2 = Watcher {
                    cref,
                    blocker: first,
                    binary: false,
                };
                if first != w.blocker && self.vals[first as usize] == TRUE {
                    ws[j] = w2;
                    j += 1;
                    continue;
                }
                for k in 2..len {
                    let l = self.arena.mem[start + k];
                    if self.vals[l as usize] != FALSE {
                        self.arena.mem[start + 1] = l;
                        self.arena.mem[start + k] = false_lit;
                        self.watches[l as usize].push(w2);
                        continue 'outer;
                    }
                }
                ws[j] = w2;
                j += 1;
                if self.vals[first as usize] == FALSE {
                    conflict = cref;
                    while i < n {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    break;
                }
                self.enqueue(first, cref);
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict != NO_REASON {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for i in (lim..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = (lit >> 1) as usize;
            self.vals[lit as usize] = UNDEF;
            self.vals[(lit ^ 1) as usize] = UNDEF;
            self.reason[v] = NO_REASON;
            if self.cfg.phase_saving {
                self.polarity[v] = lit & 1 == 0;
            }
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let a = self.arena.activity(cref) + self.cla_inc;
        self.arena.set_activity(cref, a);
        if a > 1e20 {
            for &c in &self.learnts {
                let x = self.arena.activity(c) * 1e-20;
                self.arena.set_activity(c, x);
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn compute_lbd(&mut self, lits: &[u32]) -> u32 {
        self.lbd_counter += 1;
        let mut n = 0;
        for &l in lits {
            let lv = self.level[(l >> 1) as usize] as usize;
            if self.lbd_stamp[lv] != self.lbd_counter {
                self.lbd_stamp[lv] = self.lbd_counter;
                n += 1;
            }
        }
        n
    }

    fn abstract_level(&self, v: usize) -> u32 {
        1 << (self.level[v] & 31)
    }

    /// First-UIP analysis. Returns the learned clause (asserting literal
    /// first, highest-level remaining literal second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<u32>, usize) {
        let mut learnt: Vec<u32> = vec![0];
        let mut path = 0usize;
        let mut p: u32 = u32::MAX;
        let mut index = self.trail.len();
        let dl = self.decision_level() as u32;
        loop {
            if self.arena.learnt(confl) {
                self.bump_clause(confl);
                let lbd = self.arena.lbd(confl);
                if lbd > 2 {
                    let lits = self.arena.lits(confl).to_vec();
                    let nl = self.compute_lbd(&lits);
                    if nl + 1 < lbd {
                        self.arena.set_lbd(confl, nl);
                    }
                }
            }
            let len = self.arena.len(confl);
            for k in 0..len {
                let q = self.arena.lits(confl)[k];
                if q == p {
                    continue;
                }
                let v = (q >> 1) as usize;
                if self.seen[v] == 0 && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = 1;
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[(self.trail[index] >> 1) as usize] != 0 {
                    break;
                }
            }
            p = self.trail[index];
            let v = (p >> 1) as usize;
            confl = self.reason[v];
            self.seen[v] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = p ^ 1;

        // Recursive minimization.
        self.analyze_toclear.clear();
        self.analyze_toclear.extend_from_slice(&learnt);
        let mut abs = 0u32;
        for &l in &learnt[1..] {
            abs |= self.abstract_level((l >> 1) as usize);
        }
        let mut j = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            let v = (l >> 1) as usize;
            if self.reason[v] == NO_REASON || !self.lit_redundant(l, abs) {
                learnt[j] = l;
                j += 1;
            }
        }
        learnt.truncate(j);
        for &l in &self.analyze_toclear {
            self.seen[(l >> 1) as usize] = 0;
        }

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[(learnt[i] >> 1) as usize] > self.level[(learnt[max_i] >> 1) as usize]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[(learnt[1] >> 1) as usize] as usize
        };
        (learnt, bt)
    }

    fn lit_redundant(&mut self, p: u32, abs: u32) -> bool {
        self.analyze_stack.clear();
        self.analyze_stack.push(p);
        let top = self.analyze_toclear.len();
        while let Some(q) = self.analyze_stack.pop() {
            let c = self.reason[(q >> 1) as usize];
            let len = self.arena.len(c);
            for k in 0..len {
                let l = self.arena.lits(c)[k];
                let v = (l >> 1) as usize;
                if (l >> 1) == (q >> 1) || self.seen[v] != 0 || self.level[v] == 0 {
                    continue;
                }
                if self.reason[v] != NO_REASON && (self.abstract_level(v) & abs) != 0 {
                    self.seen[v] = 1;
                    self.analyze_stack.push(l);
                    self.analyze_toclear.push(l);
                } else {
                    for &x in &self.analyze_toclear[top..] {
                        self.seen[(x >> 1) as usize] = 0;
                    }
                    self.analyze_toclear.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn pick_branch(&mut self) -> Option<u32> {
        if self.cfg.random_var_freq > 0.0
            && !self.heap.heap.is_empty()
            && self.rng.gen::<f64>() < self.cfg.random_var_freq
        {
            let i = self.rng.gen_range(0..self.heap.heap.len());
            let v = self.heap.heap[i] as usize;
            if self.vals[2 * v] == UNDEF {
                return Some(self.phase_lit(v));
            }
        }
        loop {
            let v = self.heap.pop(&self.activity)? as usize;
            if self.vals[2 * v] == UNDEF {
                return Some(self.phase_lit(v));
            }
        }
    }

    fn phase_lit(&self, v: usize) -> u32 {
        (2 * v as u32) | (!self.polarity[v]) as u32
    }

    fn locked(&self, cref: u32) -> bool {
        // A long clause is a reason only for its first literal; a binary
        // clause may imply either literal.
        let lits = self.arena.lits(cref);
        lits[..lits.len().min(2)]
            .iter()
            .any(|&l| self.vals[l as usize] == TRUE && self.reason[(l >> 1) as usize] == cref)
    }

    fn remove_clause(&mut self, cref: u32, sink: &mut Option<&mut dyn ProofSink>) {
        if let Some(s) = sink.as_deref_mut() {
            let lits: Vec<Lit> = self
                .arena
                .lits(cref)
                .iter()
                .map(|&l| Lit::from_code(l as usize))
                .collect();
            s.delete(&lits);
        }
        self.arena.set_deleted(cref);
    }

    fn reduce_db(&mut self, sink: &mut Option<&mut dyn ProofSink>) {
        self.stats.reductions += 1;
        let mut ls = std::mem::take(&mut self.learnts);
        ls.sort_by(|&a, &b| {
            let (la, lb) = (self.arena.lbd(a), self.arena.lbd(b));
            lb.cmp(&la).then(
                self.arena
                    .activity(a)
                    .partial_cmp(&self.arena.activity(b))
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
        });
        let limit = ls.len() / 2;
        let mut kept = Vec::with_capacity(ls.len());
        for (i, &c) in ls.iter().enumerate() {
            if i < limit
                && self.arena.lbd(c) > self.cfg.keep_lbd
                && self.arena.len(c) > 2
                && !self.locked(c)
            {
                self.remove_clause(c, sink);
            } else {
                kept.push(c);
            }
        }
        self.learnts = kept;
        self.clean_watches();
        self.maybe_collect();
    }

    fn clean_watches(&mut self) {
        let arena = &self.arena;
        for ws in &mut self.watches {
            ws.retain(|w| !arena.deleted(w.cref));
        }
    }

    /// Removes clauses satisfied at the root.
    fn simplify(&mut self, sink: &mut Option<&mut dyn ProofSink>) {
        if self.decision_level() != 0 || self.trail.len() == self.simp_assigns {
            return;
        }
        for list in [
            std::mem::take(&mut self.learnts),
            std::mem::take(&mut self.originals),
        ]
        .into_iter()
        .enumerate()
        {
            let (which, cs) = list;
            let mut kept = Vec::with_capacity(cs.len());
            for c in cs {
                let sat = self
                    .arena
                    .lits(c)
                    .iter()
                    .any(|&l| self.vals[l as usize] == TRUE);
                if sat {
                    self.remove_clause(c, sink);
                } else {
                    kept.push(c);
                }
            }
            if which == 0 {
                self.learnts = kept;
            } else {
                self.originals = kept;
            }
        }
        // Root-level reasons are never inspected again.
        for &l in &self.trail {
            self.reason[(l >> 1) as usize] = NO_REASON;
        }
        self.clean_watches();
        self.maybe_collect();
        self.simp_assigns = self.trail.len();
    }

    fn maybe_collect(&mut self) {
        if self.arena.wasted * 2 <= self.arena.mem.len() {
            return;
        }
        let mut mem = Vec::with_capacity(self.arena.mem.len() - self.arena.wasted);
        let mut map = std::collections::HashMap::new();
        for list in [&mut self.originals, &mut self.learnts] {
            for c in list.iter_mut() {
                let s = *c as usize;
                let n = self.arena.mem[s] as usize;
                let new = mem.len() as u32;
                mem.extend_from_slice(&self.arena.mem[s..s + HDR + n]);
                map.insert(*c, new);
                *c = new;
            }
        }
        for ws in &mut self.watches {
            for w in ws.iter_mut() {
                w.cref = map[&w.cref];
            }
        }
        for &l in &self.trail {
            let v = (l >> 1) as usize;
            if self.reason[v] != NO_REASON {
                self.reason[v] = map.get(&self.reason[v]).copied().unwrap_or(NO_REASON);
            }
        }
        self.arena.mem = mem;
        self.arena.wasted = 0;
    }

    fn budget_exhausted(&self, start: Instant, conflicts_at_start: u64) -> bool {
        if let Some(m) = self.cfg.max_conflicts {
            if self.stats.conflicts - conflicts_at_start >= m {
                return true;
            }
        }
        if let Some(t) = self.cfg.max_time {
            if self.stats.conflicts % 256 == 0 && start.elapsed() >= t {
                return true;
            }
        }
        false
    }

    /// Runs the search. On `Unsat` the empty clause has been written to the
    /// sink.
    pub fn solve(&mut self, mut sink: Option<&mut dyn ProofSink>) -> SolveStatus {
        let start = Instant::now();
        let c0 = self.stats.conflicts;
        let status = self.search_loop(&mut sink, start, c0);
        self.stats.runtime += start.elapsed();
        if status != SolveStatus::Sat {
            self.cancel_until(0);
        }
        status
    }

    fn search_loop(
        &mut self,
        sink: &mut Option<&mut dyn ProofSink>,
        start: Instant,
        c0: u64,
    ) -> SolveStatus {
        if !self.ok {
            return SolveStatus::Unsat;
        }
        self.cancel_until(0);
        if self.propagate() != NO_REASON {
            if let Some(s) = sink.as_deref_mut() {
                s.add(&[]);
            }
            self.ok = false;
            return SolveStatus::Unsat;
        }
        let mut restart_count: u64 = 0;
        let mut conflicts_this_restart: u64 = 0;
        let mut restart_limit = self.restart_limit(restart_count);
        self.lbd_recent.clear();
        loop {
            let confl = self.propagate();
            if confl != NO_REASON {
                self.stats.conflicts += 1;
                conflicts_this_restart += 1;
                if self.decision_level() == 0 {
                    if let Some(s) = sink.as_deref_mut() {
                        s.add(&[]);
                    }
                    self.ok = false;
                    return SolveStatus::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.stats.learned_literals += learnt.len() as u64;
                if let Some(s) = sink.as_deref_mut() {
                    let lits: Vec<Lit> =
                        learnt.iter().map(|&l| Lit::from_code(l as usize)).collect();
                    s.add(&lits);
                }
                let lbd = self.compute_lbd(&learnt);
                if let RestartPolicy::Lbd { window, .. } = self.cfg.restarts {
                    self.lbd_recent.push(lbd, window);
                }
                self.lbd_total += lbd as u64;
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let cref = self.arena.alloc(&learnt, true, lbd);
                    self.attach(cref);
                    self.learnts.push(cref);
                    self.bump_clause(cref);
                    self.enqueue(learnt[0], cref);
                }
                self.var_inc /= self.cfg.var_decay;
                self.cla_inc /= self.cfg.clause_decay as f32;
                if self.budget_exhausted(start, c0) {
                    return SolveStatus::Unknown;
                }
            } else {
                let restart = match self.cfg.restarts {
                    RestartPolicy::Luby { .. } => conflicts_this_restart >= restart_limit,
                    RestartPolicy::Lbd { window, k } => {
                        self.lbd_recent.full(window)
                            && self.lbd_recent.avg() * k
                                > self.lbd_total as f64 / self.stats.conflicts.max(1) as f64
                    }
                    RestartPolicy::Never => false,
                };
                if restart {
                    self.stats.restarts += 1;
                    restart_count += 1;
                    conflicts_this_restart = 0;
                    restart_limit = self.restart_limit(restart_count);
                    self.lbd_recent.clear();
                    self.cancel_until(0);
                }
                if self.decision_level() == 0 {
                    self.simplify(sink);
                }
                if self.stats.conflicts >= self.next_reduce {
                    self.reduce_interval += self.cfg.reduce_inc;
                    self.next_reduce = self.stats.conflicts + self.reduce_interval;
                    self.reduce_db(sink);
                }
                match self.pick_branch() {
                    None => return SolveStatus::Sat,
                    Some(lit) => {
                        self.stats.decisions += 1;
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(lit, NO_REASON);
                    }
                }
            }
        }
    }

    fn restart_limit(&self, i: u64) -> u64 {
        match self.cfg.restarts {
            RestartPolicy::Luby { unit } => (luby(2.0, i) * unit as f64) as u64,
            _ => u64::MAX,
        }
    }

    /// The satisfying assignment after `Sat` (unassigned variables false).
    pub fn model(&self) -> Assignment {
        Assignment::from_values(
            (0..self.num_vars)
                .map(|v| self.vals[2 * v] == TRUE)
                .collect(),
        )
    }

    /// Picks a random variable order perturbation; used to diversify probes
    /// without touching the formula.
    pub fn randomize_activity(&mut self, scale: f64) {
        for v in 0..self.num_vars {
            self.activity[v] += self.rng.gen::<f64>() * scale;
        }
        self.heap = VarHeap::new(self.num_vars);
        for v in 0..self.num_vars {
            self.heap.insert(v as u32, &self.activity);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drat::{check, Verdict};

    fn cnf(lists: &[&[i32]]) -> Cnf {
        Cnf::from_dimacs_lists(lists)
    }

    #[test]
    fn luby_sequence() {
        let seq: Vec<u64> = (0..15).map(|i| luby(2.0, i) as u64).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn contradiction_units() {
        let f = cnf(&[&[1], &[-1]]);
        let r = solve(&f, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Unsat);
        let p = r.proof.unwrap();
        assert_eq!(check(&f, &p), Verdict::Accept);
    }

    #[test]
    fn simple_sat() {
        let f = cnf(&[&[1, 2], &[-1]]);
        let r = solve(&f, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Sat);
        let m = r.model.unwrap();
        assert_eq!(m.get(2), Some(true));
        assert!(r.proof.is_none());
    }

    #[test]
    fn empty_formula_and_empty_clause() {
        let r = solve(&Cnf::new(0), &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Sat);
        let f = Cnf {
            num_vars: 1,
            clauses: vec![vec![]],
        };
        let r = solve(&f, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Unsat);
        assert_eq!(check(&f, r.proof.as_ref().unwrap()), Verdict::Accept);
    }

    fn pigeonhole(p: u32, h: u32) -> Cnf {
        let var = |i: u32, j: u32| (i * h + j + 1) as i32;
        let mut cs: Vec<Vec<i32>> = Vec::new();
        for i in 0..p {
            cs.push((0..h).map(|j| var(i, j)).collect());
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    cs.push(vec![-var(a, j), -var(b, j)]);
                }
            }
        }
        Cnf::from_clauses(
            cs.into_iter()
                .map(|c| c.into_iter().map(Lit::new).collect())
                .collect(),
        )
    }

    #[test]
    fn pigeonhole_refutation_checks() {
        for (p, h) in [(4, 3), (6, 5), (7, 6)] {
            let f = pigeonhole(p, h);
            for cfg in [SolverConfig::default(), SolverConfig::for_refutation()] {
                let r = solve(&f, &cfg);
                assert_eq!(r.status, SolveStatus::Unsat);
                assert_eq!(check(&f, r.proof.as_ref().unwrap()), Verdict::Accept);
            }
        }
        assert_eq!(
            solve(&pigeonhole(5, 5), &SolverConfig::default()).status,
            SolveStatus::Sat
        );
    }

    #[test]
    fn budget_gives_unknown() {
        let f = pigeonhole(9, 8);
        let cfg = SolverConfig {
            max_conflicts: Some(10),
            ..SolverConfig::default()
        };
        assert_eq!(solve(&f, &cfg).status, SolveStatus::Unknown);
    }

    #[test]
    fn deterministic_proofs() {
        let f = pigeonhole(6, 5);
        let a = solve(&f, &SolverConfig::default()).proof.unwrap();
        let b = solve(&f, &SolverConfig::default()).proof.unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn incremental_blocking() {
        // Enumerate all models of (x1 ∨ x2) over two variables.
        let mut s = Solver::new(SolverConfig {
            emit_proof: false,
            ..SolverConfig::default()
        });
        s.add_cnf(&cnf(&[&[1, 2]]), None);
        let mut n = 0;
        while s.solve(None) == SolveStatus::Sat {
            n += 1;
            let m = s.model();
            let block: Vec<Lit> = m.true_lits().map(|l| !l).collect();
            s.add_clause(&block, None);
        }
        assert_eq!(n, 3);
    }
}
