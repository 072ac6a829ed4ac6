//! k-colorability as CNF.
//!
//! Variable `x(v, c) = k·v + c` (0-based vertex, 1-based color) is true when
//! vertex `v` has color `c`. Each vertex gets one at-least-one clause and each
//! edge gets `k` binary conflict clauses. At-most-one clauses are left out:
//! any model can be turned into a proper coloring by picking, for each
//! vertex, its least true color.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, Cnf, Lit};
use crate::exactnum::FieldContext;
use crate::geometry::{Point, Rotation};
use crate::udgraph::{UnitDistanceGraph, VertexId};

/// Where a clause of a coloring formula came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseTag {
    /// At-least-one-color clause of a vertex.
    Alo(VertexId),
    /// Endpoints of an edge may not share a color.
    Edge(VertexId, VertexId, u32),
    /// Unit clause fixing the color of an anchor vertex.
    Symmetry(VertexId, u32),
    /// Anything added outside the coloring encoding (e.g. blocking clauses).
    Extra,
}

impl fmt::Display for ClauseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseTag::Alo(v) => write!(f, "alo {v}"),
            ClauseTag::Edge(v, w, c) => write!(f, "edge {v} {w} {c}"),
            ClauseTag::Symmetry(v, c) => write!(f, "sym {v} {c}"),
            ClauseTag::Extra => write!(f, "extra"),
        }
    }
}

impl FromStr for ClauseTag {
    type Err = EncodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EncodeError::BadTag(s.to_string());
        let parts: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<usize, EncodeError> {
            parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())
        };
        match parts.first().copied() {
            Some("alo") if parts.len() == 2 => Ok(ClauseTag::Alo(num(1)?)),
            Some("edge") if parts.len() == 4 => {
                Ok(ClauseTag::Edge(num(1)?, num(2)?, num(3)? as u32))
            }
            Some("sym") if parts.len() == 3 => Ok(ClauseTag::Symmetry(num(1)?, num(2)? as u32)),
            Some("extra") if parts.len() == 1 => Ok(ClauseTag::Extra),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("bad clause tag {0:?}")]
    BadTag(String),
    #[error("tag map line {0}: {1}")]
    TagMap(usize, String),
    #[error("assignment falsifies clause {0}")]
    NotAModel(usize),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// A coloring formula together with its vertex/color ↔ variable map and
/// per-clause provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringCnf {
    pub k: u32,
    pub num_vertices: usize,
    pub cnf: Cnf,
    pub tags: Vec<ClauseTag>,
}

impl ColoringCnf {
    pub fn var(&self, v: VertexId, color: u32) -> u32 {
        var_of(self.k, v, color)
    }

    /// The vertex and color of a variable.
    pub fn vertex_color(&self, var: u32) -> (VertexId, u32) {
        let z = var - 1;
        ((z / self.k) as usize, z % self.k + 1)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.cnf.clauses
    }

    pub fn push(&mut self, clause: Clause, tag: ClauseTag) {
        self.cnf.add_clause(clause);
        self.tags.push(tag);
    }

    /// Index of the ALO clause of every vertex (the first one if duplicated).
    pub fn alo_index(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.num_vertices];
        for (i, t) in self.tags.iter().enumerate() {
            if let ClauseTag::Alo(v) = *t {
                out[v].get_or_insert(i);
            }
        }
        out
    }

    /// Writes the tag sidecar: one `index tag` line per clause.
    pub fn write_tags<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "c coloring k={} vertices={}", self.k, self.num_vertices)?;
        for (i, t) in self.tags.iter().enumerate() {
            writeln!(w, "{i} {t}")?;
        }
        Ok(())
    }

    /// Reassembles a coloring formula from DIMACS and its tag sidecar.
    pub fn from_parts<R: BufRead>(cnf: Cnf, tags: R) -> Result<ColoringCnf, EncodeError> {
        let mut k = None;
        let mut n = None;
        let mut out = Vec::new();
        for (lineno, line) in tags.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if let Some(rest) = t.strip_prefix("c coloring") {
                for kv in rest.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("k", v)) => k = v.parse().ok(),
                        Some(("vertices", v)) => n = v.parse().ok(),
                        _ => {}
                    }
                }
                continue;
            }
            if t.is_empty() || t.starts_with('c') {
                continue;
            }
            let (idx, tag) = t
                .split_once(' ')
                .ok_or_else(|| EncodeError::TagMap(lineno + 1, "expected `index tag`".into()))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| EncodeError::TagMap(lineno + 1, "bad index".into()))?;
            if idx != out.len() {
                return Err(EncodeError::TagMap(
                    lineno + 1,
                    "indices must be dense".into(),
                ));
            }
            out.push(tag.parse()?);
        }
        let k = k.ok_or_else(|| EncodeError::TagMap(0, "missing k".into()))?;
        let num_vertices =
            n.ok_or_else(|| EncodeError::TagMap(0, "missing vertex count".into()))?;
        if out.len() != cnf.clauses.len() {
            return Err(EncodeError::TagMap(
                0,
                "tag count differs from clause count".into(),
            ));
        }
        Ok(ColoringCnf {
            k,
            num_vertices,
            cnf,
            tags: out,
        })
    }
}

pub fn var_of(k: u32, v: VertexId, color: u32) -> u32 {
    debug_assert!((1..=k).contains(&color));
    k * v as u32 + color
}

/// The three symmetry anchors `(0,0)`, `(1,0)`, `(1/2, √3/2)`, which are
/// pairwise at unit distance.
pub fn anchor_points(ctx: &FieldContext) -> Vec<Point> {
    let o = Point::origin(ctx);
    let e = Point::from_ratios(ctx, (1, 1), (0, 1));
    let mut out = vec![o, e.clone()];
    if let Ok(t1) = Rotation::theta(1, ctx) {
        out.push(t1.apply(&e));
    }
    out
}

/// Anchors whose colors may be fixed: those present in `g` that are pairwise
/// joined by edges of `g` (an edge-reduced graph may lack some), with the
/// anchor's color 1, 2 or 3.
pub fn pinned_anchors(g: &UnitDistanceGraph) -> Vec<(VertexId, u32)> {
    let mut out: Vec<(VertexId, u32)> = Vec::new();
    for (i, p) in anchor_points(g.context()).iter().enumerate() {
        if let Some(v) = g.vertex_of(p) {
            if out.iter().all(|&(w, _)| g.has_edge(v, w)) {
                out.push((v, i as u32 + 1));
            }
        }
    }
    out
}

/// Encodes k-colorability. With `symmetry_breaking` and `k ≥ 3`, the
/// [`pinned_anchors`] get their colors fixed.
pub fn encode(g: &UnitDistanceGraph, k: u32, symmetry_breaking: bool) -> ColoringCnf {
    assert!(k >= 1, "need at least one color");
    let n = g.num_vertices();
    let mut f = ColoringCnf {
        k,
        num_vertices: n,
        cnf: Cnf::new(k * n as u32),
        tags: Vec::with_capacity(n + k as usize * g.num_edges() + 3),
    };
    for v in 0..n {
        f.push(
            (1..=k).map(|c| Lit::pos(var_of(k, v, c))).collect(),
            ClauseTag::Alo(v),
        );
    }
    for &(v, w) in g.edges() {
        for c in 1..=k {
            f.push(
                vec![Lit::neg(var_of(k, v, c)), Lit::neg(var_of(k, w, c))],
                ClauseTag::Edge(v, w, c),
            );
        }
    }
    if symmetry_breaking && k >= 3 {
        for (v, c) in pinned_anchors(g) {
            f.push(vec![Lit::pos(var_of(k, v, c))], ClauseTag::Symmetry(v, c));
        }
    }
    f
}

/// Permutes clause order and the literals inside each clause with a seeded
/// Fisher–Yates shuffle. Tags follow their clauses.
pub fn shuffle(f: &ColoringCnf, seed: u64) -> ColoringCnf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..f.cnf.clauses.len()).collect();
    order.shuffle(&mut rng);
    let mut out = ColoringCnf {
        k: f.k,
        num_vertices: f.num_vertices,
        cnf: Cnf::new(f.cnf.num_vars),
        tags: Vec::with_capacity(order.len()),
    };
    for i in order {
        let mut c = f.cnf.clauses[i].clone();
        c.shuffle(&mut rng);
        out.cnf.clauses.push(c);
        out.tags.push(f.tags[i]);
    }
    out
}

/// Colors each vertex with its least true color.
pub fn decode(f: &ColoringCnf, a: &Assignment) -> Result<Vec<u32>, EncodeError> {
    if let Some(i) = a.first_falsified(&f.cnf.clauses) {
        return Err(EncodeError::NotAModel(i));
    }
    Ok((0..f.num_vertices)
        .map(|v| {
            (1..=f.k)
                .find(|&c| a.get(f.var(v, c)) == Some(true))
                .expect("ALO clause is satisfied")
        })
        .collect())
}

/// True when no edge joins two vertices of the same color.
pub fn is_proper_coloring(g: &UnitDistanceGraph, colors: &[u32]) -> bool {
    colors.len() == g.num_vertices() && g.edges().iter().all(|&(u, v)| colors[u] != colors[v])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udgraph::builtin;

    fn ctx() -> FieldContext {
        FieldContext::standard()
    }

    #[test]
    fn anchors_pinned_only_while_adjacent() {
        use crate::cdcl::{solve, SolveStatus};
        use crate::geometry::Point;
        let g = builtin::moser(&ctx()).unwrap();
        assert_eq!(pinned_anchors(&g).len(), 3);
        let o = g.vertex_of(&Point::origin(&ctx())).unwrap();
        let e = g
            .vertex_of(&Point::from_ratios(&ctx(), (1, 1), (0, 1)))
            .unwrap();
        let cut = g.with_edge_subset(|a, b| (a, b) != (o.min(e), o.max(e)));
        // (1,0) lost its edge to the origin, so it must stay free
        let pinned = pinned_anchors(&cut);
        assert_eq!(pinned.len(), 2);
        assert!(pinned.iter().all(|&(v, _)| v != e));
        let with = solve(&encode(&cut, 3, true).cnf, &Default::default()).status;
        let without = solve(&encode(&cut, 3, false).cnf, &Default::default()).status;
        assert_eq!(with, SolveStatus::Sat);
        assert_eq!(without, SolveStatus::Sat);
    }

    #[test]
    fn moser_counts() {
        let g = builtin::moser(&ctx()).unwrap();
        let f = encode(&g, 4, false);
        assert_eq!(f.cnf.num_vars, 28);
        assert_eq!(f.cnf.clauses.len(), 7 + 44);
        assert!(f.cnf.clauses.iter().all(|c| c.len() == 4 || c.len() == 2));
    }

    #[test]
    fn v31_has_three_symmetry_units() {
        let g = builtin::v31(&ctx()).unwrap();
        let f = encode(&g, 4, true);
        let units: Vec<_> = f.cnf.clauses.iter().filter(|c| c.len() == 1).collect();
        assert_eq!(units.len(), 3);
        let sym = f
            .tags
            .iter()
            .filter(|t| matches!(t, ClauseTag::Symmetry(..)))
            .count();
        assert_eq!(sym, 3);
        // k < 3: no symmetry clauses at all
        assert_eq!(encode(&g, 2, true).cnf.clauses.len(), 31 + 2 * 60);
    }

    #[test]
    fn single_edge_one_color() {
        let g = builtin::segment(&ctx());
        let f = encode(&g, 1, false);
        assert_eq!(f.cnf, Cnf::from_dimacs_lists(&[&[1], &[2], &[-1, -2]]));
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let g = builtin::moser(&ctx()).unwrap();
        let f = encode(&g, 4, false);
        let s1 = shuffle(&f, 7);
        assert_eq!(s1, shuffle(&f, 7));
        let norm = |f: &ColoringCnf| {
            let mut v: Vec<(Vec<Lit>, ClauseTag)> = f
                .cnf
                .clauses
                .iter()
                .zip(&f.tags)
                .map(|(c, t)| {
                    let mut c = c.clone();
                    c.sort();
                    (c, *t)
                })
                .collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        assert_eq!(norm(&s1), norm(&f));
        assert_ne!(shuffle(&f, 1).cnf.clauses, shuffle(&f, 2).cnf.clauses);
        // each tag still describes its clause
        for (c, t) in s1.cnf.clauses.iter().zip(&s1.tags) {
            if let ClauseTag::Alo(_) = t {
                assert_eq!(c.len(), 4);
            }
        }
    }

    #[test]
    fn decode_least_color() {
        let g = builtin::segment(&ctx());
        let f = encode(&g, 3, false);
        let mut a = Assignment::new(6);
        for v in 1..=6 {
            a.set(v, false);
        }
        a.set(f.var(0, 1), true);
        a.set(f.var(0, 3), true);
        a.set(f.var(1, 2), true);
        assert_eq!(decode(&f, &a).unwrap(), vec![1, 2]);
        a.set(f.var(1, 1), true);
        assert!(matches!(decode(&f, &a), Err(EncodeError::NotAModel(_))));
    }

    #[test]
    fn tag_sidecar_round_trip() {
        let g = builtin::v31(&ctx()).unwrap();
        let f = shuffle(&encode(&g, 4, true), 3);
        let mut buf = Vec::new();
        f.write_tags(&mut buf).unwrap();
        let back = ColoringCnf::from_parts(f.cnf.clone(), buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.vertex_color(f.var(5, 3)), (5, 3));
    }
}
