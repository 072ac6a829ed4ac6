//! Chromatic numbers with certificates, projections of colorings onto
//! "same color as the center" patterns, degree statistics and the split of
//! a graph by coordinate field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdcl::{self, SolveStatus, Solver, SolverConfig};
use crate::cnf::Lit;
use crate::drat::{self, TrimError};
use crate::encode::{decode, encode, is_proper_coloring, var_of};
use crate::exactnum::{FieldContext, FieldElement, Radicand};
use crate::geometry::{Point, Rotation};
use crate::localsearch;
use crate::udgraph::{compare_norm, UnitDistanceGraph, VertexId};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("solver budget exhausted at k={k}")]
    BudgetExceeded { k: u32 },
    #[error("graph is not {kmax}-colorable")]
    ExceedsBound { kmax: u32 },
    #[error("refutation at k={k} failed verification: {source}")]
    Verification { k: u32, source: TrimError },
    #[error("vertex {0} is not in the graph")]
    BadVertex(VertexId),
    #[error("solver returned an improper coloring")]
    BadModel,
}

/// Summary of a verified refutation of k-colorability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub k: u32,
    pub conflicts: u64,
    pub proof_steps: usize,
    pub proof_additions: usize,
    pub core_clauses: usize,
    pub trimmed_additions: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// A proper coloring with colors `1..=k`.
    Colorable(Vec<u32>),
    Refuted(Refutation),
}

/// Decides k-colorability with symmetry breaking. Colorings are checked
/// against the edge list; refutations are checked by backward trimming and
/// a forward re-check of the trimmed proof.
pub fn decide(g: &UnitDistanceGraph, k: u32, cfg: &SolverConfig) -> Result<Decision, AnalyzeError> {
    let f = encode(g, k, true);
    let cfg = SolverConfig {
        emit_proof: true,
        ..cfg.clone()
    };
    let r = cdcl::solve(&f.cnf, &cfg);
    match r.status {
        SolveStatus::Sat => {
            let colors = decode(&f, r.model.as_ref().expect("SAT has a model"))
                .map_err(|_| AnalyzeError::BadModel)?;
            if !is_proper_coloring(g, &colors) {
                return Err(AnalyzeError::BadModel);
            }
            Ok(Decision::Colorable(colors))
        }
        SolveStatus::Unsat => {
            let proof = r.proof.expect("UNSAT has a proof");
            let rep = drat::trim(&f.cnf, &proof)
                .map_err(|source| AnalyzeError::Verification { k, source })?;
            Ok(Decision::Refuted(Refutation {
                k,
                conflicts: r.stats.conflicts,
                proof_steps: proof.len(),
                proof_additions: proof.num_additions(),
                core_clauses: rep.core_clause_indices.len(),
                trimmed_additions: rep.trimmed_proof.num_additions(),
            }))
        }
        SolveStatus::Unknown => Err(AnalyzeError::BudgetExceeded { k }),
    }
}

/// Local search budget before falling back to SAT: 2·10⁴ moves per vertex,
/// at most 10⁸. The 3877-vertex union graph needs around 3·10⁷ for five
/// colors.
pub fn search_moves(g: &UnitDistanceGraph) -> u64 {
    (20_000 * g.num_vertices() as u64).min(100_000_000)
}

/// Like [`decide`], but first looks for a coloring by tabu search with at
/// most `moves` moves. Meant for graphs expected to be k-colorable, where
/// CDCL can be very slow.
pub fn decide_with_search(
    g: &UnitDistanceGraph,
    k: u32,
    cfg: &SolverConfig,
    moves: u64,
) -> Result<Decision, AnalyzeError> {
    if let Some(c) = localsearch::tabu_coloring(g, k, cfg.seed, moves) {
        if !is_proper_coloring(g, &c) {
            return Err(AnalyzeError::BadModel);
        }
        return Ok(Decision::Colorable(c));
    }
    decide(g, k, cfg)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChromaticCertificate {
    pub chi: u32,
    /// A proper `chi`-coloring.
    pub coloring: Vec<u32>,
    /// The verified refutation at `chi - 1` (absent for `chi ≤ 1`).
    pub refutation: Option<Refutation>,
}

pub fn chromatic_number(
    g: &UnitDistanceGraph,
    kmax: u32,
) -> Result<ChromaticCertificate, AnalyzeError> {
    chromatic_number_with(g, kmax, &SolverConfig::default())
}

/// Ascending search over `k = 1..=kmax`.
pub fn chromatic_number_with(
    g: &UnitDistanceGraph,
    kmax: u32,
    cfg: &SolverConfig,
) -> Result<ChromaticCertificate, AnalyzeError> {
    assert!(kmax >= 1, "kmax must be positive");
    if g.num_vertices() == 0 {
        return Ok(ChromaticCertificate {
            chi: 0,
            coloring: Vec::new(),
            refutation: None,
        });
    }
    let mut last = None;
    for k in 1..=kmax {
        match decide(g, k, cfg)? {
            Decision::Colorable(coloring) => {
                return Ok(ChromaticCertificate {
                    chi: k,
                    coloring,
                    refutation: last,
                })
            }
            Decision::Refuted(r) => last = Some(r),
        }
    }
    Err(AnalyzeError::ExceedsBound { kmax })
}

/// Indicator vector over marked vertices: `true` means "same color as the
/// center".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternRow {
    pub bits: Vec<bool>,
}

impl fmt::Display for PatternRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for PatternRow {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(format!("bad pattern character {c:?}")),
            })
            .collect::<Result<Vec<bool>, String>>()
            .map(|bits| PatternRow { bits })
    }
}

/// All distinct patterns of k-colorings of `g` projected onto the marked
/// vertices. The center is fixed to color 1 (and only color 1); a fresh
/// selector per marked vertex is equivalent to "has color 1", and each
/// found pattern is blocked on the selectors alone.
pub fn enumerate_patterns(
    g: &UnitDistanceGraph,
    center: VertexId,
    marked: &[VertexId],
    k: u32,
    cfg: &SolverConfig,
) -> Result<BTreeSet<PatternRow>, AnalyzeError> {
    let n = g.num_vertices();
    for &v in std::iter::once(&center).chain(marked) {
        if v >= n {
            return Err(AnalyzeError::BadVertex(v));
        }
    }
    let f = encode(g, k, false);
    let cfg = SolverConfig {
        emit_proof: false,
        ..cfg.clone()
    };
    let mut s = Solver::new(cfg);
    s.add_cnf(&f.cnf, None);
    s.add_clause(&[Lit::pos(var_of(k, center, 1))], None);
    for c in 2..=k {
        s.add_clause(&[Lit::neg(var_of(k, center, c))], None);
    }
    let base = f.cnf.num_vars;
    let sel: Vec<u32> = (0..marked.len() as u32).map(|i| base + 1 + i).collect();
    for (i, &v) in marked.iter().enumerate() {
        let x = var_of(k, v, 1);
        s.add_clause(&[Lit::neg(sel[i]), Lit::pos(x)], None);
        s.add_clause(&[Lit::pos(sel[i]), Lit::neg(x)], None);
    }
    let mut out = BTreeSet::new();
    loop {
        match s.solve(None) {
            SolveStatus::Sat => {
                let m = s.model();
                let bits: Vec<bool> = sel.iter().map(|&x| m.get(x) == Some(true)).collect();
                let block: Vec<Lit> = sel
                    .iter()
                    .zip(&bits)
                    .map(|(&x, &b)| if b { Lit::neg(x) } else { Lit::pos(x) })
                    .collect();
                out.insert(PatternRow { bits });
                if block.is_empty() || !s.add_clause(&block, None) {
                    return Ok(out);
                }
            }
            SolveStatus::Unsat => return Ok(out),
            SolveStatus::Unknown => return Err(AnalyzeError::BudgetExceeded { k }),
        }
    }
}

/// Number of distinct patterns, optionally only those accepted by
/// `constraint`.
pub fn count_patterns(
    g: &UnitDistanceGraph,
    center: VertexId,
    marked: &[VertexId],
    k: u32,
    constraint: Option<&dyn Fn(&PatternRow) -> bool>,
    cfg: &SolverConfig,
) -> Result<usize, AnalyzeError> {
    let rows = enumerate_patterns(g, center, marked, k, cfg)?;
    Ok(match constraint {
        Some(p) => rows.iter().filter(|r| p(r)).count(),
        None => rows.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub vertices: usize,
    pub edges: usize,
    /// Exact `2|E|/|V|`, written as `p/q`.
    #[serde(with = "ratio_string")]
    pub average: BigRational,
    /// Degree → number of vertices with that degree.
    pub histogram: BTreeMap<usize, usize>,
}

mod ratio_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn degree_stats(g: &UnitDistanceGraph) -> DegreeStats {
    let mut histogram = BTreeMap::new();
    for d in g.degrees() {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let average = if g.num_vertices() == 0 {
        BigRational::from_integer(BigInt::from(0))
    } else {
        BigRational::new(
            BigInt::from(2 * g.num_edges()),
            BigInt::from(g.num_vertices()),
        )
    };
    DegreeStats {
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        average,
        histogram,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPartition {
    /// Vertices with both coordinates in Q(√3, √11).
    pub large: Vec<VertexId>,
    /// All other vertices. The origin, if present, is listed in both parts.
    pub small: Vec<VertexId>,
}

fn in_subfield(x: &FieldElement, allowed: &[u64]) -> bool {
    x.support().all(|r: Radicand| allowed.contains(&r.get()))
}

/// Splits vertices by whether their coordinates use only the radicands
/// 1, 3, 11 and 33.
pub fn partition_by_field(g: &UnitDistanceGraph) -> FieldPartition {
    const SUB: [u64; 4] = [1, 3, 11, 33];
    let mut large = Vec::new();
    let mut small = Vec::new();
    for (v, p) in g.points().iter().enumerate() {
        if p.is_origin() {
            large.push(v);
            small.push(v);
        } else if in_subfield(&p.x, &SUB) && in_subfield(&p.y, &SUB) {
            large.push(v);
        } else {
            small.push(v);
        }
    }
    FieldPartition { large, small }
}

/// Symmetries about the origin: which multiples of 60° map the graph onto
/// itself, and whether the mirror image in the x axis does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetries {
    pub rotations: Vec<u32>,
    pub mirror: bool,
}

fn maps_onto_itself(g: &UnitDistanceGraph, f: impl Fn(&Point) -> Point) -> bool {
    let mut image = Vec::with_capacity(g.num_vertices());
    for p in g.points() {
        match g.vertex_of(&f(p)) {
            Some(v) => image.push(v),
            None => return false,
        }
    }
    g.edges().iter().all(|&(a, b)| g.has_edge(image[a], image[b]))
}

/// Checks the dihedral symmetries of the hexagonal lattice directions.
pub fn symmetries(g: &UnitDistanceGraph) -> Symmetries {
    let ctx = g.context();
    let t1 = Rotation::theta(1, ctx).expect("θ1 lies in every context with √3");
    let mut r = Rotation::identity(ctx);
    let mut rotations = Vec::new();
    for j in 0..6 {
        if maps_onto_itself(g, |p| r.apply(p)) {
            rotations.push(j * 60);
        }
        r = r.then(&t1);
    }
    Symmetries {
        rotations,
        mirror: maps_onto_itself(g, Point::reflect_x),
    }
}

/// Vertices whose squared distance from the origin is exactly `rsq`.
pub fn vertices_at_radius(g: &UnitDistanceGraph, rsq: &FieldElement) -> Vec<VertexId> {
    (0..g.num_vertices())
        .filter(|&v| compare_norm(g.point(v), rsq) == 0)
        .collect()
}

/// Squared radii of the key vertices joining the two parts of the critical
/// graphs: `(17 − √33)/6`, `(17 + √33)/6` and `4`.
pub fn key_radii_sq(ctx: &FieldContext) -> Vec<FieldElement> {
    let r33 = FieldElement::sqrt_of(ctx, 33).expect("context contains √33");
    let sixth = BigRational::new(1.into(), 6.into());
    let base = FieldElement::from_ratio(ctx, 17, 6);
    vec![
        &base - &r33.scale(&sixth),
        &base + &r33.scale(&sixth),
        FieldElement::from_int(ctx, 4),
    ]
}

/// Brute-force chromatic number by trying every coloring; for tests.
pub fn brute_force_chromatic(g: &UnitDistanceGraph) -> u32 {
    let n = g.num_vertices();
    if n == 0 {
        return 0;
    }
    let adj = g.adjacency();
    for k in 1..=n as u32 {
        let mut colors = vec![0u32; n];
        if brute_color(&adj, &mut colors, 0, k) {
            return k;
        }
    }
    n as u32
}

fn brute_color(adj: &[Vec<VertexId>], colors: &mut [u32], v: usize, k: u32) -> bool {
    if v == colors.len() {
        return true;
    }
    for c in 1..=k {
        if adj[v].iter().all(|&w| w >= v || colors[w] != c) {
            colors[v] = c;
            if brute_color(adj, colors, v + 1, k) {
                return true;
            }
        }
    }
    colors[v] = 0;
    false
}
