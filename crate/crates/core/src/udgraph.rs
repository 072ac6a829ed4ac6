//! Unit-distance graphs over exact points, and the operators used to grow
//! them: Minkowski sums, rotated copies, unions and radius filters.

use std::collections::{BTreeSet, HashMap};

use crate::exactnum::{FieldContext, FieldElement, FieldError};
use crate::geometry::{dist_sq, Exponent, Point, Rotation};

pub type VertexId = usize;

/// A set of exact points with unit-distance edges between them.
///
/// Vertex ids are insertion order. The graph is *saturated* when its edge set
/// contains every unit-distance pair; edge-criticalization produces
/// unsaturated graphs.
#[derive(Clone)]
pub struct UnitDistanceGraph {
    ctx: FieldContext,
    points: Vec<Point>,
    index: HashMap<Point, VertexId>,
    edges: Vec<(VertexId, VertexId)>,
    saturated: bool,
}

/// Structural equality: same points in the same order, same edge list.
impl PartialEq for UnitDistanceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.edges == other.edges
            && self.saturated == other.saturated
    }
}

impl Eq for UnitDistanceGraph {}

impl std::fmt::Debug for UnitDistanceGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "UnitDistanceGraph({} vertices, {} edges{})",
            self.points.len(),
            self.edges.len(),
            if self.saturated { "" } else { ", unsaturated" }
        )
    }
}

impl UnitDistanceGraph {
    pub fn empty(ctx: &FieldContext) -> Self {
        UnitDistanceGraph {
            ctx: ctx.clone(),
            points: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            saturated: true,
        }
    }

    /// Deduplicates the points (first occurrence wins) and builds every
    /// unit-distance edge.
    pub fn from_points<I: IntoIterator<Item = Point>>(ctx: &FieldContext, points: I) -> Self {
        let mut g = Self::empty(ctx);
        for p in points {
            g.push_point(p);
        }
        g.edges = build_edges(&g.points);
        g
    }

    /// A graph with an explicit edge list. Every edge must join points at
    /// exact unit distance; `saturated` is recomputed.
    pub fn with_edges(
        ctx: &FieldContext,
        points: Vec<Point>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(ctx);
        for p in points {
            if p.context() != ctx {
                return Err(GraphError::Field(FieldError::ContextMismatch {
                    left: format!("{:?}", p.context()),
                    right: format!("{ctx:?}"),
                }));
            }
            if !g.push_point(p.clone()) {
                return Err(GraphError::DuplicatePoint(format!("{p:?}")));
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            let n = g.points.len();
            if u >= n || v >= n || u == v {
                return Err(GraphError::BadEdge(u, v));
            }
            let e = (u.min(v), u.max(v));
            if !crate::geometry::unit_distance(&g.points[e.0], &g.points[e.1]) {
                return Err(GraphError::NotUnitDistance(e.0, e.1));
            }
            set.insert(e);
        }
        g.edges = set.into_iter().collect();
        g.saturated = g.edges == build_edges(&g.points);
        Ok(g)
    }

    fn push_point(&mut self, p: Point) -> bool {
        if self.index.contains_key(&p) {
            return false;
        }
        self.index.insert(p.clone(), self.points.len());
        self.points.push(p);
        true
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, v: VertexId) -> &Point {
        &self.points[v]
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn vertex_of(&self, p: &Point) -> Option<VertexId> {
        self.index.get(p).copied()
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.index.contains_key(p)
    }

    pub fn origin_vertex(&self) -> Option<VertexId> {
        self.vertex_of(&Point::origin(&self.ctx))
    }

    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.points.len()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.points.len()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Induced subgraph on `keep` (in the given order), with every unit-distance
    /// edge among the survivors restored.
    pub fn induced(&self, keep: &[VertexId]) -> UnitDistanceGraph {
        if !self.saturated {
            return Self::from_points(&self.ctx, keep.iter().map(|&v| self.points[v].clone()));
        }
        let mut new_id = vec![usize::MAX; self.points.len()];
        let mut g = Self::empty(&self.ctx);
        for &v in keep {
            if new_id[v] == usize::MAX && g.push_point(self.points[v].clone()) {
                new_id[v] = g.points.len() - 1;
            }
        }
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .filter(|(u, v)| new_id[*u] != usize::MAX && new_id[*v] != usize::MAX)
            .map(|&(u, v)| {
                let (a, b) = (new_id[u], new_id[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        g.edges = edges;
        g
    }

    /// The graph without vertex `v` (ids above `v` shift down by one).
    pub fn without_vertex(&self, v: VertexId) -> UnitDistanceGraph {
        let keep: Vec<_> = (0..self.points.len()).filter(|&u| u != v).collect();
        self.induced(&keep)
    }

    /// Same vertices, a subset of the edges. The result is unsaturated unless
    /// nothing was removed.
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let e = (u.min(v), u.max(v));
        self.edges.contains(&e)
    }

    pub fn with_edge_subset(&self, keep: impl Fn(VertexId, VertexId) -> bool) -> UnitDistanceGraph {
        let mut g = self.clone();
        g.edges.retain(|&(u, v)| keep(u, v));
        g.saturated = self.saturated && g.edges.len() == self.edges.len();
        g
    }

    /// Rebuilds the full unit-distance edge set.
    pub fn saturate(&self) -> UnitDistanceGraph {
        let mut g = self.clone();
        g.edges = build_edges(&g.points);
        g.saturated = true;
        g
    }

    /// Checks every stored edge exactly and, for saturated graphs, that no
    /// unit-distance pair is missing.
    pub fn validate(&self) -> Result<(), GraphError> {
        for &(u, v) in &self.edges {
            if !crate::geometry::unit_distance(&self.points[u], &self.points[v]) {
                return Err(GraphError::NotUnitDistance(u, v));
            }
        }
        if self.saturated && self.edges != build_edges(&self.points) {
            return Err(GraphError::NotSaturated);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("edge ({0}, {1}) references a missing vertex or is a loop")]
    BadEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) does not join points at unit distance")]
    NotUnitDistance(VertexId, VertexId),
    #[error("graph is flagged saturated but misses unit-distance edges")]
    NotSaturated,
    #[error("unknown built-in graph {0:?}")]
    UnknownBuiltin(String),
}

/// Conservative floating bounds of a point, used to discard pairs that are
/// certainly not at unit distance before the exact test.
#[derive(Clone, Copy)]
struct Bounds {
    x: (f64, f64),
    y: (f64, f64),
}

fn sq_interval(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo * lo, hi * hi);
    let max = a.max(b);
    let min = if lo <= 0.0 && hi >= 0.0 {
        0.0
    } else {
        a.min(b)
    };
    (min * (1.0 - 1e-15), max * (1.0 + 1e-15) + 1e-300)
}

fn may_be_unit(p: &Bounds, q: &Bounds) -> bool {
    let dx = (p.x.0 - q.x.1, p.x.1 - q.x.0);
    let dy = (p.y.0 - q.y.1, p.y.1 - q.y.0);
    let widen = |(lo, hi): (f64, f64)| {
        (
            lo - lo.abs() * 1e-15 - 1e-300,
            hi + hi.abs() * 1e-15 + 1e-300,
        )
    };
    let (sx, sy) = (
        sq_interval(widen(dx).0, widen(dx).1),
        sq_interval(widen(dy).0, widen(dy).1),
    );
    let lo = (sx.0 + sy.0) * (1.0 - 1e-15);
    let hi = (sx.1 + sy.1) * (1.0 + 1e-15);
    lo <= 1.0 && 1.0 <= hi
}

/// All pairs at exact unit distance, sorted, `u < v`.
///
/// Pairs are first screened with rigorous floating enclosures (every
/// coordinate enclosed to about 2⁻⁶⁰); only pairs whose squared-distance
/// enclosure contains 1 reach the exact test.
pub fn build_edges(points: &[Point]) -> Vec<(VertexId, VertexId)> {
    let bounds: Vec<Bounds> = points
        .iter()
        .map(|p| Bounds {
            x: p.x.f64_enclosure(),
            y: p.y.f64_enclosure(),
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| bounds[a].x.0.total_cmp(&bounds[b].x.0));
    let mut edges = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            // x lower bounds are sorted; once the gap exceeds 1 no later point
            // can be within unit distance.
            if bounds[b].x.0 - bounds[a].x.1 > 1.0 + 1e-9 {
                break;
            }
            if may_be_unit(&bounds[a], &bounds[b]) {
                let d = dist_sq(&points[a], &points[b]);
                if d.as_rational().is_some_and(|r| num_traits::One::is_one(&r)) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Exhaustive exact all-pairs edge computation (no prefilter); reference for
/// tests of [`build_edges`].
pub fn build_edges_exhaustive(points: &[Point]) -> Vec<(VertexId, VertexId)> {
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if crate::geometry::unit_distance(&points[i], &points[j]) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// `A ⊕ B = {a + b}`, deduplicated in `a`-major order.
pub fn minkowski(
    a: &UnitDistanceGraph,
    b: &UnitDistanceGraph,
) -> Result<UnitDistanceGraph, GraphError> {
    check_same(a, b)?;
    let pts = a
        .points
        .iter()
        .flat_map(|p| b.points.iter().map(move |q| p.add(q)));
    Ok(UnitDistanceGraph::from_points(&a.ctx, pts))
}

pub fn rotate_graph(g: &UnitDistanceGraph, r: &Rotation) -> Result<UnitDistanceGraph, GraphError> {
    if r.context() != &g.ctx {
        return Err(GraphError::Field(FieldError::ContextMismatch {
            left: format!("{:?}", r.context()),
            right: format!("{:?}", g.ctx),
        }));
    }
    let points: Vec<Point> = g.points.iter().map(|p| r.apply(p)).collect();
    let mut out = UnitDistanceGraph::empty(&g.ctx);
    for p in points {
        out.push_point(p);
    }
    // Rotation is an isometry, so the edge set carries over unchanged.
    out.edges = g.edges.clone();
    out.saturated = g.saturated;
    Ok(out)
}

/// Vertex union (G1's ids first), with all edges rebuilt including cross edges.
pub fn union(
    g1: &UnitDistanceGraph,
    g2: &UnitDistanceGraph,
) -> Result<UnitDistanceGraph, GraphError> {
    check_same(g1, g2)?;
    let pts = g1.points.iter().chain(g2.points.iter()).cloned();
    Ok(UnitDistanceGraph::from_points(&g1.ctx, pts))
}

/// Keeps vertices with `|v|² ≤ rsq` (or `> rsq` when `keep_leq` is false).
pub fn filter_radius(
    g: &UnitDistanceGraph,
    rsq: &FieldElement,
    keep_leq: bool,
) -> UnitDistanceGraph {
    let keep: Vec<VertexId> = (0..g.points.len())
        .filter(|&v| {
            let s = compare_norm(&g.points[v], rsq);
            if keep_leq {
                s <= 0
            } else {
                s > 0
            }
        })
        .collect();
    g.induced(&keep)
}

/// Sign of `|p|² − rsq`.
pub fn compare_norm(p: &Point, rsq: &FieldElement) -> i8 {
    (&p.norm_sq() - rsq).signum()
}

fn check_same(a: &UnitDistanceGraph, b: &UnitDistanceGraph) -> Result<(), GraphError> {
    if a.ctx != b.ctx {
        return Err(GraphError::Field(FieldError::ContextMismatch {
            left: format!("{:?}", a.ctx),
            right: format!("{:?}", b.ctx),
        }));
    }
    Ok(())
}

/// Built-in graphs.
pub mod builtin {
    use super::*;

    fn unit_x(ctx: &FieldContext) -> Point {
        Point::from_ratios(ctx, (1, 1), (0, 1))
    }

    /// Two-point graph `{(0,0), (1,0)}`.
    pub fn segment(ctx: &FieldContext) -> UnitDistanceGraph {
        UnitDistanceGraph::from_points(ctx, [Point::origin(ctx), unit_x(ctx)])
    }

    /// `{(0,0),(1,0)} ⊕ {(0,0),(1/2,√3/2)}`: a rhombus of two triangles.
    pub fn rhombus(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let t1 = Rotation::theta(1, ctx)?;
        let b = UnitDistanceGraph::from_points(ctx, [Point::origin(ctx), t1.apply(&unit_x(ctx))]);
        minkowski(&segment(ctx), &b)
    }

    /// The Moser spindle: the rhombus united with its θ3 rotation.
    pub fn moser(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let ab = rhombus(ctx)?;
        let rotated = rotate_graph(&ab, &Rotation::theta(3, ctx)?)?;
        union(&ab, &rotated)
    }

    /// The center plus `θ1^j θ3^k (1,0)` for `j ∈ 0..6`, `k ∈ {−1, −½, 0, ½, 1}`.
    pub fn v31(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let t1 = Rotation::theta(1, ctx)?;
        let t3 = Rotation::theta(3, ctx)?;
        let mut pts = vec![Point::origin(ctx)];
        for j in 0..6 {
            let rj = t1.power(Exponent::int(j))?;
            for halves in -2..=2 {
                let rk = t3.power(Exponent::halves(halves))?;
                pts.push(rk.then(&rj).apply(&unit_x(ctx)));
            }
        }
        Ok(UnitDistanceGraph::from_points(ctx, pts))
    }

    /// `V31 ⊕ V31` restricted to the closed unit disk.
    pub fn v151(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let v = v31(ctx)?;
        let sum = minkowski(&v, &v)?;
        Ok(filter_radius(&sum, &FieldElement::one(ctx), true))
    }

    /// `V31 ⊕ V151`.
    pub fn v1939(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        minkowski(&v31(ctx)?, &v151(ctx)?)
    }

    /// `V1939 ∪ θ4(V1939)`, the 5-chromatic starting graph.
    pub fn v1939_theta4(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let v = v1939(ctx)?;
        let r = rotate_graph(&v, &Rotation::theta(4, ctx)?)?;
        union(&v, &r)
    }

    /// Three concentric hexagons around the origin at radii 1, (√33+3)/6 and
    /// (√33−3)/6, all aligned with the direction of (1,0). The outer two rings
    /// are joined radially (their radii differ by exactly 1), and the unit ring
    /// forms a 7-wheel with the center: 19 vertices, 18 edges.
    pub fn three_wheel(ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        let t1 = Rotation::theta(1, ctx)?;
        let half = Rotation::theta(3, ctx)?.half()?;
        let e = unit_x(ctx);
        let t1_2 = t1.power(Exponent::int(2))?;
        // Sums of two unit vectors of V31 whose bisector lies at 60°.
        let outer = half.apply(&e).add(&half.inverse().then(&t1_2).apply(&e));
        let inner = half.inverse().apply(&e).add(&half.then(&t1_2).apply(&e));
        // Rotate back by 60° so that the rings align with (1,0).
        let back = t1.inverse();
        let (outer, inner) = (back.apply(&outer), back.apply(&inner));
        let mut pts = vec![Point::origin(ctx)];
        for j in 0..6 {
            let r = t1.power(Exponent::int(j))?;
            pts.push(r.apply(&e));
            pts.push(r.apply(&outer));
            pts.push(r.apply(&inner));
        }
        Ok(UnitDistanceGraph::from_points(ctx, pts))
    }

    pub fn by_name(name: &str, ctx: &FieldContext) -> Result<UnitDistanceGraph, GraphError> {
        match name {
            "moser" => moser(ctx),
            "v31" => v31(ctx),
            "v151" => v151(ctx),
            "v1939" => v1939(ctx),
            "v1939-theta4" => v1939_theta4(ctx),
            "three-wheel" => three_wheel(ctx),
            "rhombus" => rhombus(ctx),
            "segment" => Ok(segment(ctx)),
            other => Err(GraphError::UnknownBuiltin(other.to_string())),
        }
    }

    pub const NAMES: &[&str] = &[
        "moser",
        "v31",
        "v151",
        "v1939",
        "v1939-theta4",
        "three-wheel",
        "rhombus",
        "segment",
    ];
}
