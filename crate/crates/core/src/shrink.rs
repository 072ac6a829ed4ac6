//! Graph minimization: proof-core trimming, seeded randomized descent,
//! vertex and edge criticalization, rotational merging and outer-point
//! augmentation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyze::{
    decide, decide_with_search, degree_stats, search_moves, AnalyzeError, Decision, Refutation,
};
use crate::cdcl::{self, SolveStatus, SolverConfig};
use crate::cnf::Cnf;
use crate::drat::{self, TrimError};
use crate::encode::{decode, encode, is_proper_coloring, shuffle, ColoringCnf};
use crate::exactnum::FieldElement;
use crate::geometry::{Point, Rotation};
use crate::udgraph::{filter_radius, rotate_graph, union, GraphError, UnitDistanceGraph, VertexId};
use num_rational::BigRational;

#[derive(Debug, Error)]
pub enum ShrinkError {
    #[error("the graph is {k}-colorable")]
    Colorable { k: u32 },
    #[error("solver budget exhausted")]
    BudgetExceeded,
    #[error("proof trimming failed: {0}")]
    Trim(#[from] TrimError),
    #[error(transparent)]
    Analyze(#[from] AnalyzeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Settings shared by all shrinking operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkConfig {
    /// Number of colors to refute.
    pub k: u32,
    pub symmetry_breaking: bool,
    /// Solver settings; `seed` is replaced per probe.
    pub solver: SolverConfig,
    /// Consecutive non-improving probes before a descent stops.
    pub patience: usize,
    /// Hard cap on probes in one descent.
    pub max_probes: Option<u64>,
    /// Re-establish the k+1 coloring after every accepted probe.
    pub certify_colorable: bool,
    /// Extra solve-and-trim rounds on the clause core inside one probe,
    /// stopping early when a round removes nothing.
    /// Re-solving the core instead of the edge-restored subgraph descends
    /// much faster on large inputs.
    pub core_rounds: usize,
}

impl ShrinkConfig {
    pub fn new(k: u32) -> Self {
        ShrinkConfig {
            k,
            symmetry_breaking: true,
            solver: SolverConfig::for_refutation(),
            patience: 20,
            max_probes: None,
            certify_colorable: true,
            core_rounds: 0,
        }
    }
}

/// Statistics of one trim step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimStepReport {
    pub seed: u64,
    pub vertices_before: usize,
    pub vertices_after: usize,
    pub edges_after: usize,
    pub conflicts: u64,
    pub proof_steps: usize,
    pub proof_additions: usize,
    pub core_clauses: usize,
    pub trimmed_additions: usize,
    pub solve_ms: u64,
    pub trim_ms: u64,
    /// Solve-and-trim rounds run on successively smaller cores.
    pub rounds: usize,
}

/// The clauses (and tags) of `f` at `indices`.
fn restrict(f: &ColoringCnf, indices: &[usize]) -> ColoringCnf {
    let mut out = ColoringCnf {
        k: f.k,
        num_vertices: f.num_vertices,
        cnf: Cnf::new(f.cnf.num_vars),
        tags: Vec::with_capacity(indices.len()),
    };
    for &i in indices {
        out.push(f.cnf.clauses[i].clone(), f.tags[i]);
    }
    out
}

/// One proof-core reduction with default settings.
pub fn trim_step(
    g: &UnitDistanceGraph,
    k: u32,
    seed: u64,
) -> Result<UnitDistanceGraph, ShrinkError> {
    trim_step_with(g, &ShrinkConfig::new(k), seed).map(|(h, _)| h)
}

/// Shuffle, solve, trim, and keep the vertices whose at-least-one-color
/// clause is in the core (edges among them restored). The refutation is
/// verified by the trimming pass.
pub fn trim_step_with(
    g: &UnitDistanceGraph,
    cfg: &ShrinkConfig,
    seed: u64,
) -> Result<(UnitDistanceGraph, TrimStepReport), ShrinkError> {
    let mut f = shuffle(&encode(g, cfg.k, cfg.symmetry_breaking), seed);
    let mut report = TrimStepReport {
        seed,
        vertices_before: g.num_vertices(),
        vertices_after: 0,
        edges_after: 0,
        conflicts: 0,
        proof_steps: 0,
        proof_additions: 0,
        core_clauses: 0,
        trimmed_additions: 0,
        solve_ms: 0,
        trim_ms: 0,
        rounds: 0,
    };
    let mut round_seed = seed;
    loop {
        let scfg = SolverConfig {
            seed: round_seed,
            emit_proof: true,
            ..cfg.solver.clone()
        };
        let t = Instant::now();
        let r = cdcl::solve(&f.cnf, &scfg);
        report.solve_ms += t.elapsed().as_millis() as u64;
        let proof = match r.status {
            SolveStatus::Sat => return Err(ShrinkError::Colorable { k: cfg.k }),
            SolveStatus::Unknown => return Err(ShrinkError::BudgetExceeded),
            SolveStatus::Unsat => r.proof.expect("UNSAT has a proof"),
        };
        let t = Instant::now();
        let rep = drat::trim_unchecked(&f.cnf, &proof)?;
        report.trim_ms += t.elapsed().as_millis() as u64;
        report.rounds += 1;
        let shrunk = rep.core_clause_indices.len() < f.cnf.len();
        if report.rounds == 1 {
            report.conflicts = r.stats.conflicts;
            report.proof_steps = proof.len();
            report.proof_additions = proof.num_additions();
            report.trimmed_additions = rep.trimmed_proof.num_additions();
        }
        f = restrict(&f, &rep.core_clause_indices);
        report.core_clauses = f.cnf.len();
        if !shrunk || report.rounds > cfg.core_rounds {
            break;
        }
        round_seed = probe_seed(round_seed, report.rounds as u64);
        f = shuffle(&f, round_seed);
    }
    let h = g.induced(&drat::core_vertices(
        g,
        &f.tags,
        cfg.symmetry_breaking && cfg.k >= 3,
    ));
    report.vertices_after = h.num_vertices();
    report.edges_after = h.num_edges();
    Ok((h, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Progressing,
    /// `patience` consecutive probes found nothing to remove.
    Fixpoint,
    /// Vertex-critical: every single-vertex deletion is k-colorable.
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeOutcome {
    Reduced,
    Unchanged,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub index: u64,
    pub seed: u64,
    pub outcome: ProbeOutcome,
    /// Vertex count of the current graph after this probe.
    pub vertices: usize,
    pub edges: usize,
    /// Vertex count the probe produced, even when rejected.
    pub candidate_vertices: Option<usize>,
    pub report: Option<TrimStepReport>,
}

/// Seed of probe `index` in a run seeded with `seed`.
pub fn probe_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        ^ index
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(0x632b_e59b_d9b4_e019);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// State of a seeded descent. Everything needed to resume is serializable
/// except the graph itself, which is stored separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkRun {
    pub seed: u64,
    pub config: ShrinkConfig,
    pub status: RunStatus,
    pub next_probe: u64,
    pub failures: usize,
    pub log: Vec<ProbeRecord>,
    /// Points removed so far, in canonical `x y` form.
    pub removed: Vec<String>,
    /// Proper (k+1)-coloring of the current graph, when certified.
    pub coloring: Option<Vec<u32>>,
    /// Verified refutation of the current graph, when known.
    pub refutation: Option<Refutation>,
    #[serde(skip)]
    graph: Option<UnitDistanceGraph>,
}

impl ShrinkRun {
    pub fn new(g: UnitDistanceGraph, config: ShrinkConfig, seed: u64) -> Self {
        ShrinkRun {
            seed,
            config,
            status: RunStatus::Progressing,
            next_probe: 0,
            failures: 0,
            log: Vec::new(),
            removed: Vec::new(),
            coloring: None,
            refutation: None,
            graph: Some(g),
        }
    }

    /// Reattaches the current graph after deserialization.
    pub fn resume(mut self, g: UnitDistanceGraph) -> Self {
        self.graph = Some(g);
        self
    }

    pub fn graph(&self) -> &UnitDistanceGraph {
        self.graph.as_ref().expect("graph attached")
    }

    pub fn into_graph(self) -> UnitDistanceGraph {
        self.graph.expect("graph attached")
    }

    pub fn vertex_counts(&self) -> Vec<usize> {
        self.log.iter().map(|r| r.vertices).collect()
    }

    pub fn is_done(&self) -> bool {
        self.status != RunStatus::Progressing
            || self.config.max_probes.is_some_and(|m| self.next_probe >= m)
    }

    /// Runs one probe. A probe is accepted iff it strictly lowers the vertex
    /// count.
    pub fn probe(&mut self) -> Result<&ProbeRecord, ShrinkError> {
        self.probe_batch(1)?;
        Ok(self.log.last().expect("just pushed"))
    }

    /// Runs `jobs` probes with consecutive indices on the current graph, in
    /// parallel, and accepts the smallest strictly smaller result (lowest
    /// index on ties). Results depend on `jobs` but not on thread timing.
    pub fn probe_batch(&mut self, jobs: usize) -> Result<(), ShrinkError> {
        let jobs = jobs.max(1);
        let first = self.next_probe;
        let g = self.graph.take().expect("graph attached");
        let seeds: Vec<u64> = (0..jobs as u64)
            .map(|i| probe_seed(self.seed, first + i))
            .collect();
        let results: Vec<Result<(UnitDistanceGraph, TrimStepReport), ShrinkError>> = if jobs == 1 {
            vec![trim_step_with(&g, &self.config, seeds[0])]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = seeds
                    .iter()
                    .map(|&seed| {
                        let (g, cfg) = (&g, &self.config);
                        s.spawn(move || trim_step_with(g, cfg, seed))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("probe thread"))
                    .collect()
            })
        };
        if let Some(i) = results
            .iter()
            .position(|r| matches!(r, Err(e) if !matches!(e, ShrinkError::BudgetExceeded)))
        {
            let Some(Err(e)) = results.into_iter().nth(i) else {
                unreachable!()
            };
            self.graph = Some(g);
            return Err(e);
        }
        let best = results
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().ok().map(|(h, _)| (h.num_vertices(), i)))
            .filter(|&(n, _)| n < g.num_vertices())
            .min()
            .map(|(_, i)| i);
        self.next_probe += jobs as u64;
        let mut next = None;
        let mut records = Vec::with_capacity(jobs);
        for (i, r) in results.into_iter().enumerate() {
            let (outcome, candidate, report) = match r {
                Ok((h, rep)) => {
                    let n = h.num_vertices();
                    if best == Some(i) {
                        // The trimmed core is a subformula of the encoding of
                        // `h`, so this refutation certifies `h` as well.
                        self.refutation = Some(Refutation {
                            k: self.config.k,
                            conflicts: rep.conflicts,
                            proof_steps: rep.proof_steps,
                            proof_additions: rep.proof_additions,
                            core_clauses: rep.core_clauses,
                            trimmed_additions: rep.trimmed_additions,
                        });
                        next = Some(h);
                        (ProbeOutcome::Reduced, Some(n), Some(rep))
                    } else {
                        if best.is_none() && self.refutation.is_none() {
                            self.refutation = Some(Refutation {
                                k: self.config.k,
                                conflicts: rep.conflicts,
                                proof_steps: rep.proof_steps,
                                proof_additions: rep.proof_additions,
                                core_clauses: rep.core_clauses,
                                trimmed_additions: rep.trimmed_additions,
                            });
                        }
                        (ProbeOutcome::Unchanged, Some(n), Some(rep))
                    }
                }
                Err(_) => (ProbeOutcome::Budget, None, None),
            };
            records.push((first + i as u64, seeds[i], outcome, candidate, report));
        }
        let current = match next {
            Some(h) => {
                self.removed.extend(
                    g.points()
                        .iter()
                        .filter(|p| !h.contains_point(p))
                        .map(|p| format!("{} {}", p.x.to_canonical(), p.y.to_canonical())),
                );
                self.failures = 0;
                self.coloring = None;
                if self.config.certify_colorable {
                    match colorable(&h, self.config.k + 1, &self.config.solver) {
                        Ok(c) => self.coloring = Some(c),
                        Err(e) => {
                            self.graph = Some(g);
                            return Err(e);
                        }
                    }
                }
                h
            }
            None => {
                self.failures += jobs;
                if self.failures >= self.config.patience {
                    self.status = RunStatus::Fixpoint;
                }
                g
            }
        };
        for (index, seed, outcome, candidate_vertices, report) in records {
            self.log.push(ProbeRecord {
                index,
                seed,
                outcome,
                vertices: current.num_vertices(),
                edges: current.num_edges(),
                candidate_vertices,
                report,
            });
        }
        self.graph = Some(current);
        Ok(())
    }

    /// Probes until fixpoint or the probe cap, calling `on_probe` after each
    /// batch of `jobs` probes.
    pub fn run_parallel(
        &mut self,
        jobs: usize,
        mut on_probe: impl FnMut(&ShrinkRun),
    ) -> Result<(), ShrinkError> {
        while !self.is_done() {
            self.probe_batch(jobs)?;
            on_probe(self);
        }
        Ok(())
    }

    /// Probes until fixpoint or the probe cap, calling `on_probe` after each.
    pub fn run(&mut self, mut on_probe: impl FnMut(&ShrinkRun)) -> Result<(), ShrinkError> {
        while !self.is_done() {
            self.probe()?;
            on_probe(self);
        }
        Ok(())
    }

    /// Makes sure the final graph carries a verified refutation and a
    /// (k+1)-coloring.
    pub fn certify(&mut self) -> Result<(), ShrinkError> {
        let g = self.graph.as_ref().expect("graph attached");
        if self.refutation.is_none() {
            self.refutation = Some(refuted(g, self.config.k, &self.config.solver)?);
        }
        if self.coloring.is_none() {
            self.coloring = Some(colorable(g, self.config.k + 1, &self.config.solver)?);
        }
        Ok(())
    }
}

fn colorable(g: &UnitDistanceGraph, k: u32, cfg: &SolverConfig) -> Result<Vec<u32>, ShrinkError> {
    match decide_with_search(
        g,
        k,
        &SolverConfig {
            restarts: SolverConfig::default().restarts,
            ..cfg.clone()
        },
        search_moves(g),
    )? {
        Decision::Colorable(c) => Ok(c),
        Decision::Refuted(_) => Err(ShrinkError::Analyze(AnalyzeError::ExceedsBound { kmax: k })),
    }
}

fn refuted(g: &UnitDistanceGraph, k: u32, cfg: &SolverConfig) -> Result<Refutation, ShrinkError> {
    match decide(g, k, cfg)? {
        Decision::Refuted(r) => Ok(r),
        Decision::Colorable(_) => Err(ShrinkError::Colorable { k }),
    }
}

/// Repeated seeded probes until `patience` consecutive probes fail to
/// shrink the graph. Probe seeds are derived from `seed`.
pub fn randomized_descent(
    g: &UnitDistanceGraph,
    cfg: &ShrinkConfig,
    seed: u64,
) -> Result<ShrinkRun, ShrinkError> {
    let mut run = ShrinkRun::new(g.clone(), cfg.clone(), seed);
    run.run(|_| {})?;
    Ok(run)
}

/// Outcome of a single-vertex or single-edge deletion test.
fn colorable_without(
    g: &UnitDistanceGraph,
    k: u32,
    cfg: &SolverConfig,
) -> Result<Option<Vec<u32>>, ShrinkError> {
    let f = encode(g, k, true);
    let r = cdcl::solve(
        &f.cnf,
        &SolverConfig {
            emit_proof: false,
            ..cfg.clone()
        },
    );
    match r.status {
        SolveStatus::Sat => {
            let c =
                decode(&f, r.model.as_ref().expect("model")).map_err(|_| AnalyzeError::BadModel)?;
            if !is_proper_coloring(g, &c) {
                return Err(AnalyzeError::BadModel.into());
            }
            Ok(Some(c))
        }
        SolveStatus::Unsat => Ok(None),
        SolveStatus::Unknown => Err(ShrinkError::BudgetExceeded),
    }
}

/// Result of vertex criticalization.
#[derive(Debug, Clone)]
pub struct CriticalGraph {
    pub graph: UnitDistanceGraph,
    /// For each vertex of `graph`, a proper k-coloring of `graph − v`
    /// (entry `v` of the coloring is meaningless and set to 0).
    pub certificates: Vec<Vec<u32>>,
    /// False when a budget ran out and the result may not be critical.
    pub critical: bool,
    pub removed: usize,
    pub refutation: Option<Refutation>,
}

/// Removes vertices in a seeded random order while k-colorability stays
/// refuted. A vertex whose deletion is k-colorable stays so in every
/// subgraph, so its coloring is a permanent certificate and one pass
/// reaches the fixpoint.
pub fn criticalize_vertices(
    g: &UnitDistanceGraph,
    cfg: &ShrinkConfig,
    seed: u64,
) -> Result<CriticalGraph, ShrinkError> {
    let k = cfg.k;
    let mut cur = g.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Point> = g.points().to_vec();
    order.shuffle(&mut rng);
    let mut certs: Vec<(Point, Vec<(Point, u32)>)> = Vec::new();
    let mut critical = true;
    let mut removed = 0;
    for p in order {
        let Some(v) = cur.vertex_of(&p) else { continue };
        let without = cur.without_vertex(v);
        match colorable_without(&without, k, &cfg.solver) {
            Ok(Some(c)) => {
                let colored = without.points().iter().cloned().zip(c).collect();
                certs.push((p, colored));
            }
            Ok(None) => {
                cur = without;
                removed += 1;
            }
            Err(ShrinkError::BudgetExceeded) => {
                critical = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let certificates = if critical {
        restrict_certificates(&cur, &certs)
    } else {
        Vec::new()
    };
    let refutation = Some(refuted(&cur, k, &cfg.solver)?);
    Ok(CriticalGraph {
        graph: cur,
        certificates,
        critical,
        removed,
        refutation,
    })
}

fn restrict_certificates(
    g: &UnitDistanceGraph,
    certs: &[(Point, Vec<(Point, u32)>)],
) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); g.num_vertices()];
    for (p, colored) in certs {
        let v = g
            .vertex_of(p)
            .expect("certified vertices are never removed");
        let mut c = vec![0u32; g.num_vertices()];
        for (q, col) in colored {
            if let Some(w) = g.vertex_of(q) {
                c[w] = *col;
            }
        }
        out[v] = c;
    }
    out
}

/// Checks a per-vertex certificate: `colors` properly colors `g − v` with
/// colors `1..=k`.
pub fn check_vertex_certificate(
    g: &UnitDistanceGraph,
    v: VertexId,
    colors: &[u32],
    k: u32,
) -> bool {
    colors.len() == g.num_vertices()
        && (0..g.num_vertices()).all(|w| w == v || (1..=k).contains(&colors[w]))
        && g.edges()
            .iter()
            .all(|&(a, b)| a == v || b == v || colors[a] != colors[b])
}

#[derive(Debug, Clone)]
pub struct EdgeReduced {
    pub graph: UnitDistanceGraph,
    pub removed_edges: usize,
    /// False when a budget ran out before every edge was tested.
    pub critical: bool,
}

/// Removes edges in a seeded random order while k-colorability stays
/// refuted. As with vertices, an edge whose removal is k-colorable is
/// needed in every subgraph, so one pass suffices.
pub fn criticalize_edges(
    g: &UnitDistanceGraph,
    cfg: &ShrinkConfig,
    seed: u64,
) -> Result<EdgeReduced, ShrinkError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<(VertexId, VertexId)> = g.edges().to_vec();
    order.shuffle(&mut rng);
    let mut removed: std::collections::HashSet<(VertexId, VertexId)> = Default::default();
    let mut critical = true;
    for e in order {
        removed.insert(e);
        let h = g.with_edge_subset(|a, b| !removed.contains(&(a, b)));
        match colorable_without(&h, cfg.k, &cfg.solver) {
            Ok(Some(_)) => {
                removed.remove(&e);
            }
            Ok(None) => {}
            Err(ShrinkError::BudgetExceeded) => {
                removed.remove(&e);
                critical = false;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(EdgeReduced {
        graph: g.with_edge_subset(|a, b| !removed.contains(&(a, b))),
        removed_edges: removed.len(),
        critical,
    })
}

#[derive(Debug, Clone)]
pub struct MergeReport {
    pub graph: UnitDistanceGraph,
    /// Vertices of the rotated copy that coincided with vertices of `g1`.
    pub merged_vertices: usize,
    pub average_degree_before: BigRational,
    pub average_degree_after: BigRational,
}

/// `g1 ∪ r(g2)`, merging coinciding points.
pub fn merge_rotated(
    g1: &UnitDistanceGraph,
    g2: &UnitDistanceGraph,
    r: &Rotation,
) -> Result<MergeReport, ShrinkError> {
    let rotated = rotate_graph(g2, r)?;
    let graph = union(g1, &rotated)?;
    Ok(MergeReport {
        merged_vertices: g1.num_vertices() + rotated.num_vertices() - graph.num_vertices(),
        average_degree_before: degree_stats(g1).average,
        average_degree_after: degree_stats(&graph).average,
        graph,
    })
}

/// Adds the donor points strictly outside squared radius `rsq`.
pub fn augment_outer(
    g: &UnitDistanceGraph,
    donor: &UnitDistanceGraph,
    rsq: &FieldElement,
) -> Result<UnitDistanceGraph, ShrinkError> {
    Ok(union(g, &filter_radius(donor, rsq, false))?)
}
