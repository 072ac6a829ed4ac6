//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so that the long descent prints progress as it goes.
//!
//! Set `CNP_G553` to a coordinate list (the `import` format) to enable the
//! data-dependent criterion 11; `CNP_G553_MARKED` optionally names a file of
//! marked vertex ids for the pattern table, and `CNP_S199` the 199-vertex
//! graph.

use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cnp_core::analyze::{
    brute_force_chromatic, chromatic_number, decide, decide_with_search, degree_stats, enumerate_patterns,
    partition_by_field, search_moves, symmetries, Decision,
};
use cnp_core::cdcl::{self, SolveStatus, SolverConfig};
use cnp_core::cnf::{Cnf, Lit};
use cnp_core::drat;
use cnp_core::encode::{encode, is_proper_coloring};
use cnp_core::exactnum::FieldContext;
use cnp_core::geometry::{Point, Rotation};
use cnp_core::graphio::import_graph;
use cnp_core::shrink::{
    check_vertex_certificate, criticalize_vertices, merge_rotated, ShrinkConfig, ShrinkRun,
};
use cnp_core::udgraph::{
    builtin, filter_radius, minkowski, rotate_graph, union, UnitDistanceGraph,
};

// Tolerances.
const MOSER_LIMIT: Duration = Duration::from_secs(1);
const V31_LIMIT: Duration = Duration::from_secs(1);
const V151_LIMIT: Duration = Duration::from_secs(10);
const V1939_LIMIT: Duration = Duration::from_secs(60);
const UNION_LIMIT: Duration = Duration::from_secs(2 * 3600);
const DESCENT_LIMIT: Duration = Duration::from_secs(8 * 3600);
const DESCENT_TARGET: usize = 1100;
const CHECK_LIMIT: Duration = Duration::from_secs(10);
const CHECK_ADDITIONS: usize = 20_000;
const CRITICAL_LIMIT: Duration = Duration::from_secs(5);
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const ORACLE_GRAPHS: usize = 500;
const ORACLE_MAX_VERTICES: usize = 9;
const MERGE_LIMIT: Duration = Duration::from_secs(1);
const G553_LIMIT: Duration = Duration::from_secs(10);

/// Descent settings for criterion 6.
const DESCENT_SEED: u64 = 1;
const DESCENT_CORE_ROUNDS: usize = 8;
const DESCENT_MAX_PROBES: u64 = 200;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Duration, limit: Duration) -> Result<(), String> {
    ensure(t <= limit, || {
        format!("took {:.2?}, limit {:.0?}", t, limit)
    })
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn refutation_and_coloring(g: &UnitDistanceGraph, k: u32) -> Result<String, String> {
    let cfg = SolverConfig::for_refutation();
    let r = match decide(g, k, &cfg).map_err(|e| e.to_string())? {
        Decision::Refuted(r) => r,
        Decision::Colorable(_) => return Err(format!("{k}-colorable")),
    };
    let t = Instant::now();
    match decide_with_search(g, k + 1, &SolverConfig::default(), search_moves(g)).map_err(|e| e.to_string())? {
        Decision::Colorable(c) => ensure(is_proper_coloring(g, &c), || "improper coloring".into())?,
        Decision::Refuted(_) => return Err(format!("not {}-colorable", k + 1)),
    }
    let coloring_time = t.elapsed();
    Ok(format!(
        "k={k} refuted ({} conflicts, {} additions, {} after trimming), {}-coloring checked ({:.1?})",
        r.conflicts,
        r.proof_additions,
        r.trimmed_additions,
        k + 1,
        coloring_time
    ))
}

fn c1(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let g = builtin::moser(ctx).map_err(|e| e.to_string())?;
    ensure((g.num_vertices(), g.num_edges()) == (7, 11), || {
        format!("{} vertices / {} edges", g.num_vertices(), g.num_edges())
    })?;
    let c = chromatic_number(&g, 5).map_err(|e| e.to_string())?;
    ensure(c.chi == 4 && c.refutation.is_some(), || {
        format!("chi {}", c.chi)
    })?;
    within(t.elapsed(), MOSER_LIMIT)?;
    Ok(format!(
        "7/11, chi 4 with verified k=3 refutation, {:.2?}",
        t.elapsed()
    ))
}

fn c2(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let g = builtin::v31(ctx).map_err(|e| e.to_string())?;
    ensure((g.num_vertices(), g.num_edges()) == (31, 60), || {
        format!("{} vertices / {} edges", g.num_vertices(), g.num_edges())
    })?;
    let c = chromatic_number(&g, 4).map_err(|e| e.to_string())?;
    ensure(c.chi == 3, || format!("chi {}", c.chi))?;
    within(t.elapsed(), V31_LIMIT)?;
    Ok(format!("31/60, chi 3, {:.2?}", t.elapsed()))
}

fn c3(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let v31 = builtin::v31(ctx).map_err(|e| e.to_string())?;
    let sum = minkowski(&v31, &v31).map_err(|e| e.to_string())?;
    let one = cnp_core::exactnum::FieldElement::from_int(ctx, 1);
    let g = filter_radius(&sum, &one, true);
    ensure((g.num_vertices(), g.num_edges()) == (151, 510), || {
        format!("{} vertices / {} edges", g.num_vertices(), g.num_edges())
    })?;
    match decide(&g, 4, &SolverConfig::default()).map_err(|e| e.to_string())? {
        Decision::Colorable(c) => {
            ensure(is_proper_coloring(&g, &c), || "improper coloring".into())?
        }
        Decision::Refuted(_) => return Err("not 4-colorable".into()),
    }
    within(t.elapsed(), V151_LIMIT)?;
    Ok(format!("151/510, 4-coloring checked, {:.2?}", t.elapsed()))
}

fn c4(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let v31 = builtin::v31(ctx).map_err(|e| e.to_string())?;
    let v151 = builtin::v151(ctx).map_err(|e| e.to_string())?;
    let g = minkowski(&v31, &v151).map_err(|e| e.to_string())?;
    ensure(g.num_vertices() == 1939, || {
        format!("{} vertices", g.num_vertices())
    })?;
    within(t.elapsed(), V1939_LIMIT)?;
    Ok(format!(
        "1939 vertices, {} edges, {:.2?}",
        g.num_edges(),
        t.elapsed()
    ))
}

fn c5(g: &UnitDistanceGraph) -> Check {
    let t = Instant::now();
    let detail = refutation_and_coloring(g, 4)?;
    within(t.elapsed(), UNION_LIMIT)?;
    Ok(format!(
        "{}/{}: {detail}, {:.1?}",
        g.num_vertices(),
        g.num_edges(),
        t.elapsed()
    ))
}

fn c6(g: &UnitDistanceGraph, out: &mut Option<UnitDistanceGraph>) -> Check {
    let t = Instant::now();
    let mut cfg = ShrinkConfig::new(4);
    cfg.certify_colorable = false;
    cfg.core_rounds = DESCENT_CORE_ROUNDS;
    cfg.max_probes = Some(DESCENT_MAX_PROBES);
    let mut run = ShrinkRun::new(g.clone(), cfg, DESCENT_SEED);
    while !run.is_done() && run.graph().num_vertices() > DESCENT_TARGET {
        let rec = run.probe().map_err(|e| e.to_string())?;
        eprintln!(
            "     probe {:3}: {} vertices, {:.0?}",
            rec.index,
            rec.vertices,
            t.elapsed()
        );
    }
    let counts = run.vertex_counts();
    ensure(counts.windows(2).all(|w| w[0] >= w[1]), || {
        "log not monotone".into()
    })?;
    let n = run.graph().num_vertices();
    let detail = refutation_and_coloring(run.graph(), 4)?;
    *out = Some(run.graph().clone());
    ensure(n <= DESCENT_TARGET, || format!("stopped at {n} vertices"))?;
    within(t.elapsed(), DESCENT_LIMIT)?;
    Ok(format!(
        "{} -> {n} vertices in {} probes (seed {DESCENT_SEED}), {detail}, {:.0?}",
        g.num_vertices(),
        run.log.len(),
        t.elapsed()
    ))
}

fn pigeonhole(p: i32, h: i32) -> Cnf {
    let var = |i: i32, j: i32| i * h + j + 1;
    let mut cs: Vec<Vec<Lit>> = (0..p)
        .map(|i| (0..h).map(|j| Lit::new(var(i, j))).collect())
        .collect();
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                cs.push(vec![Lit::new(-var(a, j)), Lit::new(-var(b, j))]);
            }
        }
    }
    Cnf::from_clauses(cs)
}

/// Proof-tooling properties on one UNSAT instance. Returns the slowest
/// forward check among proofs within the size bound, if any.
fn proof_properties(name: &str, f: &Cnf) -> Result<Option<Duration>, String> {
    let cfg = SolverConfig {
        emit_proof: true,
        ..SolverConfig::for_refutation()
    };
    let r = cdcl::solve(f, &cfg);
    ensure(r.status == SolveStatus::Unsat, || {
        format!("{name}: not UNSAT")
    })?;
    let proof = r.proof.expect("proof requested");
    let rep = drat::trim(f, &proof).map_err(|e| format!("{name}: {e}"))?;
    let core = rep.core_cnf(f);
    let t = Instant::now();
    let verdict = drat::check(&core, &rep.trimmed_proof);
    let check_time = t.elapsed();
    ensure(verdict.is_accept(), || {
        format!("{name}: trimmed proof rejected on core: {verdict:?}")
    })?;
    let again = cdcl::solve(&core, &SolverConfig::default());
    ensure(again.status == SolveStatus::Unsat, || {
        format!("{name}: core not UNSAT")
    })?;
    ensure(rep.trimmed_proof.len() <= proof.len(), || {
        format!(
            "{name}: trimmed {} > original {}",
            rep.trimmed_proof.len(),
            proof.len()
        )
    })?;
    let mut slowest = (rep.trimmed_proof.num_additions() <= CHECK_ADDITIONS).then_some(check_time);
    if proof.num_additions() <= CHECK_ADDITIONS {
        let t = Instant::now();
        let v = drat::check(f, &proof);
        ensure(v.is_accept(), || {
            format!("{name}: original proof rejected: {v:?}")
        })?;
        slowest = slowest.max(Some(t.elapsed()));
    }
    eprintln!(
        "     {name}: {} -> {} additions, core {}/{} clauses",
        proof.num_additions(),
        rep.trimmed_proof.num_additions(),
        core.clauses.len(),
        f.clauses.len()
    );
    Ok(slowest)
}

fn c7(
    ctx: &FieldContext,
    union_graph: &UnitDistanceGraph,
    descended: Option<&UnitDistanceGraph>,
) -> Check {
    let moser = builtin::moser(ctx).map_err(|e| e.to_string())?;
    let mut suite: Vec<(String, Cnf)> = vec![
        ("moser k=3".into(), encode(&moser, 3, true).cnf),
        (
            "moser k=3 no symmetry breaking".into(),
            encode(&moser, 3, false).cnf,
        ),
        ("pigeonhole 6/5".into(), pigeonhole(6, 5)),
        ("pigeonhole 7/6".into(), pigeonhole(7, 6)),
        ("union k=4".into(), encode(union_graph, 4, true).cnf),
    ];
    if let Some(g) = descended {
        suite.push((
            format!("descended {} k=4", g.num_vertices()),
            encode(g, 4, true).cnf,
        ));
    }
    let mut slowest = Duration::ZERO;
    let mut timed = 0;
    for (name, f) in &suite {
        if let Some(t) = proof_properties(name, f)? {
            slowest = slowest.max(t);
            timed += 1;
        }
    }
    within(slowest, CHECK_LIMIT)?;
    Ok(format!(
        "{} instances; slowest check of {timed} proofs with <= {CHECK_ADDITIONS} additions {:.2?}",
        suite.len(),
        slowest
    ))
}

fn c8(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let m = builtin::moser(ctx).map_err(|e| e.to_string())?;
    let cfg = ShrinkConfig::new(3);
    let r = criticalize_vertices(&m, &cfg, 0).map_err(|e| e.to_string())?;
    ensure(r.critical && r.graph == m, || "spindle changed".into())?;
    ensure(r.certificates.len() == 7, || {
        format!("{} certificates", r.certificates.len())
    })?;
    for (v, c) in r.certificates.iter().enumerate() {
        ensure(check_vertex_certificate(&m, v, c, 3), || {
            format!("bad certificate for vertex {v}")
        })?;
    }
    let mut pts = m.points().to_vec();
    pts.push(Point::from_ratios(ctx, (-1, 1), (0, 1)));
    let pendant = UnitDistanceGraph::from_points(ctx, pts);
    let r = criticalize_vertices(&pendant, &cfg, 0).map_err(|e| e.to_string())?;
    ensure(r.graph == m, || {
        format!(
            "pendant graph reduced to {} vertices",
            r.graph.num_vertices()
        )
    })?;
    within(t.elapsed(), CRITICAL_LIMIT)?;
    Ok(format!(
        "spindle critical with 7 certificates, pendant removed, {:.2?}",
        t.elapsed()
    ))
}

fn c9(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let e = |r: Result<UnitDistanceGraph, _>| {
        r.map_err(|e: cnp_core::udgraph::GraphError| e.to_string())
    };
    let moser = e(builtin::moser(ctx))?;
    let rhombus = e(builtin::rhombus(ctx))?;
    let t3 = Rotation::theta(3, ctx).map_err(|e| e.to_string())?;
    let t1 = Rotation::theta(1, ctx).map_err(|e| e.to_string())?;
    let pools: Vec<Vec<Point>> = vec![
        e(minkowski(&moser, &rhombus))?.points().to_vec(),
        e(minkowski(&rhombus, &e(rotate_graph(&rhombus, &t3))?))?
            .points()
            .to_vec(),
        e(union(&moser, &e(rotate_graph(&moser, &t1))?))?
            .points()
            .to_vec(),
        moser.points().to_vec(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut histogram = [0usize; 10];
    for i in 0..ORACLE_GRAPHS {
        let pool = &pools[i % pools.len()];
        let n = rng.gen_range(1..=ORACLE_MAX_VERTICES.min(pool.len()));
        let pts: Vec<Point> = pool.choose_multiple(&mut rng, n).cloned().collect();
        let g = UnitDistanceGraph::from_points(ctx, pts);
        let sat = chromatic_number(&g, ORACLE_MAX_VERTICES as u32)
            .map_err(|e| e.to_string())?
            .chi;
        let brute = brute_force_chromatic(&g);
        ensure(sat == brute, || {
            format!("graph {i}: SAT {sat}, brute force {brute}")
        })?;
        histogram[sat as usize] += 1;
    }
    within(t.elapsed(), ORACLE_LIMIT)?;
    Ok(format!(
        "{ORACLE_GRAPHS} graphs agree (chi 1..4: {:?}), {:.2?}",
        &histogram[1..5],
        t.elapsed()
    ))
}

fn c10(ctx: &FieldContext) -> Check {
    let t = Instant::now();
    let w = builtin::three_wheel(ctx).map_err(|e| e.to_string())?;
    let half = Rotation::theta(3, ctx)
        .and_then(|r| r.half())
        .map_err(|e| e.to_string())?;
    let rep = merge_rotated(&w, &w, &half).map_err(|e| e.to_string())?;
    ensure(degree_stats(&w).average == ratio(36, 19), || {
        format!("{}", degree_stats(&w).average)
    })?;
    ensure(rep.average_degree_after == ratio(120, 37), || {
        format!("{}", rep.average_degree_after)
    })?;
    within(t.elapsed(), MERGE_LIMIT)?;
    Ok(format!("36/19 -> 120/37, {:.2?}", t.elapsed()))
}

fn c11(ctx: &FieldContext) -> Outcome {
    let Ok(path) = std::env::var("CNP_G553") else {
        return Outcome::Skip("CNP_G553 not set; published graphs not ingested".into());
    };
    let run = || -> Check {
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
        let t = Instant::now();
        let g = import_graph(ctx, &text).map_err(|e| e.to_string())?;
        g.validate().map_err(|e| e.to_string())?;
        let detail = refutation_and_coloring(&g, 4)?;
        within(t.elapsed(), G553_LIMIT)?;
        let part = partition_by_field(&g);
        let mut out = format!(
            "{}/{} validated: {detail}, {:.2?}; parts large {} small {}",
            g.num_vertices(),
            g.num_edges(),
            t.elapsed(),
            part.large.len(),
            part.small.len()
        );
        ensure([133, 134].contains(&part.small.len()), || out.clone())?;
        if let Ok(spath) = std::env::var("CNP_S199") {
            let text = std::fs::read_to_string(&spath).map_err(|e| format!("{spath}: {e}"))?;
            let s199 = import_graph(ctx, &text).map_err(|e| e.to_string())?;
            ensure((s199.num_vertices(), s199.num_edges()) == (199, 888), || {
                format!("S199 has {}/{}", s199.num_vertices(), s199.num_edges())
            })?;
            let sym = symmetries(&s199);
            out.push_str(&format!(", S199 199/888 rotations {:?} mirror {}", sym.rotations, sym.mirror));
        }
        if let Ok(mpath) = std::env::var("CNP_G553_MARKED") {
            let marked: Vec<usize> = std::fs::read_to_string(&mpath)
                .map_err(|e| format!("{mpath}: {e}"))?
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| format!("bad vertex id {s:?}")))
                .collect::<Result<_, _>>()?;
            let large = g.induced(&part.large);
            let center = large.origin_vertex().ok_or("no origin in the large part")?;
            let rows = enumerate_patterns(&large, center, &marked, 4, &SolverConfig::default())
                .map_err(|e| e.to_string())?;
            ensure(rows.len() == 20, || format!("{} pattern rows", rows.len()))?;
            out.push_str(", 20 pattern rows");
        }
        Ok(out)
    };
    match run() {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn report(n: u32, name: &str, outcome: Outcome, failed: &mut u32) {
    let (tag, detail) = match outcome {
        Outcome::Pass(d) => ("PASS", d),
        Outcome::Fail(d) => {
            *failed += 1;
            ("FAIL", d)
        }
        Outcome::Skip(d) => ("SKIPPED", d),
    };
    println!("{tag:7} {n:2} {name}: {detail}");
}

fn outcome(c: Check) -> Outcome {
    match c {
        Ok(s) => Outcome::Pass(s),
        Err(s) => Outcome::Fail(s),
    }
}

fn main() {
    let ctx = FieldContext::standard();
    let mut failed = 0;
    report(1, "moser spindle", outcome(c1(&ctx)), &mut failed);
    report(2, "V31", outcome(c2(&ctx)), &mut failed);
    report(3, "V151", outcome(c3(&ctx)), &mut failed);
    report(4, "V1939", outcome(c4(&ctx)), &mut failed);
    let union_graph = builtin::v1939_theta4(&ctx).expect("union graph");
    report(
        5,
        "chi >= 5 on V1939 and its theta4 copy",
        outcome(c5(&union_graph)),
        &mut failed,
    );
    let mut descended = None;
    report(
        6,
        "descent",
        outcome(c6(&union_graph, &mut descended)),
        &mut failed,
    );
    report(
        7,
        "proof tooling",
        outcome(c7(&ctx, &union_graph, descended.as_ref())),
        &mut failed,
    );
    report(8, "criticality", outcome(c8(&ctx)), &mut failed);
    report(9, "oracle equivalence", outcome(c9(&ctx)), &mut failed);
    report(10, "merge statistics", outcome(c10(&ctx)), &mut failed);
    report(11, "published graphs", c11(&ctx), &mut failed);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
