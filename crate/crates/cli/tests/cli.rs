use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use cnp_core::cdcl::{solve, SolveStatus, SolverConfig};
use cnp_core::cnf::Cnf;
use cnp_core::encode::encode;
use cnp_core::exactnum::FieldContext;
use cnp_core::udgraph::{builtin, UnitDistanceGraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cnp")
}

fn cnp(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn cnp")
}

fn cnp_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(bin())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn cnp");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn construct_pipes_into_analyze() {
    let g = cnp(&["construct", "v31"]);
    assert!(g.status.success());
    let out = cnp_stdin(&["analyze", "chromatic"], &g.stdout);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "3");

    let out = cnp_stdin(&["analyze", "degrees"], &cnp(&["construct", "moser"]).stdout);
    assert!(stdout(&out).starts_with("vertices 7 edges 11 average 22/7"));
}

#[test]
fn moser_refutation_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, cnf, proof) = (p(dir.path(), "m.graph"), p(dir.path(), "m.cnf"), p(dir.path(), "m.drat"));
    assert!(cnp(&["construct", "moser", "-o", s(&graph)]).status.success());
    assert!(cnp(&["encode", s(&graph), "-k", "3", "--symmetry-break", "-o", s(&cnf)]).status.success());
    let out = cnp(&["solve", s(&cnf), "--proof", s(&proof)]);
    assert_eq!(stdout(&out).trim(), "s UNSATISFIABLE");
    let out = cnp(&["check", s(&cnf), s(&proof)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "s VERIFIED");
    let out = cnp(&["check", s(&cnf), s(&proof), "--backward"]);
    assert!(out.status.success());

    let (core, map, sub) = (p(dir.path(), "core.cnf"), p(dir.path(), "core.map"), p(dir.path(), "sub.graph"));
    let tags = format!("{}.tags", s(&cnf));
    let out = cnp(&[
        "trim", s(&cnf), s(&proof), "--tags", &tags, "--core", s(&core), "--core-map", s(&map), "--graph", s(&graph),
        "--subgraph", s(&sub),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let core_cnf = Cnf::parse_dimacs(&std::fs::read_to_string(&core).unwrap()).unwrap();
    assert_eq!(solve(&core_cnf, &SolverConfig::default()).status, SolveStatus::Unsat);
    let map = std::fs::read_to_string(&map).unwrap();
    // The three anchors are pinned by unit clauses and need no ALO clause.
    assert_eq!(map.lines().filter(|l| l.contains(" alo ")).count(), 4);
    assert!(std::fs::read_to_string(&sub).unwrap().contains("vertices=7 edges=11"));
    assert_eq!(map.lines().count(), core_cnf.len());

    // Encoding at k=4 is satisfiable and the model lines cover every vertex.
    let out = cnp(&["encode", s(&graph), "-k", "4"]);
    let sat = cnp_stdin(&["solve"], &out.stdout);
    let text = stdout(&sat);
    assert!(text.starts_with("s SATISFIABLE\n"));
    assert!(text.lines().any(|l| l.starts_with("v ")));
}

#[test]
fn render_marks_one_fifth_color() {
    let dir = tempfile::tempdir().unwrap();
    let coloring = p(dir.path(), "c.txt");
    std::fs::write(&coloring, "5\n1\n2\n3\n4\n1\n2\n").unwrap();
    let out = cnp(&["render", "moser", "--coloring", s(&coloring)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = stdout(&out);
    assert_eq!(svg.matches("class=\"color5\"").count(), 1);
    assert!(svg.starts_with("<?xml"));
    // 30 fractional digits in rendered coordinates.
    let cx = svg.split("cx=\"").nth(1).unwrap().split('"').next().unwrap();
    assert_eq!(cx.split('.').nth(1).map(str::len), Some(30));

    let out = cnp(&["render", "moser", "--color-with", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).matches("class=\"color").count(), 7);
}

#[test]
fn error_classes_have_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |o: &Output| o.status.code().unwrap();
    let machine = |o: &Output| {
        let last = stderr(o).lines().last().unwrap().to_string();
        serde_json::from_str::<serde_json::Value>(&last).unwrap()
    };

    let o = cnp(&["construct", "union(moser"]);
    assert_eq!(code(&o), 3);
    assert_eq!(machine(&o)["error"], "parse");

    let o = cnp(&["check", "/nonexistent.cnf", "/nonexistent.drat"]);
    assert_eq!(code(&o), 7);
    assert_eq!(machine(&o)["code"], 7);

    let cnf = p(dir.path(), "f.cnf");
    let bad = p(dir.path(), "bad.drat");
    std::fs::write(&cnf, "p cnf 2 3\n1 2 0\n-1 2 0\n1 -2 0\n").unwrap();
    std::fs::write(&bad, "-2 0\n0\n").unwrap();
    let o = cnp(&["check", s(&cnf), s(&bad)]);
    assert_eq!(code(&o), 6);
    assert_eq!(stdout(&o).trim(), "s NOT VERIFIED");

    let php = p(dir.path(), "php.cnf");
    std::fs::write(&php, pigeonhole(7, 6).to_dimacs_string()).unwrap();
    let o = cnp(&["solve", s(&php), "--budget", "5"]);
    assert_eq!(code(&o), 5);
    assert_eq!(stdout(&o).trim(), "s UNKNOWN");

    let o = cnp(&["analyze", "chromatic", "moser", "--kmax", "3"]);
    assert_eq!(code(&o), 9);

    let o = cnp(&["solve", s(&cnf), "--external", "/nonexistent/solver {input}"]);
    assert_eq!(code(&o), 8);
    let o = cnp(&["solve", s(&cnf), "--external", "echo 's SATISFIABLE'; echo 'v -1 -2 0'"]);
    assert_eq!(code(&o), 6);
}

fn pigeonhole(pigeons: i32, holes: i32) -> Cnf {
    let var = |p: i32, h: i32| p * holes + h + 1;
    let mut lists: Vec<Vec<i32>> = (0..pigeons).map(|p| (0..holes).map(|h| var(p, h)).collect()).collect();
    for h in 0..holes {
        for a in 0..pigeons {
            for b in a + 1..pigeons {
                lists.push(vec![-var(a, h), -var(b, h)]);
            }
        }
    }
    let refs: Vec<&[i32]> = lists.iter().map(Vec::as_slice).collect();
    Cnf::from_dimacs_lists(&refs)
}

/// Random small unit-distance graphs: subsets of V31 ∪ spindle points.
fn random_graphs(n: usize, seed: u64) -> Vec<UnitDistanceGraph> {
    let c = FieldContext::standard();
    let mut pool: Vec<_> = builtin::v31(&c).unwrap().points().to_vec();
    for q in builtin::moser(&c).unwrap().points() {
        if !pool.contains(q) {
            pool.push(q.clone());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let size = 2 + i % 8;
            let pts: Vec<_> = pool.choose_multiple(&mut rng, size).cloned().collect();
            UnitDistanceGraph::from_points(&c, pts)
        })
        .collect()
}

#[test]
fn external_adapter_matches_builtin_solver() {
    let dir = tempfile::tempdir().unwrap();
    // The external solver is this same binary behind a shell template.
    let template = format!("'{}' solve {{input}} --proof {{proof}}", bin());
    let mut statuses = [0usize; 2];
    for (i, g) in random_graphs(100, 7).iter().enumerate() {
        // k = 2 makes every triangle a refutation.
        let f = encode(g, 2 + (i % 2) as u32, i % 4 == 1);
        let path = p(dir.path(), &format!("g{i}.cnf"));
        std::fs::write(&path, f.cnf.to_dimacs_string()).unwrap();
        let builtin = solve(&f.cnf, &SolverConfig::default()).status;
        let out = cnp(&["solve", s(&path), "--external", &template]);
        assert!(out.status.success(), "{}", stderr(&out));
        let expect = match builtin {
            SolveStatus::Sat => "s SATISFIABLE",
            SolveStatus::Unsat => "s UNSATISFIABLE",
            SolveStatus::Unknown => unreachable!(),
        };
        assert_eq!(stdout(&out).lines().next().unwrap(), expect, "instance {i}");
        statuses[(builtin == SolveStatus::Unsat) as usize] += 1;
    }
    // Both outcomes are exercised.
    assert!(statuses[0] > 0 && statuses[1] > 0, "{statuses:?}");
}

#[test]
fn external_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = p(dir.path(), "x.cnf");
    std::fs::write(&cnf, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let o = Command::new(bin())
        .args(["solve", s(&cnf), "--external"])
        .env("CNP_EXTERNAL_SOLVER", "printf '0\\n' > {proof}; echo 's UNSATISFIABLE'")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "s UNSATISFIABLE");
    assert!(stderr(&o).contains("external proof verified"));
    let o = Command::new(bin())
        .args(["solve", s(&cnf), "--external"])
        .env_remove("CNP_EXTERNAL_SOLVER")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(8));
}

#[test]
fn shrink_writes_resumable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let pts = p(dir.path(), "extra.txt");
    // The spindle plus two points that cannot matter.
    std::fs::write(&pts, "5 5\n-1 0\n").unwrap();
    let graph = p(dir.path(), "g.graph");
    let expr = format!("union(moser, import({}))", s(&pts));
    let o = cnp(&["construct", &expr, "-o", s(&graph)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let out = p(dir.path(), "small.graph");
    let manifest = p(dir.path(), "run.json");
    let o = cnp(&[
        "shrink", s(&graph), "-k", "3", "--seed", "4", "--patience", "3", "--manifest", s(&manifest), "-o", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let small = std::fs::read_to_string(&out).unwrap();
    assert!(small.starts_with("udgraph ") && small.contains("vertices=7 edges=11"));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["run"]["seed"], 4);
    assert_eq!(m["run"]["status"], "Fixpoint");
    assert!(m["run"]["coloring"].is_array());
    assert_eq!(m["run"]["removed"].as_array().unwrap().len(), 2);

    // Resuming a finished run adds nothing and keeps the result.
    let again = p(dir.path(), "again.graph");
    let o = cnp(&["shrink", "--resume", s(&manifest), "--patience", "3", "-o", s(&again)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&again).unwrap(), small);

    // Parallel probes give the same final graph here.
    let par = p(dir.path(), "par.graph");
    let o = cnp(&["shrink", s(&graph), "-k", "3", "--seed", "4", "--patience", "4", "--jobs", "2", "-o", s(&par)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&par).unwrap(), small);
}

#[test]
fn criticalize_emits_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let certs = p(dir.path(), "certs.json");
    let o = cnp(&["criticalize", "moser", "-k", "3", "--seed", "1", "--certificates", s(&certs)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("vertices=7 edges=11"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&certs).unwrap()).unwrap();
    assert_eq!(doc["critical"], true);
    assert_eq!(doc["certificates"].as_array().unwrap().len(), 7);

    let o = cnp(&["criticalize", "moser", "-k", "3", "--seed", "1", "--edges"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("removed 0 of 11 edges"));
}

#[test]
fn patterns_on_small_graphs() {
    // one bit per marked vertex
    let o = cnp(&["analyze", "patterns", "rhombus", "-k", "3", "--marked", "1,2,3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('c')).map(String::from).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 3));
    let o = cnp(&["analyze", "patterns", "rhombus", "-k", "3", "--marked", "1,2,3", "--count-only"]);
    assert_eq!(stdout(&o).trim(), rows.len().to_string());
    let o = cnp(&[
        "analyze", "patterns", "rhombus", "-k", "3", "--marked", "1,2,3", "--count-only", "--either-zero", "1;2",
    ]);
    let constrained: usize = stdout(&o).trim().parse().unwrap();
    assert!(constrained <= rows.len());
}

#[test]
fn partition_symmetry_and_import() {
    let o = cnp(&["analyze", "partition", "v31"]);
    assert_eq!(stdout(&o).trim(), "large 31 small 1");
    let o = cnp(&["analyze", "symmetry", "v31"]);
    assert_eq!(stdout(&o).trim(), "rotations 0,60,120,180,240,300 mirror true");
    let o = cnp(&["analyze", "symmetry", "moser"]);
    assert_eq!(stdout(&o).trim(), "rotations 0 mirror false");
    let o = cnp_stdin(&["import"], b"# two points\n0 0\n(1, 0)\n");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("vertices=2 edges=1"));
}
