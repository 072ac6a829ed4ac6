mod error;
mod expr;
mod render;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use cnp_core::analyze::{
    chromatic_number_with, count_patterns, degree_stats, enumerate_patterns, partition_by_field, vertices_at_radius,
    PatternRow,
};
use cnp_core::cdcl::{self, RestartPolicy, SolveStatus, SolverConfig};
use cnp_core::cnf::Cnf;
use cnp_core::drat::{self, DratProof, TextProofWriter, Verdict};
use cnp_core::encode::{encode, shuffle, ClauseTag, ColoringCnf};
use cnp_core::exactnum::FieldContext;
use cnp_core::external::ExternalSolver;
use cnp_core::graphio::{graph_to_string, import_graph, parse_expr, parse_graph, write_graph};
use cnp_core::shrink::{criticalize_edges, criticalize_vertices, ShrinkConfig, ShrinkRun};
use cnp_core::udgraph::UnitDistanceGraph;

use error::{Class, CliError};

#[derive(Parser)]
#[command(name = "cnp", version, about = "Unit-distance graphs, coloring formulas and DRAT proofs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph from a built-in name or an expression.
    Construct {
        /// e.g. `v31`, `union(v1939, rotate(theta4, v1939))`, `@file.graph`
        expr: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode k-colorability as DIMACS, with a clause tag sidecar.
    Encode {
        /// Graph file, `-` for stdin, or a construct expression.
        #[arg(default_value = "-")]
        graph: String,
        #[arg(short)]
        k: u32,
        /// Fix the colors of the anchor triangle (0,0), (1,0), (1/2,√3/2).
        #[arg(long)]
        symmetry_break: bool,
        /// Shuffle clauses and literals with this seed.
        #[arg(long)]
        shuffle: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Tag sidecar path (default: `<output>.tags` when -o is given).
        #[arg(long)]
        tags: Option<PathBuf>,
    },
    /// Solve a DIMACS formula.
    Solve {
        #[arg(default_value = "-")]
        cnf: String,
        /// Write the DRAT proof here when UNSAT.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Run an external solver; the template takes `{input}` and `{proof}`.
        /// Without a value the template comes from CNP_EXTERNAL_SOLVER.
        #[arg(long, num_args = 0..=1, default_missing_value = "")]
        external: Option<String>,
        /// Skip checking an external solver's proof.
        #[arg(long)]
        no_verify: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a DRAT proof (forward, or backward with --backward).
    Check {
        cnf: PathBuf,
        proof: PathBuf,
        #[arg(long)]
        backward: bool,
    },
    /// Backward-check a proof and extract the core and trimmed proof.
    Trim {
        cnf: PathBuf,
        proof: PathBuf,
        /// Clause tag sidecar; enables the tagged core map.
        #[arg(long)]
        tags: Option<PathBuf>,
        #[arg(long)]
        core: Option<PathBuf>,
        #[arg(long)]
        core_map: Option<PathBuf>,
        #[arg(long)]
        trimmed: Option<PathBuf>,
        /// Graph the formula encodes; writes the core subgraph to --subgraph.
        #[arg(long, requires = "subgraph", requires = "tags")]
        graph: Option<String>,
        #[arg(long)]
        subgraph: Option<PathBuf>,
    },
    /// Seeded randomized descent by proof-core trimming.
    Shrink(ShrinkArgs),
    /// Remove vertices (or edges) while k-colorability stays refuted.
    Criticalize {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(short)]
        k: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        edges: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// JSON file with one (k)-coloring of G−v per vertex.
        #[arg(long)]
        certificates: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Reports on a graph.
    Analyze {
        #[command(subcommand)]
        what: AnalyzeCmd,
    },
    /// Draw a graph as SVG.
    Render {
        #[arg(default_value = "-")]
        graph: String,
        /// Coloring file (one color per vertex, or `vertex color` lines).
        #[arg(long)]
        coloring: Option<PathBuf>,
        /// Compute a k-coloring with the solver instead.
        #[arg(long, conflicts_with = "coloring")]
        color_with: Option<u32>,
        #[arg(long, default_value_t = 800)]
        pixels: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a plain coordinate list into a graph file.
    Import {
        #[arg(default_value = "-")]
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Conflict budget per solver call.
    #[arg(long)]
    budget: Option<u64>,
    /// Wall-clock limit per solver call, in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
    #[arg(long, value_enum, default_value_t = Restarts::Luby)]
    restarts: Restarts,
}

#[derive(Clone, Copy, ValueEnum)]
enum Restarts {
    Luby,
    Lbd,
    Never,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut c = match self.restarts {
            Restarts::Lbd => SolverConfig::for_refutation(),
            _ => SolverConfig::default(),
        };
        if let Restarts::Never = self.restarts {
            c.restarts = RestartPolicy::Never;
        }
        c.seed = self.solver_seed;
        if self.budget.is_some() {
            c.max_conflicts = self.budget;
        }
        c.max_time = self.time_limit.map(Duration::from_secs_f64);
        c
    }
}

#[derive(Args)]
struct ShrinkArgs {
    #[arg(default_value = "-")]
    graph: String,
    #[arg(short, default_value_t = 4)]
    k: u32,
    /// Run seed; chosen from the clock and recorded when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    patience: usize,
    #[arg(long)]
    max_probes: Option<u64>,
    /// Probes evaluated in parallel per round.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Conflict budget per probe.
    #[arg(long)]
    budget: Option<u64>,
    /// Encode without symmetry breaking.
    #[arg(long)]
    no_symmetry_break: bool,
    /// Skip the (k+1)-coloring after each accepted probe (it is still
    /// computed once at the end).
    #[arg(long)]
    lazy_certify: bool,
    /// Extra solve-and-trim rounds on the clause core within each probe.
    #[arg(long, default_value_t = 0)]
    core_rounds: usize,
    /// Run manifest (JSON), rewritten after every round.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Continue the run stored in this manifest.
    #[arg(long, conflicts_with = "seed")]
    resume: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Chromatic number with certificates.
    Chromatic {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(long, default_value_t = 7)]
        kmax: u32,
        /// Write the optimal coloring here.
        #[arg(long)]
        coloring: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Distinct same-as-center patterns over marked vertices.
    Patterns {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(short, default_value_t = 4)]
        k: u32,
        /// Center vertex (default: the origin).
        #[arg(long)]
        center: Option<usize>,
        /// Marked vertices, comma separated, in column order.
        #[arg(long, value_delimiter = ',')]
        marked: Vec<usize>,
        /// Mark every vertex at this squared radius (appended, repeatable).
        #[arg(long)]
        radius_sq: Vec<String>,
        /// Count only rows where all of group A are 0 or all of group B are
        /// 0; groups are 1-based column lists `A;B`, e.g. `1,2,3;4,5,6`.
        #[arg(long)]
        either_zero: Option<String>,
        #[arg(long)]
        count_only: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Exact average degree and degree histogram.
    Degrees {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(long)]
        json: bool,
    },
    /// Rotations by multiples of 60° and the x-axis mirror that map the
    /// graph onto itself.
    Symmetry {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(long)]
        json: bool,
    },
    /// Split by coordinate field: Q(√3,√11) versus the rest.
    Partition {
        #[arg(default_value = "-")]
        graph: String,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cnp: {e}");
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.class.code() as u8)
        }
    }
}

type Res = Result<ExitCode, CliError>;

fn ctx() -> FieldContext {
    FieldContext::standard()
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p.display(), e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

fn read_text(arg: &str) -> Result<String, CliError> {
    let mut s = String::new();
    if arg == "-" {
        io::stdin().read_to_string(&mut s)?;
    } else {
        s = std::fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))?;
    }
    Ok(s)
}

fn read_cnf(arg: &str) -> Result<Cnf, CliError> {
    if arg == "-" {
        return Ok(Cnf::read_dimacs(io::stdin().lock())?);
    }
    let f = File::open(arg).map_err(|e| CliError::io(arg, e))?;
    Ok(Cnf::read_dimacs(BufReader::new(f))?)
}

fn read_proof(path: &Path) -> Result<DratProof, CliError> {
    DratProof::read_path(path).map_err(|e| match e {
        drat::DratError::Io(io) => CliError::io(path.display(), io),
        other => other.into(),
    })
}

fn read_tags(cnf: Cnf, path: &Path) -> Result<ColoringCnf, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    Ok(ColoringCnf::from_parts(cnf, BufReader::new(f))?)
}

fn emit_graph(g: &UnitDistanceGraph, out: &Option<PathBuf>) -> Result<(), CliError> {
    let w = open_out(out)?;
    write_graph(g, w)?;
    Ok(())
}

fn run(cmd: Command) -> Res {
    match cmd {
        Command::Construct { expr, output } => {
            let g = expr::eval(&ctx(), &expr)?;
            emit_graph(&g, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Encode {
            graph,
            k,
            symmetry_break,
            shuffle: seed,
            output,
            tags,
        } => {
            if k == 0 {
                return Err(CliError::parse("k must be positive"));
            }
            let g = expr::load_graph(&ctx(), &graph)?;
            let mut f = encode(&g, k, symmetry_break);
            if let Some(s) = seed {
                f = shuffle(&f, s);
            }
            let mut w = open_out(&output)?;
            f.cnf.write_dimacs(&mut w)?;
            w.flush()?;
            let tags = tags.or_else(|| output.as_ref().map(|o| with_suffix(o, ".tags")));
            if let Some(t) = tags {
                let file = File::create(&t).map_err(|e| CliError::io(t.display(), e))?;
                f.write_tags(BufWriter::new(file))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            cnf,
            proof,
            external,
            no_verify,
            solver,
        } => cmd_solve(&cnf, proof, external, no_verify, &solver),
        Command::Check { cnf, proof, backward } => {
            let f = read_cnf(&cnf.to_string_lossy())?;
            let p = read_proof(&proof)?;
            let verdict = if backward {
                match drat::trim(&f, &p) {
                    Ok(_) => Verdict::Accept,
                    Err(e) => return Err(e.into()),
                }
            } else {
                drat::check(&f, &p)
            };
            match verdict {
                Verdict::Accept => {
                    println!("s VERIFIED");
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Reject { step, reason } => {
                    println!("s NOT VERIFIED");
                    Err(CliError::new(Class::Verification, format!("step {step}: {reason:?}")))
                }
            }
        }
        Command::Trim {
            cnf,
            proof,
            tags,
            core,
            core_map,
            trimmed,
            graph,
            subgraph,
        } => {
            let f = read_cnf(&cnf.to_string_lossy())?;
            let p = read_proof(&proof)?;
            let rep = drat::trim(&f, &p)?;
            println!("s VERIFIED");
            println!(
                "c core {} of {} clauses; proof {} -> {} additions",
                rep.core_clause_indices.len(),
                f.len(),
                p.num_additions(),
                rep.trimmed_proof.num_additions()
            );
            if let Some(path) = core {
                let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
                rep.core_cnf(&f).write_dimacs(BufWriter::new(file))?;
            }
            if let Some(path) = trimmed {
                let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
                rep.trimmed_proof.write_text(BufWriter::new(file))?;
            }
            let tagged = match &tags {
                Some(t) => Some(read_tags(f.clone(), t)?),
                None => None,
            };
            if let Some(path) = core_map {
                let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
                let plain;
                let tag_list = match &tagged {
                    Some(cf) => &cf.tags,
                    None => {
                        plain = vec![ClauseTag::Extra; f.len()];
                        &plain
                    }
                };
                rep.write_core_map(tag_list, BufWriter::new(file))?;
            }
            if let (Some(g), Some(out), Some(cf)) = (graph, subgraph, tagged) {
                let g = expr::load_graph(&ctx(), &g)?;
                if cf.num_vertices != g.num_vertices() {
                    return Err(CliError::parse("tag sidecar does not match the graph's vertex count"));
                }
                let h = drat::core_to_subgraph(&g, &cf, &rep);
                eprintln!("c core subgraph: {} vertices, {} edges", h.num_vertices(), h.num_edges());
                emit_graph(&h, &Some(out))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Shrink(args) => cmd_shrink(args),
        Command::Criticalize {
            graph,
            k,
            seed,
            edges,
            output,
            certificates,
            solver,
        } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let mut cfg = ShrinkConfig::new(k);
            cfg.solver = solver.config();
            if edges {
                let r = criticalize_edges(&g, &cfg, seed)?;
                eprintln!(
                    "c removed {} of {} edges{}",
                    r.removed_edges,
                    g.num_edges(),
                    if r.critical { "" } else { " (budget hit, not edge-critical)" }
                );
                emit_graph(&r.graph, &output)?;
            } else {
                let r = criticalize_vertices(&g, &cfg, seed)?;
                eprintln!(
                    "c removed {} of {} vertices{}",
                    r.removed,
                    g.num_vertices(),
                    if r.critical { "" } else { " (budget hit, not vertex-critical)" }
                );
                if let Some(path) = certificates {
                    let doc = serde_json::json!({
                        "k": k,
                        "critical": r.critical,
                        "refutation": r.refutation,
                        "certificates": r.certificates,
                    });
                    write_text(&path, &serde_json::to_string_pretty(&doc).expect("json"))?;
                }
                emit_graph(&r.graph, &output)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { what } => cmd_analyze(what),
        Command::Render {
            graph,
            coloring,
            color_with,
            pixels,
            output,
        } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let colors = match (coloring, color_with) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.display(), e))?;
                    let c = render::parse_coloring(&text, g.num_vertices()).map_err(CliError::parse)?;
                    if !cnp_core::encode::is_proper_coloring(&g, &c) {
                        eprintln!("c warning: the coloring is not proper");
                    }
                    Some(c)
                }
                (None, Some(k)) => match cnp_core::analyze::decide_with_search(
                    &g,
                    k,
                    &SolverConfig::default(),
                    cnp_core::analyze::search_moves(&g),
                )? {
                    cnp_core::analyze::Decision::Colorable(c) => Some(c),
                    cnp_core::analyze::Decision::Refuted(_) => {
                        return Err(CliError::new(Class::Outcome, format!("graph is not {k}-colorable")))
                    }
                },
                (None, None) => None,
            };
            let mut w = open_out(&output)?;
            w.write_all(render::svg(&g, colors.as_deref(), pixels).as_bytes())?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Import { input, output } => {
            let text = read_text(&input)?;
            let g = import_graph(&ctx(), &text)?;
            emit_graph(&g, &output)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn print_model(model: &cnp_core::cnf::Assignment) {
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let mut line = String::from("v");
    for l in model.true_lits() {
        let tok = format!(" {}", l.to_dimacs());
        if line.len() + tok.len() > 78 {
            let _ = writeln!(w, "{line}");
            line = String::from("v");
        }
        line.push_str(&tok);
    }
    let _ = writeln!(w, "{line} 0");
}

fn cmd_solve(cnf_arg: &str, proof: Option<PathBuf>, external: Option<String>, no_verify: bool, sa: &SolverArgs) -> Res {
    let cnf = read_cnf(cnf_arg)?;
    let result = if let Some(template) = external {
        let mut solver = if template.is_empty() {
            ExternalSolver::from_env().ok_or_else(|| {
                CliError::new(
                    Class::External,
                    format!("--external without a template and {} is unset", cnp_core::external::SOLVER_ENV),
                )
            })?
        } else {
            ExternalSolver::new(template)
        };
        solver.timeout = sa.time_limit.map(Duration::from_secs_f64);
        // External solvers need a real file.
        let tmp;
        let input: PathBuf = if cnf_arg == "-" {
            tmp = tempfile::Builder::new().suffix(".cnf").tempfile()?;
            cnf.write_dimacs(BufWriter::new(tmp.as_file()))?;
            tmp.path().to_path_buf()
        } else {
            PathBuf::from(cnf_arg)
        };
        let r = solver.solve(&input, &cnf, proof.as_deref())?;
        if r.status == SolveStatus::Unsat && !no_verify {
            let p = r.proof.as_ref().expect("UNSAT carries a proof");
            if let Verdict::Reject { step, reason } = drat::check(&cnf, p) {
                return Err(CliError::new(
                    Class::Verification,
                    format!("external proof rejected at step {step}: {reason:?}"),
                ));
            }
            eprintln!("c external proof verified ({} steps)", p.len());
        }
        r
    } else {
        let cfg = SolverConfig {
            emit_proof: proof.is_some(),
            ..sa.config()
        };
        match &proof {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
                let mut sink = TextProofWriter::new(BufWriter::new(file));
                let r = cdcl::solve_streaming(&cnf, &cfg, &mut sink);
                sink.finish()?.flush()?;
                r
            }
            None => cdcl::solve(&cnf, &cfg),
        }
    };
    eprintln!(
        "c conflicts {} decisions {} propagations {} time {:.3}s",
        result.stats.conflicts,
        result.stats.decisions,
        result.stats.propagations,
        result.stats.runtime.as_secs_f64()
    );
    match result.status {
        SolveStatus::Sat => {
            println!("s SATISFIABLE");
            print_model(result.model.as_ref().expect("SAT carries a model"));
            Ok(ExitCode::SUCCESS)
        }
        SolveStatus::Unsat => {
            println!("s UNSATISFIABLE");
            Ok(ExitCode::SUCCESS)
        }
        SolveStatus::Unknown => {
            println!("s UNKNOWN");
            Err(CliError::new(Class::Budget, "solver budget exhausted"))
        }
    }
}

/// Everything needed to resume a descent.
#[derive(Serialize, Deserialize)]
struct Manifest {
    input: String,
    jobs: usize,
    run: ShrinkRun,
    /// Current graph in graph-file syntax.
    graph: String,
}

fn save_manifest(path: &Path, m: &Manifest) -> Result<(), CliError> {
    let tmp = with_suffix(path, ".tmp");
    write_text(&tmp, &serde_json::to_string_pretty(m).expect("json"))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path.display(), e))
}

fn cmd_shrink(a: ShrinkArgs) -> Res {
    let (mut run, input, jobs) = match &a.resume {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
            let m: Manifest =
                serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            let g = parse_graph(&m.graph)?;
            let mut run = m.run.resume(g);
            run.config.patience = a.patience;
            if a.max_probes.is_some() {
                run.config.max_probes = a.max_probes;
            }
            (run, m.input, m.jobs)
        }
        None => {
            let g = expr::load_graph(&ctx(), &a.graph)?;
            let seed = a.seed.unwrap_or_else(|| {
                let s = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_nanos() as u64);
                eprintln!("c no --seed given; using {s}");
                s
            });
            let mut cfg = ShrinkConfig::new(a.k);
            cfg.patience = a.patience;
            cfg.max_probes = a.max_probes;
            cfg.symmetry_breaking = !a.no_symmetry_break;
            cfg.certify_colorable = !a.lazy_certify;
            cfg.core_rounds = a.core_rounds;
            if a.budget.is_some() {
                cfg.solver.max_conflicts = a.budget;
            }
            (ShrinkRun::new(g, cfg, seed), a.graph.clone(), a.jobs)
        }
    };
    let manifest_path = a.manifest.clone().or_else(|| a.output.as_ref().map(|o| with_suffix(o, ".manifest.json")));
    let quiet = a.quiet;
    let mut save_err = None;
    let mut on_round = |r: &ShrinkRun| {
        if !quiet {
            if let Some(p) = r.log.last() {
                eprintln!(
                    "c probe {} {:?}: {} vertices, {} edges",
                    p.index, p.outcome, p.vertices, p.edges
                );
            }
        }
        if let Some(path) = &manifest_path {
            let m = Manifest {
                input: input.clone(),
                jobs,
                run: r.clone(),
                graph: graph_to_string(r.graph()),
            };
            if let Err(e) = save_manifest(path, &m) {
                save_err.get_or_insert(e);
            }
        }
    };
    run.run_parallel(jobs, &mut on_round)?;
    run.certify()?;
    on_round(&run);
    if let Some(e) = save_err {
        return Err(e);
    }
    let g = run.graph();
    eprintln!(
        "c final: {} vertices, {} edges, {:?}; refuted at k={} and {}-colored",
        g.num_vertices(),
        g.num_edges(),
        run.status,
        run.config.k,
        run.config.k + 1
    );
    emit_graph(g, &a.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(what: AnalyzeCmd) -> Res {
    match what {
        AnalyzeCmd::Chromatic {
            graph,
            kmax,
            coloring,
            json,
            solver,
        } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let cert = chromatic_number_with(&g, kmax.max(1), &solver.config())?;
            if json {
                let doc = serde_json::json!({
                    "chi": cert.chi,
                    "coloring": cert.coloring,
                    "refutation": cert.refutation,
                });
                println!("{doc}");
            } else {
                println!("{}", cert.chi);
            }
            if let Some(path) = coloring {
                let text: Vec<String> = cert.coloring.iter().map(u32::to_string).collect();
                write_text(&path, &(text.join("\n") + "\n"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        AnalyzeCmd::Patterns {
            graph,
            k,
            center,
            mut marked,
            radius_sq,
            either_zero,
            count_only,
            solver,
        } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let center = match center {
                Some(c) => c,
                None => g
                    .origin_vertex()
                    .ok_or_else(|| CliError::parse("graph has no origin; pass --center"))?,
            };
            for r in &radius_sq {
                let rsq = parse_expr(g.context(), r)?;
                marked.extend(vertices_at_radius(&g, &rsq));
            }
            let groups = either_zero.map(|s| parse_groups(&s, marked.len())).transpose()?;
            let cfg = solver.config();
            let pred = groups.map(|(ga, gb)| {
                move |row: &PatternRow| ga.iter().all(|&i| !row.bits[i]) || gb.iter().all(|&i| !row.bits[i])
            });
            if count_only {
                let n = count_patterns(
                    &g,
                    center,
                    &marked,
                    k,
                    pred.as_ref().map(|p| p as &dyn Fn(&PatternRow) -> bool),
                    &cfg,
                )?;
                println!("{n}");
            } else {
                let rows = enumerate_patterns(&g, center, &marked, k, &cfg)?;
                let header: Vec<String> = (1..=marked.len()).map(|i| format!("v{i}")).collect();
                println!("c center {center}; marked {:?}", marked);
                println!("c {}", header.join(" "));
                let mut n = 0;
                for row in rows.iter().filter(|r| pred.as_ref().map_or(true, |p| p(r))) {
                    println!("{row}");
                    n += 1;
                }
                println!("c {n} patterns");
            }
            Ok(ExitCode::SUCCESS)
        }
        AnalyzeCmd::Symmetry { graph, json } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let s = cnp_core::analyze::symmetries(&g);
            if json {
                println!("{}", serde_json::to_string(&s).expect("json"));
            } else {
                let r: Vec<String> = s.rotations.iter().map(u32::to_string).collect();
                println!("rotations {} mirror {}", r.join(","), s.mirror);
            }
            Ok(ExitCode::SUCCESS)
        }
        AnalyzeCmd::Degrees { graph, json } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let d = degree_stats(&g);
            if json {
                println!("{}", serde_json::to_string(&d).expect("json"));
            } else {
                println!("vertices {} edges {} average {}", d.vertices, d.edges, d.average);
                for (deg, count) in &d.histogram {
                    println!("degree {deg} {count}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        AnalyzeCmd::Partition { graph, json } => {
            let g = expr::load_graph(&ctx(), &graph)?;
            let p = partition_by_field(&g);
            if json {
                println!("{}", serde_json::to_string(&p).expect("json"));
            } else {
                println!("large {} small {}", p.large.len(), p.small.len());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// `1,2,3;4,5` → two zero-based column groups.
fn parse_groups(s: &str, columns: usize) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let (a, b) = s
        .split_once(';')
        .ok_or_else(|| CliError::parse("--either-zero expects two groups separated by ';'"))?;
    let group = |t: &str| -> Result<Vec<usize>, CliError> {
        t.split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| (1..=columns).contains(&i))
                    .map(|i| i - 1)
                    .ok_or_else(|| CliError::parse(format!("bad column {x:?}")))
            })
            .collect()
    };
    Ok((group(a)?, group(b)?))
}
