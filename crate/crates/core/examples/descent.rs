//! Randomized descent on V1939 ∪ θ4(V1939), printing one line per probe.
//!
//! cargo run --release --example descent -- [seed] [patience] [core rounds]

use std::time::Instant;

use cnp_core::exactnum::FieldContext;
use cnp_core::shrink::{ShrinkConfig, ShrinkRun};
use cnp_core::udgraph::builtin;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let patience: usize = args.next().map_or(20, |s| s.parse().expect("patience"));
    let rounds: usize = args.next().map_or(0, |s| s.parse().expect("core rounds"));
    let ctx = FieldContext::standard();
    let g = builtin::v1939_theta4(&ctx).expect("construction");
    println!(
        "start: {} vertices, {} edges",
        g.num_vertices(),
        g.num_edges()
    );
    let mut cfg = ShrinkConfig::new(4);
    cfg.patience = patience;
    cfg.certify_colorable = false;
    cfg.core_rounds = rounds;
    let mut run = ShrinkRun::new(g, cfg, seed);
    let t = Instant::now();
    run.run(|r| {
        let p = r.log.last().unwrap();
        let (c, s, tr) = p
            .report
            .as_ref()
            .map_or((0, 0, 0), |x| (x.rounds, x.solve_ms, x.trim_ms));
        println!(
            "probe {:3} {:?}: {} vertices ({:?} candidate), {} rounds, solve {} ms, trim {} ms, total {:.1?}",
            p.index, p.outcome, p.vertices, p.candidate_vertices, c, s, tr, t.elapsed()
        );
    })
    .expect("descent");
    let t2 = Instant::now();
    run.certify().expect("certify");
    println!(
        "final: {} vertices, {} edges, {:?}; certified in {:.1?}",
        run.graph().num_vertices(),
        run.graph().num_edges(),
        run.status,
        t2.elapsed()
    );
}
