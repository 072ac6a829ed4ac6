//! Exact unit-distance graphs, SAT-certified chromatic bounds, and
//! proof-driven graph shrinking.
//!
//! Points live in a multiquadratic field ([`exactnum`], [`geometry`]), graphs
//! are built with Minkowski sums, rotations and unions ([`udgraph`]), and
//! colorability goes through a CNF encoding ([`encode`]) into a CDCL solver
//! ([`cdcl`]) whose refutations are checked and trimmed by [`drat`]. The
//! trimmed cores drive [`shrink`]. The guide in `book/` walks through all of
//! it.

pub mod analyze;
pub mod cdcl;
pub mod cnf;
pub mod drat;
pub mod encode;
pub mod exactnum;
pub mod external;
pub mod geometry;
pub mod graphio;
pub mod localsearch;
pub mod shrink;
pub mod udgraph;

// Runs the guide's snippets as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exact-arithmetic.md")]
    mod exact_arithmetic {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/coloring-as-sat.md")]
    mod coloring_as_sat {}
    #[doc = include_str!("../../../book/src/proofs-and-cores.md")]
    mod proofs_and_cores {}
    #[doc = include_str!("../../../book/src/shrinking.md")]
    mod shrinking {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
