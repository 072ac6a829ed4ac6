use proptest::prelude::*;

use cnp_core::cdcl::{solve, SolveStatus, SolverConfig};
use cnp_core::cnf::{Cnf, Lit};
use cnp_core::drat::{check, trim, DratProof};

fn brute_sat(f: &Cnf) -> bool {
    let n = f.num_vars;
    (0u32..1 << n).any(|bits| {
        f.clauses.iter().all(|c| {
            c.iter().any(|l| {
                let v = bits >> (l.var() - 1) & 1 == 1;
                v != l.is_negative()
            })
        })
    })
}

/// Random 3-CNF near the satisfiability threshold.
fn cnf() -> impl Strategy<Value = Cnf> {
    (4u32..=12).prop_flat_map(|n| {
        let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| Lit::new(if s { v } else { -v }));
        let m = (n as f64 * 4.3) as usize;
        prop::collection::vec(prop::collection::vec(lit, 1..=3), m - 4..=m + 4).prop_map(
            move |cs| {
                let mut f = Cnf::new(n);
                for c in cs {
                    f.add_clause(c);
                }
                f
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solver_agrees_with_enumeration(f in cnf()) {
        let cfg = SolverConfig { emit_proof: true, ..SolverConfig::default() };
        let r = solve(&f, &cfg);
        if brute_sat(&f) {
            prop_assert_eq!(r.status, SolveStatus::Sat);
            let m = r.model.unwrap();
            prop_assert_eq!(m.first_falsified(&f.clauses), None);
        } else {
            prop_assert_eq!(r.status, SolveStatus::Unsat);
            let p = r.proof.unwrap();
            prop_assert!(check(&f, &p).is_accept());
            let rep = trim(&f, &p).unwrap();
            let core = rep.core_cnf(&f);
            prop_assert!(!brute_sat(&core));
            prop_assert!(check(&core, &rep.trimmed_proof).is_accept());
            prop_assert!(rep.trimmed_proof.len() <= p.len());
        }
    }

    #[test]
    fn empty_proof_is_rejected_unless_trivial(f in cnf()) {
        let has_empty = f.clauses.iter().any(|c| c.is_empty());
        let mut p = DratProof::new();
        p.push_add(&[]);
        // A lone empty clause is accepted only when unit propagation alone
        // already refutes the formula, which implies unsatisfiability.
        if check(&f, &p).is_accept() {
            prop_assert!(has_empty || !brute_sat(&f));
        }
    }
}
