//! Library results against independent reference computations.

mod common;

use bpbe::keyspace::{keyspace_conventional, keyspace_proposed};
use bpbe::metrics::{direct_comparison, largest_component, neighbor_comparison, AssemblyResult};
use num_bigint::BigUint;

#[test]
fn keyspace_matches_reference_table() {
    let rows = common::keyspace_vectors();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let c = keyspace_conventional(row.blocks).unwrap();
        assert_eq!(
            [c.n_p, c.n_d, c.n_n, c.n_c, c.n_a],
            row.conventional,
            "L={}",
            row.blocks
        );
        let p = keyspace_proposed(row.blocks).unwrap();
        assert_eq!(
            [p.n_p, p.n_d, p.n_n, p.n_c, p.n_a],
            row.proposed,
            "L={}",
            row.blocks
        );
    }
}

#[test]
fn keyspace_ratio_identity() {
    let mut factorial = BigUint::from(1u32);
    for l in 1..=64u32 {
        factorial *= l;
        let ratio = factorial.pow(2) * BigUint::from(64u32).pow(l) * BigUint::from(4u32).pow(l);
        let conv = keyspace_conventional(l as u64).unwrap().n_a;
        assert_eq!(
            keyspace_proposed(l as u64).unwrap().n_a,
            conv * ratio,
            "L={l}"
        );
    }
}

#[test]
fn metrics_match_exhaustive_reference() {
    for (cols, rows) in [(2, 2), (3, 2), (2, 3)] {
        let truth = AssemblyResult::identity(cols, rows);
        for perm in common::permutations(cols * rows) {
            let result = common::assembly(cols, rows, &perm);
            let (dc, nc, lc) = common::naive_scores(cols, rows, &perm);
            assert_eq!(direct_comparison(&result, &truth).unwrap(), dc, "{perm:?}");
            assert_eq!(
                neighbor_comparison(&result, &truth).unwrap(),
                nc,
                "{perm:?}"
            );
            assert_eq!(largest_component(&result, &truth).unwrap(), lc, "{perm:?}");
        }
    }
}
