//! Rank values cross-checked against exact integer arithmetic: the
//! floating-point rank decisions must agree with fraction-free Bareiss
//! elimination on the same integer matrices.

mod common;

use common::{exact_rank, integer_positions, integer_rigidity_matrix, to_float};
use rigidcert_core::{numkernel, Graph};

#[test]
fn generic_rigidity_ranks_match_exact_arithmetic() {
    // (graph, d, expected generic rank of the rigidity matrix)
    let cases = vec![
        (Graph::complete(3), 2, 3),            // 2n - 3
        (Graph::complete(4), 2, 5),            // 2n - 3
        (Graph::complete_bipartite(2, 2), 1, 3), // nd - 1
        (Graph::complete_bipartite(3, 3), 2, 9),
        (Graph::path(3), 2, 2),
        (Graph::octahedron(), 3, 12),
    ];
    for (g, d, expected) in cases {
        let coords = integer_positions(g.n(), d, 0xABC0 + g.n() as u64 + d as u64);
        let matrix = integer_rigidity_matrix(&g, d, &coords);
        let exact = exact_rank(&matrix);
        assert_eq!(exact, expected, "exact rank for n={} d={d}", g.n());
        let float_rank = numkernel::numerical_rank(&to_float(&matrix), None)
            .unwrap()
            .rank;
        assert_eq!(float_rank, exact, "float/exact mismatch for n={}", g.n());
    }
}

#[test]
fn float_rank_matches_exact_on_scaled_matrices() {
    // Rank decisions must be scale-free: the same integer matrices,
    // scaled by awkward powers, keep their rank.
    let g = Graph::wheel(5);
    let coords = integer_positions(g.n(), 2, 99);
    let matrix = integer_rigidity_matrix(&g, 2, &coords);
    let exact = exact_rank(&matrix);
    for scale in [1e-7, 1.0, 3.7e5] {
        let scaled = to_float(&matrix) * scale;
        let report = numkernel::numerical_rank(&scaled, None).unwrap();
        assert_eq!(report.rank, exact, "scale {scale}");
    }
}

#[test]
fn bareiss_handles_rank_deficiency() {
    // Duplicate and zero rows.
    let m = vec![
        vec![2, 4, 6],
        vec![1, 2, 3],
        vec![0, 0, 0],
        vec![3, 5, 7],
    ];
    assert_eq!(exact_rank(&m), 2);
    assert_eq!(
        numkernel::numerical_rank(&to_float(&m), None).unwrap().rank,
        2
    );
}
