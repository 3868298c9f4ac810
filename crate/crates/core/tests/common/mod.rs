//! Shared test oracles, independent of the library's numerics.

use rigidcert_core::nalgebra::DMatrix;
use rigidcert_core::Graph;

/// Exact integer-matrix rank via fraction-free Bareiss elimination.
///
/// Entries stay bounded by the Hadamard determinant bound, so `i128`
/// holds everything for the desk-scale matrices (entries up to a few
/// thousand, a dozen rows) this suite uses.
pub fn exact_rank(matrix: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = matrix.to_vec();
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev_pivot: i128 = 1;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot_row) = (row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pivot_row);
        let pivot = m[row][col];
        for r in (row + 1)..rows {
            for c in (col + 1)..cols {
                m[r][c] = (m[r][c] * pivot - m[r][col] * m[row][c]) / prev_pivot;
            }
            m[r][col] = 0;
        }
        prev_pivot = pivot;
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Integer rigidity matrix of a graph with integer vertex positions
/// (row per edge, `n*d` columns vertex-major).
pub fn integer_rigidity_matrix(g: &Graph, d: usize, coords: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let mut out = Vec::with_capacity(g.m());
    for &(i, j) in g.edges() {
        let mut row = vec![0i128; g.n() * d];
        for k in 0..d {
            let diff = coords[i][k] - coords[j][k];
            row[i * d + k] = diff;
            row[j * d + k] = -diff;
        }
        out.push(row);
    }
    out
}

pub fn to_float(matrix: &[Vec<i128>]) -> DMatrix<f64> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, |r| r.len());
    let flat: Vec<f64> = matrix.iter().flatten().map(|&v| v as f64).collect();
    DMatrix::from_row_slice(rows, cols, &flat)
}

/// Deterministic integer positions in `[-37, 37]`, a stand-in for a
/// generic configuration small enough that the Bareiss minors (bounded
/// by Hadamard: `(74 sqrt(12))^12 < 2^97`) stay inside `i128`.
pub fn integer_positions(n: usize, d: usize, seed: u64) -> Vec<Vec<i128>> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 75) as i128 - 37
    };
    (0..n).map(|_| (0..d).map(|_| next()).collect()).collect()
}
