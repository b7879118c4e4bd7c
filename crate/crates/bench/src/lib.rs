//! Shared fixtures for the criterion benchmarks.

use num_complex::Complex64;
use shearlab::ComplexMatrix;

/// Deterministic, well-conditioned dense test matrix of size `n`.
pub fn test_matrix(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let s = ((i * 31 + j * 17) as f64).sin();
        let c = ((i * 7 + j * 13) as f64).cos();
        let d = if i == j { n as f64 } else { 0.0 };
        Complex64::new(s + d, c)
    })
}
