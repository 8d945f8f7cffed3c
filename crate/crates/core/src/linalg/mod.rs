//! Hand-written dense and tridiagonal linear algebra, generic over [`Real`](crate::Real).

mod dense;
mod hessenberg;
mod symmetric;
mod tridiag;

use num_complex::Complex;

use crate::scalar::Real;

pub use dense::{dot, norm, DenseMatrix};
pub use hessenberg::general_eigenvalues;
pub use symmetric::{symmetric_eigenvalues, tridiagonalize};
pub use tridiag::{ShiftedLu, SymTridiagonal};

/// Solves a complex symmetric tridiagonal system in place (Thomas algorithm, no pivoting).
///
/// Intended for matrices of the form `I + i·A` with `A` real symmetric, where
/// every pivot has real part at least one.
pub fn solve_complex_tridiagonal<T: Real>(
    diag: &[Complex<T>],
    off: &[Complex<T>],
    rhs: &mut [Complex<T>],
    scratch: &mut Vec<Complex<T>>,
) {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    assert_eq!(off.len() + 1, n);
    scratch.clear();
    scratch.resize(n, Complex::new(T::zero(), T::zero()));
    let mut piv = diag[0];
    rhs[0] = rhs[0] / piv;
    for i in 1..n {
        scratch[i] = off[i - 1] / piv;
        piv = diag[i] - off[i - 1] * scratch[i];
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        let c = scratch[i + 1];
        rhs[i] = rhs[i] - c * rhs[i + 1];
    }
}
