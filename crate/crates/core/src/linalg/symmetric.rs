use crate::error::Result;
use crate::linalg::dense::DenseMatrix;
use crate::linalg::tridiag::SymTridiagonal;
use crate::scalar::Real;

/// Householder reduction of a dense symmetric matrix to tridiagonal form.
pub fn tridiagonalize<T: Real>(a: &DenseMatrix<T>) -> SymTridiagonal<T> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "square matrix required");
    let mut a = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale: T = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == T::zero() {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f = T::zero();
                for j in 0..=l {
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in j + 1..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let aik = a[(i, k)];
                        a[(j, k)] -= f * e[k] + g * aik;
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[(i, i)];
    }
    let off = e[1..].to_vec();
    SymTridiagonal::new(d, off)
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    tridiagonalize(a).eigenvalues()
}
