//! Eigenvalues of a general real matrix: balancing, elimination to upper
//! Hessenberg form and the Francis double-shift QR iteration.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::scalar::{copysign, Real};

fn balance<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.rows();
    let radix = T::two();
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::of(0.95) * s {
                    done = false;
                    let g = T::one() / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

fn to_hessenberg<T: Real>(a: &mut DenseMatrix<T>) {
    let n = a.rows();
    for m in 1..n.saturating_sub(1) {
        let mut x = T::zero();
        let mut i = m;
        for j in m..n {
            if a[(j, m - 1)].abs() > x.abs() {
                x = a[(j, m - 1)];
                i = j;
            }
        }
        if i != m {
            a.swap_rows(i, m);
            a.swap_cols(i, m);
        }
        if x != T::zero() {
            for i in m + 1..n {
                let mut y = a[(i, m - 1)];
                if y != T::zero() {
                    y /= x;
                    a[(i, m - 1)] = y;
                    for j in m..n {
                        let v = a[(m, j)];
                        a[(i, j)] -= y * v;
                    }
                    for j in 0..n {
                        let v = a[(j, i)];
                        a[(j, m)] += y * v;
                    }
                }
            }
        }
    }
    for i in 2..n {
        for j in 0..i - 1 {
            a[(i, j)] = T::zero();
        }
    }
}

fn hqr<T: Real>(a: &mut DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = a.rows() as isize;
    let mut wr = vec![T::zero(); n as usize];
    let mut wi = vec![T::zero(); n as usize];
    let at = |a: &DenseMatrix<T>, i: isize, j: isize| a[(i as usize, j as usize)];
    let mut anorm = T::zero();
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at(a, i, j).abs();
        }
    }
    let mut nn = n - 1;
    let mut t = T::zero();
    let (mut p, mut q, mut r) = (T::zero(), T::zero(), T::zero());
    let (mut x, mut y, mut z, mut w);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == T::zero() {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() + s == s {
                    a[(l as usize, (l - 1) as usize)] = T::zero();
                    break;
                }
                l -= 1;
            }
            x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = T::zero();
                nn -= 1;
                break;
            }
            y = at(a, nn - 1, nn - 1);
            w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
            if l == nn - 1 {
                p = T::half() * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + copysign(z, p);
                    wr[(nn - 1) as usize] = x + z;
                    wr[nn as usize] = x + z;
                    if z != T::zero() {
                        wr[nn as usize] = x - w / z;
                    }
                    wi[(nn - 1) as usize] = T::zero();
                    wi[nn as usize] = T::zero();
                } else {
                    wr[(nn - 1) as usize] = x + p;
                    wr[nn as usize] = x + p;
                    wi[(nn - 1) as usize] = -z;
                    wi[nn as usize] = z;
                }
                nn -= 2;
                break;
            }
            if its >= 120 {
                return Err(Error::Convergence(format!("Hessenberg QR stalled at row {nn}")));
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for i in 0..=nn {
                    a[(i as usize, i as usize)] -= x;
                }
                let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                x = T::of(0.75) * s;
                y = x;
                w = T::of(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            while m >= l {
                z = at(a, m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / at(a, m + 1, m) + at(a, m, m + 1);
                q = at(a, m + 1, m + 1) - z - r - s;
                r = at(a, m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[(i as usize, (i - 2) as usize)] = T::zero();
                if i != m + 2 {
                    a[(i as usize, (i - 3) as usize)] = T::zero();
                }
            }
            let mut k = m;
            while k <= nn - 1 {
                if k != m {
                    p = at(a, k, k - 1);
                    q = at(a, k + 1, k - 1);
                    r = T::zero();
                    if k != nn - 1 {
                        r = at(a, k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = copysign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            let v = at(a, k, k - 1);
                            a[(k as usize, (k - 1) as usize)] = -v;
                        }
                    } else {
                        a[(k as usize, (k - 1) as usize)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let (ku, k1, j) = (k as usize, (k + 1) as usize, j as usize);
                        p = a[(ku, j)] + q * a[(k1, j)];
                        if k != nn - 1 {
                            let k2 = (k + 2) as usize;
                            p += r * a[(k2, j)];
                            a[(k2, j)] -= p * z;
                        }
                        a[(k1, j)] -= p * y;
                        a[(ku, j)] -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let (i, ku, k1) = (i as usize, k as usize, (k + 1) as usize);
                        p = x * a[(i, ku)] + y * a[(i, k1)];
                        if k != nn - 1 {
                            let k2 = (k + 2) as usize;
                            p += z * a[(i, k2)];
                            a[(i, k2)] -= p * r;
                        }
                        a[(i, k1)] -= p * q;
                        a[(i, ku)] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

/// All eigenvalues of a general real square matrix, sorted by real part.
pub fn general_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<Complex<T>>> {
    assert_eq!(a.rows(), a.cols(), "square matrix required");
    if a.rows() == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    to_hessenberg(&mut h);
    let mut vals = hqr(&mut h)?;
    vals.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_matrix_roots() {
        // (x-1)(x-2)(x-3)(x+4) = x^4 - 2x^3 - 13x^2 + 38x - 24
        let coeffs = [-2.0, -13.0, 38.0, -24.0];
        let n = 4;
        let a = DenseMatrix::<f64>::from_fn(n, n, |i, j| {
            if i == 0 {
                -coeffs[j]
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        let vals = general_eigenvalues(&a).unwrap();
        let expect = [-4.0, 1.0, 2.0, 3.0];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v.re - e).abs() < 1e-10 && v.im.abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn complex_pair() {
        let a = DenseMatrix::<f64>::from_fn(3, 3, |i, j| [[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 5.0]][i][j]);
        let vals = general_eigenvalues(&a).unwrap();
        assert!((vals[0].re).abs() < 1e-12 && (vals[0].im.abs() - 2.0).abs() < 1e-12);
        assert!((vals[2].re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_agrees_with_tridiagonal() {
        use crate::linalg::SymTridiagonal;
        let n = 60;
        let t = SymTridiagonal::new(
            (0..n).map(|i| 2.0 * i as f64 + 0.1 * (i as f64).cos()).collect(),
            (0..n - 1).map(|i| 0.3 * ((i + 1) as f64).sqrt()).collect(),
        );
        let vals = general_eigenvalues(&t.to_dense()).unwrap();
        let exact = t.eigenvalues().unwrap();
        for (v, e) in vals.iter().zip(exact) {
            assert!((v.re - e).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn nonsymmetric_similarity() {
        // D A D^{-1} with a tridiagonal A keeps the spectrum but breaks symmetry.
        use crate::linalg::SymTridiagonal;
        let n = 30;
        let t = SymTridiagonal::new((0..n).map(|i| i as f64).collect(), vec![0.7; n - 1]);
        let dense = t.to_dense();
        let b = DenseMatrix::from_fn(n, n, |i, j| dense[(i, j)] * (1.3f64).powi(i as i32 - j as i32));
        let vals = general_eigenvalues(&b).unwrap();
        for (v, e) in vals.iter().zip(t.eigenvalues().unwrap()) {
            assert!((v.re - e).abs() < 1e-9 && v.im.abs() < 1e-9);
        }
    }
}
