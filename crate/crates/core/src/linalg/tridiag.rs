use crate::error::{Error, Result};
use crate::linalg::dense::{dot, norm, DenseMatrix};
use crate::scalar::{copysign, Real};

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
    off_sq: Vec<T>,
    pivmin: T,
}

impl<T: Real> SymTridiagonal<T> {
    /// `off[i]` couples rows `i` and `i + 1`.
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n - 1");
        let off_sq: Vec<T> = off.iter().map(|&e| e * e).collect();
        let emax = off_sq.iter().fold(T::one(), |m, &x| m.max(x));
        let pivmin = T::min_positive_value() * emax;
        Self { diag, off, off_sq, pivmin }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.len();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
        }
        for (i, &e) in self.off.iter().enumerate() {
            m[(i, i + 1)] = e;
            m[(i + 1, i)] = e;
        }
        m
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(x.len(), n);
        let mut y: Vec<T> = self.diag.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Rayleigh quotient `<x|A|x>` for a normalized `x`.
    pub fn expectation(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut rad = T::zero();
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        let pad = T::epsilon() * T::of(4.0) * lo.abs().max(hi.abs()) + self.pivmin;
        (lo - pad, hi + pad)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn sturm_count(&self, x: T) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.len() {
            q = self.diag[i] - x - self.off_sq[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> T {
        assert!(k < self.len(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        self.bisect(k, &mut lo, &mut hi)
    }

    fn bisect(&self, k: usize, lo: &mut T, hi: &mut T) -> T {
        let two = T::two();
        for _ in 0..400 {
            let mid = *lo + (*hi - *lo) / two;
            if mid <= *lo || mid >= *hi {
                break;
            }
            if self.sturm_count(mid) > k {
                *hi = mid;
            } else {
                *lo = mid;
            }
            let tol = two * T::epsilon() * lo.abs().max(hi.abs()) + self.pivmin;
            if *hi - *lo <= tol {
                break;
            }
        }
        *lo + (*hi - *lo) / two
    }

    /// The `k` smallest eigenvalues, ascending.
    pub fn lowest(&self, k: usize) -> Vec<T> {
        let k = k.min(self.len());
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        let mut floor = glo;
        for i in 0..k {
            let mut lo = floor;
            let mut hi = ghi;
            let v = self.bisect(i, &mut lo, &mut hi);
            floor = lo.min(v);
            out.push(v);
        }
        out
    }

    /// All eigenvalues, ascending (implicit QL).
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let mut d = self.diag.clone();
        ql_implicit(&mut d, &self.off, None)?;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    /// All eigenpairs, ascending; eigenvectors are the columns of the matrix.
    pub fn eigen(&self) -> Result<(Vec<T>, DenseMatrix<T>)> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut z = DenseMatrix::identity(n);
        ql_implicit(&mut d, &self.off, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
        let vals = order.iter().map(|&i| d[i]).collect();
        let vecs = DenseMatrix::from_fn(n, n, |i, j| z[(i, order[j])]);
        Ok((vals, vecs))
    }

    /// Solves `(A - sigma I) x = rhs` by LU with partial pivoting.
    /// Exactly singular pivots are regularized, which is what inverse iteration wants.
    pub fn solve_shifted(&self, sigma: T, rhs: &[T]) -> Vec<T> {
        let lu = ShiftedLu::new(self, sigma);
        lu.solve(rhs)
    }

    /// Eigenvector for a (converged) eigenvalue `lambda` by inverse iteration,
    /// orthogonalized against `against`. Sign fixed so the largest component is positive.
    pub fn eigenvector(&self, lambda: T, against: &[Vec<T>]) -> Vec<T> {
        let n = self.len();
        let lu = ShiftedLu::new(self, lambda);
        let mut x: Vec<T> = (0..n).map(|i| T::one() + T::idx((i * 7919) % 101) / T::of(101.0)).collect();
        let s = norm(&x);
        x.iter_mut().for_each(|v| *v /= s);
        let anorm = self.gershgorin().0.abs().max(self.gershgorin().1.abs());
        for _ in 0..6 {
            let mut y = lu.solve(&x);
            for v in against {
                let c = dot(v, &y);
                y.iter_mut().zip(v).for_each(|(a, &b)| *a -= c * b);
            }
            let s = norm(&y);
            y.iter_mut().for_each(|v| *v /= s);
            x = y;
            let ax = self.matvec(&x);
            let res: T = ax.iter().zip(&x).map(|(&a, &b)| (a - lambda * b) * (a - lambda * b)).sum::<T>().sqrt();
            if res <= T::of(64.0) * T::epsilon() * anorm.max(T::one()) * T::idx(n).sqrt() {
                break;
            }
        }
        let imax = (0..n).fold(0, |m, i| if x[i].abs() > x[m].abs() { i } else { m });
        if x[imax] < T::zero() {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }

    /// Lowest `k` eigenpairs via bisection plus inverse iteration.
    pub fn lowest_pairs(&self, k: usize) -> (Vec<T>, Vec<Vec<T>>) {
        let vals = self.lowest(k);
        let mut vecs: Vec<Vec<T>> = Vec::with_capacity(vals.len());
        for &v in &vals {
            let x = self.eigenvector(v, &vecs);
            vecs.push(x);
        }
        (vals, vecs)
    }
}

/// Tridiagonal LU factorization with partial pivoting of `A - sigma I`.
pub struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    pub fn new(a: &SymTridiagonal<T>, sigma: T) -> Self {
        let n = a.len();
        let mut dl = a.off.clone();
        let mut du = a.off.clone();
        let mut d: Vec<T> = a.diag.iter().map(|&x| x - sigma).collect();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let scale = d.iter().chain(a.off.iter()).fold(T::zero(), |m, &x| m.max(x.abs())).max(T::min_positive_value());
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = T::zero();
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let tiny = T::epsilon() * scale;
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < T::zero() { -tiny } else { tiny };
            }
        }
        Self { dl, d, du, du2, swapped }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.d.len();
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let bi = b[i];
                b[i + 1] -= self.dl[i] * bi;
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

/// Implicit QL with Wilkinson-type shifts. `off[i]` couples `i` and `i + 1`.
/// On return `d` holds the (unsorted) eigenvalues; `z`, if given, is rotated in place.
pub(crate) fn ql_implicit<T: Real>(d: &mut [T], off: &[T], mut z: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e: Vec<T> = off.to_vec();
    e.push(T::zero());
    let two = T::two();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence(format!("tridiagonal QL did not converge at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + copysign(r, g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
