//! Factorials, associated Legendre functions and squeeze-operator matrix elements.
//!
//! Legendre convention: `P_l^k(x) = (1-x²)^{k/2} d^k/dx^k P_l(x)` for `k >= 0`
//! (no Condon-Shortley phase), `P_l^{-k} = (-1)^k (l-k)!/(l+k)! P_l^k`,
//! `P_{-l-1}^k = P_l^k`, and `P_l^k = 0` for `|k| > l >= 0`.
//!
//! Internally everything is evaluated through the normalized function
//! `Pbar_l^k = sqrt((l-k)!/(l+k)!) P_l^k`, which obeys
//! `Pbar_l^{-k} = (-1)^k Pbar_l^k` and never overflows.

use crate::error::{domain, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::{sign_pow, Real};

/// Exact `n!!` for `-1 <= n <= 33` (larger values overflow `u64`).
pub fn double_factorial_exact(n: i64) -> Result<u64> {
    if n < -1 {
        return domain(format!("double factorial of {n} is undefined"));
    }
    if n > 33 {
        return domain(format!("{n}!! does not fit in 64 bits"));
    }
    let mut acc: u64 = 1;
    let mut k = n;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    Ok(acc)
}

/// `ln n!`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n < 2 {
        return T::zero();
    }
    if n <= 256 {
        return (2..=n).map(|k| T::from_u64(k).unwrap().ln()).sum();
    }
    let x = T::from_u64(n).unwrap();
    let two_pi = T::two() * T::PI();
    let x2 = x * x;
    x * x.ln() - x + T::half() * (two_pi * x).ln() + T::one() / (T::of(12.0) * x) - T::one() / (T::of(360.0) * x2 * x)
        + T::one() / (T::of(1260.0) * x2 * x2 * x)
}

/// `ln n!!` for `n >= -1`.
pub fn ln_double_factorial<T: Real>(n: i64) -> Result<T> {
    if n < -1 {
        return domain(format!("double factorial of {n} is undefined"));
    }
    if n <= 0 {
        return Ok(T::zero());
    }
    let ln2 = T::LN_2();
    if n % 2 == 0 {
        let k = (n / 2) as u64;
        Ok(T::from_u64(k).unwrap() * ln2 + ln_factorial::<T>(k))
    } else {
        // (2k-1)!! = (2k)! / (2^k k!)
        let k = ((n + 1) / 2) as u64;
        Ok(ln_factorial::<T>(2 * k) - T::from_u64(k).unwrap() * ln2 - ln_factorial::<T>(k))
    }
}

/// `n!!` with `(-1)!! = 0!! = 1`; exact integer path up to 30, log space beyond.
pub fn double_factorial<T: Real>(n: i64) -> Result<T> {
    if n <= 30 {
        return Ok(T::from_u64(double_factorial_exact(n)?).unwrap());
    }
    Ok(ln_double_factorial::<T>(n)?.exp())
}

/// `ln((l+k)!/(l-k)!)` for `0 <= k <= l`.
fn ln_factorial_ratio<T: Real>(l: i64, k: i64) -> T {
    ln_factorial::<T>((l + k) as u64) - ln_factorial::<T>((l - k) as u64)
}

/// Reduces `(l, k)` to `l >= 0`, `k >= 0`; returns `None` when the value vanishes,
/// otherwise the reduced pair and the sign picked up from a negative order.
fn reduce(l: i64, k: i64) -> Option<(i64, i64, i64)> {
    let l = if l < 0 { -l - 1 } else { l };
    let ka = k.abs();
    if ka > l {
        return None;
    }
    let sign = if k < 0 { sign_pow::<f64>(ka) as i64 } else { 1 };
    Some((l, ka, sign))
}

/// Normalized `Pbar_l^k(x)` for `0 <= k <= l` by upward degree recurrence.
fn pbar_nonneg<T: Real>(l: i64, k: i64, x: T) -> T {
    let s = ((T::one() - x) * (T::one() + x)).max(T::zero()).sqrt();
    let mut pkk = T::one();
    for i in 1..=k {
        let i = T::from_i64(i).unwrap();
        pkk *= s * ((T::two() * i - T::one()) / (T::two() * i)).sqrt();
    }
    if l == k {
        return pkk;
    }
    let kf = T::from_i64(k).unwrap();
    let mut prev = pkk;
    let mut cur = x * (T::two() * kf + T::one()).sqrt() * pkk;
    for ll in k + 2..=l {
        let lf = T::from_i64(ll).unwrap();
        let a = (T::two() * lf - T::one()) * x;
        let b = ((lf - T::one()) * (lf - T::one()) - kf * kf).sqrt();
        let c = (lf * lf - kf * kf).sqrt();
        let next = (a * cur - b * prev) / c;
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized associated Legendre function `Pbar_l^k(x)`, any integer `l`, `k`.
pub fn legendre_normalized<T: Real>(l: i64, k: i64, x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return domain(format!("Legendre argument {x} outside [0, 1]"));
    }
    Ok(match reduce(l, k) {
        None => T::zero(),
        Some((l, k, sign)) => T::from_i64(sign).unwrap() * pbar_nonneg(l, k, x),
    })
}

/// Associated Legendre function `P_l^k(x)` under the pinned convention.
pub fn legendre_pk<T: Real>(l: i64, k: i64, x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return domain(format!("Legendre argument {x} outside [0, 1]"));
    }
    let Some((lr, ka, _)) = reduce(l, k) else {
        return Ok(T::zero());
    };
    let pbar = pbar_nonneg(lr, ka, x);
    let half_ln = T::half() * ln_factorial_ratio::<T>(lr, ka);
    if k >= 0 {
        Ok(pbar * half_ln.exp())
    } else {
        // P^{-k} = (-1)^k sqrt((l-k)!/(l+k)!) Pbar^k
        Ok(sign_pow::<T>(ka) * pbar * (-half_ln).exp())
    }
}

/// Small-β form `[1 - (l+k+1)(l-k)/2 β²] (l+k-1)!! (-1)^{(l-k)/2} / (l-k)!! (1-β²)^{k/2}`,
/// accurate to O(β⁴) relative. Negative orders go through the negative-order relation.
pub fn legendre_smallbeta<T: Real>(l: i64, k: i64, beta: T) -> Result<T> {
    if (l - k).rem_euclid(2) != 0 {
        return domain(format!("small-beta expansion needs l - k even, got l = {l}, k = {k}"));
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return domain(format!("beta = {beta} outside [0, 1]"));
    }
    let Some((lr, ka, _)) = reduce(l, k) else {
        return Ok(T::zero());
    };
    let b2 = beta * beta;
    let lf = T::from_i64(lr).unwrap();
    let kf = T::from_i64(ka).unwrap();
    let bracket = T::one() - (lf + kf + T::one()) * (lf - kf) / T::two() * b2;
    let ln_ratio = ln_double_factorial::<T>(lr + ka - 1)? - ln_double_factorial::<T>(lr - ka)?;
    let positive = bracket * sign_pow::<T>((lr - ka) / 2) * ln_ratio.exp() * (T::one() - b2).powf(kf / T::two());
    if k >= 0 {
        Ok(positive)
    } else {
        Ok(sign_pow::<T>(ka) * (-ln_factorial_ratio::<T>(lr, ka)).exp() * positive)
    }
}

/// Table of `Pbar_l^k(x)` for `0 <= k <= l <= l_max` at a fixed argument.
#[derive(Clone, Debug)]
pub struct LegendreTable<T> {
    l_max: usize,
    x: T,
    // row k holds l = k..=l_max
    rows: Vec<Vec<T>>,
}

impl<T: Real> LegendreTable<T> {
    pub fn new(l_max: usize, x: T) -> Result<Self> {
        if !(x >= T::zero() && x <= T::one()) {
            return domain(format!("Legendre argument {x} outside [0, 1]"));
        }
        let s = ((T::one() - x) * (T::one() + x)).max(T::zero()).sqrt();
        let mut rows = Vec::with_capacity(l_max + 1);
        let mut pkk = T::one();
        for k in 0..=l_max {
            if k > 0 {
                let kf = T::idx(k);
                pkk *= s * ((T::two() * kf - T::one()) / (T::two() * kf)).sqrt();
            }
            let kf = T::idx(k);
            let mut row = Vec::with_capacity(l_max - k + 1);
            row.push(pkk);
            if k < l_max {
                row.push(x * (T::two() * kf + T::one()).sqrt() * pkk);
            }
            for l in k + 2..=l_max {
                let lf = T::idx(l);
                let a = (T::two() * lf - T::one()) * x;
                let b = ((lf - T::one()) * (lf - T::one()) - kf * kf).sqrt();
                let c = (lf * lf - kf * kf).sqrt();
                let n = row.len();
                let next = (a * row[n - 1] - b * row[n - 2]) / c;
                row.push(next);
            }
            rows.push(row);
        }
        Ok(Self { l_max, x, rows })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn x(&self) -> T {
        self.x
    }

    /// `Pbar_l^k` for any integers, with the negative index relations applied.
    /// Panics if the reduced degree exceeds `l_max`.
    pub fn get(&self, l: i64, k: i64) -> T {
        match reduce(l, k) {
            None => T::zero(),
            Some((l, k, sign)) => {
                assert!(l as usize <= self.l_max, "degree {l} beyond table size {}", self.l_max);
                let v = self.rows[k as usize][(l - k) as usize];
                if sign < 0 {
                    -v
                } else {
                    v
                }
            }
        }
    }
}

/// Sign of the squeeze argument: `S(+2θ)` or `S(-2θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SqueezeSign {
    Plus,
    Minus,
}

/// `⟨2m| S(±2θ) |2n⟩` with `S(ξ) = exp[ξ/2 (a†² - a²)]`.
///
/// Closed form: `sqrt(β) Pbar_{m+n}^{m-n}(β)` for `S(2θ)`, times `(-1)^{m-n}` for `S(-2θ)`,
/// where `β = 1/cosh 2θ`.
pub fn squeeze_element<T: Real>(m: usize, n: usize, theta: T, sign: SqueezeSign) -> Result<T> {
    if !theta.is_finite() {
        return domain("squeeze parameter must be finite");
    }
    let beta = T::one() / (T::two() * theta).cosh();
    let (m, n) = (m as i64, n as i64);
    let base = beta.sqrt() * legendre_normalized(m + n, m - n, beta)?;
    let flip = (sign == SqueezeSign::Minus) != (theta < T::zero());
    Ok(if flip { sign_pow::<T>(m - n) * base } else { base })
}

/// Truncated matrix of `⟨2m| S(±2θ) |2n⟩`, `m, n < n_max`.
#[derive(Clone, Debug)]
pub struct SqueezeMatrix<T> {
    pub theta: T,
    pub n_max: usize,
    pub sign: SqueezeSign,
    pub entries: DenseMatrix<T>,
}

impl<T: Real> SqueezeMatrix<T> {
    pub fn new(theta: T, n_max: usize, sign: SqueezeSign) -> Result<Self> {
        if !theta.is_finite() {
            return domain("squeeze parameter must be finite");
        }
        let beta = T::one() / (T::two() * theta).cosh();
        let table = LegendreTable::new(2 * n_max.max(1), beta)?;
        let sb = beta.sqrt();
        let flip = (sign == SqueezeSign::Minus) != (theta < T::zero());
        let entries = DenseMatrix::from_fn(n_max, n_max, |m, n| {
            let (m, n) = (m as i64, n as i64);
            let v = sb * table.get(m + n, m - n);
            if flip {
                sign_pow::<T>(m - n) * v
            } else {
                v
            }
        });
        Ok(Self { theta, n_max, sign, entries })
    }

    pub fn get(&self, m: usize, n: usize) -> T {
        self.entries[(m, n)]
    }
}

/// Amplitudes `⟨2n| S(θ) |0⟩` of the squeezed vacuum `S(θ)|0⟩`, `S(θ) = exp[θ/2 (a†² - a²)]`.
pub fn squeezed_vacuum<T: Real>(theta: T, n_max: usize) -> Vec<T> {
    let t = theta.tanh();
    let mut out = Vec::with_capacity(n_max);
    let mut amp = T::one() / theta.cosh().sqrt();
    for n in 0..n_max {
        out.push(amp);
        // c_{n+1}/c_n = tanh θ · sqrt((2n+1)(2n+2)) / (2(n+1))
        let nf = T::idx(n);
        amp *= t * ((T::two() * nf + T::one()) * (T::two() * nf + T::two())).sqrt() / (T::two() * (nf + T::one()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorial_examples() {
        assert_eq!(double_factorial_exact(-1).unwrap(), 1);
        assert_eq!(double_factorial_exact(0).unwrap(), 1);
        assert_eq!(double_factorial_exact(5).unwrap(), 15);
        assert_eq!(double_factorial_exact(8).unwrap(), 384);
        assert!(double_factorial_exact(-2).is_err());
        assert!(double_factorial::<f64>(-3).is_err());
        let exact = double_factorial_exact(33).unwrap() as f64;
        let logp = ln_double_factorial::<f64>(33).unwrap().exp();
        assert!((exact - logp).abs() / exact < 1e-13);
        for n in [31_i64, 40, 57, 200, 301] {
            let direct: f64 = (1..=n).rev().step_by(2).map(|k| (k as f64).ln()).sum();
            let v = ln_double_factorial::<f64>(n).unwrap();
            assert!((v - direct).abs() < 1e-10 * direct, "{n}");
        }
    }

    #[test]
    fn ln_factorial_stirling_continuity() {
        let direct: f64 = (2..=300u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial::<f64>(300) - direct).abs() < 1e-10);
    }

    #[test]
    fn legendre_examples() {
        let x = 0.37_f64;
        assert_eq!(legendre_pk(0, 0, x).unwrap(), 1.0);
        assert!((legendre_pk(1, 1, x).unwrap() - (1.0 - x * x).sqrt()).abs() < 1e-15);
        assert!((legendre_pk(2, -2, x).unwrap() - (1.0 - x * x) / 8.0).abs() < 1e-15);
        assert!((legendre_pk(2, 2, x).unwrap() - 3.0 * (1.0 - x * x)).abs() < 1e-14);
        assert!((legendre_pk(3, 1, x).unwrap() - 1.5 * (5.0 * x * x - 1.0) * (1.0 - x * x).sqrt()).abs() < 1e-14);
        assert_eq!(legendre_pk(-1, 1, x).unwrap(), 0.0);
        assert_eq!(legendre_pk(2, 3, x).unwrap(), 0.0);
        assert!((legendre_pk(-3, 1, x).unwrap() - legendre_pk(2, 1, x).unwrap()).abs() < 1e-15);
        assert!(legendre_pk(1, 0, 1.5_f64).is_err());
    }

    #[test]
    fn small_beta_examples() {
        assert_eq!(legendre_smallbeta(0, 0, 0.2_f64).unwrap(), 1.0);
        let b = 0.2_f64;
        assert!((legendre_smallbeta(1, 1, b).unwrap() - (1.0 - b * b).sqrt()).abs() < 1e-15);
        assert!((legendre_smallbeta(2, 0, 0.1_f64).unwrap() + 0.485).abs() < 1e-15);
        assert!((legendre_pk(2, 0, 0.1_f64).unwrap() + 0.485).abs() < 1e-15);
        assert!(legendre_smallbeta(2, 1, 0.1_f64).is_err());
    }

    #[test]
    fn table_matches_pointwise() {
        let t = LegendreTable::new(30, 0.23_f64).unwrap();
        for l in 0..=30_i64 {
            for k in -l..=l {
                let a = t.get(l, k);
                let b = legendre_normalized(l, k, 0.23).unwrap();
                assert!((a - b).abs() < 1e-14, "{l} {k}");
            }
        }
        assert_eq!(t.get(-1, 1), 0.0);
    }

    #[test]
    fn squeeze_identity_and_vacuum() {
        for m in 0..6 {
            for n in 0..6 {
                let v = squeeze_element(m, n, 0.0_f64, SqueezeSign::Plus).unwrap();
                assert!((v - if m == n { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let th = 0.4_f64;
        let v = squeeze_element(0, 0, th, SqueezeSign::Plus).unwrap();
        assert!((v - 1.0 / (2.0 * th).cosh().sqrt()).abs() < 1e-15);
        // S(θ)|0⟩ amplitudes are the n = 0 column of S(2·(θ/2)).
        let vac = squeezed_vacuum(th, 10);
        for (m, &a) in vac.iter().enumerate() {
            let b = squeeze_element(m, 0, th / 2.0, SqueezeSign::Plus).unwrap();
            assert!((a - b).abs() < 1e-14, "{m}: {a} vs {b}");
        }
    }

    #[test]
    fn squeeze_transpose_identity() {
        let th = 0.7_f64;
        let p = SqueezeMatrix::new(th, 20, SqueezeSign::Plus).unwrap();
        let m = SqueezeMatrix::new(th, 20, SqueezeSign::Minus).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(p.get(i, j), m.get(j, i));
            }
        }
    }
}
