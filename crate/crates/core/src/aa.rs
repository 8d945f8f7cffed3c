//! Adiabatic approximation: inter-manifold couplings `M_mn(β)`, AA levels, gaps,
//! observables and the leading QFI.
//!
//! In the squeezed frame the parity-`p` problem reads `A = diag((2m+1/2)β - 1/2) + p·M`;
//! the AA keeps only the diagonal of `M`.

use serde::Serialize;

use crate::ed::GroundStateObservables;
use crate::error::{domain, Result};
use crate::linalg::DenseMatrix;
use crate::model::{ModelParams, Parity};
use crate::scalar::{sign_pow, Real};
use crate::specfun::{ln_double_factorial, LegendreTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AAMatrixElement<T> {
    pub m: usize,
    pub n: usize,
    /// Exact Legendre form of `M_mn(β)`.
    pub value: T,
    pub k_factor: T,
    pub alpha: T,
    /// `(-1)^{m+n} sqrt(β)/2 K_mn (δ + α_mn β²)`.
    pub small_beta_value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AALevel<T> {
    pub n: usize,
    pub parity: Parity,
    pub energy: T,
    pub diag_part: T,
    pub split_part: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AAGaps<T> {
    /// `|E_{n+1,-} - E_{n,-}|` in the ground-state parity.
    pub eps_sp: T,
    /// `|E_{n,+} - E_{n,-}|`.
    pub eps_dp: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectionScaling<T> {
    /// Norm of the first-order state correction `sqrt(Σ |M_mn|² / (E_m - E_n)²)`.
    pub state_corr: T,
    /// Second-order energy shift `Σ |M_mn|² / (E_n - E_m)`.
    pub energy_corr: T,
    /// Geometric bound on the discarded `|m - n| > span` part of `energy_corr`.
    pub tail_bound: T,
    pub span: usize,
}

/// `K_mn(β) = sqrt((2m-1)!!(2n-1)!! / ((2m)!!(2n)!!)) (1-β²)^{|m-n|/2}`.
pub fn k_factor<T: Real>(m: usize, n: usize, beta: T) -> Result<T> {
    let (mi, ni) = (m as i64, n as i64);
    let ln = ln_double_factorial::<T>(2 * mi - 1)? + ln_double_factorial::<T>(2 * ni - 1)?
        - ln_double_factorial::<T>(2 * mi)?
        - ln_double_factorial::<T>(2 * ni)?;
    let d = T::idx(m.abs_diff(n));
    Ok((T::half() * ln).exp() * (T::one() - beta * beta).powf(d / T::two()))
}

/// `α_mn = (2m+1)((5n+1)Δ_c - nΔ) - 2nΔ_c`.
pub fn alpha<T: Real>(m: usize, n: usize, delta: T, delta_c: T) -> T {
    let (mf, nf) = (T::idx(m), T::idx(n));
    (T::two() * mf + T::one()) * ((T::of(5.0) * nf + T::one()) * delta_c - nf * delta) - T::two() * nf * delta_c
}

fn beta_open<T: Real>(params: &ModelParams<T>) -> Result<T> {
    let geo = params.geometry()?;
    if !(geo.beta > T::zero() && geo.beta < T::one()) {
        return domain(format!("beta = {} outside (0, 1): need 0 < g < g_c", geo.beta));
    }
    Ok(geo.beta)
}

/// `M_mn` from a Legendre table at `x = β`:
/// `(-1)^m sqrt(β) [Δ/2 Pbar_{m+n}^{m-n} - G (sqrt(2n(2n-1)) Pbar_{m+n-1}^{m-n+1}
///  - sqrt((2n+1)(2n+2)) Pbar_{m+n+1}^{m-n-1})]` with `G = g(1-r)/2`.
fn m_from_table<T: Real>(table: &LegendreTable<T>, m: usize, n: usize, params: &ModelParams<T>) -> T {
    let (mi, ni) = (m as i64, n as i64);
    let nf = T::idx(n);
    let two = T::two();
    let gp = params.g * (T::one() - params.r) / two;
    let down = (two * nf * (two * nf - T::one())).sqrt();
    let up = ((two * nf + T::one()) * (two * nf + two)).sqrt();
    let inner = params.delta / two * table.get(mi + ni, mi - ni)
        - gp * (down * table.get(mi + ni - 1, mi - ni + 1) - up * table.get(mi + ni + 1, mi - ni - 1));
    sign_pow::<T>(mi) * table.x().sqrt() * inner
}

fn table_for<T: Real>(params: &ModelParams<T>, max_index: usize) -> Result<LegendreTable<T>> {
    LegendreTable::new(2 * max_index + 2, params.beta())
}

pub fn aa_matrix_element<T: Real>(m: usize, n: usize, params: &ModelParams<T>) -> Result<AAMatrixElement<T>> {
    let beta = beta_open(params)?;
    let table = table_for(params, m.max(n))?;
    let value = m_from_table(&table, m, n, params);
    let k = k_factor(m, n, beta)?;
    let a = alpha(m, n, params.delta, params.delta_c());
    let delta = params.delta - params.delta_c();
    let small = sign_pow::<T>((m + n) as i64) * beta.sqrt() / T::two() * k * (delta + a * beta * beta);
    Ok(AAMatrixElement { m, n, value, k_factor: k, alpha: a, small_beta_value: small })
}

/// Dense `M_mn` for `m, n < n_max`. Valid for `0 <= g < g_c`.
pub fn m_matrix<T: Real>(params: &ModelParams<T>, n_max: usize) -> Result<DenseMatrix<T>> {
    let geo = params.geometry()?;
    if geo.at_collapse {
        return domain("M_mn is not defined at g = g_c");
    }
    let table = table_for(params, n_max)?;
    Ok(DenseMatrix::from_fn(n_max, n_max, |m, n| m_from_table(&table, m, n, params)))
}

/// `E_{n,p} = (2n+1/2)β - 1/2 + p·M_nn(β)`; `-1/2` at the collapse point.
pub fn aa_energy<T: Real>(n: usize, parity: Parity, params: &ModelParams<T>) -> Result<AALevel<T>> {
    let geo = params.geometry()?;
    if geo.at_collapse {
        let e = -T::half();
        return Ok(AALevel { n, parity, energy: e, diag_part: e, split_part: T::zero() });
    }
    let beta = geo.beta;
    let diag_part = (T::two() * T::idx(n) + T::half()) * beta - T::half();
    let table = table_for(params, n)?;
    let split_part = parity.sign::<T>() * m_from_table(&table, n, n, params);
    Ok(AALevel { n, parity, energy: diag_part + split_part, diag_part, split_part })
}

pub fn aa_gaps<T: Real>(n: usize, params: &ModelParams<T>) -> Result<AAGaps<T>> {
    beta_open(params)?;
    let e_n = aa_energy(n, Parity::Minus, params)?.energy;
    let e_n1 = aa_energy(n + 1, Parity::Minus, params)?.energy;
    let e_plus = aa_energy(n, Parity::Plus, params)?.energy;
    Ok(AAGaps { eps_sp: (e_n1 - e_n).abs(), eps_dp: (e_plus - e_n).abs() })
}

/// Closed forms on the AA ground state (meaningful at Δ = Δ_c).
pub fn aa_observables<T: Real>(params: &ModelParams<T>) -> Result<GroundStateObservables<T>> {
    let geo = params.geometry()?;
    if geo.at_collapse {
        return domain("AA observables diverge at g = g_c");
    }
    let b = geo.beta;
    let q = T::one() / b.sqrt();
    Ok(GroundStateObservables { photon: (T::one() - b) / (T::two() * b), sigma_x: b.sqrt(), dx: q, dp: q })
}

/// Leading QFI `(1+r)²/(2β⁴)`.
pub fn aa_qfi_leading<T: Real>(params: &ModelParams<T>) -> Result<T> {
    let geo = params.geometry()?;
    if geo.at_collapse {
        return domain("QFI diverges at g = g_c");
    }
    let b2 = geo.beta * geo.beta;
    let s = T::one() + params.r;
    Ok(s * s / (T::two() * b2 * b2))
}

/// Perturbative off-diagonal corrections for manifold `n` in the ground-state parity,
/// summed over `0 <= m <= n + span`, `m != n`.
pub fn aa_correction_sums<T: Real>(params: &ModelParams<T>, n: usize, span: usize) -> Result<CorrectionScaling<T>> {
    let beta = beta_open(params)?;
    let p = Parity::Minus.sign::<T>();
    let m_hi = n + span;
    let table = table_for(params, m_hi)?;
    let level = |m: usize| (T::two() * T::idx(m) + T::half()) * beta - T::half() + p * m_from_table(&table, m, m, params);
    let e_n = level(n);
    let mut state = T::zero();
    let mut energy = T::zero();
    let mut last = T::zero();
    for m in n.saturating_sub(span)..=m_hi {
        if m == n {
            continue;
        }
        let mmn = m_from_table(&table, m, n, params);
        let de = e_n - level(m);
        energy += mmn * mmn / de;
        state += mmn * mmn / (de * de);
        if m == m_hi {
            last = (mmn * mmn / de).abs();
        }
    }
    let rho = T::one() - beta * beta;
    Ok(CorrectionScaling { state_corr: state.sqrt(), energy_corr: energy, tail_bound: last * rho / (T::one() - rho), span })
}

/// Same sums truncated at `|m - n| <= 40`.
pub fn aa_correction_scalings<T: Real>(params: &ModelParams<T>, n: usize) -> Result<CorrectionScaling<T>> {
    let beta = beta_open(params)?;
    if beta > T::of(0.3) {
        return domain(format!("correction scalings need beta <= 0.3, got {beta}"));
    }
    aa_correction_sums(params, n, 40)
}
