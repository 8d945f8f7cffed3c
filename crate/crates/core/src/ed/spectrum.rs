use serde::Serialize;

use crate::aa::m_matrix;
use crate::ed::block::{build_parity_block, ParityBlock};
use crate::error::{domain, Error, Result};
use crate::linalg::{general_eigenvalues, DenseMatrix};
use crate::model::{Bargmann, ModelParams, Parity, SectorSpec};
use crate::scalar::Real;

/// Truncation and convergence controls for bare-Fock ED.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdOptions<T> {
    /// Levels requested per parity block.
    pub levels: usize,
    /// Starting number of basis states per block.
    pub n_start: usize,
    /// Largest number of basis states tried.
    pub n_ceiling: usize,
    /// Absolute tolerance on `|E(n) - E(n/2)|`.
    pub tol: T,
}

impl<T: Real> Default for EdOptions<T> {
    fn default() -> Self {
        Self { levels: 6, n_start: 64, n_ceiling: 1 << 16, tol: T::of(1e-10) }
    }
}

impl<T: Real> EdOptions<T> {
    pub fn levels(mut self, k: usize) -> Self {
        self.levels = k;
        self
    }

    pub fn tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn ceiling(mut self, n: usize) -> Self {
        self.n_ceiling = n;
        self
    }

    pub fn start(mut self, n: usize) -> Self {
        self.n_start = n;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Level<T> {
    pub energy: T,
    pub parity: Parity,
    /// Index within its parity block.
    pub index: usize,
    pub converged: bool,
    pub convergence_estimate: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult<T> {
    /// Sorted ascending in energy.
    pub levels: Vec<Level<T>>,
    pub n_max_used: usize,
    /// Largest discarded imaginary part (squeezed frame only, zero otherwise).
    pub max_imag: T,
}

impl<T: Real> SpectrumResult<T> {
    pub fn energies(&self) -> Vec<T> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }

    /// Energies of one parity, in block order.
    pub fn parity_energies(&self, parity: Parity) -> Vec<T> {
        let mut v: Vec<&Level<T>> = self.levels.iter().filter(|l| l.parity == parity).collect();
        v.sort_by_key(|l| l.index);
        v.into_iter().map(|l| l.energy).collect()
    }

    pub fn level(&self, parity: Parity, index: usize) -> Option<&Level<T>> {
        self.levels.iter().find(|l| l.parity == parity && l.index == index)
    }

    fn merge(mut a: Self, b: Self) -> Self {
        a.levels.extend(b.levels);
        a.levels.sort_by(|x, y| x.energy.partial_cmp(&y.energy).unwrap());
        a.n_max_used = a.n_max_used.max(b.n_max_used);
        a.max_imag = a.max_imag.max(b.max_imag);
        a
    }
}

fn check_coupling<T: Real>(params: &ModelParams<T>) -> Result<()> {
    params.geometry().map(|_| ())
}

/// Lowest levels of one parity block with doubling convergence.
/// Non-convergence at the ceiling is reported through the per-level flags.
pub fn ed_spectrum<T: Real>(params: &ModelParams<T>, sector: SectorSpec, opts: &EdOptions<T>) -> Result<SpectrumResult<T>> {
    check_coupling(params)?;
    let (vals, est, n) = converge_block(params, sector, opts)?;
    let levels = vals
        .iter()
        .zip(&est)
        .enumerate()
        .map(|(index, (&energy, &e))| Level {
            energy,
            parity: sector.parity,
            index,
            converged: e < opts.tol,
            convergence_estimate: e,
        })
        .collect();
    Ok(SpectrumResult { levels, n_max_used: n, max_imag: T::zero() })
}

/// Both parities of a Bargmann sector, merged and sorted.
pub fn ed_spectrum_both<T: Real>(params: &ModelParams<T>, q: Bargmann, opts: &EdOptions<T>) -> Result<SpectrumResult<T>> {
    let minus = ed_spectrum(params, SectorSpec { q, parity: Parity::Minus }, opts)?;
    let plus = ed_spectrum(params, SectorSpec { q, parity: Parity::Plus }, opts)?;
    Ok(SpectrumResult::merge(minus, plus))
}

pub(crate) fn converge_block<T: Real>(
    params: &ModelParams<T>,
    sector: SectorSpec,
    opts: &EdOptions<T>,
) -> Result<(Vec<T>, Vec<T>, usize)> {
    if opts.levels == 0 {
        return domain("at least one level must be requested");
    }
    let mut n = opts.n_start.max(2 * opts.levels).max(4);
    let mut prev = build_parity_block(params, sector, n).matrix().lowest(opts.levels);
    loop {
        let next_n = 2 * n;
        if next_n > opts.n_ceiling.max(opts.n_start) {
            let est = vec![T::infinity(); prev.len()];
            return Ok((prev, est, n));
        }
        let cur = build_parity_block(params, sector, next_n).matrix().lowest(opts.levels);
        let est: Vec<T> = cur.iter().zip(&prev).map(|(a, b)| (*a - *b).abs()).collect();
        n = next_n;
        if est.iter().all(|&e| e < opts.tol) || 2 * n > opts.n_ceiling {
            return Ok((cur, est, n));
        }
        prev = cur;
    }
}

/// Converged eigenpairs of one block, for observables and the QFI.
#[derive(Clone, Debug)]
pub struct BlockStates<T> {
    pub block: ParityBlock<T>,
    pub energies: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub convergence_estimate: T,
}

/// Lowest `k` eigenpairs at the basis size where the lowest `k` energies converged.
pub fn block_states<T: Real>(
    params: &ModelParams<T>,
    sector: SectorSpec,
    k: usize,
    opts: &EdOptions<T>,
) -> Result<BlockStates<T>> {
    check_coupling(params)?;
    let o = EdOptions { levels: k, ..*opts };
    let (_, est, n) = converge_block(params, sector, &o)?;
    let worst = est.iter().fold(T::zero(), |m, &e| m.max(e));
    if !(worst < opts.tol) {
        return Err(Error::Convergence(format!(
            "lowest {k} levels of the {:?} block not converged at n_max = {n} (estimate {worst:e})",
            sector.parity
        )));
    }
    let block = build_parity_block(params, sector, n);
    let (energies, vectors) = block.matrix().lowest_pairs(k);
    Ok(BlockStates { block, energies, vectors, convergence_estimate: worst })
}

/// Squeezed-frame matrix `A_mn = δ_mn[(2m+1/2)β - 1/2] + p M_mn(β)`, `m, n < n_max`.
pub fn squeezed_frame_matrix<T: Real>(params: &ModelParams<T>, parity: Parity, n_max: usize) -> Result<DenseMatrix<T>> {
    let geo = params.geometry()?;
    if geo.at_collapse || geo.beta <= T::zero() {
        return domain("squeezed frame needs g < g_c");
    }
    let m = m_matrix(params, n_max)?;
    let p = parity.sign::<T>();
    Ok(DenseMatrix::from_fn(n_max, n_max, |i, j| {
        let d = if i == j { (T::two() * T::idx(i) + T::half()) * geo.beta - T::half() } else { T::zero() };
        d + p * m[(i, j)]
    }))
}

/// Options for the squeezed-frame solve (dense, so the ceiling is small).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqueezedOptions<T> {
    pub levels: usize,
    pub n_start: usize,
    pub n_ceiling: usize,
    pub tol: T,
}

impl<T: Real> Default for SqueezedOptions<T> {
    fn default() -> Self {
        Self { levels: 6, n_start: 32, n_ceiling: 1024, tol: T::of(1e-10) }
    }
}

fn squeezed_lowest<T: Real>(params: &ModelParams<T>, parity: Parity, n: usize, k: usize) -> Result<(Vec<T>, T)> {
    let a = squeezed_frame_matrix(params, parity, n)?;
    let vals = general_eigenvalues(&a)?;
    let mut max_imag = T::zero();
    let mut re = Vec::with_capacity(k);
    for v in vals.iter().take(k) {
        max_imag = max_imag.max(v.im.abs() / (T::one() + v.re.abs()));
        re.push(v.re);
    }
    Ok((re, max_imag))
}

/// Lowest levels of the squeezed-frame matrix via the general eigensolver, with doubling.
pub fn squeezed_frame_spectrum<T: Real>(
    params: &ModelParams<T>,
    parity: Parity,
    opts: &SqueezedOptions<T>,
) -> Result<SpectrumResult<T>> {
    let imag_tol = T::of(1e-8);
    let mut n = opts.n_start.max(2 * opts.levels);
    let (mut prev, _) = squeezed_lowest(params, parity, n, opts.levels)?;
    let (vals, est, n_used, max_imag) = loop {
        let next_n = 2 * n;
        if next_n > opts.n_ceiling.max(opts.n_start) {
            let est = vec![T::infinity(); prev.len()];
            break (prev, est, n, T::zero());
        }
        let (cur, imag) = squeezed_lowest(params, parity, next_n, opts.levels)?;
        let est: Vec<T> = cur.iter().zip(&prev).map(|(a, b)| (*a - *b).abs()).collect();
        n = next_n;
        if est.iter().all(|&e| e < opts.tol) || 2 * n > opts.n_ceiling {
            break (cur, est, n, imag);
        }
        prev = cur;
    };
    let levels = vals
        .iter()
        .zip(&est)
        .enumerate()
        .map(|(index, (&energy, &e))| Level {
            energy,
            parity,
            index,
            converged: e < opts.tol && max_imag < imag_tol,
            convergence_estimate: e,
        })
        .collect();
    Ok(SpectrumResult { levels, n_max_used: n_used, max_imag })
}
