//! Bound states at the isotropic collapse point.
//!
//! Eliminating the position-sector component of `H_c = ½[[x² - 1, -Δ], [-Δ, p² - 1]]`
//! and rescaling `x → √2 κ x` with `κ² = -(E + 1/2)` gives
//! `-φ'' + V φ = -κ⁴ φ`, `V = -Δ²/(4(x² + 1))`. The rescaled equation does not depend on κ,
//! so each 1D level maps back directly: `E = -1/2 - sqrt(κ⁴)`.

use serde::Serialize;

use crate::ed::{build_parity_block, spin_fock_hamiltonian};
use crate::error::{domain, Error, Result};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix, SymTridiagonal};
use crate::model::{Bargmann, ModelParams, Parity, SectorSpec};
use crate::scalar::Real;

pub fn effective_potential<T: Real>(delta: T, x: T) -> T {
    -delta * delta / (T::of(4.0) * (x * x + T::one()))
}

/// Half-line problem on the mapped grid `x = sinh(u)`, `u_i = (i - 1/2) h`, `x ≤ L`,
/// Dirichlet at `L`; the two reflection symmetries give the even and odd towers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Collapse1DProblem<T> {
    pub delta: T,
    /// Position cutoff.
    pub l: T,
    /// Spacing in the mapped coordinate `u = asinh(x)`.
    pub h: T,
}

impl<T: Real> Collapse1DProblem<T> {
    pub fn new(delta: T) -> Self {
        Self { delta, l: T::of(1e8), h: T::of(0.01) }
    }

    pub fn refined(&self) -> Self {
        Self { delta: self.delta, l: self.l * T::two(), h: self.h / T::two() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta >= T::zero()) || !self.delta.is_finite() {
            return domain(format!("delta = {} must be finite and >= 0", self.delta));
        }
        if !(self.l > T::one()) || !(self.h > T::zero()) || !(self.h < T::one()) {
            return domain("need L > 1 and 0 < h < 1");
        }
        Ok(())
    }

    fn nodes(&self) -> Vec<T> {
        let u_max = self.l.asinh();
        let n = (u_max / self.h + T::half()).floor().to_usize().unwrap();
        (1..=n).map(|i| ((T::idx(i) - T::half()) * self.h).sinh()).collect()
    }

    /// Symmetrized finite-difference operator for one reflection symmetry.
    pub fn operator(&self, odd: bool) -> SymTridiagonal<T> {
        let x = self.nodes();
        let n = x.len();
        let left = -x[0];
        let right = ((T::idx(n) + T::half()) * self.h).sinh();
        let at = |i: isize| -> T {
            if i < 0 {
                left
            } else if i as usize >= n {
                right
            } else {
                x[i as usize]
            }
        };
        let w: Vec<T> = (0..n as isize).map(|i| (at(i + 1) - at(i - 1)) / T::two()).collect();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n - 1);
        for i in 0..n {
            let ii = i as isize;
            let right_c = T::one() / (at(ii + 1) - at(ii));
            let left_c = if i == 0 {
                // even: mirror value equal (no flux); odd: mirror value opposite
                if odd {
                    T::one() / (at(0) - left)
                } else {
                    T::zero()
                }
            } else {
                T::one() / (at(ii) - at(ii - 1))
            };
            let left_c = if i == 0 && odd { T::two() * left_c } else { left_c };
            diag.push((right_c + left_c) / w[i] + effective_potential(self.delta, x[i]));
            if i + 1 < n {
                off.push(-right_c / (w[i] * w[i + 1]).sqrt());
            }
        }
        SymTridiagonal::new(diag, off)
    }

    /// Binding energies `κ⁴ > 0` of one tower, deepest first (at most `k`).
    pub fn tower(&self, odd: bool, k: usize) -> Vec<T> {
        let op = self.operator(odd);
        let bound = op.sturm_count(T::zero()).min(k);
        (0..bound).map(|i| -op.eigenvalue(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tower<T> {
    pub kappa4: Vec<T>,
    /// `κ⁴_{n+1}/κ⁴_n`.
    pub ratios: Vec<T>,
    pub converged: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialParity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundStateLadder<T> {
    /// Merged ladder, `κ⁴` descending.
    pub binding_energies: Vec<T>,
    pub parities: Vec<SpatialParity>,
    pub converged: Vec<bool>,
    /// `κ⁴_{n+1}/κ⁴_n` of the merged ladder.
    pub ratios: Vec<T>,
    pub ratio_plateau: Option<T>,
    /// stdev/mean of merged ratios `n ∈ {3, 4, 5}`.
    pub plateau_variation: Option<T>,
    pub even: Tower<T>,
    pub odd: Tower<T>,
    /// Fewer than `k` levels resolved.
    pub partial: bool,
    /// `Δ > 1`: the `x⁻²` tail exceeds the critical strength 1/4.
    pub supercritical_tail: bool,
}

fn ratios<T: Real>(v: &[T]) -> Vec<T> {
    v.windows(2).map(|w| w[1] / w[0]).collect()
}

fn stability<T: Real>(a: &[T], b: &[T], tol: T) -> Vec<bool> {
    a.iter().enumerate().map(|(i, &x)| b.get(i).map_or(false, |&y| ((x - y) / x).abs() < tol)).collect()
}

fn tower_of<T: Real>(p: &Collapse1DProblem<T>, fine: &Collapse1DProblem<T>, odd: bool, k: usize) -> Tower<T> {
    let kappa4 = p.tower(odd, k);
    let refined = fine.tower(odd, k);
    Tower { ratios: ratios(&kappa4), converged: stability(&kappa4, &refined, T::of(5e-3)), kappa4 }
}

/// Stdev over mean of `r[3..=5]` where available.
fn plateau<T: Real>(r: &[T]) -> (Option<T>, Option<T>) {
    if r.len() < 6 {
        return (None, None);
    }
    let w = &r[3..=5];
    let mean = w.iter().copied().sum::<T>() / T::of(3.0);
    let var = w.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::two();
    (Some(mean), Some(var.sqrt() / mean))
}

/// The `k` deepest levels of the merged ladder, each checked against `(2L, h/2)` at 0.5%.
pub fn bound_states<T: Real>(problem: &Collapse1DProblem<T>, k: usize) -> Result<BoundStateLadder<T>> {
    problem.validate()?;
    let fine = problem.refined();
    let even = tower_of(problem, &fine, false, k);
    let odd = tower_of(problem, &fine, true, k);
    let mut merged: Vec<(T, SpatialParity, bool)> = even
        .kappa4
        .iter()
        .zip(&even.converged)
        .map(|(&e, &c)| (e, SpatialParity::Even, c))
        .chain(odd.kappa4.iter().zip(&odd.converged).map(|(&e, &c)| (e, SpatialParity::Odd, c)))
        .collect();
    merged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    merged.truncate(k);
    let binding_energies: Vec<T> = merged.iter().map(|m| m.0).collect();
    let r = ratios(&binding_energies);
    let (ratio_plateau, plateau_variation) = plateau(&r);
    Ok(BoundStateLadder {
        partial: binding_energies.len() < k,
        parities: merged.iter().map(|m| m.1).collect(),
        converged: merged.iter().map(|m| m.2).collect(),
        ratios: r,
        ratio_plateau,
        plateau_variation,
        binding_energies,
        even,
        odd,
        supercritical_tail: problem.delta > T::one(),
    })
}

/// `exp(-2π/sqrt(Δ²/4 - 1/4))`, the per-tower ratio of an inverse-square tail.
/// External theory, not derived here; only a cross-check.
pub fn inverse_square_ratio<T: Real>(delta: T) -> Option<T> {
    let s = delta * delta / T::of(4.0) - T::of(0.25);
    (s > T::zero()).then(|| (-T::two() * T::PI() / s.sqrt()).exp())
}

/// Dense `H_c = ½[[x² - 1, -Δ], [-Δ, p² - 1]]` on Fock states `0..n_fock`, ordered
/// `[component 1 ..., component 2 ...]`, with `x = a + a†`, `p = i(a† - a)`.
pub fn collapse_hamiltonian<T: Real>(delta: T, n_fock: usize) -> DenseMatrix<T> {
    let mut h = DenseMatrix::zeros(2 * n_fock, 2 * n_fock);
    for m in 0..n_fock {
        let nf = T::idx(m);
        // x² = a² + a†² + 2N + 1, p² = -(a² + a†²) + 2N + 1
        h[(m, m)] = nf;
        h[(n_fock + m, n_fock + m)] = nf;
        h[(m, n_fock + m)] = -delta / T::two();
        h[(n_fock + m, m)] = -delta / T::two();
        if m + 2 < n_fock {
            let rr = ((nf + T::one()) * (nf + T::two())).sqrt() / T::two();
            h[(m, m + 2)] = rr;
            h[(m + 2, m)] = rr;
            h[(n_fock + m, n_fock + m + 2)] = -rr;
            h[(n_fock + m + 2, n_fock + m)] = -rr;
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacingStudy<T> {
    pub n_max: usize,
    /// Largest spacing among the 20 lowest levels above -1/2 (parity -1, even photons).
    pub max_spacing: T,
    /// Largest |E_+ - E_-| over the 20 lowest level pairs.
    pub parity_splitting: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelMatch<T> {
    pub sector: SpatialParity,
    pub fock_energy: T,
    pub ladder_energy: T,
    pub relative_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseCheck<T> {
    pub delta: T,
    /// Max deviation between `H_c` and the model at `r = 1, g = 1/2` (dense, small basis).
    pub hamiltonian_identity: T,
    pub spacing: Vec<SpacingStudy<T>>,
    pub spacing_shrinks: bool,
    pub bound_matches: Vec<LevelMatch<T>>,
}

fn iso_params<T: Real>(delta: T) -> Result<ModelParams<T>> {
    ModelParams::new(delta, T::half(), T::one())
}

/// Levels below `-1/2` in one Bargmann sector (both parities merged), ascending.
fn fock_bound_levels<T: Real>(delta: T, q: Bargmann, n: usize) -> Result<Vec<T>> {
    let p = iso_params(delta)?;
    let thr = -T::half();
    let mut out = Vec::new();
    for parity in Parity::BOTH {
        let m = build_parity_block(&p, SectorSpec { q, parity }, n).matrix();
        let cnt = m.sturm_count(thr);
        out.extend((0..cnt).map(|i| m.eigenvalue(i)));
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Cross-checks the phase-space collapse Hamiltonian against the Fock-basis model and
/// the 1D ladder.
///
/// Every `Δ`: `H_c` equals the model at `r = 1`, `g = 1/2`. `Δ = 0`: spacing of the
/// 20 lowest levels above threshold at `n_max/4, n_max/2, n_max`. `Δ > 1`: the deepest
/// bound levels of each photon parity, converged under `n → 2n` to `1e-9`, must equal
/// `-1/2 - sqrt(κ⁴)` of the matching tower within 0.1%.
pub fn collapse_hamiltonian_check<T: Real>(delta: T, n_max: usize) -> Result<CollapseCheck<T>> {
    if n_max < 64 {
        return domain("collapse check needs n_max >= 64");
    }
    let params = iso_params(delta)?;
    let small = 24;
    let hc = collapse_hamiltonian(delta, 2 * small);
    // model blocks interleave even and odd photon numbers: gather them into one dense matrix
    let (h0, _) = spin_fock_hamiltonian(&params, 0, small);
    let (h1, _) = spin_fock_hamiltonian(&params, 1, small);
    let mut model = DenseMatrix::zeros(4 * small, 4 * small);
    let idx = |off: usize, spin: usize, n: usize| spin * 2 * small + 2 * n + off;
    for (off, h) in [(0, &h0), (1, &h1)] {
        for s1 in 0..2 {
            for i in 0..small {
                for s2 in 0..2 {
                    for j in 0..small {
                        model[(idx(off, s1, i), idx(off, s2, j))] = h[(s1 * small + i, s2 * small + j)];
                    }
                }
            }
        }
    }
    let hamiltonian_identity = model.max_abs_diff(&hc);
    let spec_small = symmetric_eigenvalues(&hc)?;
    let spec_model = symmetric_eigenvalues(&model)?;
    let spectra_gap = spec_small.iter().zip(&spec_model).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
    if hamiltonian_identity > T::of(1e-12) || spectra_gap > T::of(1e-9) {
        return Err(Error::Mapping(format!(
            "H_c differs from the r = 1, g = 1/2 model by {hamiltonian_identity:e} (spectra {spectra_gap:e})"
        )));
    }

    let mut spacing = Vec::new();
    if delta == T::zero() {
        for n in [n_max / 4, n_max / 2, n_max] {
            let minus = build_parity_block(&params, SectorSpec::even(Parity::Minus), n).matrix();
            let plus = build_parity_block(&params, SectorSpec::even(Parity::Plus), n).matrix();
            let thr = -T::half();
            let lo_m = minus.sturm_count(thr);
            let lo_p = plus.sturm_count(thr);
            let em: Vec<T> = (lo_m..lo_m + 21).map(|i| minus.eigenvalue(i)).collect();
            let ep: Vec<T> = (lo_p..lo_p + 21).map(|i| plus.eigenvalue(i)).collect();
            let max_spacing = em.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max);
            let parity_splitting = em.iter().zip(&ep).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
            spacing.push(SpacingStudy { n_max: n, max_spacing, parity_splitting });
        }
    }
    let spacing_shrinks = spacing.windows(2).all(|w| w[1].max_spacing < w[0].max_spacing);

    let mut bound_matches = Vec::new();
    if delta > T::one() {
        let ladder = bound_states(&Collapse1DProblem::new(delta), 8)?;
        for (q, sp, tower) in [
            (Bargmann::Quarter, SpatialParity::Even, &ladder.even),
            (Bargmann::ThreeQuarters, SpatialParity::Odd, &ladder.odd),
        ] {
            let a = fock_bound_levels(delta, q, n_max)?;
            let b = fock_bound_levels(delta, q, 2 * n_max)?;
            for (i, (&ea, &eb)) in a.iter().zip(&b).enumerate() {
                if (ea - eb).abs() > T::of(1e-9) || i >= tower.kappa4.len() {
                    break;
                }
                let ladder_energy = -T::half() - tower.kappa4[i].sqrt();
                let relative_error = ((eb + T::half()) / (ladder_energy + T::half()) - T::one()).abs();
                bound_matches.push(LevelMatch { sector: sp, fock_energy: eb, ladder_energy, relative_error });
            }
        }
        if bound_matches.is_empty() {
            return Err(Error::Mapping(format!("no converged bound level below -1/2 at n_max = {n_max}")));
        }
        if let Some(bad) = bound_matches.iter().find(|m| m.relative_error > T::of(1e-3)) {
            return Err(Error::Mapping(format!(
                "bound level {:e} vs ladder {:e} ({:?} tower): relative error {:e}",
                bad.fock_energy, bad.ladder_energy, bad.sector, bad.relative_error
            )));
        }
    }
    Ok(CollapseCheck { delta, hamiltonian_identity, spacing, spacing_shrinks, bound_matches })
}
