//! Parameter sweeps over a [`SampleGrid`]. Grid points run in parallel; rows come back in grid order.

use rayon::prelude::*;
use serde::Serialize;

use crate::aa::{aa_energy, aa_gaps, aa_observables, aa_qfi_leading};
use crate::analysis::SampleGrid;
use crate::ed::{build_parity_block, ed_ground_observables, ed_spectrum, ed_spectrum_both, qfi_fidelity, qfi_spectral, EdOptions};
use crate::error::{domain, Result};
use crate::model::{critical_params, Bargmann, ModelParams, Parity, SectorSpec};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumRow<T> {
    pub g_over_gc: T,
    pub x: T,
    pub level_index: usize,
    pub parity: i32,
    pub energy: T,
    pub converged: bool,
    /// AA prediction; the AA states live in the `q = 1/4` sector only.
    pub aa_energy: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapRow<T> {
    pub g_over_gc: T,
    pub x: T,
    pub beta: T,
    pub eps_sp: T,
    pub eps_dp: T,
    pub converged: bool,
    pub n_max: usize,
    pub aa_eps_sp: T,
    pub aa_eps_dp: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservableRow<T> {
    pub g_over_gc: T,
    pub x: T,
    pub beta: T,
    pub photon: T,
    pub sigma_x: T,
    pub dx: T,
    pub dp: T,
    pub aa_photon: T,
    pub aa_sigma_x: T,
    pub aa_dx: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiRow<T> {
    pub g_over_gc: T,
    pub x: T,
    pub beta: T,
    pub qfi: T,
    pub qfi_fidelity: Option<T>,
    pub k_used: usize,
    pub tail_relative: T,
    pub aa_qfi: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapOpeningRow<T> {
    pub delta: T,
    /// `Δ - Δ_c`.
    pub delta_detuning: T,
    /// `E_c - E_bound` with `E_c = -1/2` the continuum edge at `g = g_c`.
    pub eps_dp: T,
    /// `|E_0^+ - E_0^-|` at the final truncation; tends to `eps_dp` as the edge level converges.
    pub eps_dp_truncated: T,
    /// Parity of the bound level.
    pub parity: i32,
    pub n_max: usize,
    pub converged: bool,
}

fn at<T: Real>(delta: T, r: T, u: T) -> Result<ModelParams<T>> {
    ModelParams::with_ratio(delta, u, r)
}

fn points<T: Real>(grid: &SampleGrid<T>) -> Vec<(T, T)> {
    grid.x_values.iter().copied().zip(grid.g_over_gc.iter().copied()).collect()
}

/// Lowest `levels` states of each parity, with the AA prediction alongside.
pub fn spectrum_scan<T: Real>(
    delta: T,
    r: T,
    q: Bargmann,
    grid: &SampleGrid<T>,
    opts: &EdOptions<T>,
) -> Result<Vec<SpectrumRow<T>>> {
    let per_point: Vec<Result<Vec<SpectrumRow<T>>>> = points(grid)
        .into_par_iter()
        .map(|(x, u)| {
            let p = at(delta, r, u)?;
            let spec = ed_spectrum_both(&p, q, opts)?;
            let mut rows = Vec::with_capacity(spec.levels.len());
            for l in &spec.levels {
                let aa = match q {
                    Bargmann::Quarter => Some(aa_energy(l.index, l.parity, &p)?.energy),
                    Bargmann::ThreeQuarters => None,
                };
                rows.push(SpectrumRow {
                    g_over_gc: u,
                    x,
                    level_index: l.index,
                    parity: l.parity.as_i32(),
                    energy: l.energy,
                    converged: l.converged,
                    aa_energy: aa,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// `ε_sp = E_1^- - E_0^-` and `ε_dp = E_0^+ - E_0^-` from ED, and their AA counterparts.
pub fn gap_scan<T: Real>(delta: T, r: T, grid: &SampleGrid<T>, opts: &EdOptions<T>) -> Result<Vec<GapRow<T>>> {
    let opts = opts.levels(opts.levels.max(2));
    points(grid)
        .into_par_iter()
        .map(|(x, u)| {
            let p = at(delta, r, u)?;
            let minus = ed_spectrum(&p, SectorSpec::even(Parity::Minus), &opts)?;
            let plus = ed_spectrum(&p, SectorSpec::even(Parity::Plus), &opts.levels(1))?;
            let (m0, m1, p0) = (&minus.levels[0], &minus.levels[1], &plus.levels[0]);
            let aa = aa_gaps(0, &p)?;
            Ok(GapRow {
                g_over_gc: u,
                x,
                beta: p.beta(),
                eps_sp: m1.energy - m0.energy,
                eps_dp: p0.energy - m0.energy,
                converged: m0.converged && m1.converged && p0.converged,
                n_max: minus.n_max_used.max(plus.n_max_used),
                aa_eps_sp: aa.eps_sp,
                aa_eps_dp: aa.eps_dp,
            })
        })
        .collect()
}

pub fn observables_scan<T: Real>(delta: T, r: T, grid: &SampleGrid<T>, opts: &EdOptions<T>) -> Result<Vec<ObservableRow<T>>> {
    points(grid)
        .into_par_iter()
        .map(|(x, u)| {
            let p = at(delta, r, u)?;
            let o = ed_ground_observables(&p, opts)?;
            let aa = aa_observables(&p)?;
            Ok(ObservableRow {
                g_over_gc: u,
                x,
                beta: p.beta(),
                photon: o.photon,
                sigma_x: o.sigma_x,
                dx: o.dx,
                dp: o.dp,
                aa_photon: aa.photon,
                aa_sigma_x: aa.sigma_x,
                aa_dx: aa.dx,
            })
        })
        .collect()
}

/// Spectral QFI per point; `fidelity_eps` adds the fidelity-route value as a cross-check.
pub fn qfi_scan<T: Real>(
    delta: T,
    r: T,
    grid: &SampleGrid<T>,
    opts: &EdOptions<T>,
    k_states: usize,
    fidelity_eps: Option<T>,
) -> Result<Vec<QfiRow<T>>> {
    points(grid)
        .into_par_iter()
        .map(|(x, u)| {
            let p = at(delta, r, u)?;
            let q = qfi_spectral(&p, opts, k_states, 512)?;
            let fid = match fidelity_eps {
                Some(eps) => Some(qfi_fidelity(&p, opts, eps * p.g_c())?),
                None => None,
            };
            Ok(QfiRow {
                g_over_gc: u,
                x,
                beta: p.beta(),
                qfi: q.value,
                qfi_fidelity: fid,
                k_used: q.k_used,
                tail_relative: q.tail_relative,
                aa_qfi: aa_qfi_leading(&p)?,
            })
        })
        .collect()
}

/// Controls for the bound-state gap at `g = g_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapOpeningOptions {
    pub n_start: usize,
    pub n_ceiling: usize,
    /// Absolute tolerance on `|E(2n) - E(n)|`.
    pub tol: f64,
}

impl Default for GapOpeningOptions {
    fn default() -> Self {
        Self { n_start: 1024, n_ceiling: 1 << 20, tol: 1e-9 }
    }
}

/// Bound-level gap at the collapse point, `-1/2 - min(E_0^+, E_0^-)`. The bound level sits in
/// parity `+1` for `Δ < Δ_c` and `-1` for `Δ > Δ_c`; only it converges under truncation doubling,
/// the other block's lowest level creeps up to the continuum edge.
pub fn gap_opening<T: Real>(r: T, deltas: &[T], opts: &GapOpeningOptions) -> Result<Vec<GapOpeningRow<T>>> {
    let (g_c, delta_c) = critical_params(r)?;
    if let Some(d) = deltas.iter().find(|&&d| d < T::zero() || !d.is_finite()) {
        return domain(format!("gap opening needs Δ >= 0, got {d}"));
    }
    deltas
        .par_iter()
        .map(|&delta| {
            let p = ModelParams::new(delta, g_c, r)?;
            let lowest = |n: usize| {
                let m = build_parity_block(&p, SectorSpec::even(Parity::Minus), n).matrix().lowest(1)[0];
                let pl = build_parity_block(&p, SectorSpec::even(Parity::Plus), n).matrix().lowest(1)[0];
                (m, pl)
            };
            let bound = |(m, pl): (T, T)| m.min(pl);
            let mut n = opts.n_start.max(16);
            let mut e = lowest(n);
            let mut converged = false;
            while 2 * n <= opts.n_ceiling {
                let next = lowest(2 * n);
                n *= 2;
                let change = (bound(next) - bound(e)).abs();
                e = next;
                if change < T::of(opts.tol) {
                    converged = true;
                    break;
                }
            }
            let (m, pl) = e;
            Ok(GapOpeningRow {
                delta,
                delta_detuning: delta - delta_c,
                eps_dp: -T::half() - m.min(pl),
                eps_dp_truncated: (pl - m).abs(),
                parity: if pl < m { 1 } else { -1 },
                n_max: n,
                converged,
            })
        })
        .collect()
}
