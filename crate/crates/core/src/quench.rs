//! Linear quench `g(t) = g_f t/τ_q` from the decoupled ground state, residual energy
//! and the Kibble–Zurek predictions it is compared against.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::ed::{build_parity_block, coupling_derivative, EdOptions, ParityBlock};
use crate::error::{domain, Error, Result};
use crate::linalg::solve_complex_tridiagonal;
use crate::model::{ModelParams, Parity, SectorSpec};
use crate::scalar::Real;

/// Time-step control. `dt = None` uses `min(0.1, τ_q/100)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepPolicy<T> {
    pub dt: Option<T>,
    /// Relative change of `E_r` accepted between `dt` and `dt/2`, and between `n` and `2n`.
    pub rel_tol: T,
    pub max_halvings: usize,
}

impl<T: Real> Default for StepPolicy<T> {
    fn default() -> Self {
        Self { dt: None, rel_tol: T::of(0.01), max_halvings: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuenchProtocol<T> {
    /// `params.g` is the final coupling `g_f`.
    pub params: ModelParams<T>,
    pub tau_q: T,
    /// Starting truncation (manifolds of the parity block).
    pub n_max: usize,
    pub n_ceiling: usize,
    pub step: StepPolicy<T>,
    /// Number of trajectory samples to record (0 for none).
    pub samples: usize,
}

impl<T: Real> QuenchProtocol<T> {
    pub fn new(params: ModelParams<T>, tau_q: T) -> Result<Self> {
        let g_c = params.g_c();
        if !(params.g < g_c) {
            return domain(format!("quench needs g_f < g_c = {g_c}, got {}", params.g));
        }
        if !(tau_q > T::zero()) || !tau_q.is_finite() {
            return domain(format!("quench time must be positive, got {tau_q}"));
        }
        Ok(Self { params, tau_q, n_max: 256, n_ceiling: 1 << 16, step: StepPolicy::default(), samples: 0 })
    }

    pub fn g_f(&self) -> T {
        self.params.g
    }

    fn dt0(&self) -> T {
        self.step.dt.unwrap_or_else(|| T::of(0.1).min(self.tau_q / T::of(100.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuenchSample<T> {
    pub t: T,
    pub g: T,
    pub energy: T,
    /// `|⟨Φ_0(g(t))|ψ(t)⟩|²`.
    pub ground_overlap: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuenchResult<T> {
    pub residual_energy: T,
    pub norm_drift: T,
    pub n_max: usize,
    pub dt: T,
    /// Ground energy at `g_f` the residual is measured from.
    pub e0_final: T,
    /// Largest occupancy of the top 10% of basis states seen during the run.
    pub edge_occupancy: T,
    /// Relative change of `E_r` under `dt → dt/2` and `n → 2n`.
    pub dt_change: T,
    pub n_change: T,
    pub samples: Vec<QuenchSample<T>>,
}

/// Outcome of a single fixed-`(n, dt)` propagation.
#[derive(Clone, Debug)]
pub struct Run<T> {
    pub final_energy: T,
    pub norm_drift: T,
    pub edge_occupancy: T,
    pub samples: Vec<QuenchSample<T>>,
}

fn sector() -> SectorSpec {
    SectorSpec::even(Parity::Minus)
}

fn energy_of<T: Real>(diag: &[T], off: &[T], g: T, psi: &[Complex<T>]) -> T {
    let mut e = T::zero();
    for (d, c) in diag.iter().zip(psi) {
        e += *d * c.norm_sqr();
    }
    for i in 0..off.len() {
        e += T::two() * g * off[i] * (psi[i].conj() * psi[i + 1]).re;
    }
    e
}

fn edge<T: Real>(psi: &[Complex<T>]) -> T {
    let start = psi.len() - psi.len() / 10;
    psi[start..].iter().map(|c| c.norm_sqr()).sum()
}

/// Crank–Nicolson with the coupling at the step midpoint; the Hamiltonian is shifted
/// by `+1/2` so the low levels sit near zero.
pub fn propagate_fixed<T: Real>(protocol: &QuenchProtocol<T>, n: usize, dt: T) -> Run<T> {
    let p0 = protocol.params.with_g(T::zero());
    let block: ParityBlock<T> = build_parity_block(&p0, sector(), n);
    let shift = T::half();
    let diag: Vec<T> = block.diag.iter().map(|&d| d + shift).collect();
    let unit = coupling_derivative(&protocol.params, sector(), n);
    let off = unit.off().to_vec();

    let tau = protocol.tau_q;
    let g_f = protocol.g_f();
    let steps = (tau / dt).ceil().to_usize().unwrap().max(1);
    let h = tau / T::idx(steps);
    let half_i = Complex::new(T::zero(), h / T::two());
    let one = Complex::new(T::one(), T::zero());

    let mut psi = vec![Complex::new(T::zero(), T::zero()); n];
    psi[0] = one;
    let lhs_diag: Vec<Complex<T>> = diag.iter().map(|&d| one + half_i * d).collect();
    let mut lhs_off = vec![Complex::new(T::zero(), T::zero()); n - 1];
    let mut rhs = vec![Complex::new(T::zero(), T::zero()); n];
    let mut scratch = Vec::with_capacity(n);
    let mut edge_max = T::zero();

    let sample_every = if protocol.samples > 0 { (steps / protocol.samples).max(1) } else { usize::MAX };
    let mut samples = Vec::new();

    for step in 0..steps {
        let g = g_f * (T::idx(step) + T::half()) * h / tau;
        for i in 0..n - 1 {
            lhs_off[i] = half_i * (g * off[i]);
        }
        // rhs = (1 - i h/2 H) ψ
        for i in 0..n {
            let mut hv = Complex::new(diag[i], T::zero()) * psi[i];
            if i > 0 {
                hv = hv + psi[i - 1] * (g * off[i - 1]);
            }
            if i + 1 < n {
                hv = hv + psi[i + 1] * (g * off[i]);
            }
            rhs[i] = psi[i] - half_i * hv;
        }
        solve_complex_tridiagonal(&lhs_diag, &lhs_off, &mut rhs, &mut scratch);
        std::mem::swap(&mut psi, &mut rhs);

        if step % 64 == 63 || step + 1 == steps {
            edge_max = edge_max.max(edge(&psi));
        }
        if (step + 1) % sample_every == 0 {
            let t = T::idx(step + 1) * h;
            let g_t = g_f * t / tau;
            let b = build_parity_block(&protocol.params.with_g(g_t), sector(), n);
            let (_, v) = b.matrix().lowest_pairs(1);
            let ov = v[0].iter().zip(&psi).fold(Complex::new(T::zero(), T::zero()), |s, (a, c)| s + *c * *a);
            samples.push(QuenchSample {
                t,
                g: g_t,
                energy: energy_of(&diag, &off, g_t, &psi) - shift,
                ground_overlap: ov.norm_sqr(),
            });
        }
    }
    let norm: T = psi.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    Run {
        final_energy: energy_of(&diag, &off, g_f, &psi) - shift,
        norm_drift: (norm - T::one()).abs(),
        edge_occupancy: edge_max,
        samples,
    }
}

/// Ground energy at `g` from bisection on a doubled basis, converged to `tol`.
pub fn reference_ground_energy<T: Real>(params: &ModelParams<T>, tol: T, ceiling: usize) -> Result<(T, usize)> {
    let opts = EdOptions { levels: 1, n_start: 256, n_ceiling: ceiling, tol };
    let s = crate::ed::ed_spectrum(params, sector(), &opts)?;
    let lvl = s.levels[0];
    if !lvl.converged {
        return Err(Error::Convergence(format!(
            "ground energy at g = {} not converged at n_max = {} (estimate {:e})",
            params.g, s.n_max_used, lvl.convergence_estimate
        )));
    }
    Ok((lvl.energy, s.n_max_used))
}

fn truncated_ground<T: Real>(params: &ModelParams<T>, n: usize) -> T {
    build_parity_block(params, sector(), n).matrix().lowest(1)[0]
}

/// Propagates with truncation and step-size control.
///
/// `n` doubles until the edge occupancy stays below `1e-8` and the truncated ground
/// energy at `g_f` is within `1e-3 E_r` of the reference; then `dt → dt/2` and `n → 2n`
/// must each move `E_r` by less than `rel_tol`.
pub fn propagate<T: Real>(protocol: &QuenchProtocol<T>) -> Result<QuenchResult<T>> {
    let (e0, _) = reference_ground_energy(&protocol.params, T::of(1e-11), 1 << 20)?;
    let norm_tol = T::of(1e-9);
    let edge_tol = T::of(1e-8);
    let rel_tol = protocol.step.rel_tol;
    let er = |run: &Run<T>| run.final_energy - e0;
    let rel = |a: T, b: T| ((a - b) / b.abs().max(T::of(1e-300))).abs();

    let mut n = protocol.n_max.max(16);
    let mut dt = protocol.dt0();
    let mut run = propagate_fixed(protocol, n, dt);
    loop {
        let trunc = truncated_ground(&protocol.params, n) - e0;
        if run.edge_occupancy < edge_tol && trunc <= T::of(1e-3) * er(&run).abs().max(T::of(1e-12)) {
            break;
        }
        if 2 * n > protocol.n_ceiling {
            return Err(Error::Convergence(format!(
                "quench truncation not converged at n_max = {n}: edge occupancy {:e}, ground offset {trunc:e}",
                run.edge_occupancy
            )));
        }
        n *= 2;
        run = propagate_fixed(protocol, n, dt);
    }

    let mut halvings = 0;
    let (fine, dt_change) = loop {
        let finer = propagate_fixed(protocol, n, dt / T::two());
        let change = rel(er(&finer), er(&run));
        dt = dt / T::two();
        if change < rel_tol {
            break (finer, change);
        }
        halvings += 1;
        if halvings >= protocol.step.max_halvings {
            return Err(Error::Convergence(format!(
                "E_r still changes by {change:e} relative after halving dt to {dt:e}"
            )));
        }
        run = finer;
    };

    let wide = propagate_fixed(protocol, 2 * n, dt);
    let n_change = rel(er(&wide), er(&fine));
    if n_change >= rel_tol {
        return Err(Error::Convergence(format!("E_r changes by {n_change:e} relative when doubling n_max = {n}")));
    }
    if fine.norm_drift >= norm_tol {
        return Err(Error::Convergence(format!("norm drift {:e} above 1e-9", fine.norm_drift)));
    }
    let residual_energy = er(&fine);
    if residual_energy < -T::of(1e-10) {
        return Err(Error::Convergence(format!("negative residual energy {residual_energy:e}")));
    }
    Ok(QuenchResult {
        residual_energy,
        norm_drift: fine.norm_drift,
        n_max: n,
        dt,
        e0_final: e0,
        edge_occupancy: fine.edge_occupancy,
        dt_change,
        n_change,
        samples: fine.samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KZPrediction<T> {
    pub g_k: T,
    pub g_k_over_gc: T,
    pub e_r_adiabatic: T,
    pub e_r_kz: T,
}

/// Freeze-out coupling and the two residual-energy regimes, with `zν = 1/2`.
pub fn kz_predict<T: Real>(tau_q: T, params: &ModelParams<T>) -> Result<KZPrediction<T>> {
    if !(tau_q > T::one()) {
        return domain(format!("kz_predict needs τ_q > 1, got {tau_q}"));
    }
    let z_nu = T::half();
    let g_c = params.g_c();
    let s = T::of(4.0) * T::two().sqrt() * tau_q;
    let g_k_over_gc = T::one() - s.powf(-T::one() / (T::of(3.0) * z_nu));
    let u = params.g_over_gc();
    let sixteen = T::of(16.0);
    let e_r_adiabatic = u * u / (sixteen * (T::one() - u * u).powf(T::of(2.5)) * tau_q * tau_q);
    let e_r_kz = s.powf(T::of(5.0) / T::of(3.0)) / (sixteen * tau_q * tau_q);
    Ok(KZPrediction { g_k: g_k_over_gc * g_c, g_k_over_gc, e_r_adiabatic, e_r_kz })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KzPoint<T> {
    pub tau_q: T,
    pub result: Option<QuenchResult<T>>,
    /// Why the point was excluded.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KzSweep<T> {
    pub g_f_over_gc: T,
    pub points: Vec<KzPoint<T>>,
}

impl<T: Real> KzSweep<T> {
    /// Converged `(τ_q, E_r)` pairs only.
    pub fn converged(&self) -> (Vec<T>, Vec<T>) {
        self.points
            .iter()
            .filter_map(|p| p.result.as_ref().map(|r| (p.tau_q, r.residual_energy)))
            .unzip()
    }

    pub fn excluded(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_none()).count()
    }
}

/// Runs every `τ_q` in parallel from the `template` protocol (its `tau_q` is replaced).
pub fn kz_sweep<T: Real>(template: &QuenchProtocol<T>, taus: &[T]) -> KzSweep<T> {
    let points = taus
        .par_iter()
        .map(|&tau_q| {
            let proto = QuenchProtocol { tau_q, ..*template };
            match propagate(&proto) {
                Ok(r) => KzPoint { tau_q, result: Some(r), error: None },
                Err(e) => KzPoint { tau_q, result: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    KzSweep { g_f_over_gc: template.params.g_over_gc(), points }
}
