use serde::{Deserialize, Serialize};

use crate::ed::block::{
    apply_coupling_derivative, build_parity_block, coupling_derivative, parity_component_norm, ParityBlock,
    SpinFockState,
};
use crate::ed::spectrum::{block_states, EdOptions};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, ShiftedLu};
use crate::model::{ModelParams, Parity, SectorSpec};
use crate::scalar::Real;
use crate::specfun::squeezed_vacuum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroundStateObservables<T> {
    pub photon: T,
    pub sigma_x: T,
    pub dx: T,
    pub dp: T,
}

/// Ground state of the even sector (it always lives in parity -1).
#[derive(Clone, Debug)]
pub struct GroundState<T> {
    pub energy: T,
    pub block: ParityBlock<T>,
    pub coeffs: Vec<T>,
    pub state: SpinFockState<T>,
}

pub fn ground_state<T: Real>(params: &ModelParams<T>, opts: &EdOptions<T>) -> Result<GroundState<T>> {
    let bs = block_states(params, SectorSpec::even(Parity::Minus), 1, opts)?;
    let coeffs = bs.vectors[0].clone();
    let state = bs.block.to_spin_fock(&coeffs);
    Ok(GroundState { energy: bs.energies[0], block: bs.block, coeffs, state })
}

/// `⟨a²⟩` for a real state supported on photon numbers `2n + offset`.
fn a_squared<T: Real>(s: &SpinFockState<T>) -> T {
    let mut acc = T::zero();
    for n in 0..s.up.len().saturating_sub(1) {
        let k = T::idx(2 * n + s.offset);
        let rr = ((k + T::one()) * (k + T::two())).sqrt();
        acc += rr * (s.up[n] * s.up[n + 1] + s.down[n] * s.down[n + 1]);
    }
    acc
}

pub fn observables_of<T: Real>(s: &SpinFockState<T>) -> GroundStateObservables<T> {
    let mut photon = T::zero();
    let mut sx = T::zero();
    for n in 0..s.up.len() {
        let k = T::idx(2 * n + s.offset);
        photon += k * (s.up[n] * s.up[n] + s.down[n] * s.down[n]);
        sx += T::two() * s.up[n] * s.down[n];
    }
    let a2 = a_squared(s);
    let base = T::two() * photon + T::one();
    let x2 = base + T::two() * a2;
    let p2 = base - T::two() * a2;
    GroundStateObservables { photon, sigma_x: sx, dx: x2.sqrt(), dp: p2.sqrt() }
}

pub fn ed_ground_observables<T: Real>(params: &ModelParams<T>, opts: &EdOptions<T>) -> Result<GroundStateObservables<T>> {
    let gs = ground_state(params, opts)?;
    Ok(observables_of(&gs.state))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QfiResult<T> {
    pub value: T,
    /// Excited states included in the partial sum.
    pub k_used: usize,
    /// `(full - partial)/full`, the full sum from the reduced resolvent.
    pub tail_relative: T,
    pub n_max: usize,
    /// Norm of `∂H/∂g|Φ_0⟩` in the opposite parity.
    pub cross_parity: T,
}

/// Spectral-sum QFI `4 Σ_{n≠0} |⟨Φ_n|∂_g H|Φ_0⟩|²/(E_n - E_0)²`.
///
/// Starts from `k_states` states and doubles until the tail is below `1e-6` relative,
/// up to `k_max` states.
pub fn qfi_spectral<T: Real>(params: &ModelParams<T>, opts: &EdOptions<T>, k_states: usize, k_max: usize) -> Result<QfiResult<T>> {
    let sector = SectorSpec::even(Parity::Minus);
    let tail_tol = T::of(1e-6);
    let mut k = k_states.max(2);
    loop {
        let bs = block_states(params, sector, k, opts)?;
        let n = bs.block.n_max;
        let h = bs.block.matrix();
        let dg = coupling_derivative(params, sector, n);
        let psi0 = &bs.vectors[0];
        let e0 = bs.energies[0];

        let leak = apply_coupling_derivative(params.r, &bs.block.to_spin_fock(psi0));
        let cross = parity_component_norm(&leak, SectorSpec::even(Parity::Plus));
        if cross > T::of(1e-12) {
            return Err(Error::Convergence(format!("∂H/∂g leaks {cross:e} into the opposite parity")));
        }

        let mut v = dg.matvec(psi0);
        let mut partial = T::zero();
        for (e, phi) in bs.energies.iter().zip(&bs.vectors).skip(1) {
            let m = dot(phi, &v);
            let de = *e - e0;
            partial += m * m / (de * de);
        }
        partial *= T::of(4.0);

        // full sum: 4 ‖(H - E0)^{-1} P⊥ ∂H|Φ0⟩‖², by iterating
        // y = (H - σ)^{-1}(w + s y) with σ = E0 - s; contraction ≤ 1/3 for s = gap/2.
        project_out(&mut v, psi0);
        let s = (bs.energies[1] - e0) / T::two();
        let lu = ShiftedLu::new(&h, e0 - s);
        let mut y = vec![T::zero(); n];
        for _ in 0..200 {
            let rhs: Vec<T> = v.iter().zip(&y).map(|(a, b)| *a + s * *b).collect();
            let mut next = lu.solve(&rhs);
            project_out(&mut next, psi0);
            let diff = next.iter().zip(&y).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
            let scale = next.iter().fold(T::zero(), |m, a| m.max(a.abs()));
            y = next;
            if diff <= T::epsilon() * T::of(4.0) * scale {
                break;
            }
        }
        let ny = norm(&y);
        let full = T::of(4.0) * ny * ny;
        // at r = 0 the ground state decouples and both sums vanish
        let floor = T::epsilon() * T::of(1e3) * (T::one() + partial);
        let tail = if full <= floor { T::zero() } else { ((full - partial) / full).abs() };
        if tail < tail_tol {
            return Ok(QfiResult { value: partial, k_used: k - 1, tail_relative: tail, n_max: n, cross_parity: cross });
        }
        if 2 * k > k_max {
            return Err(Error::Convergence(format!(
                "QFI spectral sum tail {tail:e} above 1e-6 with {} excited states",
                k - 1
            )));
        }
        k *= 2;
    }
}

fn project_out<T: Real>(v: &mut [T], unit: &[T]) {
    let c = dot(unit, v);
    for (vi, ui) in v.iter_mut().zip(unit) {
        *vi -= c * *ui;
    }
}

/// Fidelity-susceptibility QFI `8(1 - |⟨ψ(g-ε)|ψ(g+ε)⟩|)/(2ε)²`.
///
/// Both ground states are computed at the basis size that converged at `g`.
/// `1 - |o|` is evaluated as `‖ψ_- - ψ_+‖²/2` after sign alignment to avoid cancellation.
pub fn qfi_fidelity<T: Real>(params: &ModelParams<T>, opts: &EdOptions<T>, eps: T) -> Result<T> {
    let sector = SectorSpec::even(Parity::Minus);
    let gs = ground_state(params, opts)?;
    let n = gs.block.n_max;
    let g_c = params.g_c();
    if params.g + eps > g_c || params.g - eps < T::zero() {
        return Err(Error::Domain(format!("g ± ε leaves [0, g_c] at g = {}", params.g)));
    }
    let state_at = |g: T| -> Vec<T> {
        let p = params.with_g(g);
        let (_, vecs) = build_parity_block(&p, sector, n).matrix().lowest_pairs(1);
        vecs.into_iter().next().unwrap()
    };
    let a = state_at(params.g - eps);
    let mut b = state_at(params.g + eps);
    if dot(&a, &b) < T::zero() {
        b.iter_mut().for_each(|x| *x = -*x);
    }
    let d2: T = a.iter().zip(&b).map(|(x, y)| (*x - *y) * (*x - *y)).sum();
    let one_minus = d2 / T::two();
    let step = T::two() * eps;
    Ok(T::of(8.0) * one_minus / (step * step))
}

/// Photonic reduction of the qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Partial trace over the qubit.
    Reduced,
    QubitUp,
    QubitDown,
}

/// Photonic density matrix as a weighted sum of pure states on photon numbers `2n + offset`.
#[derive(Clone, Debug)]
pub struct PhotonicState<T> {
    pub offset: usize,
    /// `(weight, amplitudes)` with normalized amplitudes and weights summing to one.
    pub components: Vec<(T, Vec<T>)>,
}

fn normalized<T: Real>(v: &[T]) -> (T, Vec<T>) {
    let n = norm(v);
    (n * n, v.iter().map(|&x| x / n).collect())
}

pub fn photonic_state<T: Real>(state: &SpinFockState<T>, conditioning: Conditioning) -> PhotonicState<T> {
    let components = match conditioning {
        Conditioning::Reduced => vec![normalized(&state.up), normalized(&state.down)],
        Conditioning::QubitUp => vec![(T::one(), normalized(&state.up).1)],
        Conditioning::QubitDown => vec![(T::one(), normalized(&state.down).1)],
    };
    let total: T = components.iter().map(|c| c.0).sum();
    let components = components.into_iter().map(|(w, v)| (w / total, v)).collect();
    PhotonicState { offset: state.offset, components }
}

/// `|⟨S(±θ)0|ψ_cond⟩|²` for the qubit-up (`S(-θ)`) or qubit-down (`S(θ)`) conditional state.
pub fn squeezed_vacuum_fidelity<T: Real>(params: &ModelParams<T>, opts: &EdOptions<T>, conditioning: Conditioning) -> Result<T> {
    let geo = params.geometry()?;
    if geo.at_collapse {
        return Err(Error::Domain("squeezed vacuum undefined at g = g_c".into()));
    }
    let theta = match conditioning {
        Conditioning::QubitDown => geo.theta,
        Conditioning::QubitUp => -geo.theta,
        Conditioning::Reduced => return Err(Error::Domain("fidelity needs a qubit projection".into())),
    };
    let gs = ground_state(params, opts)?;
    let ph = photonic_state(&gs.state, conditioning);
    let amps = &ph.components[0].1;
    let sv = squeezed_vacuum(theta, amps.len());
    let o = dot(&sv, amps);
    Ok(o * o)
}
