use crate::linalg::{DenseMatrix, SymTridiagonal};
use crate::model::{ModelParams, SectorSpec};
use crate::scalar::{sign_pow, Real};

/// Parity-projected Hamiltonian in the basis
/// `χ_n = (|↑, k_n⟩ + s_n |↓, k_n⟩)/√2`, `k_n = 2n + offset`, `s_n = -p(-1)^n`.
///
/// `d_n = k_n - Δ s_n/2`, `t_n = g sqrt((k_n+1)(k_n+2)) [(1+r) - (1-r) s_n]/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityBlock<T> {
    pub n_max: usize,
    pub sector: SectorSpec,
    pub diag: Vec<T>,
    pub offdiag: Vec<T>,
}

/// Relative sign `s_n` between the spin-down and spin-up amplitudes of `χ_n`.
pub(crate) fn spin_sign<T: Real>(sector: SectorSpec, n: usize) -> T {
    -sector.parity.sign::<T>() * sign_pow::<T>(n as i64)
}

fn photon<T: Real>(sector: SectorSpec, n: usize) -> T {
    T::idx(2 * n + sector.q.photon_offset())
}

fn offdiag_unit_g<T: Real>(r: T, sector: SectorSpec, n_max: usize) -> Vec<T> {
    (0..n_max.saturating_sub(1))
        .map(|n| {
            let k = photon::<T>(sector, n);
            let s = spin_sign::<T>(sector, n);
            ((k + T::one()) * (k + T::two())).sqrt() * ((T::one() + r) - (T::one() - r) * s) / T::two()
        })
        .collect()
}

pub fn build_parity_block<T: Real>(params: &ModelParams<T>, sector: SectorSpec, n_max: usize) -> ParityBlock<T> {
    assert!(n_max >= 2, "n_max must be at least 2");
    let diag = (0..n_max)
        .map(|n| photon::<T>(sector, n) - params.delta * spin_sign::<T>(sector, n) / T::two())
        .collect();
    let offdiag = offdiag_unit_g(params.r, sector, n_max).into_iter().map(|t| params.g * t).collect();
    let block = ParityBlock { n_max, sector, diag, offdiag };
    #[cfg(debug_assertions)]
    if n_max <= 48 {
        let dense = dense_projection(params, sector, n_max);
        let tri = block.matrix().to_dense();
        let scale = T::one() + tri.max_abs();
        assert!(
            dense.max_abs_diff(&tri) <= T::of(1e-12) * scale,
            "parity block disagrees with the dense projection"
        );
    }
    block
}

/// `∂H/∂g` restricted to the same parity block (zero diagonal).
pub fn coupling_derivative<T: Real>(params: &ModelParams<T>, sector: SectorSpec, n_max: usize) -> SymTridiagonal<T> {
    SymTridiagonal::new(vec![T::zero(); n_max], offdiag_unit_g(params.r, sector, n_max))
}

impl<T: Real> ParityBlock<T> {
    pub fn matrix(&self) -> SymTridiagonal<T> {
        SymTridiagonal::new(self.diag.clone(), self.offdiag.clone())
    }

    pub fn spin_signs(&self) -> Vec<T> {
        (0..self.n_max).map(|n| spin_sign(self.sector, n)).collect()
    }

    /// Photon number `k_n` of each basis state.
    pub fn photon_numbers(&self) -> Vec<T> {
        (0..self.n_max).map(|n| photon(self.sector, n)).collect()
    }

    /// Maps block coefficients to spin-resolved Fock amplitudes.
    pub fn to_spin_fock(&self, coeffs: &[T]) -> SpinFockState<T> {
        assert_eq!(coeffs.len(), self.n_max);
        let h = T::half().sqrt();
        let up = coeffs.iter().map(|&c| c * h).collect();
        let down = coeffs.iter().enumerate().map(|(n, &c)| c * h * spin_sign::<T>(self.sector, n)).collect();
        SpinFockState { offset: self.sector.q.photon_offset(), up, down }
    }
}

/// State in spin ⊗ Fock restricted to photon numbers `2n + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFockState<T> {
    pub offset: usize,
    pub up: Vec<T>,
    pub down: Vec<T>,
}

impl<T: Real> SpinFockState<T> {
    pub fn norm_sqr(&self) -> T {
        self.up.iter().chain(&self.down).map(|&x| x * x).sum()
    }

    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.offset, other.offset);
        let n = self.up.len().min(other.up.len());
        (0..n).map(|i| self.up[i] * other.up[i] + self.down[i] * other.down[i]).sum()
    }

    /// Flattened as `[up..., down...]`.
    pub fn to_vec(&self) -> Vec<T> {
        self.up.iter().chain(&self.down).copied().collect()
    }

    pub fn from_vec(offset: usize, v: &[T]) -> Self {
        let n = v.len() / 2;
        Self { offset, up: v[..n].to_vec(), down: v[n..].to_vec() }
    }
}

/// `∂H/∂g |ψ⟩` applied matrix-free; the result carries one extra manifold.
pub fn apply_coupling_derivative<T: Real>(r: T, state: &SpinFockState<T>) -> SpinFockState<T> {
    let n = state.up.len();
    let zr = (T::one() + r) / T::two();
    let yr = (T::one() - r) / T::two();
    let rr = |m: usize| {
        let k = T::idx(2 * m + state.offset);
        ((k + T::one()) * (k + T::two())).sqrt()
    };
    let get = |v: &[T], m: usize| if m < v.len() { v[m] } else { T::zero() };
    // A = a² + a†², B = a² - a†² on the manifold index
    let a_op = |v: &[T], m: usize| {
        let lo = if m > 0 { rr(m - 1) * get(v, m - 1) } else { T::zero() };
        rr(m) * get(v, m + 1) + lo
    };
    let b_op = |v: &[T], m: usize| {
        let lo = if m > 0 { rr(m - 1) * get(v, m - 1) } else { T::zero() };
        rr(m) * get(v, m + 1) - lo
    };
    let mut up = Vec::with_capacity(n + 1);
    let mut down = Vec::with_capacity(n + 1);
    for m in 0..=n {
        up.push(zr * a_op(&state.up, m) + yr * b_op(&state.down, m));
        down.push(-zr * a_op(&state.down, m) - yr * b_op(&state.up, m));
    }
    SpinFockState { offset: state.offset, up, down }
}

/// Norm of the component of `state` lying in the given parity sector.
pub fn parity_component_norm<T: Real>(state: &SpinFockState<T>, sector: SectorSpec) -> T {
    let h = T::half().sqrt();
    (0..state.up.len())
        .map(|n| {
            let c = h * (state.up[n] + spin_sign::<T>(sector, n) * state.down[n]);
            c * c
        })
        .sum::<T>()
        .sqrt()
}

/// Operator pieces of the full Hamiltonian on `2n + offset` Fock states, ordered
/// `[up..., down...]`: returns `(H, ∂H/∂g)`.
pub fn spin_fock_hamiltonian<T: Real>(
    params: &ModelParams<T>,
    offset: usize,
    n_max: usize,
) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let dim = 2 * n_max;
    let mut h = DenseMatrix::zeros(dim, dim);
    let mut dg = DenseMatrix::zeros(dim, dim);
    let two = T::two();
    let zr = (T::one() + params.r) / two;
    let yr = (T::one() - params.r) / two;
    for n in 0..n_max {
        let k = T::idx(2 * n + offset);
        // a†a
        h[(n, n)] += k;
        h[(n_max + n, n_max + n)] += k;
        // -Δ/2 σx
        h[(n, n_max + n)] -= params.delta / two;
        h[(n_max + n, n)] -= params.delta / two;
        if n + 1 < n_max {
            // ⟨k+2| a†² |k⟩ = R, ⟨k| a² |k+2⟩ = R
            let rr = ((k + T::one()) * (k + two)).sqrt();
            // σz (a² + a†²)
            for (row, col, sz) in [(n + 1, n, T::one()), (n_max + n + 1, n_max + n, -T::one())] {
                dg[(row, col)] += zr * sz * rr;
                dg[(col, row)] += zr * sz * rr;
            }
            // iσy = [[0, 1], [-1, 0]] times (a² - a†²):
            // ⟨↑,k+2| ... |↓,k⟩ = 1 · (-R); ⟨↑,k| ... |↓,k+2⟩ = 1 · R
            // ⟨↓,k+2| ... |↑,k⟩ = -1 · (-R); ⟨↓,k| ... |↑,k+2⟩ = -1 · R
            dg[(n + 1, n_max + n)] += yr * (-rr);
            dg[(n, n_max + n + 1)] += yr * rr;
            dg[(n_max + n + 1, n)] += yr * rr;
            dg[(n_max + n, n + 1)] += yr * (-rr);
        }
    }
    for i in 0..dim {
        for j in 0..dim {
            let v = dg[(i, j)];
            h[(i, j)] += params.g * v;
        }
    }
    (h, dg)
}

/// Explicit projection of the dense spin ⊗ Fock Hamiltonian onto the parity basis.
/// Test oracle for [`build_parity_block`].
pub fn dense_projection<T: Real>(params: &ModelParams<T>, sector: SectorSpec, n_max: usize) -> DenseMatrix<T> {
    let (h, _) = spin_fock_hamiltonian(params, sector.q.photon_offset(), n_max);
    let p = projector(sector, n_max);
    p.transpose().matmul(&h).matmul(&p)
}

/// Columns are the parity basis vectors `χ_n` in the `[up..., down...]` ordering.
pub fn projector<T: Real>(sector: SectorSpec, n_max: usize) -> DenseMatrix<T> {
    let h = T::half().sqrt();
    let mut p = DenseMatrix::zeros(2 * n_max, n_max);
    for n in 0..n_max {
        p[(n, n)] = h;
        p[(n_max + n, n)] = h * spin_sign::<T>(sector, n);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bargmann, Parity};

    #[test]
    fn matches_dense_projection_all_sectors() {
        let params = ModelParams::new(0.83, 0.31, 0.37).unwrap();
        for q in [Bargmann::Quarter, Bargmann::ThreeQuarters] {
            for parity in Parity::BOTH {
                let sector = SectorSpec { q, parity };
                let dense = dense_projection(&params, sector, 30);
                let tri = build_parity_block(&params, sector, 30).matrix().to_dense();
                assert!(dense.max_abs_diff(&tri) < 1e-12);
                // nothing leaks into the other parity
                let other = projector::<f64>(SectorSpec { q, parity: parity.flip() }, 30);
                let (h, _) = spin_fock_hamiltonian(&params, q.photon_offset(), 30);
                let mine = projector::<f64>(sector, 30);
                let cross = other.transpose().matmul(&h).matmul(&mine);
                assert!(cross.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_offdiagonal() {
        let params = ModelParams::new(0.5, 0.3, 0.4).unwrap();
        let m = build_parity_block(&params, SectorSpec::even(Parity::Minus), 4);
        assert!((m.offdiag[0] - 2f64.sqrt() * 0.3 * 0.4).abs() < 1e-15);
        let p = build_parity_block(&params, SectorSpec::even(Parity::Plus), 4);
        assert!((p.offdiag[0] - 2f64.sqrt() * 0.3).abs() < 1e-15);
        assert_eq!(m.diag[0], -0.25);
    }

    #[test]
    fn matrix_free_derivative_matches_dense() {
        let params = ModelParams::new(0.5, 0.2, 0.3).unwrap();
        let (_, dg) = spin_fock_hamiltonian(&params, 1, 12);
        let v: Vec<f64> = (0..24).map(|i| ((i * 7 % 11) as f64 - 5.0) / 9.0).collect();
        let dense = dg.matvec(&v);
        let st = SpinFockState::from_vec(1, &v);
        let free = apply_coupling_derivative(0.3, &st);
        for n in 0..11 {
            assert!((free.up[n] - dense[n]).abs() < 1e-12);
            assert!((free.down[n] - dense[12 + n]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_block_matches_dense() {
        let params = ModelParams::new(0.5, 0.2, 0.7).unwrap();
        let sector = SectorSpec::even(Parity::Minus);
        let (_, dg) = spin_fock_hamiltonian(&params, 0, 20);
        let p = projector::<f64>(sector, 20);
        let proj = p.transpose().matmul(&dg).matmul(&p);
        let tri = coupling_derivative(&params, sector, 20).to_dense();
        assert!(proj.max_abs_diff(&tri) < 1e-12);
    }
}
