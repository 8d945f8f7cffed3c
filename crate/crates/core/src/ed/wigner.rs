use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ed::observables::{ground_state, observables_of, photonic_state, Conditioning, PhotonicState};
use crate::ed::spectrum::EdOptions;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Real;
use crate::specfun::ln_factorial;

/// Uniform phase-space grid, inclusive of both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, nx: points, p_min: -half_width, p_max: half_width, np: points }
    }

    /// Box of `±(1 + 7σ)` in each quadrature.
    pub fn auto(dx: f64, dp: f64, points: usize) -> Self {
        let hx = 1.0 + 7.0 * dx;
        let hp = 1.0 + 7.0 * dp;
        Self { x_min: -hx, x_max: hx, nx: points, p_min: -hp, p_max: hp, np: points }
    }

    fn axis<T: Real>(lo: f64, hi: f64, n: usize) -> Vec<T> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| T::of(lo + step * i as f64)).collect()
    }
}

/// `W(x, p)` with `x = a + a†`, `p = i(a† - a)`; `values[i][j]` is at `(x_axis[i], p_axis[j])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerGrid<T> {
    pub x_axis: Vec<T>,
    pub p_axis: Vec<T>,
    pub values: Vec<Vec<T>>,
    pub normalization: T,
    pub boundary_max: T,
}

impl<T: Real> WignerGrid<T> {
    fn cell(&self) -> T {
        (self.x_axis[1] - self.x_axis[0]) * (self.p_axis[1] - self.p_axis[0])
    }

    fn moment(&self, f: impl Fn(T, T) -> T) -> T {
        let mut acc = T::zero();
        for (i, &x) in self.x_axis.iter().enumerate() {
            for (j, &p) in self.p_axis.iter().enumerate() {
                acc += self.values[i][j] * f(x, p);
            }
        }
        acc * self.cell()
    }

    pub fn second_moment_x(&self) -> T {
        self.moment(|x, _| x * x)
    }

    pub fn second_moment_p(&self) -> T {
        self.moment(|_, p| p * p)
    }

    /// `(x, p, W)` triplets, x-major.
    pub fn triplets(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.x_axis
            .iter()
            .enumerate()
            .flat_map(move |(i, &x)| self.p_axis.iter().enumerate().map(move |(j, &p)| (x, p, self.values[i][j])))
    }
}

/// Photonic density matrix on manifold indices, `ρ[m][n]` for photon numbers `2m + off, 2n + off`.
fn density<T: Real>(state: &PhotonicState<T>) -> Vec<Vec<T>> {
    // drop the numerically empty tail
    let mut len = 0;
    for (_, v) in &state.components {
        let peak = v.iter().fold(T::zero(), |m, a| m.max(a.abs()));
        let cut = peak * T::of(1e-17);
        let last = v.iter().rposition(|a| a.abs() > cut).map_or(0, |i| i + 1);
        len = len.max(last);
    }
    let mut rho = vec![vec![T::zero(); len]; len];
    for (w, v) in &state.components {
        for m in 0..len {
            for n in 0..len {
                rho[m][n] += *w * v[m] * v[n];
            }
        }
    }
    rho
}

/// Sum of `ρ_{N+k,N} (-1)^N ℓ_N^k(y)` over photon numbers, with
/// `ℓ_N^k(y) = sqrt(N!/(N+k)!) y^{k/2} e^{-y/2} L_N^k(y)` from the normalized three-term recurrence.
fn laguerre_row<T: Real>(rho: &[Vec<T>], offset: usize, k_manifold: usize, y: T) -> T {
    let len = rho.len();
    let k = 2 * k_manifold;
    let top = 2 * (len - 1 - k_manifold) + offset;
    let kf = T::idx(k);
    let big = T::of(1e150);
    let ln_big = big.ln();
    let mut log_scale = if k == 0 {
        -y / T::two()
    } else if y > T::zero() {
        kf / T::two() * y.ln() - y / T::two() - ln_factorial::<T>(k as u64) / T::two()
    } else {
        return T::zero();
    };
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut acc = T::zero();
    for nn in 0..=top {
        if nn > 0 {
            let nf = T::idx(nn);
            let next = ((T::two() * nf - T::one() + kf - y) * cur - ((nf - T::one()) * (nf - T::one() + kf)).sqrt() * prev)
                / (nf * (nf + kf)).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > big {
                cur = cur / big;
                prev = prev / big;
                log_scale += ln_big;
            }
        }
        if nn >= offset && (nn - offset) % 2 == 0 {
            let n = (nn - offset) / 2;
            let r = rho[n + k_manifold][n];
            if r != T::zero() {
                let sign = if nn % 2 == 0 { T::one() } else { -T::one() };
                acc += sign * r * cur * log_scale.exp();
            }
        }
    }
    acc
}

fn wigner_point<T: Real>(rho: &[Vec<T>], offset: usize, x: T, p: T) -> T {
    let y = x * x + p * p;
    let phi = p.atan2(x);
    let mut w = laguerre_row(rho, offset, 0, y);
    for km in 1..rho.len() {
        let k = T::idx(2 * km);
        w += T::two() * laguerre_row(rho, offset, km, y) * (k * phi).cos();
    }
    w / (T::two() * T::PI())
}

/// Wigner function of a photonic state on the grid; errors if the boundary carries `|W| ≥ 1e-6`.
pub fn wigner_of<T: Real>(state: &PhotonicState<T>, grid: &GridSpec) -> Result<WignerGrid<T>> {
    if grid.nx < 3 || grid.np < 3 || !(grid.x_max > grid.x_min) || !(grid.p_max > grid.p_min) {
        return Err(Error::Domain("Wigner grid needs at least 3 points per axis and a positive extent".into()));
    }
    let x_axis: Vec<T> = GridSpec::axis(grid.x_min, grid.x_max, grid.nx);
    let p_axis: Vec<T> = GridSpec::axis(grid.p_min, grid.p_max, grid.np);
    let rho = density(state);
    let values: Vec<Vec<T>> = x_axis
        .par_iter()
        .map(|&x| p_axis.iter().map(|&p| wigner_point(&rho, state.offset, x, p)).collect())
        .collect();
    let mut boundary_max = T::zero();
    for (i, row) in values.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if i == 0 || j == 0 || i + 1 == grid.nx || j + 1 == grid.np {
                boundary_max = boundary_max.max(w.abs());
            }
        }
    }
    let limit = 1e-6;
    if boundary_max.f64() >= limit {
        return Err(Error::GridTooNarrow { boundary_max: boundary_max.f64(), limit });
    }
    let mut out = WignerGrid { x_axis, p_axis, values, normalization: T::zero(), boundary_max };
    out.normalization = out.moment(|_, _| T::one());
    Ok(out)
}

/// Wigner function of the even-sector ground state, reduced or conditioned on the qubit.
/// `grid = None` picks a box from the ED quadrature widths.
pub fn wigner_grid<T: Real>(
    params: &ModelParams<T>,
    opts: &EdOptions<T>,
    grid: Option<GridSpec>,
    points: usize,
    conditioning: Conditioning,
) -> Result<WignerGrid<T>> {
    let gs = ground_state(params, opts)?;
    let ph = photonic_state(&gs.state, conditioning);
    let grid = grid.unwrap_or_else(|| {
        let o = observables_of(&gs.state);
        GridSpec::auto(o.dx.f64(), o.dp.f64(), points)
    });
    wigner_of(&ph, &grid)
}
