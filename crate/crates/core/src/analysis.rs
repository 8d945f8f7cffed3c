//! Power-law and quadratic fits, and the `x = -log10(1 - g/g_c)` sampling grid.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{critical_params, ratio_from_x};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult<T> {
    /// Slope in log-log space, or the quadratic coefficient for gap-opening fits.
    pub exponent: T,
    /// Prefactor (power law) or intercept (quadratic fit).
    pub amplitude: T,
    pub r_squared: T,
    /// Abscissa range actually used.
    pub window: (T, T),
    pub n_points: usize,
}

pub const MIN_POINTS: usize = 5;

/// Unweighted least squares `y = a + b x`: returns `(b, a, r²)`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = T::idx(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == T::zero() { T::one() } else { (sxy * sxy / (sxx * syy)).min(T::one()) };
    (b, a, r2)
}

fn select<T: Real>(abscissa: &[T], ordinate: &[T], window: Option<(T, T)>) -> Result<(Vec<T>, Vec<T>)> {
    if abscissa.len() != ordinate.len() {
        return domain(format!("{} abscissae but {} ordinates", abscissa.len(), ordinate.len()));
    }
    let (lo, hi) = window.unwrap_or((T::neg_infinity(), T::infinity()));
    let (xs, ys): (Vec<T>, Vec<T>) =
        abscissa.iter().zip(ordinate).filter(|(&x, _)| x >= lo && x <= hi).map(|(&x, &y)| (x, y)).unzip();
    if xs.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!("{} points in window, need {MIN_POINTS}", xs.len())));
    }
    Ok((xs, ys))
}

fn span<T: Real>(xs: &[T]) -> (T, T) {
    xs.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Fits `y = A s^p` in log-log space, `s` typically `|g - g_c|`; `window` bounds `s`.
pub fn fit_powerlaw<T: Real>(abscissa: &[T], ordinate: &[T], window: Option<(T, T)>) -> Result<FitResult<T>> {
    let (xs, ys) = select(abscissa, ordinate, window)?;
    if let Some(bad) = xs.iter().chain(&ys).find(|v| !(**v > T::zero())) {
        return domain(format!("power-law fit needs positive data, got {bad}"));
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let (b, a, r2) = linear_fit(&lx, &ly);
    Ok(FitResult { exponent: b, amplitude: a.exp(), r_squared: r2, window: span(&xs), n_points: xs.len() })
}

/// Fits `ε = c δ² + b` with `δ = Δ - Δ_c`; `window` bounds `|δ|`.
pub fn fit_quadratic_gap<T: Real>(
    delta_detuning: &[T],
    gaps: &[T],
    window: Option<(T, T)>,
) -> Result<FitResult<T>> {
    let abs: Vec<T> = delta_detuning.iter().map(|d| d.abs()).collect();
    let (xs, ys) = select(&abs, gaps, window)?;
    let sq: Vec<T> = xs.iter().map(|d| *d * *d).collect();
    let (c, b, r2) = linear_fit(&sq, &ys);
    Ok(FitResult { exponent: c, amplitude: b, r_squared: r2, window: span(&xs), n_points: xs.len() })
}

/// `|g - g_c|` interval for an `x` window: `|g - g_c| = g_c 10^{-x}`.
pub fn distance_window<T: Real>(x_window: (T, T), g_c: T) -> (T, T) {
    let d = |x: T| g_c * T::of(10.0).powf(-x);
    // small tolerance so grid endpoints stay inside
    let eps = T::one() + T::of(1e-9);
    (d(x_window.1) / eps, d(x_window.0) * eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleGrid<T> {
    pub x_values: Vec<T>,
    pub g_over_gc: Vec<T>,
    pub g_values: Vec<T>,
}

impl<T: Real> SampleGrid<T> {
    pub fn len(&self) -> usize {
        self.x_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_values.is_empty()
    }

    /// `|g - g_c|` at each point.
    pub fn distances(&self) -> Vec<T> {
        let g_c = if self.g_values.is_empty() || self.g_over_gc[0] == T::zero() {
            T::one()
        } else {
            self.g_values[0] / self.g_over_gc[0]
        };
        self.x_values.iter().map(|&x| g_c * T::of(10.0).powf(-x)).collect()
    }

    pub fn betas(&self) -> Vec<T> {
        self.g_over_gc.iter().map(|&u| ((T::one() - u) * (T::one() + u)).sqrt()).collect()
    }
}

/// Uniform grid in `x`, `g = g_c (1 - 10^{-x})`.
pub fn make_grid<T: Real>(x_min: T, x_max: T, n: usize, r: T) -> Result<SampleGrid<T>> {
    if !(x_min >= T::zero() && x_max > x_min && x_max.is_finite()) {
        return domain(format!("grid needs 0 <= x_min < x_max, got [{x_min}, {x_max}]"));
    }
    if n < 2 {
        return domain("grid needs at least two points");
    }
    let (g_c, _) = critical_params(r)?;
    let step = (x_max - x_min) / T::idx(n - 1);
    let x_values: Vec<T> = (0..n).map(|i| x_min + step * T::idx(i)).collect();
    let g_over_gc: Vec<T> = x_values.iter().map(|&x| ratio_from_x(x)).collect();
    let g_values = g_over_gc.iter().map(|&u| u * g_c).collect();
    Ok(SampleGrid { x_values, g_over_gc, g_values })
}
