//! Model parameters, the critical line and the (β, θ, δ) reparameterization.
//!
//! Units: ħ = ω = 1. The Hamiltonian is
//! `H = -Δ/2 σx + a†a + g(1+r)/2 σz(a² + a†²) + g(1-r)/2 iσy(a² - a†²)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Residual Z2 label inside a Bargmann sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "-1")]
    Minus,
    #[serde(rename = "+1")]
    Plus,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Minus, Parity::Plus];

    pub fn sign<T: Real>(self) -> T {
        match self {
            Parity::Plus => T::one(),
            Parity::Minus => -T::one(),
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
        }
    }

    pub fn from_i32(p: i32) -> Result<Self> {
        match p {
            1 => Ok(Parity::Plus),
            -1 => Ok(Parity::Minus),
            _ => domain(format!("parity must be +1 or -1, got {p}")),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Plus => Parity::Minus,
            Parity::Minus => Parity::Plus,
        }
    }
}

/// Bargmann index of the Z4 symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bargmann {
    /// q = 1/4, even photon numbers.
    #[serde(rename = "1/4")]
    Quarter,
    /// q = 3/4, odd photon numbers.
    #[serde(rename = "3/4")]
    ThreeQuarters,
}

impl Bargmann {
    /// Photon number offset: Fock state `2n + offset` is manifold `n`.
    pub fn photon_offset(self) -> usize {
        match self {
            Bargmann::Quarter => 0,
            Bargmann::ThreeQuarters => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub q: Bargmann,
    pub parity: Parity,
}

impl SectorSpec {
    pub fn even(parity: Parity) -> Self {
        Self { q: Bargmann::Quarter, parity }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub delta: T,
    pub g: T,
    pub r: T,
}

/// Returns `(g_c, Δ_c)` for anisotropy `r`.
pub fn critical_params<T: Real>(r: T) -> Result<(T, T)> {
    if !(r >= T::zero() && r <= T::one()) {
        return domain(format!("anisotropy r = {r} outside [0, 1]"));
    }
    let one = T::one();
    Ok((one / (one + r), (one - r) / (one + r)))
}

impl<T: Real> ModelParams<T> {
    /// Validated constructor. Accepts `g == g_c`; consumers decide whether β = 0 is allowed.
    pub fn new(delta: T, g: T, r: T) -> Result<Self> {
        let (gc, _) = critical_params(r)?;
        if !(delta >= T::zero()) || !delta.is_finite() {
            return domain(format!("qubit frequency delta = {delta} must be finite and >= 0"));
        }
        if !(g >= T::zero()) {
            return domain(format!("coupling g = {g} must be >= 0"));
        }
        if g > gc {
            return domain(format!("coupling g = {g} exceeds g_c(r = {r}) = {gc}"));
        }
        Ok(Self { delta, g, r })
    }

    /// Coupling given as a fraction of g_c.
    pub fn with_ratio(delta: T, g_over_gc: T, r: T) -> Result<Self> {
        let (gc, _) = critical_params(r)?;
        Self::new(delta, g_over_gc * gc, r)
    }

    /// Δ = Δ_c(r), coupling as a fraction of g_c.
    pub fn critical_delta(g_over_gc: T, r: T) -> Result<Self> {
        let (gc, dc) = critical_params(r)?;
        Self::new(dc, g_over_gc * gc, r)
    }

    pub fn omega(&self) -> T {
        T::one()
    }

    pub fn g_c(&self) -> T {
        T::one() / (T::one() + self.r)
    }

    pub fn delta_c(&self) -> T {
        (T::one() - self.r) / (T::one() + self.r)
    }

    pub fn g_over_gc(&self) -> T {
        self.g * (T::one() + self.r)
    }

    pub fn with_g(&self, g: T) -> Self {
        Self { g, ..*self }
    }

    pub fn geometry(&self) -> Result<CriticalGeometry<T>> {
        geometry(self)
    }

    /// β for this coupling; `0` at the collapse point.
    pub fn beta(&self) -> T {
        let u = self.g_over_gc();
        ((T::one() - u) * (T::one() + u)).max(T::zero()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalGeometry<T> {
    pub g_c: T,
    pub delta_c: T,
    pub beta: T,
    pub theta: T,
    pub delta_detuning: T,
    pub e_collapse: T,
    pub at_collapse: bool,
}

pub fn geometry<T: Real>(params: &ModelParams<T>) -> Result<CriticalGeometry<T>> {
    let (g_c, delta_c) = critical_params(params.r)?;
    let u = params.g / g_c;
    if u > T::one() {
        return domain(format!("coupling g = {} exceeds g_c = {g_c}", params.g));
    }
    let one = T::one();
    let at_collapse = u == one;
    let beta = ((one - u) * (one + u)).sqrt();
    let theta = if at_collapse {
        T::infinity()
    } else {
        T::of(0.25) * ((one + u) / (one - u)).ln()
    };
    Ok(CriticalGeometry {
        g_c,
        delta_c,
        beta,
        theta,
        delta_detuning: params.delta - delta_c,
        e_collapse: -T::half(),
        at_collapse,
    })
}

/// `x = -log10(1 - g/g_c)`.
pub fn x_from_ratio<T: Real>(g_over_gc: T) -> T {
    -(T::one() - g_over_gc).log10()
}

/// `g/g_c = 1 - 10^{-x}`.
pub fn ratio_from_x<T: Real>(x: T) -> T {
    T::one() - T::of(10.0).powf(-x)
}

/// Qubit frequency as given in a parameter file: a number or `"critical"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Value(f64),
    Named(DeltaName),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaName {
    Critical,
}

impl DeltaSpec {
    pub fn resolve(&self, r: f64) -> Result<f64> {
        match self {
            DeltaSpec::Value(v) => Ok(*v),
            DeltaSpec::Named(DeltaName::Critical) => Ok(critical_params(r)?.1),
        }
    }
}

/// JSON parameter schema `{"delta", "g" | "g_over_gc", "r"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub delta: DeltaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_over_gc: Option<f64>,
    pub r: f64,
}

impl ParamSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Domain(format!("parameter JSON: {e}")))
    }

    pub fn resolve(&self) -> Result<ModelParams<f64>> {
        let delta = self.delta.resolve(self.r)?;
        let (gc, _) = critical_params(self.r)?;
        let g = match (self.g, self.g_over_gc) {
            (Some(_), Some(_)) => return domain("\"g\" and \"g_over_gc\" are mutually exclusive"),
            (Some(g), None) => g,
            (None, Some(u)) => u * gc,
            (None, None) => return domain("one of \"g\" or \"g_over_gc\" is required"),
        };
        ModelParams::new(delta, g, self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_line_values() {
        assert_eq!(critical_params(0.6_f64).unwrap(), (0.625, 0.25));
        assert_eq!(critical_params(1.0_f64).unwrap(), (0.5, 0.0));
        assert_eq!(critical_params(0.0_f64).unwrap(), (1.0, 1.0));
        assert!(critical_params(1.5_f64).is_err());
        assert!(critical_params(-0.1_f64).is_err());
        assert!(critical_params(f64::NAN).is_err());
    }

    #[test]
    fn geometry_examples() {
        let p = ModelParams::<f64>::new(0.3, 0.0, 0.4).unwrap();
        let geo = p.geometry().unwrap();
        assert_eq!(geo.beta, 1.0);
        assert_eq!(geo.theta, 0.0);

        let p = ModelParams::<f64>::with_ratio(0.3, 0.6, 0.4).unwrap();
        let geo = p.geometry().unwrap();
        assert!((geo.beta - 0.8).abs() < 1e-15);
        assert!((geo.theta - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        assert!((geo.delta_detuning - (0.3 - 0.6 / 1.4)).abs() < 1e-15);

        let p = ModelParams::<f64>::with_ratio(0.3, 1.0, 0.4).unwrap();
        let geo = p.geometry().unwrap();
        assert!(geo.at_collapse);
        assert_eq!(geo.beta, 0.0);
        assert!(geo.theta.is_infinite());

        assert!(ModelParams::new(0.3, 0.8, 0.4).is_err());
    }

    #[test]
    fn f32_geometry() {
        let p = ModelParams::<f32>::with_ratio(0.5, 0.6, 0.25).unwrap();
        let geo = p.geometry().unwrap();
        assert!((geo.beta - 0.8).abs() < 1e-6);
        assert!((geo.beta * (2.0 * geo.theta).cosh() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn x_mapping() {
        assert!((ratio_from_x(1.0_f64) - 0.9).abs() < 1e-15);
        assert!((ratio_from_x(3.0_f64) - 0.999).abs() < 1e-15);
        assert!((x_from_ratio(0.999_f64) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn param_spec_json() {
        let s = ParamSpec::from_json(r#"{"delta": "critical", "g_over_gc": 0.5, "r": 0.6}"#).unwrap();
        let p = s.resolve().unwrap();
        assert_eq!(p.delta, 0.25);
        assert!((p.g - 0.3125).abs() < 1e-15);

        assert!(ParamSpec::from_json(r#"{"delta": 1, "g": 0.1, "r": 0.6, "w": 2}"#).is_err());
        let both = ParamSpec::from_json(r#"{"delta": 1, "g": 0.1, "g_over_gc": 0.1, "r": 0.6}"#).unwrap();
        assert!(both.resolve().is_err());
        let over = ParamSpec::from_json(r#"{"delta": 1, "g": 0.7, "r": 0.6}"#).unwrap();
        let err = over.resolve().unwrap_err().to_string();
        assert!(err.contains("0.625"), "{err}");
    }
}
