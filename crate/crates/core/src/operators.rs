//! Integral operators of the layer problem.
//!
//! With kernel `k(t) = s0 exp(i m b |t|)`:
//! `AU = ∫ k (1 - eps_L) U`, `A1 U = ∫ k (eps_L - 1) U`, `F(U) = ∫ k |U|² U`,
//! and the fixed-point map `T(U) = -AU + αF(U) + f`.

#![allow(non_snake_case)]

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PermittivityProfile, ProblemParams};
use crate::quadrature::{check_len, QuadratureScheme};

/// Exponent multiplier `m` in `exp(i m b |t|)`.
///
/// `m = 1` is the Green's-function kernel of the scattering problem and the
/// one the solvers use. `m = 2` is the form the closed-form images assume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct KernelConvention {
    exponent_factor: u8,
}

impl KernelConvention {
    pub const PHYSICAL: Self = Self { exponent_factor: 1 };
    pub const DOUBLED: Self = Self { exponent_factor: 2 };

    pub fn new(exponent_factor: u8) -> Result<Self> {
        match exponent_factor {
            1 => Ok(Self::PHYSICAL),
            2 => Ok(Self::DOUBLED),
            m => Err(Error::domain(format!("kernel exponent factor must be 1 or 2, got {m}"))),
        }
    }

    pub fn exponent_factor(self) -> u8 {
        self.exponent_factor
    }

    /// Phase rate `m b` of the kernel.
    pub fn rate(self, params: &ProblemParams) -> f64 {
        f64::from(self.exponent_factor) * params.b()
    }
}

impl Default for KernelConvention {
    fn default() -> Self {
        Self::PHYSICAL
    }
}

impl TryFrom<u8> for KernelConvention {
    type Error = Error;
    fn try_from(m: u8) -> Result<Self> {
        Self::new(m)
    }
}

impl From<KernelConvention> for u8 {
    fn from(c: KernelConvention) -> u8 {
        c.exponent_factor
    }
}

pub fn kernel(t: f64, params: &ProblemParams, convention: KernelConvention) -> Complex64 {
    params.s0() * Complex64::new(0.0, convention.rate(params) * t.abs()).exp()
}

/// `U_inc(z) = a_inc exp(-iΓ(z - d))`.
pub fn incident_field(z: f64, params: &ProblemParams) -> Complex64 {
    params.a_inc() * Complex64::new(0.0, -params.gamma() * (z - params.d())).exp()
}

pub fn incident_samples(scheme: &QuadratureScheme, params: &ProblemParams) -> Vec<Complex64> {
    scheme.grid().nodes().iter().map(|&z| incident_field(z, params)).collect()
}

/// `∫ k(z - z0) w(z0) dz0` at every node for sampled `w`.
pub fn apply_kernel(
    w: &[Complex64],
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    let mut out = scheme.exp_convolution(convention.rate(params), w)?;
    let s0 = params.s0();
    out.iter_mut().for_each(|v| *v *= s0);
    Ok(out)
}

/// `A[η]U = ∫ k η U` for an arbitrary sampled weight `η`.
pub fn apply_weighted(
    u: &[Complex64],
    weight: &[Complex64],
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    check_len(scheme.n(), u.len())?;
    check_len(scheme.n(), weight.len())?;
    let w: Vec<_> = weight.iter().zip(u).map(|(e, v)| e * v).collect();
    apply_kernel(&w, scheme, params, convention)
}

/// `AU` with weight `1 - eps_L`; defined for real profiles only.
pub fn apply_A(
    u: &[Complex64],
    profile: &PermittivityProfile,
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    if !profile.is_real() {
        return Err(Error::domain("apply_A needs a real permittivity profile; use apply_A1"));
    }
    let eps = profile.sample(scheme.grid())?;
    let weight: Vec<_> = eps.iter().map(|e| 1.0 - e).collect();
    apply_weighted(u, &weight, scheme, params, convention)
}

/// `A1 U` with the complex weight `g = eps_L - 1`; equals `-AU` for real profiles.
pub fn apply_A1(
    u: &[Complex64],
    profile: &PermittivityProfile,
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    let eps = profile.sample(scheme.grid())?;
    let weight: Vec<_> = eps.iter().map(|e| e - 1.0).collect();
    apply_weighted(u, &weight, scheme, params, convention)
}

pub fn apply_F(
    u: &[Complex64],
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    check_len(scheme.n(), u.len())?;
    let w: Vec<_> = u.iter().map(|v| v * v.norm_sqr()).collect();
    apply_kernel(&w, scheme, params, convention)
}

/// `T(U) = -AU + αF(U) + f`, with `-A` replaced by `+A1` for complex profiles.
pub fn apply_T(
    u: &[Complex64],
    profile: &PermittivityProfile,
    scheme: &QuadratureScheme,
    params: &ProblemParams,
    alpha: f64,
    convention: KernelConvention,
) -> Result<Vec<Complex64>> {
    IntegralMap::new(params, profile, scheme.clone(), alpha, convention)?.apply(u)
}

/// The fixed-point map with the forcing and permittivity samples cached.
///
/// `-AU + αF(U)` (or `A1 U + αF(U)`) is evaluated as one kernel integral with
/// weight `eps_L - 1 + α|U|²`.
#[derive(Debug, Clone)]
pub struct IntegralMap {
    params: ProblemParams,
    scheme: QuadratureScheme,
    alpha: f64,
    convention: KernelConvention,
    forcing: Vec<Complex64>,
    eps_minus_one: Vec<Complex64>,
}

impl IntegralMap {
    pub fn new(
        params: &ProblemParams,
        profile: &PermittivityProfile,
        scheme: QuadratureScheme,
        alpha: f64,
        convention: KernelConvention,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be non-negative and finite, got {alpha}")));
        }
        let forcing = incident_samples(&scheme, params);
        let eps_minus_one = profile.sample(scheme.grid())?.iter().map(|e| e - 1.0).collect();
        Ok(Self {
            params: *params,
            scheme,
            alpha,
            convention,
            forcing,
            eps_minus_one,
        })
    }

    pub fn scheme(&self) -> &QuadratureScheme {
        &self.scheme
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn convention(&self) -> KernelConvention {
        self.convention
    }

    /// Incident-field samples `f`.
    pub fn forcing(&self) -> &[Complex64] {
        &self.forcing
    }

    /// Samples of `eps_L - 1`.
    pub fn eps_minus_one(&self) -> &[Complex64] {
        &self.eps_minus_one
    }

    /// Samples of `(eps_L - 1 + α|U|²) U`, the source density of the scattered field.
    pub fn source_density(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.scheme.n(), u.len())?;
        Ok(u.iter()
            .zip(&self.eps_minus_one)
            .map(|(v, g)| (g + self.alpha * v.norm_sqr()) * v)
            .collect())
    }

    pub fn apply(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = self.source_density(u)?;
        let mut out = apply_kernel(&w, &self.scheme, &self.params, self.convention)?;
        out.iter_mut().zip(&self.forcing).for_each(|(o, f)| *o += f);
        Ok(out)
    }

    /// `U - T(U)` at every node.
    pub fn residual(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let t = self.apply(u)?;
        Ok(u.iter().zip(&t).map(|(a, b)| a - b).collect())
    }
}

pub fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
