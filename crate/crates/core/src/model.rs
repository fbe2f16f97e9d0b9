//! Problem parameters, permittivity profiles, grids and solutions.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trig::TrigPolynomial;

/// Incident-wave and layer parameters together with the derived scalars.
///
/// The layer occupies `[-d, d]` with `d = 2πδ`; every downstream computation
/// works with `d` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams {
    kappa: f64,
    phi_angle: f64,
    delta: f64,
    alpha: f64,
    a_inc: Complex64,
    gamma: f64,
    d: f64,
    s0: Complex64,
    q0: f64,
}

impl ProblemParams {
    pub fn new(kappa: f64, phi_angle: f64, delta: f64, alpha: f64, a_inc: Complex64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::domain(format!("kappa must be positive and finite, got {kappa}")));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::domain(format!("delta must be positive and finite, got {delta}")));
        }
        if !(phi_angle.is_finite() && phi_angle.abs() < FRAC_PI_2) {
            return Err(Error::domain(format!(
                "phi_angle must satisfy |phi| < pi/2, got {phi_angle}"
            )));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be non-negative and finite, got {alpha}")));
        }
        if !(a_inc.re.is_finite() && a_inc.im.is_finite()) {
            return Err(Error::domain("a_inc must be finite"));
        }
        let cos_phi = phi_angle.cos();
        Ok(Self {
            kappa,
            phi_angle,
            delta,
            alpha,
            a_inc,
            gamma: kappa * cos_phi,
            d: 2.0 * PI * delta,
            s0: Complex64::new(0.0, kappa / (2.0 * cos_phi)),
            q0: 2.0 * PI * delta * kappa / cos_phi,
        })
    }

    /// Same geometry and incident wave with a different nonlinearity coefficient.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.kappa, self.phi_angle, self.delta, alpha, self.a_inc)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn phi_angle(&self) -> f64 {
        self.phi_angle
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn a_inc(&self) -> Complex64 {
        self.a_inc
    }
    pub fn cos_phi(&self) -> f64 {
        self.phi_angle.cos()
    }
    /// Transverse wavenumber `Γ = κ cos φ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// Alias of [`gamma`](Self::gamma) used by the closed-form images.
    pub fn b(&self) -> f64 {
        self.gamma
    }
    /// Longitudinal wavenumber `κ sin φ`.
    pub fn longitudinal(&self) -> f64 {
        self.kappa * self.phi_angle.sin()
    }
    /// Layer half-thickness.
    pub fn d(&self) -> f64 {
        self.d
    }
    /// Kernel prefactor `iκ/(2 cos φ) = iκ²/(2Γ)`.
    pub fn s0(&self) -> Complex64 {
        self.s0
    }
    /// Norm bound of the bare kernel operator, `2πδκ / cos φ`.
    pub fn q0(&self) -> f64 {
        self.q0
    }
}

/// Shorthand for [`ProblemParams::new`].
pub fn make_params(kappa: f64, phi_angle: f64, delta: f64, alpha: f64, a_inc: Complex64) -> Result<ProblemParams> {
    ProblemParams::new(kappa, phi_angle, delta, alpha, a_inc)
}

pub type PermittivityFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum ProfileKind {
    Constant(Complex64),
    TrigPolynomial(TrigPolynomial),
    /// Samples on a uniform closed grid over the layer, linearly interpolated.
    Sampled(Vec<Complex64>),
    Callable(PermittivityFn),
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            ProfileKind::TrigPolynomial(p) => f.debug_tuple("TrigPolynomial").field(p).finish(),
            ProfileKind::Sampled(v) => write!(f, "Sampled({} samples)", v.len()),
            ProfileKind::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

/// Linear permittivity `eps_L(z)` of the layer, defined on `[-d, d]` only.
///
/// The exterior vacuum value 1 is never produced by a profile; callers
/// handle it explicitly.
#[derive(Debug, Clone)]
pub struct PermittivityProfile {
    kind: ProfileKind,
    half_width: f64,
    is_real: bool,
}

impl PermittivityProfile {
    pub fn constant(value: Complex64, half_width: f64) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::domain(format!("permittivity must be finite, got {value}")));
        }
        Self::build(ProfileKind::Constant(value), half_width, value.im == 0.0)
    }

    pub fn real_constant(value: f64, half_width: f64) -> Result<Self> {
        Self::constant(Complex64::new(value, 0.0), half_width)
    }

    pub fn trig(poly: TrigPolynomial, half_width: f64) -> Result<Self> {
        if poly.terms().iter().any(|t| !(t.coeff.re.is_finite() && t.coeff.im.is_finite() && t.freq.is_finite())) {
            return Err(Error::domain("trigonometric profile has non-finite terms"));
        }
        let is_real = poly.is_real_valued(1e-14);
        Self::build(ProfileKind::TrigPolynomial(poly), half_width, is_real)
    }

    pub fn sampled(values: Vec<Complex64>, half_width: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("a sampled profile needs at least two samples"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::domain("sampled profile contains non-finite values"));
        }
        let is_real = values.iter().all(|v| v.im == 0.0);
        Self::build(ProfileKind::Sampled(values), half_width, is_real)
    }

    /// Wraps an arbitrary evaluator. When `is_real` is set, imaginary parts
    /// returned by `f` are discarded.
    pub fn callable(f: PermittivityFn, is_real: bool, half_width: f64) -> Result<Self> {
        Self::build(ProfileKind::Callable(f), half_width, is_real)
    }

    fn build(kind: ProfileKind, half_width: f64, is_real: bool) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::domain(format!("profile half-width must be positive, got {half_width}")));
        }
        Ok(Self { kind, half_width, is_real })
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// `eps_L(z)` for `|z| <= d`.
    pub fn eval(&self, z: f64) -> Result<Complex64> {
        let d = self.half_width;
        if !(z.abs() <= d * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "permittivity evaluated at z = {z}, outside the layer [-{d}, {d}]"
            )));
        }
        let z = z.clamp(-d, d);
        let value = match &self.kind {
            ProfileKind::Constant(c) => *c,
            ProfileKind::TrigPolynomial(p) => p.eval(z),
            ProfileKind::Sampled(values) => {
                let cells = (values.len() - 1) as f64;
                let x = (z + d) / (2.0 * d) * cells;
                let i = (x.floor() as usize).min(values.len() - 2);
                let t = x - i as f64;
                values[i] * (1.0 - t) + values[i + 1] * t
            }
            ProfileKind::Callable(f) => f(z),
        };
        Ok(if self.is_real {
            Complex64::new(value.re, 0.0)
        } else {
            value
        })
    }

    pub fn sample(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        grid.nodes().iter().map(|&z| self.eval(z)).collect()
    }
}

pub fn eval_permittivity(profile: &PermittivityProfile, z: f64) -> Result<Complex64> {
    profile.eval(z)
}

/// Intensity-dependent permittivity `eps_L(z) + alpha |U|^2` inside the layer.
pub fn effective_permittivity(
    profile: &PermittivityProfile,
    alpha: f64,
    u_abs_sq: f64,
    z: f64,
) -> Result<Complex64> {
    if !(u_abs_sq >= 0.0) {
        return Err(Error::domain(format!("|U|^2 must be non-negative, got {u_abs_sq}")));
    }
    Ok(profile.eval(z)? + alpha * u_abs_sq)
}

/// Uniform closed grid on `[-d, d]` with an odd number of nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    nodes: Vec<f64>,
    h: f64,
    d: f64,
}

impl Grid {
    pub fn new(n: usize, d: f64) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::domain(format!("grid node count must be odd and >= 3, got {n}")));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::domain(format!("grid half-width must be positive, got {d}")));
        }
        let h = 2.0 * d / (n - 1) as f64;
        let mid = (n - 1) / 2;
        // Symmetric construction keeps z_i = -z_{n-1-i} exactly and pins the endpoints.
        let nodes = (0..n)
            .map(|i| {
                if i == 0 {
                    -d
                } else if i == n - 1 {
                    d
                } else {
                    (i as f64 - mid as f64) * h
                }
            })
            .collect();
        Ok(Self { nodes, h, d })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node at `z`, if `z` is (up to roundoff) a grid node.
    pub fn node_index(&self, z: f64) -> Option<usize> {
        let x = (z + self.d) / self.h;
        let i = x.round();
        if i < 0.0 || i > (self.n() - 1) as f64 {
            return None;
        }
        let i = i as usize;
        ((self.nodes[i] - z).abs() <= 1e-9 * self.h).then_some(i)
    }

    /// Grid with `factor` times as many cells on the same interval.
    pub fn refined(&self, factor: usize) -> Self {
        Self::new(factor * (self.n() - 1) + 1, self.d).expect("refinement of a valid grid")
    }
}

/// Field samples inside the layer and the scattered plane-wave amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub grid: Grid,
    pub u: Vec<Complex64>,
    /// Reflected amplitude: `U(d) = a_inc + a_scat`.
    pub a_scat: Complex64,
    /// Transmitted amplitude: `U(-d) = b_scat`.
    pub b_scat: Complex64,
    /// Sup-norm residual of the discrete equation the producing solver works on.
    pub residual: f64,
}
