//! Closed-form images of trigonometric polynomials under the kernel operators,
//! and the classical homogeneous-slab solution.
//!
//! The images assume the doubled-exponent kernel `s0 exp(2ib|z - z0|)`
//! ([`KernelConvention::DOUBLED`](crate::operators::KernelConvention::DOUBLED)).
//! The incident field on the layer is written `U0 = ã exp(-ibz)` with
//! `ã = a_inc exp(ibd)`.
//!
//! For a single product term `C exp(icz)` (weight frequency plus input
//! frequency `c`) the kernel integral over `[-d, d]` is
//!
//! ```text
//! C s0 [ 4b/(i(c-2b)(c+2b)) e^{icz} - e^{-i(c-2b)d}/(i(c-2b)) e^{2ibz} + e^{i(c+2b)d}/(i(c+2b)) e^{-2ibz} ]
//! ```
//!
//! which is singular only at `c = ±2b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ProblemParams;
pub use crate::trig::{TrigPolynomial, TrigTerm};

const EXCLUSION_TOL: f64 = 1e-12;

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn cis(x: f64) -> Complex64 {
    Complex64::new(0.0, x).exp()
}

/// `ã = a_inc exp(ibd)`.
pub fn incident_coefficient(params: &ProblemParams) -> Complex64 {
    params.a_inc() * cis(params.b() * params.d())
}

/// `U0 = ã exp(-ibz)`: the incident field restricted to the layer.
pub fn incident_polynomial(params: &ProblemParams) -> TrigPolynomial {
    TrigPolynomial::single(incident_coefficient(params), -params.b())
}

// Image of `coeff exp(i c z)` under `∫ s0 exp(2ib|z - z0|) (.) dz0`.
fn product_image(coeff: Complex64, c: f64, weight_freq: f64, input_freq: f64, params: &ProblemParams) -> Result<TrigPolynomial> {
    let b = params.b();
    let d = params.d();
    let scale = EXCLUSION_TOL * b.max(1.0);
    if (c - 2.0 * b).abs() <= scale {
        return Err(Error::ExcludedFrequency {
            weight_freq,
            input_freq,
            reason: "weight and input frequencies sum to 2b (resonant with the kernel)",
        });
    }
    if (c + 2.0 * b).abs() <= scale {
        return Err(Error::ExcludedFrequency {
            weight_freq,
            input_freq,
            reason: "weight and input frequencies sum to -2b (resonant with the kernel)",
        });
    }
    let k = coeff * params.s0();
    let lo = c - 2.0 * b;
    let hi = c + 2.0 * b;
    Ok(TrigPolynomial::from_terms([
        (k * 4.0 * b / (i() * lo * hi), c),
        (-k * cis(-lo * d) / (i() * lo), 2.0 * b),
        (k * cis(hi * d) / (i() * hi), -2.0 * b),
    ]))
}

/// `A[T exp(iqz)] U0`, the image of the incident field under the kernel
/// operator with a single-term weight.
///
/// With `H0 = -i T ã s0 / ((b+q)(3b-q))` the result is
/// `H0 [(3b-q) e^{id(b+q)} e^{-2ibz} + (b+q) e^{id(3b-q)} e^{2ibz} - 4b e^{i(q-b)z}]`.
/// At `q = b` this equals `-(i T ã s0 / b) [e^{2ibd} cos(2bz) - 1]`, which is
/// evaluated directly. `q = -b` and `q = 3b` are excluded.
pub fn lemma1_closed_form(params: &ProblemParams, t_amp: Complex64, q: f64) -> Result<TrigPolynomial> {
    let b = params.b();
    let d = params.d();
    let scale = EXCLUSION_TOL * b.max(1.0);
    if (q + b).abs() <= scale {
        return Err(Error::ExcludedFrequency { weight_freq: q, input_freq: -b, reason: "q = -b" });
    }
    if (q - 3.0 * b).abs() <= scale {
        return Err(Error::ExcludedFrequency {
            weight_freq: q,
            input_freq: -b,
            reason: "q = 3b has no closed form",
        });
    }
    let ta = t_amp * incident_coefficient(params) * params.s0();
    if (q - b).abs() <= scale {
        // -(iTãs0/b) [e^{2ibd} (e^{2ibz} + e^{-2ibz}) / 2 - 1]
        let pre = -i() * ta / b;
        let half = 0.5 * pre * cis(2.0 * b * d);
        return Ok(TrigPolynomial::from_terms([(half, 2.0 * b), (half, -2.0 * b), (-pre, 0.0)]));
    }
    let h0 = -i() * ta / ((b + q) * (3.0 * b - q));
    Ok(TrigPolynomial::from_terms([
        (h0 * (3.0 * b - q) * cis(d * (b + q)), -2.0 * b),
        (h0 * (b + q) * cis(d * (3.0 * b - q)), 2.0 * b),
        (h0 * (-4.0 * b), q - b),
    ]))
}

/// `A[η] U` for trigonometric polynomials `η` (weight) and `U` (input),
/// expanded bilinearly over term pairs.
pub fn lemma2_closed_form(weight: &TrigPolynomial, input: &TrigPolynomial, params: &ProblemParams) -> Result<TrigPolynomial> {
    let mut out = TrigPolynomial::zero();
    for w in weight.terms() {
        for u in input.terms() {
            let image = product_image(w.coeff * u.coeff, w.freq + u.freq, w.freq, u.freq, params)?;
            out = out.add(&image);
        }
    }
    Ok(out)
}

/// `F(U0) = ∫ k |U0|² U0`.
///
/// `|U0|² = |a_inc|²` is constant, so with `f0 = -i |a_inc|² ã s0 / (3b)`:
/// `F(U0) = f0 [3 e^{ibd} e^{-2ibz} + e^{3ibd} e^{2ibz} - 4 e^{-ibz}]`.
/// The three coefficients sum to zero at `d = 0`, as the empty integral requires.
pub fn lemma3_closed_form(params: &ProblemParams) -> TrigPolynomial {
    let b = params.b();
    let d = params.d();
    let a_tilde = incident_coefficient(params);
    let f0 = -i() * params.a_inc().norm_sqr() * a_tilde * params.s0() / (3.0 * b);
    TrigPolynomial::from_terms([
        (f0 * 3.0 * cis(b * d), -2.0 * b),
        (f0 * cis(3.0 * b * d), 2.0 * b),
        (f0 * -4.0, -b),
    ])
}

/// First Picard iterate `U1 = T(U0) = -A[η] U0 + α F(U0) + U0` from the
/// incident field, where `η = 1 - eps_L` is the weight.
///
/// The `+U0` addend contributes `ã` at frequency `-b`, alongside `α f3`.
pub fn first_iteration_closed_form(params: &ProblemParams, weight: &TrigPolynomial, alpha: f64) -> Result<TrigPolynomial> {
    let u0 = incident_polynomial(params);
    let linear = lemma2_closed_form(weight, &u0, params)?;
    let cubic = lemma3_closed_form(params);
    Ok(linear
        .scale(Complex64::new(-1.0, 0.0))
        .add(&cubic.scale(Complex64::new(alpha, 0.0)))
        .add(&u0))
}

/// Scattered amplitudes of a homogeneous linear slab `eps_L ≡ eps` from the
/// two-interface formula with interior wavenumber `κ sqrt(eps - sin²φ)`.
///
/// Returns `(a_scat, b_scat)` normalized like the solvers: `U(d) = a_inc + a_scat`,
/// `U(-d) = b_scat`.
pub fn homogeneous_slab(params: &ProblemParams, eps: Complex64) -> (Complex64, Complex64) {
    let gamma = params.gamma();
    let sin2 = params.phi_angle().sin().powi(2);
    let k = params.kappa() * (eps - sin2).sqrt();
    let r12 = (gamma - k) / (gamma + k);
    let thickness = 2.0 * params.d();
    let phase = (i() * k * thickness).exp();
    let phase2 = phase * phase;
    let denom = 1.0 - r12 * r12 * phase2;
    let r = r12 * (1.0 - phase2) / denom;
    let t = (1.0 - r12 * r12) * phase / denom;
    (params.a_inc() * r, params.a_inc() * t)
}
