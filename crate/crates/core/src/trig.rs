//! Finite exponential sums `Σ c_j exp(i ω_j z)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative tolerance under which two frequencies are treated as equal.
const FREQ_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coeff: Complex64,
    pub freq: f64,
}

/// A trigonometric polynomial, kept in canonical form: terms sorted by
/// frequency, equal frequencies merged, exact-zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Complex64) -> Self {
        Self::from_terms([(value, 0.0)])
    }

    pub fn single(coeff: Complex64, freq: f64) -> Self {
        Self::from_terms([(coeff, freq)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, f64)>) -> Self {
        let mut p = Self {
            terms: terms
                .into_iter()
                .map(|(coeff, freq)| TrigTerm { coeff, freq })
                .collect(),
        };
        p.canonicalize();
        p
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.freq).collect()
    }

    /// Coefficient of the term at `freq`, zero if absent.
    pub fn coeff_at(&self, freq: f64) -> Complex64 {
        self.terms
            .iter()
            .find(|t| same_freq(t.freq, freq))
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    pub fn eval(&self, z: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * Complex64::new(0.0, t.freq * z).exp())
            .sum()
    }

    pub fn eval_many(&self, zs: &[f64]) -> Vec<Complex64> {
        zs.iter().map(|&z| self.eval(z)).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| (c * t.coeff, t.freq)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|t| (t.coeff, t.freq)),
        )
    }

    /// True when the polynomial is real-valued on the real line, i.e. every
    /// term has a conjugate partner at the opposite frequency.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| {
            let partner = self.coeff_at(-t.freq);
            (partner - t.coeff.conj()).norm() <= tol * (1.0 + t.coeff.norm())
        })
    }

    /// Sum of coefficient moduli, an upper bound for `sup |p(z)|`.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn canonicalize(&mut self) {
        self.terms
            .sort_by(|a, b| a.freq.partial_cmp(&b.freq).expect("finite frequency"));
        let mut merged: Vec<TrigTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if same_freq(last.freq, t.freq) => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
        self.terms = merged;
    }
}

fn same_freq(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQ_MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}
