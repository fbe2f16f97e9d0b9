//! Nyström quadrature on uniform closed grids.
//!
//! Kernels of the form `exp(iβ|z - z0|)` are continuous with a derivative jump
//! on the diagonal. Collocating at grid nodes and applying the composite rule
//! separately on `[-d, z]` and `[z, d]` keeps the full order of the rule.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite trapezoid on each side of the collocation point, O(h²).
    #[default]
    TrapezoidSplit,
    /// Composite Simpson on each side, closing odd cell counts with the 3/8 rule.
    SimpsonSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    rule: QuadratureRule,
    grid: Grid,
}

impl QuadratureScheme {
    pub fn new(rule: QuadratureRule, grid: Grid) -> Self {
        // Grid guarantees an odd node count, which Simpson needs for the unsplit rule.
        Self { rule, grid }
    }

    pub fn trapezoid(grid: Grid) -> Self {
        Self::new(QuadratureRule::TrapezoidSplit, grid)
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Weights of the rule split at node `j`, over all nodes.
    pub fn split_weights(&self, j: usize) -> Vec<f64> {
        let n = self.grid.n();
        let h = self.grid.h();
        let mut w = vec![0.0; n];
        for (k, wk) in segment_weights(j, h, self.rule).into_iter().enumerate() {
            w[k] += wk;
        }
        for (k, wk) in segment_weights(n - 1 - j, h, self.rule).into_iter().enumerate() {
            w[j + k] += wk;
        }
        w
    }

    /// Weights of the unsplit rule over the whole interval.
    pub fn full_weights(&self) -> Vec<f64> {
        segment_weights(self.grid.n() - 1, self.grid.h(), self.rule)
    }

    /// `∫ v(z0) dz0` over the layer.
    pub fn integrate(&self, values: &[Complex64]) -> Result<Complex64> {
        check_len(self.n(), values.len())?;
        Ok(self
            .full_weights()
            .iter()
            .zip(values)
            .map(|(w, v)| v * *w)
            .sum())
    }

    /// `out_j = ∫ exp(iβ|z_j - z0|) v(z0) dz0` at every node, split at `z_j`.
    pub fn exp_convolution(&self, beta: f64, values: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n(), values.len())?;
        Ok(match self.rule {
            QuadratureRule::TrapezoidSplit => trapezoid_exp_convolution(&self.grid, beta, values),
            QuadratureRule::SimpsonSplit => {
                let phases = phase_table(&self.grid, beta);
                (0..self.n())
                    .map(|j| {
                        self.split_weights(j)
                            .iter()
                            .zip(values)
                            .enumerate()
                            .map(|(k, (w, v))| phases[j.abs_diff(k)] * v * *w)
                            .sum()
                    })
                    .collect()
            }
        })
    }
}

/// Uniform closed grid with `n` (odd, >= 3) nodes on `[-d, d]`.
pub fn build_grid(n: usize, d: f64) -> Result<Grid> {
    Grid::new(n, d)
}

/// Composite weights for `cells` uniform cells of width `h` (`cells + 1` points).
pub fn segment_weights(cells: usize, h: f64, rule: QuadratureRule) -> Vec<f64> {
    let mut w = vec![0.0; cells + 1];
    if cells == 0 {
        return w;
    }
    match rule {
        QuadratureRule::TrapezoidSplit => trapezoid_into(&mut w, 0, cells, h),
        QuadratureRule::SimpsonSplit => {
            if cells == 1 {
                trapezoid_into(&mut w, 0, 1, h);
            } else if cells.is_multiple_of(2) {
                simpson_into(&mut w, 0, cells, h);
            } else {
                simpson_into(&mut w, 0, cells - 3, h);
                let s = 3.0 * h / 8.0;
                let o = cells - 3;
                w[o] += s;
                w[o + 1] += 3.0 * s;
                w[o + 2] += 3.0 * s;
                w[o + 3] += s;
            }
        }
    }
    w
}

fn trapezoid_into(w: &mut [f64], start: usize, cells: usize, h: f64) {
    for k in 0..cells {
        w[start + k] += 0.5 * h;
        w[start + k + 1] += 0.5 * h;
    }
}

fn simpson_into(w: &mut [f64], start: usize, cells: usize, h: f64) {
    debug_assert!(cells.is_multiple_of(2));
    for pair in 0..cells / 2 {
        let o = start + 2 * pair;
        w[o] += h / 3.0;
        w[o + 1] += 4.0 * h / 3.0;
        w[o + 2] += h / 3.0;
    }
}

/// Generic Nyström evaluation of `∫ kernel(target_z, z0) weight(z0) dz0`.
///
/// `target_z` must be a grid node; the rule is split there.
pub fn integrate_kernel_weighted<K>(
    target_z: f64,
    weight_samples: &[Complex64],
    scheme: &QuadratureScheme,
    kernel_eval: K,
) -> Result<Complex64>
where
    K: Fn(f64, f64) -> Complex64,
{
    check_len(scheme.n(), weight_samples.len())?;
    let j = scheme.grid().node_index(target_z).ok_or_else(|| {
        Error::domain(format!("collocation point z = {target_z} is not a grid node"))
    })?;
    let nodes = scheme.grid().nodes();
    Ok(scheme
        .split_weights(j)
        .iter()
        .zip(nodes.iter().zip(weight_samples))
        .filter(|(w, _)| **w != 0.0)
        .map(|(w, (&z0, v))| kernel_eval(nodes[j], z0) * v * *w)
        .sum())
}

/// `exp(iβ m h)` for `m = 0..n`.
pub(crate) fn phase_table(grid: &Grid, beta: f64) -> Vec<Complex64> {
    let h = grid.h();
    (0..grid.n())
        .map(|m| Complex64::new(0.0, beta * m as f64 * h).exp())
        .collect()
}

// O(n) evaluation: the split trapezoid at a node coincides with the full
// trapezoid rule, and the exponential kernel factorizes into running sums.
fn trapezoid_exp_convolution(grid: &Grid, beta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n();
    let h = grid.h();
    let phases = phase_table(grid, beta);
    let step = phases[1];

    let mut left = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        acc = acc * step + v[j];
        left[j] = acc;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    acc = Complex64::new(0.0, 0.0);
    for j in (0..n).rev() {
        acc = acc * step + v[j];
        out[j] = h
            * (left[j] + acc - v[j] - 0.5 * phases[j] * v[0] - 0.5 * phases[n - 1 - j] * v[n - 1]);
    }
    out
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scheme(n: usize, d: f64, rule: QuadratureRule) -> QuadratureScheme {
        QuadratureScheme::new(rule, build_grid(n, d).unwrap())
    }

    fn exp_kernel(beta: f64) -> impl Fn(f64, f64) -> Complex64 {
        move |z, z0| Complex64::new(0.0, beta * (z - z0).abs()).exp()
    }

    #[test]
    fn weights_sum_to_length() {
        for rule in [QuadratureRule::TrapezoidSplit, QuadratureRule::SimpsonSplit] {
            for cells in 0..9 {
                let w = segment_weights(cells, 0.25, rule);
                let total: f64 = w.iter().sum();
                assert!((total - 0.25 * cells as f64).abs() < 1e-14, "{rule:?} {cells}");
            }
        }
    }

    #[test]
    fn zero_weight_gives_zero() {
        let s = scheme(9, 0.5, QuadratureRule::TrapezoidSplit);
        let zeros = vec![c(0.0, 0.0); 9];
        let r = integrate_kernel_weighted(0.0, &zeros, &s, exp_kernel(1.0)).unwrap();
        assert_eq!(r, c(0.0, 0.0));
    }

    #[test]
    fn constant_integrand_is_exact() {
        for n in [3, 5, 17, 101] {
            for rule in [QuadratureRule::TrapezoidSplit, QuadratureRule::SimpsonSplit] {
                let s = scheme(n, 0.5, rule);
                let ones = vec![c(1.0, 0.0); n];
                for &z in s.grid().nodes() {
                    let r = integrate_kernel_weighted(z, &ones, &s, |_, _| c(1.0, 0.0)).unwrap();
                    assert!((r - c(1.0, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn exponential_kernel_matches_antiderivative() {
        // 2 ∫_0^{1/2} e^{it} dt = 2 (e^{i/2} - 1) / i
        let exact = (c(0.0, 0.5).exp() - 1.0) * 2.0 / c(0.0, 1.0);
        let s = scheme(2001, 0.5, QuadratureRule::TrapezoidSplit);
        let ones = vec![c(1.0, 0.0); 2001];
        let r = integrate_kernel_weighted(0.0, &ones, &s, exp_kernel(1.0)).unwrap();
        assert!((r - exact).norm() < 1e-6, "{}", (r - exact).norm());
    }

    #[test]
    fn off_grid_target_is_rejected() {
        let s = scheme(5, 1.0, QuadratureRule::TrapezoidSplit);
        let ones = vec![c(1.0, 0.0); 5];
        assert!(matches!(
            integrate_kernel_weighted(0.3, &ones, &s, |_, _| c(1.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            integrate_kernel_weighted(0.0, &ones[..4], &s, |_, _| c(1.0, 0.0)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn endpoint_split_equals_unsplit_rule() {
        for rule in [QuadratureRule::TrapezoidSplit, QuadratureRule::SimpsonSplit] {
            let s = scheme(33, 0.5, rule);
            let v: Vec<_> = s.grid().nodes().iter().map(|&z| c(z.cos(), z * z)).collect();
            let full = s.integrate(&v).unwrap();
            let kernel = |_: f64, _: f64| c(1.0, 0.0);
            let lo = integrate_kernel_weighted(-0.5, &v, &s, kernel).unwrap();
            let hi = integrate_kernel_weighted(0.5, &v, &s, kernel).unwrap();
            assert!((lo - full).norm() < 1e-15);
            assert!((hi - full).norm() < 1e-15);
        }
    }

    #[test]
    fn fast_convolution_matches_generic_engine() {
        for rule in [QuadratureRule::TrapezoidSplit, QuadratureRule::SimpsonSplit] {
            let s = scheme(65, 0.5, rule);
            let v: Vec<_> = s.grid().nodes().iter().map(|&z| c(1.0 + z, (3.0 * z).sin())).collect();
            let fast = s.exp_convolution(2.0, &v).unwrap();
            for (j, &z) in s.grid().nodes().iter().enumerate() {
                let slow = integrate_kernel_weighted(z, &v, &s, exp_kernel(2.0)).unwrap();
                assert!((fast[j] - slow).norm() < 1e-13, "{rule:?} node {j}");
            }
        }
    }

    #[test]
    fn simpson_split_is_fourth_order() {
        let err = |n: usize| {
            let s = scheme(n, 0.5, QuadratureRule::SimpsonSplit);
            let ones = vec![c(1.0, 0.0); n];
            let j = (n - 1) / 2 + 1; // odd cell counts on both sides
            let z = s.grid().nodes()[j];
            let exact_z = {
                let a = 0.5 + z;
                let b = 0.5 - z;
                (c(0.0, a).exp() - 1.0) / c(0.0, 1.0) + (c(0.0, b).exp() - 1.0) / c(0.0, 1.0)
            };
            (integrate_kernel_weighted(z, &ones, &s, exp_kernel(1.0)).unwrap() - exact_z).norm()
        };
        let e1 = err(65);
        let e2 = err(129);
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "order {order}");
    }
}
