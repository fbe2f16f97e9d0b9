//! Small direct solvers: dense complex LU with a 1-norm condition estimate,
//! and a real banded LU for the finite-difference Newton systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factorization `PA = LU` of a dense row-major complex matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    norm1: f64,
}

impl DenseLu {
    pub fn factor(mut a: Vec<Complex64>, n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, actual: a.len() });
        }
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax > 0.0) {
                return Err(Error::Singular { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = 1.0 / a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            for row in bottom.chunks_exact_mut(n) {
                let m = row[k] * inv;
                row[k] = m;
                if m != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        row[j] -= m * pivot_row[j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm, norm1 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `Ax = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: b.len() });
        }
        let mut x: Vec<_> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: b.len() });
        }
        // U^H w = b
        let mut w = b.to_vec();
        for i in 0..n {
            let s: Complex64 = (0..i).map(|k| self.lu[k * n + i].conj() * w[k]).sum();
            w[i] = (w[i] - s) / self.lu[i * n + i].conj();
        }
        // L^H v = w
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..n).map(|k| self.lu[k * n + i].conj() * w[k]).sum();
            w[i] -= s;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        Ok(x)
    }

    /// Estimate of `‖A‖₁ ‖A⁻¹‖₁` (Hager's method with Higham's safeguard).
    /// Never exceeds the true value by more than roundoff.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let norm1 = |v: &[Complex64]| v.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0_f64;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve(&x).expect("dimension checked");
            est = est.max(norm1(&y));
            let xi: Vec<_> = y
                .iter()
                .map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint(&xi).expect("dimension checked");
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[j] = Complex64::new(1.0, 0.0);
            last_j = j;
        }
        if n > 1 {
            let b: Vec<_> = (0..n)
                .map(|i| {
                    let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                    Complex64::new(s * (1.0 + i as f64 / (n - 1) as f64), 0.0)
                })
                .collect();
            let y = self.solve(&b).expect("dimension checked");
            est = est.max(2.0 * norm1(&y) / (3.0 * n as f64));
        }
        est * self.norm1
    }
}

/// Factor, check conditioning, and solve `Ax = b`.
/// Returns the solution and the condition estimate.
pub fn solve_dense(a: Vec<Complex64>, n: usize, b: &[Complex64], max_condition: f64) -> Result<(Vec<Complex64>, f64)> {
    let lu = DenseLu::factor(a, n)?;
    let cond = lu.condition_estimate();
    if !(cond <= max_condition) {
        return Err(Error::NearSingular { condition: cond });
    }
    Ok((lu.solve(b)?, cond))
}

/// Real band matrix in LAPACK band-LU layout: entry `(i, j)` lives at
/// `ab[(kl + ku + i - j) + j * ldab]` with `ldab = 2 kl + ku + 1`, leaving
/// `kl` extra superdiagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, ab: vec![0.0; (2 * kl + ku + 1) * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn ldab(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ldab()
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.ab[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Band LU with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku;
        let mut ipiv = vec![0; n];
        let mut ju = 0;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let (jp, pmax) = (0..=km)
                .map(|r| (r, self.ab[self.idx(j + r, j)].abs()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            ipiv[j] = j + jp;
            if !(pmax > 0.0) {
                return Err(Error::Singular { pivot: j });
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let (a, b) = (self.idx(j + jp, c), self.idx(j, c));
                    self.ab.swap(a, b);
                }
            }
            let inv = 1.0 / self.ab[self.idx(j, j)];
            for r in 1..=km {
                let k = self.idx(j + r, j);
                self.ab[k] *= inv;
            }
            for c in j + 1..=ju {
                let u = self.ab[self.idx(j, c)];
                if u != 0.0 {
                    for r in 1..=km {
                        let l = self.ab[self.idx(j + r, j)];
                        let k = self.idx(j + r, c);
                        self.ab[k] -= l * u;
                    }
                }
            }
            debug_assert!(ju <= j + kv);
        }
        Ok(BandLu { m: self, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) -> Result<()> {
        let m = &self.m;
        let n = m.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: b.len() });
        }
        let kv = m.kl + m.ku;
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let km = m.kl.min(n - 1 - j);
            let bj = b[j];
            for r in 1..=km {
                b[j + r] -= m.ab[m.idx(j + r, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= m.ab[m.idx(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= m.ab[m.idx(i, j)] * bj;
            }
        }
        Ok(())
    }
}
