//! Complex banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column-major with leading
//! dimension `2·kl + ku + 1`, the extra `kl` rows holding pivoting fill-in.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![ZERO; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) + j * self.ldab
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            ZERO
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::InvalidParameter(format!(
                "entry ({i}, {j}) outside band ({}, {})",
                self.kl, self.ku
            )));
        }
        let k = self.idx(i, j);
        self.ab[k] += v;
        Ok(())
    }

    /// Replaces row `i` with `e_i`.
    pub fn pin_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            let k = self.idx(i, j);
            self.ab[k] = ZERO;
        }
        let k = self.idx(i, i);
        self.ab[k] = Complex64::new(1.0, 0.0);
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                s += self.ab[self.idx(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place, `gbtf2`-style.
    pub fn factorize(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let mut jp = 0;
            let mut best = -1.0;
            for p in 0..=km {
                let v = self.ab[col + kv + p];
                let a = v.re.abs() + v.im.abs();
                if a > best {
                    best = a;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            let pivot = self.ab[col + kv + jp];
            if pivot == ZERO {
                return Err(Error::Singular(j));
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a = self.idx(j + jp, c);
                    let b = self.idx(j, c);
                    self.ab.swap(a, b);
                }
            }
            if km > 0 {
                let inv = pivot.inv();
                for v in &mut self.ab[col + kv + 1..=col + kv + km] {
                    *v *= inv;
                }
                for c in (j + 1)..=ju {
                    let top = self.idx(j, c);
                    let u = self.ab[top];
                    if u == ZERO {
                        continue;
                    }
                    let (left, right) = self.ab.split_at_mut(c * ldab);
                    let mult = &left[col + kv + 1..=col + kv + km];
                    let start = top + 1 - c * ldab;
                    let dst = &mut right[start..start + km];
                    for (d, m) in dst.iter_mut().zip(mult) {
                        *d -= m * u;
                    }
                }
            }
        }
        Ok(BandLu { band: self, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    band: BandMatrix,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.band.n
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let m = &self.band;
        let n = m.n;
        let kv = m.kl + m.ku;
        for j in 0..n.saturating_sub(1) {
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let lm = m.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != ZERO {
                let col = j * m.ldab + kv;
                for r in 1..=lm {
                    b[j + r] -= m.ab[col + r] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * m.ldab;
            b[j] /= m.ab[col + kv];
            let bj = b[j];
            if bj == ZERO {
                continue;
            }
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= m.ab[col + kv + i - j] * bj;
            }
        }
    }

    /// Solves `Aᴴ x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let m = &self.band;
        let n = m.n;
        let kv = m.kl + m.ku;
        for j in 0..n {
            let col = j * m.ldab;
            let lo = j.saturating_sub(kv);
            let mut acc = b[j];
            for i in lo..j {
                acc -= m.ab[col + kv + i - j].conj() * b[i];
            }
            b[j] = acc / m.ab[col + kv].conj();
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let lm = m.kl.min(n - 1 - j);
            let col = j * m.ldab + kv;
            let mut acc = b[j];
            for r in 1..=lm {
                acc -= m.ab[col + r].conj() * b[j + r];
            }
            b[j] = acc;
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
        }
    }

    /// Estimate of the smallest singular value by inverse iteration on `A Aᴴ`.
    pub fn smallest_singular_value(&self, iterations: usize) -> f64 {
        let n = self.n();
        let mut x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0, 0.0))
            .collect();
        let mut growth = 1.0;
        for _ in 0..iterations.max(1) {
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            self.solve_adjoint(&mut x);
            self.solve(&mut x);
            growth = norm(&x);
            if !growth.is_finite() {
                return 0.0;
            }
        }
        1.0 / growth.sqrt()
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
