//! Sparse Lindblad generators in the form
//! `dρ/dt = G ρ + ρ G† + Σ_k r_k L_k ρ L_k†` with `G = −iH − ½ Σ_k r_k L_k†L_k`.
//!
//! The Hamiltonian is affine in the drive, `H(F) = H₀ + F·V`, so the effective
//! non-Hermitian part is stored once with two value arrays on a shared pattern.
//! Every jump operator used here (`a`, `a†` and their two-site versions) has at
//! most one nonzero per row, which keeps the jump term a gather.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::FockOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-compressed complex matrix `A₀ + F·A₁` sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct AffineCsr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    base: Vec<Complex64>,
    slope: Vec<Complex64>,
}

impl AffineCsr {
    fn from_maps(dim: usize, base: &BTreeMap<(usize, usize), Complex64>, slope: &BTreeMap<(usize, usize), Complex64>) -> Self {
        let mut merged: BTreeMap<(usize, usize), (Complex64, Complex64)> = BTreeMap::new();
        for (&k, &v) in base {
            merged.entry(k).or_insert((ZERO, ZERO)).0 += v;
        }
        for (&k, &v) in slope {
            merged.entry(k).or_insert((ZERO, ZERO)).1 += v;
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(merged.len());
        let mut b = Vec::with_capacity(merged.len());
        let mut s = Vec::with_capacity(merged.len());
        for (&(r, c), &(v0, v1)) in &merged {
            if v0 == ZERO && v1 == ZERO {
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            b.push(v0);
            s.push(v1);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            base: b,
            slope: s,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Nonzeros `(row, col, A₀ + F·A₁)` in row order.
    pub fn entries(&self, f: f64) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |p| (r, self.cols[p], self.base[p] + self.slope[p] * f))
        })
    }

    /// `out = (A₀ + F·A₁)·X` for a dense row-major `dim × dim` matrix `X`.
    fn mul_dense(&self, f: f64, x: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        for r in 0..d {
            let row = &mut out[r * d..(r + 1) * d];
            row.fill(ZERO);
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let g = self.base[p] + self.slope[p] * f;
                let src = &x[self.cols[p] * d..(self.cols[p] + 1) * d];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += g * s;
                }
            }
        }
    }
}

/// Operator with at most one nonzero per row: `L[i, col[i]] = val[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOp {
    dim: usize,
    /// `(col, val)` per row, `None` for an empty row.
    rows: Vec<Option<(usize, Complex64)>>,
}

impl ShiftOp {
    pub fn from_dense(op: &FockOperator) -> Result<Self> {
        let d = op.dim();
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            let mut found = None;
            for j in 0..d {
                let v = op.get(i, j);
                if v != ZERO {
                    if found.is_some() {
                        return Err(Error::InvalidParameter(format!(
                            "jump operator row {i} has more than one nonzero"
                        )));
                    }
                    found = Some((j, v));
                }
            }
            rows.push(found);
        }
        Ok(Self { dim: d, rows })
    }

    pub fn from_rows(dim: usize, rows: Vec<Option<(usize, Complex64)>>) -> Result<Self> {
        if rows.len() != dim || rows.iter().flatten().any(|(c, _)| *c >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Option<(usize, Complex64)>] {
        &self.rows
    }

    /// Diagonal of `L†L`; it is diagonal because each row has one entry.
    fn gram_diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.dim];
        for (c, v) in self.rows.iter().flatten() {
            diag[*c] += v.norm_sqr();
        }
        diag
    }
}

/// Lindblad generator with a drive-affine Hamiltonian.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    effective: AffineCsr,
    jumps: Vec<(f64, ShiftOp)>,
}

impl LindbladGenerator {
    /// Builds `G(F) = −i(H₀ + F·V) − ½ Σ r L†L` from dense operators.
    pub fn new(hamiltonian_static: &FockOperator, drive_coupling: &FockOperator, jumps: Vec<(f64, ShiftOp)>) -> Result<Self> {
        let dim = hamiltonian_static.dim();
        if drive_coupling.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: drive_coupling.dim(),
            });
        }
        if let Some((_, l)) = jumps.iter().find(|(_, l)| l.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: l.dim(),
            });
        }
        let mut base = BTreeMap::new();
        let mut slope = BTreeMap::new();
        for i in 0..dim {
            for j in 0..dim {
                let h = hamiltonian_static.get(i, j);
                if h != ZERO {
                    base.insert((i, j), -I * h);
                }
                let v = drive_coupling.get(i, j);
                if v != ZERO {
                    slope.insert((i, j), -I * v);
                }
            }
        }
        for (rate, l) in &jumps {
            for (k, g) in l.gram_diagonal().into_iter().enumerate() {
                if g != 0.0 {
                    *base.entry((k, k)).or_insert(ZERO) += Complex64::new(-0.5 * rate * g, 0.0);
                }
            }
        }
        let jumps = jumps.into_iter().filter(|(r, _)| *r != 0.0).collect();
        Ok(Self {
            dim,
            effective: AffineCsr::from_maps(dim, &base, &slope),
            jumps,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effective(&self) -> &AffineCsr {
        &self.effective
    }

    pub fn jumps(&self) -> &[(f64, ShiftOp)] {
        &self.jumps
    }

    /// Applies the generator to a Hermitian `ρ`; the output is exactly Hermitian.
    /// `scratch` must have the same length as `rho`.
    pub fn apply_hermitian(&self, f: f64, rho: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let d = self.dim;
        self.effective.mul_dense(f, rho, scratch);
        for i in 0..d {
            for j in i..d {
                out[i * d + j] = scratch[i * d + j] + scratch[j * d + i].conj();
            }
        }
        for (rate, l) in &self.jumps {
            for (i, ri) in l.rows.iter().enumerate() {
                let Some((ci, vi)) = ri else { continue };
                let left = *vi * *rate;
                for (j, rj) in l.rows.iter().enumerate().skip(i) {
                    if let Some((cj, vj)) = rj {
                        out[i * d + j] += left * rho[ci * d + cj] * vj.conj();
                    }
                }
            }
        }
        for i in 0..d {
            out[i * d + i].im = 0.0;
            for j in (i + 1)..d {
                out[j * d + i] = out[i * d + j].conj();
            }
        }
    }

    /// Applies the generator to an arbitrary (not necessarily Hermitian) matrix.
    pub fn apply(&self, f: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        self.effective.mul_dense(f, rho, out);
        // ρ G†: (ρG†)[n,m] = Σ_l ρ[n,l] conj(G[m,l]).
        for (m, l, g) in self.effective.entries(f) {
            let gc = g.conj();
            for n in 0..d {
                out[n * d + m] += rho[n * d + l] * gc;
            }
        }
        for (rate, op) in &self.jumps {
            for (i, ri) in op.rows.iter().enumerate() {
                let Some((ci, vi)) = ri else { continue };
                for (j, rj) in op.rows.iter().enumerate() {
                    if let Some((cj, vj)) = rj {
                        out[i * d + j] += *vi * *rate * rho[ci * d + cj] * vj.conj();
                    }
                }
            }
        }
    }

    /// Nonzeros of the superoperator acting on row-major `vec(ρ)` with index
    /// `n·dim + m`. Duplicate positions are not merged.
    pub fn superoperator_triplets(&self, f: f64) -> Vec<(usize, usize, Complex64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for (n, k, g) in self.effective.entries(f) {
            for m in 0..d {
                out.push((n * d + m, k * d + m, g));
            }
        }
        for (m, l, g) in self.effective.entries(f) {
            let gc = g.conj();
            for n in 0..d {
                out.push((n * d + m, n * d + l, gc));
            }
        }
        for (rate, op) in &self.jumps {
            for (i, ri) in op.rows.iter().enumerate() {
                let Some((ci, vi)) = ri else { continue };
                for (j, rj) in op.rows.iter().enumerate() {
                    if let Some((cj, vj)) = rj {
                        out.push((i * d + j, ci * d + cj, *vi * *rate * vj.conj()));
                    }
                }
            }
        }
        out
    }

    /// Largest `|row − col|` over the superoperator nonzeros.
    pub fn superoperator_bandwidth(&self) -> (usize, usize) {
        let (mut lower, mut upper) = (0usize, 0usize);
        for (r, c, _) in self.superoperator_triplets(1.0) {
            if r > c {
                lower = lower.max(r - c);
            } else {
                upper = upper.max(c - r);
            }
        }
        (lower, upper)
    }
}
