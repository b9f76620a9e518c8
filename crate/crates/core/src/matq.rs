//! Dense matrices over `F_q` and `F_{q^m}`.
//!
//! Row reduction always pivots on the leftmost nonzero column and the first
//! row holding a nonzero entry in it, so echelon forms are reproducible.

use std::ops::Index;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::gf::{ExtField, Field, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("leading square block is singular")]
    NotSystematic,
    #[error("matrix has rank {rank}, expected full row rank {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error("requested rank {t} exceeds min({rows}, {cols})")]
    RankOutOfRange { t: usize, rows: usize, cols: usize },
    #[error("subspace dimensions must satisfy {0}")]
    BadDimensions(&'static str),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

pub type MatrixQ = Matrix<PrimeField>;
pub type MatrixQm = Matrix<ExtField>;

impl<F: Field> std::fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl<F: Field> Index<(usize, usize)> for Matrix<F> {
    type Output = F::Elem;

    fn index(&self, (r, c): (usize, usize)) -> &F::Elem {
        &self.data[r * self.cols + c]
    }
}

/// Reduced row echelon form together with rank and pivot columns.
#[derive(Debug, Clone)]
pub struct Rref<F: Field> {
    pub matrix: Matrix<F>,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let data = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, data }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut out = Self::zeros(field, n, n);
        for i in 0..n {
            out.data[i * n + i] = out.field.one();
        }
        out
    }

    pub fn from_vec(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Self {
        assert_eq!(data.len(), rows * cols, "storage does not match {rows}x{cols}");
        Matrix { field, rows, cols, data }
    }

    pub fn from_rows(field: F, rows: &[Vec<F::Elem>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { field, rows: rows.len(), cols, data }
    }

    pub fn random<R: Rng + ?Sized>(field: F, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| field.random(rng)).collect();
        Matrix { field, rows, cols, data }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }

    pub fn into_data(self) -> Vec<F::Elem> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &F::Elem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: F::Elem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[F::Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [F::Elem] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self[(r, c)].clone());
            }
        }
        Matrix { field: self.field.clone(), rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for l in 0..self.cols {
                let a = &self.data[i * self.cols + l];
                if self.field.is_zero(a) {
                    continue;
                }
                self.field.add_scaled(dst, other.row(l), a);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Matrix { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    /// Row vector times matrix: `v M`.
    pub fn vec_mul(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(v.len(), self.rows, "vector length mismatch");
        let mut out = vec![self.field.zero(); self.cols];
        for (l, a) in v.iter().enumerate() {
            if !self.field.is_zero(a) {
                self.field.add_scaled(&mut out, self.row(l), a);
            }
        }
        out
    }

    /// Matrix times column vector: `M v^T`, returned as a row.
    pub fn mul_vec(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = self.field.zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !self.field.is_zero(a) {
                        acc = self.field.add(&acc, &self.field.mul(a, b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c].clone()));
        }
        Matrix { field: self.field.clone(), rows: self.rows, cols: cols.len(), data }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix { field: self.field.clone(), rows: rows.len(), cols: self.cols, data }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in r0..r0 + rows {
            data.extend_from_slice(&self.row(r)[c0..c0 + cols]);
        }
        Matrix { field: self.field.clone(), rows, cols, data }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, blk: &Self) {
        for r in 0..blk.rows {
            let cols = self.cols;
            self.data[(r0 + r) * cols + c0..(r0 + r) * cols + c0 + blk.cols]
                .clone_from_slice(blk.row(r));
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Matrix { field: self.field.clone(), rows: self.rows, cols, data }
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert!(self.rows == 0 || other.rows == 0 || self.cols == other.cols);
        let cols = if self.rows == 0 { other.cols } else { self.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { field: self.field.clone(), rows: self.rows + other.rows, cols, data }
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> Rref<F> {
        let mut m = self.clone();
        let f = self.field.clone();
        let cols = m.cols;
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| !f.is_zero(&m.data[r * cols + c])) else {
                continue;
            };
            if p != rank {
                for j in c..cols {
                    m.data.swap(p * cols + j, rank * cols + j);
                }
            }
            let inv = f.inv(&m.data[rank * cols + c]).expect("pivot is nonzero");
            f.scale(&mut m.data[rank * cols + c..(rank + 1) * cols], &inv);
            let pivot_row: Vec<F::Elem> = m.data[rank * cols + c..(rank + 1) * cols].to_vec();
            for r in 0..m.rows {
                if r == rank {
                    continue;
                }
                let factor = m.data[r * cols + c].clone();
                if f.is_zero(&factor) {
                    continue;
                }
                let neg = f.neg(&factor);
                f.add_scaled(&mut m.data[r * cols + c..(r + 1) * cols], &pivot_row, &neg);
            }
            pivots.push(c);
            rank += 1;
        }
        Rref { matrix: m, rank, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Rows spanning `{x : M x^T = 0}`.
    pub fn right_kernel(&self) -> Self {
        let Rref { matrix: r, rank, pivots } = self.rref();
        let f = &self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(f.clone(), free.len(), self.cols);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, f.one());
            for (pr, &pc) in pivots.iter().enumerate().take(rank) {
                out.set(i, pc, f.neg(r.get(pr, fc)));
            }
        }
        out
    }

    /// Rows of the reduced echelon form that are nonzero.
    pub fn row_space_basis(&self) -> Self {
        let r = self.rref();
        r.matrix.select_rows(&(0..r.rank).collect::<Vec<_>>())
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Self::identity(self.field.clone(), n));
        let r = aug.rref();
        if r.rank < n || r.pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.matrix.block(0, n, n, n))
    }

    /// `true` when both matrices span the same row space.
    pub fn same_row_space(&self, other: &Self) -> bool {
        self.cols == other.cols && self.row_space_basis() == other.row_space_basis()
    }
}

/// Brings a full-row-rank `G` to `[I_K | *]` by left multiplication.
/// Returns the transformation `M` and `M G`.
pub fn systematic_form(g: &MatrixQ) -> Result<(MatrixQ, MatrixQ), MatError> {
    let k = g.rows();
    let rank = g.rank();
    if rank < k {
        return Err(MatError::RankDeficient { rank, rows: k });
    }
    let lead = g.block(0, 0, k, k);
    let m = lead.inverse().ok_or(MatError::NotSystematic)?;
    let sys = m.mul(g);
    Ok((m, sys))
}

/// Systematic generator of the row space of `g` without forming `M`.
pub fn systematic_generator(g: &MatrixQ) -> Result<MatrixQ, MatError> {
    let k = g.rows();
    let r = g.rref();
    if r.rank < k {
        return Err(MatError::RankDeficient { rank: r.rank, rows: k });
    }
    if r.pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return Err(MatError::NotSystematic);
    }
    Ok(r.matrix)
}

pub fn random_invertible<R: Rng + ?Sized>(fq: PrimeField, n: usize, rng: &mut R) -> MatrixQ {
    loop {
        let a = Matrix::random(fq, n, n, rng);
        if a.rank() == n {
            return a;
        }
    }
}

/// Random `rows x cols` matrix of rank exactly `t`, sampled as a product of
/// two full-rank factors.
pub fn random_rank_t<R: Rng + ?Sized>(
    fq: PrimeField,
    rows: usize,
    cols: usize,
    t: usize,
    rng: &mut R,
) -> Result<MatrixQ, MatError> {
    if t > rows.min(cols) {
        return Err(MatError::RankOutOfRange { t, rows, cols });
    }
    if t == 0 {
        return Ok(Matrix::zeros(fq, rows, cols));
    }
    let u = loop {
        let u = Matrix::random(fq, rows, t, rng);
        if u.rank() == t {
            break u;
        }
    };
    let v = loop {
        let v = Matrix::random(fq, t, cols, rng);
        if v.rank() == t {
            break v;
        }
    };
    Ok(u.mul(&v))
}

/// `I_n ⊗ A`.
pub fn kron_identity(n: usize, a: &MatrixQ) -> MatrixQ {
    let (r, c) = (a.rows(), a.cols());
    let mut out = Matrix::zeros(*a.field(), n * r, n * c);
    for i in 0..n {
        out.set_block(i * r, i * c, a);
    }
    out
}

/// Square block-diagonal matrix kept in factored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDiagonal {
    blocks: Vec<MatrixQ>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<MatrixQ>) -> Self {
        assert!(blocks.iter().all(|b| b.rows() == b.cols()), "blocks must be square");
        BlockDiagonal { blocks }
    }

    pub fn blocks(&self) -> &[MatrixQ] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum()
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = self.blocks.iter().map(|b| b.inverse()).collect::<Option<Vec<_>>>()?;
        Some(BlockDiagonal { blocks: inv })
    }

    /// `v D`
    pub fn apply_row(&self, v: &[u16]) -> Vec<u16> {
        assert_eq!(v.len(), self.size());
        let mut out = Vec::with_capacity(v.len());
        let mut off = 0;
        for b in &self.blocks {
            out.extend(b.vec_mul(&v[off..off + b.rows()]));
            off += b.rows();
        }
        out
    }

    /// `X D`
    pub fn right_mul(&self, x: &MatrixQ) -> MatrixQ {
        assert_eq!(x.cols(), self.size());
        let mut out = Matrix::zeros(*x.field(), x.rows(), x.cols());
        for r in 0..x.rows() {
            let v = self.apply_row(x.row(r));
            out.row_mut(r).copy_from_slice(&v);
        }
        out
    }

    pub fn to_dense(&self) -> MatrixQ {
        let fq = *self.blocks[0].field();
        let n = self.size();
        let mut out = Matrix::zeros(fq, n, n);
        let mut off = 0;
        for b in &self.blocks {
            out.set_block(off, off, b);
            off += b.rows();
        }
        out
    }
}

/// Number of `v`-dimensional subspaces of `F_q^u`.
pub fn gaussian_binomial(u: usize, v: usize, q: u32) -> Result<BigUint, MatError> {
    if v > u {
        return Err(MatError::BadDimensions("v <= u"));
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..v {
        num *= q.pow((u - i) as u32) - BigUint::one();
        den *= q.pow((i + 1) as u32) - BigUint::one();
    }
    Ok(num / den)
}

/// `log2` of an arbitrary-size positive integer.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    top.log2() + shift as f64
}

/// `log2` of the probability that a random `v`-dimensional subspace of
/// `F_q^u` contains a fixed `w`-dimensional one.
pub fn subspace_prob_log2(u: usize, v: usize, w: usize, q: u32) -> Result<f64, MatError> {
    if !(w <= v && v <= u) {
        return Err(MatError::BadDimensions("w <= v <= u"));
    }
    let num = gaussian_binomial(u - w, v - w, q)?;
    let den = gaussian_binomial(u, v, q)?;
    Ok(log2_big(&num) - log2_big(&den))
}
