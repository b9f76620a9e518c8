//! Gabidulin codes over `F_{q^m}` and a rank-error decoder.

use thiserror::Error;

use crate::gf::{coordinate_matrix, ExtElem, ExtField, Field};
use crate::matq::{Matrix, MatrixQm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("generator vector has rank weight {rank}, expected {n}")]
    RankDeficient { rank: usize, n: usize },
    #[error("need 1 <= k <= n <= m, got n={n} k={k} m={m}")]
    InvalidDimensions { n: usize, k: usize, m: usize },
    #[error("radius {t} exceeds the unique decoding radius {max}")]
    RadiusTooLarge { t: usize, max: usize },
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no error of admissible rank matches the syndrome")]
    DecodeFailure,
    #[error("exhaustive search over {size} words exceeds the limit {limit}")]
    TooLarge { size: u128, limit: u128 },
}

/// Rank of the vector over `F_q`: dimension of the span of its entries.
pub fn rank_weight(field: &ExtField, v: &[ExtElem]) -> usize {
    coordinate_matrix(field, v).rank()
}

/// Random vector of `n` components that are linearly independent over `F_q`.
pub fn random_independent<R: rand::Rng + ?Sized>(field: &ExtField, n: usize, rng: &mut R) -> Vec<ExtElem> {
    assert!(n <= field.degree(), "at most m independent elements");
    loop {
        let g: Vec<ExtElem> = (0..n).map(|_| field.random(rng)).collect();
        if rank_weight(field, &g) == n {
            return g;
        }
    }
}

/// `rows x n` matrix whose row `i` is `v^{[i]}`.
pub fn moore_matrix(field: &ExtField, v: &[ExtElem], rows: usize) -> MatrixQm {
    let mut data = Vec::with_capacity(rows * v.len());
    let mut cur = v.to_vec();
    for _ in 0..rows {
        data.extend_from_slice(&cur);
        cur = cur.iter().map(|a| field.frobenius(a, 1)).collect();
    }
    Matrix::from_vec(field.clone(), rows, v.len(), data)
}

#[derive(Debug, Clone)]
pub struct GabidulinCode {
    field: ExtField,
    g: Vec<ExtElem>,
    k: usize,
    generator: MatrixQm,
    parity: MatrixQm,
    /// Right inverse of `H^T`: `lift · H^T = I`.
    lift: MatrixQm,
    /// `g_pows[l][i] = g_i^{[l]}` for `l < n`.
    g_pows: Vec<Vec<ExtElem>>,
}

/// Builds `Gab_{n,k}(g)`.
pub fn make_gabidulin(
    field: &ExtField,
    g: &[ExtElem],
    k: usize,
) -> Result<GabidulinCode, CodeError> {
    let n = g.len();
    let m = field.degree();
    if k == 0 || k > n || n > m {
        return Err(CodeError::InvalidDimensions { n, k, m });
    }
    let rank = rank_weight(field, g);
    if rank != n {
        return Err(CodeError::RankDeficient { rank, n });
    }
    let moore = moore_matrix(field, g, n);
    let g_pows: Vec<Vec<ExtElem>> = (0..n).map(|l| moore.row(l).to_vec()).collect();
    let generator = moore.block(0, 0, k, n);
    let parity = generator.right_kernel();
    let lift = if n > k {
        let pivots = parity.rref().pivots;
        let hp_t = parity.select_columns(&pivots).transpose();
        let inv = hp_t.inverse().expect("parity check has full row rank");
        let mut lift = Matrix::zeros(field.clone(), n - k, n);
        for (j, &c) in pivots.iter().enumerate() {
            for r in 0..n - k {
                lift.set(r, c, inv.get(r, j).clone());
            }
        }
        lift
    } else {
        Matrix::zeros(field.clone(), 0, n)
    };
    Ok(GabidulinCode {
        field: field.clone(),
        g: g.to_vec(),
        k,
        generator,
        parity,
        lift,
        g_pows,
    })
}

impl GabidulinCode {
    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn g(&self) -> &[ExtElem] {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `⌊(n - k) / 2⌋`
    pub fn radius(&self) -> usize {
        (self.n() - self.k) / 2
    }

    /// The `k x n` Moore generator matrix.
    pub fn generator(&self) -> &MatrixQm {
        &self.generator
    }

    /// An `(n - k) x n` parity-check matrix.
    pub fn parity_check(&self) -> &MatrixQm {
        &self.parity
    }

    pub fn encode(&self, msg: &[ExtElem]) -> Vec<ExtElem> {
        self.generator.vec_mul(msg)
    }

    pub fn syndrome(&self, y: &[ExtElem]) -> Vec<ExtElem> {
        self.parity.mul_vec(y)
    }

    /// Finds the unique `e` with `e H^T = s` and rank weight at most `t`.
    pub fn decode_syndrome(&self, s: &[ExtElem], t: usize) -> Result<Vec<ExtElem>, CodeError> {
        let n = self.n();
        let r = n - self.k;
        if s.len() != r {
            return Err(CodeError::LengthMismatch { expected: r, got: s.len() });
        }
        if t > self.radius() {
            return Err(CodeError::RadiusTooLarge { t, max: self.radius() });
        }
        if s.iter().all(|x| x.is_zero()) {
            return Ok(vec![self.field.zero(); n]);
        }
        let y = self.lift.vec_mul(s);
        let c = self.decode_word(&y, t)?;
        let f = &self.field;
        let e: Vec<ExtElem> = y.iter().zip(&c).map(|(a, b)| f.sub(a, b)).collect();
        if rank_weight(f, &e) > t || self.syndrome(&e) != s {
            return Err(CodeError::DecodeFailure);
        }
        Ok(e)
    }

    /// Welch-Berlekamp interpolation: find linearized `V` (q-degree <= t) and
    /// `N` (q-degree <= k+t-1) with `V(y_i) = N(g_i)`, then `N = V ∘ f` and
    /// the codeword is `f(g)`.
    fn decode_word(&self, y: &[ExtElem], t: usize) -> Result<Vec<ExtElem>, CodeError> {
        let f = &self.field;
        let n = self.n();
        let k = self.k;
        let nv = t + 1;
        let nn = k + t;
        let mut sys = Matrix::zeros(f.clone(), n, nv + nn);
        for (i, yi) in y.iter().enumerate() {
            let mut cur = yi.clone();
            for j in 0..nv {
                sys.set(i, j, cur.clone());
                cur = f.frobenius(&cur, 1);
            }
            for l in 0..nn {
                sys.set(i, nv + l, f.neg(&self.g_pows[l][i]));
            }
        }
        let ker = sys.right_kernel();
        if ker.rows() == 0 {
            return Err(CodeError::DecodeFailure);
        }
        let sol = ker.row(0);
        let (v, num) = sol.split_at(nv);
        let d = v.iter().rposition(|x| !x.is_zero()).ok_or(CodeError::DecodeFailure)?;
        let lead_inv = f.inv(&v[d]).expect("nonzero");

        // left division N = V ∘ f, highest coefficient first
        let mut fc = vec![f.zero(); k];
        for l in (0..k).rev() {
            let mut acc = num[d + l].clone();
            for (i, vi) in v.iter().enumerate().take(d) {
                let j = d + l - i;
                if j < k && !vi.is_zero() {
                    acc = f.sub(&acc, &f.mul(vi, &f.frobenius(&fc[j], i as i64)));
                }
            }
            fc[l] = f.frobenius(&f.mul(&acc, &lead_inv), -(d as i64));
        }
        // the remainder must vanish
        let mut comp = vec![f.zero(); nn];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, fj) in fc.iter().enumerate() {
                let term = f.mul(vi, &f.frobenius(fj, i as i64));
                comp[i + j] = f.add(&comp[i + j], &term);
            }
        }
        if comp != num {
            return Err(CodeError::DecodeFailure);
        }
        let mut c = vec![f.zero(); n];
        for (l, fl) in fc.iter().enumerate() {
            if fl.is_zero() {
                continue;
            }
            for (ci, gi) in c.iter_mut().zip(&self.g_pows[l]) {
                *ci = f.add(ci, &f.mul(fl, gi));
            }
        }
        Ok(c)
    }

    /// Iterates over every codeword (including zero) of the `F_q`-span of
    /// the rows `β_j g^{[l]}`. The callback returns `false` to stop.
    fn for_each_codeword(&self, limit: u128, mut visit: impl FnMut(&[ExtElem]) -> bool) -> Result<(), CodeError> {
        let f = &self.field;
        let q = f.q() as u128;
        let m = f.degree();
        let dim = self.k * m;
        let size = q.checked_pow(dim as u32).unwrap_or(u128::MAX);
        if size > limit {
            return Err(CodeError::TooLarge { size, limit });
        }
        let mut basis = Vec::with_capacity(dim);
        for l in 0..self.k {
            for j in 0..m {
                let mut c = vec![0u16; m];
                c[j] = 1;
                let beta = f.elem(c).expect("unit vector");
                basis.push(self.generator.row(l).iter().map(|x| f.mul(&beta, x)).collect::<Vec<_>>());
            }
        }
        let mut cw = vec![f.zero(); self.n()];
        let mut digits = vec![0u32; dim];
        if !visit(&cw) {
            return Ok(());
        }
        for _ in 1..size {
            let mut i = 0;
            loop {
                for (a, b) in cw.iter_mut().zip(&basis[i]) {
                    *a = f.add(a, b);
                }
                digits[i] += 1;
                if digits[i] < q as u32 {
                    break;
                }
                // adding q copies returned the word to its prior value
                digits[i] = 0;
                i += 1;
            }
            if !visit(&cw) {
                break;
            }
        }
        Ok(())
    }

    /// Exact minimum rank distance by enumeration (`q^{km} <= 2^24`).
    pub fn min_rank_distance_bruteforce(&self) -> Result<usize, CodeError> {
        let mut best = usize::MAX;
        let f = self.field.clone();
        self.for_each_codeword(1 << 24, |cw| {
            if cw.iter().any(|x| !x.is_zero()) {
                best = best.min(rank_weight(&f, cw));
            }
            best > 1
        })?;
        Ok(best)
    }

    /// Exact minimum Hamming distance over `F_{q^m}` by enumeration.
    pub fn min_hamming_distance_bruteforce(&self) -> Result<usize, CodeError> {
        let mut best = usize::MAX;
        self.for_each_codeword(1 << 24, |cw| {
            let w = cw.iter().filter(|x| !x.is_zero()).count();
            if w > 0 {
                best = best.min(w);
            }
            best > 1
        })?;
        Ok(best)
    }
}
