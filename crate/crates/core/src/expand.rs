//! Expanded Gabidulin codes: the `[nm, km]` image of a Gabidulin code under
//! `φ_B`, and their decoder through the parent code.
//!
//! Error vectors `e ∈ F_q^{nm}` are viewed as `n x m` error matrices whose
//! row `j` is the `j`-th length-`m` block of `e`. The decoder succeeds
//! whenever that matrix has rank at most `⌊(n - k) / 2⌋`.

use crate::gabidulin::{CodeError, GabidulinCode};
use crate::gf::{phi, phi_inv, phi_matrix, BasisPair, ExpandMode, Field};
use crate::matq::{Matrix, MatrixQ};

#[derive(Debug, Clone)]
pub struct ExpandedCode {
    parent: GabidulinCode,
    basis: BasisPair,
    ghat: MatrixQ,
    hhat: MatrixQ,
}

/// Builds the normal generator `Φ_B(G)` and the parity check `Φ_B(H^T)^T`.
pub fn expand_code(parent: &GabidulinCode, basis: &BasisPair) -> ExpandedCode {
    assert!(parent.field() == basis.field(), "basis belongs to another field");
    let ghat = phi_matrix(basis, parent.generator(), ExpandMode::Full);
    let hhat = phi_matrix(basis, &parent.parity_check().transpose(), ExpandMode::Full).transpose();
    ExpandedCode {
        parent: parent.clone(),
        basis: basis.clone(),
        ghat,
        hhat,
    }
}

impl ExpandedCode {
    pub fn parent(&self) -> &GabidulinCode {
        &self.parent
    }

    pub fn basis(&self) -> &BasisPair {
        &self.basis
    }

    /// `km x nm` normal generator matrix.
    pub fn generator(&self) -> &MatrixQ {
        &self.ghat
    }

    /// `m(n-k) x nm` parity-check matrix.
    pub fn parity_check(&self) -> &MatrixQ {
        &self.hhat
    }

    pub fn block_size(&self) -> usize {
        self.basis.field().degree()
    }

    pub fn length(&self) -> usize {
        self.parent.n() * self.block_size()
    }

    pub fn dimension(&self) -> usize {
        self.parent.k() * self.block_size()
    }

    pub fn radius(&self) -> usize {
        self.parent.radius()
    }

    pub fn syndrome(&self, y: &[u16]) -> Result<Vec<u16>, CodeError> {
        if y.len() != self.length() {
            return Err(CodeError::LengthMismatch {
                expected: self.length(),
                got: y.len(),
            });
        }
        Ok(self.hhat.mul_vec(y))
    }

    /// Recovers the error from a syndrome `s = e Ĥ^T`.
    pub fn decode_syndrome(&self, s: &[u16]) -> Result<Vec<u16>, CodeError> {
        let r = self.hhat.rows();
        if s.len() != r {
            return Err(CodeError::LengthMismatch { expected: r, got: s.len() });
        }
        let sigma = phi_inv(&self.basis, s).map_err(|_| CodeError::DecodeFailure)?;
        let e_star = self.parent.decode_syndrome(&sigma, self.radius())?;
        Ok(phi(&self.basis, &e_star))
    }

    /// Splits `y = c + e`; fails when the error matrix rank exceeds the
    /// radius.
    pub fn decode(&self, y: &[u16]) -> Result<(Vec<u16>, Vec<u16>), CodeError> {
        let s = self.syndrome(y)?;
        let e = self.decode_syndrome(&s)?;
        let fq = self.basis.field().base();
        let c = y.iter().zip(&e).map(|(a, b)| fq.sub(a, b)).collect();
        Ok((c, e))
    }

    /// Brute-force minimum Hamming distance, checked against
    /// `n - k + 1 <= d_H <= m(n - k) + 1`.
    pub fn hamming_distance_bounds_check(&self, limit: u128) -> Result<(usize, bool), CodeError> {
        let d = min_hamming_weight(&self.ghat, limit)?;
        let (n, k, m) = (self.parent.n(), self.parent.k(), self.block_size());
        let ok = n - k + 1 <= d && d <= m * (n - k) + 1;
        Ok((d, ok))
    }
}

/// `n x m` error matrix: row `j` is block `j` of `e`.
pub fn error_matrix(fq: crate::gf::PrimeField, e: &[u16], m: usize) -> MatrixQ {
    assert_eq!(e.len() % m, 0);
    Matrix::from_vec(fq, e.len() / m, m, e.to_vec())
}

/// Minimum Hamming weight of the nonzero words in the row space of `g`,
/// enumerating all `q^rows` combinations.
pub fn min_hamming_weight(g: &MatrixQ, limit: u128) -> Result<usize, CodeError> {
    let fq = *g.field();
    let q = fq.q() as u128;
    let size = q.checked_pow(g.rows() as u32).unwrap_or(u128::MAX);
    if size > limit {
        return Err(CodeError::TooLarge { size, limit });
    }
    let mut cw = vec![0u16; g.cols()];
    let mut digits = vec![0u32; g.rows()];
    let mut best = usize::MAX;
    for _ in 1..size {
        let mut i = 0;
        loop {
            fq.add_scaled(&mut cw, g.row(i), &1);
            digits[i] += 1;
            if digits[i] < q as u32 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        let w = cw.iter().filter(|&&x| x != 0).count();
        if w > 0 {
            best = best.min(w);
        }
    }
    Ok(best)
}
