//! Prime fields, extension fields `F_{q^m}` and the coordinate maps between
//! them.
//!
//! Elements of `F_q` are stored as `u16` values in `[0, q)`. Elements of
//! `F_{q^m}` are coefficient vectors over the power basis `1, x, ..., x^{m-1}`
//! modulo a fixed monic irreducible polynomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use thiserror::Error;

use crate::matq::{random_invertible, Matrix, MatrixQ, MatrixQm};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("field size {0} is not a prime below 2^16")]
    NotPrime(u32),
    #[error("extension degree {0} is outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    Reducible,
    #[error("expected {expected} coordinates, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coordinate {0} is not reduced modulo q")]
    Unreduced(u32),
    #[error("basis elements are linearly dependent over the base field")]
    DependentBasis,
}

/// Operations shared by `F_q` and `F_{q^m}` so that the linear algebra in
/// [`crate::matq`] can be written once.
pub trait Field: Clone + PartialEq + fmt::Debug {
    type Elem: Clone + PartialEq + Eq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    /// `dst[i] += factor * src[i]`
    fn add_scaled(&self, dst: &mut [Self::Elem], src: &[Self::Elem], factor: &Self::Elem) {
        for (d, s) in dst.iter_mut().zip(src) {
            *d = self.add(d, &self.mul(factor, s));
        }
    }

    fn scale(&self, row: &mut [Self::Elem], factor: &Self::Elem) {
        for x in row.iter_mut() {
            *x = self.mul(factor, x);
        }
    }
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u16,
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(q: u32) -> Result<Self, GfError> {
        if q >= 1 << 16 || !is_prime(q) {
            return Err(GfError::NotPrime(q));
        }
        Ok(PrimeField { q: q as u16 })
    }

    pub fn q(&self) -> u32 {
        self.q as u32
    }

    /// Canonical representative of an arbitrary integer.
    pub fn reduce(&self, x: i64) -> u16 {
        x.rem_euclid(self.q as i64) as u16
    }

    pub fn pow(&self, a: u16, mut e: u64) -> u16 {
        let q = self.q as u64;
        let mut base = a as u64 % q;
        let mut acc = 1u64 % q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            e >>= 1;
        }
        acc as u16
    }
}

impl Field for PrimeField {
    type Elem = u16;

    #[inline]
    fn zero(&self) -> u16 {
        0
    }
    #[inline]
    fn one(&self) -> u16 {
        1
    }
    #[inline]
    fn is_zero(&self, a: &u16) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u16, b: &u16) -> u16 {
        ((*a as u32 + *b as u32) % self.q as u32) as u16
    }
    #[inline]
    fn sub(&self, a: &u16, b: &u16) -> u16 {
        ((*a as u32 + self.q as u32 - *b as u32) % self.q as u32) as u16
    }
    #[inline]
    fn neg(&self, a: &u16) -> u16 {
        ((self.q as u32 - *a as u32) % self.q as u32) as u16
    }
    #[inline]
    fn mul(&self, a: &u16, b: &u16) -> u16 {
        ((*a as u32 * *b as u32) % self.q as u32) as u16
    }
    fn inv(&self, a: &u16) -> Option<u16> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(*a, self.q as u64 - 2))
        }
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u16 {
        rng.gen_range(0..self.q)
    }

    fn add_scaled(&self, dst: &mut [u16], src: &[u16], factor: &u16) {
        if *factor == 0 {
            return;
        }
        let q = self.q as u64;
        let f = *factor as u64;
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = ((*d as u64 + f * s as u64) % q) as u16;
        }
    }

    fn scale(&self, row: &mut [u16], factor: &u16) {
        let q = self.q as u32;
        let f = *factor as u32;
        for x in row.iter_mut() {
            *x = (*x as u32 * f % q) as u16;
        }
    }
}

// Dense polynomials over F_q, low degree first. Helpers for modulus search
// and inversion only; field multiplication has its own reduction path.

fn poly_trim(p: &mut Vec<u16>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn poly_degree(p: &[u16]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Remainder of `a` modulo `b` (`b` nonzero).
fn poly_rem(fq: PrimeField, a: &[u16], b: &[u16]) -> Vec<u16> {
    let db = poly_degree(b).expect("division by zero polynomial");
    let lead_inv = fq.inv(&b[db]).unwrap();
    let mut r = a.to_vec();
    poly_trim(&mut r);
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let c = fq.mul(&r[dr], &lead_inv);
        let shift = dr - db;
        for (i, &bi) in b[..=db].iter().enumerate() {
            r[shift + i] = fq.sub(&r[shift + i], &fq.mul(&c, &bi));
        }
        poly_trim(&mut r);
    }
    r
}

/// Quotient and remainder of `a` by `b`.
fn poly_divrem(fq: PrimeField, a: &[u16], b: &[u16]) -> (Vec<u16>, Vec<u16>) {
    let db = poly_degree(b).expect("division by zero polynomial");
    let lead_inv = fq.inv(&b[db]).unwrap();
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut quot = vec![0u16; r.len().saturating_sub(db).max(1)];
    while let Some(dr) = poly_degree(&r) {
        if dr < db {
            break;
        }
        let c = fq.mul(&r[dr], &lead_inv);
        let shift = dr - db;
        quot[shift] = c;
        for (i, &bi) in b[..=db].iter().enumerate() {
            r[shift + i] = fq.sub(&r[shift + i], &fq.mul(&c, &bi));
        }
        poly_trim(&mut r);
    }
    poly_trim(&mut quot);
    (quot, r)
}

fn poly_mul(fq: PrimeField, a: &[u16], b: &[u16]) -> Vec<u16> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        fq.add_scaled(&mut out[i..i + b.len()], b, &ai);
    }
    poly_trim(&mut out);
    out
}

fn poly_sub(fq: PrimeField, a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut out = vec![0u16; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = fq.sub(&x, &y);
    }
    poly_trim(&mut out);
    out
}

fn poly_gcd(fq: PrimeField, a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(fq, &x, &y);
        x = y;
        y = r;
    }
    x
}

fn poly_mulmod(fq: PrimeField, a: &[u16], b: &[u16], f: &[u16]) -> Vec<u16> {
    poly_rem(fq, &poly_mul(fq, a, b), f)
}

/// Rows `x^{q j} mod f` for `j < m`: the matrix of the q-power map.
fn frobenius_rows(fq: PrimeField, f: &[u16]) -> Vec<Vec<u16>> {
    let m = f.len() - 1;
    // x^q mod f by square-and-multiply
    let mut xq = vec![1u16];
    let mut base = poly_rem(fq, &[0, 1], f);
    let mut e = fq.q() as u64;
    while e > 0 {
        if e & 1 == 1 {
            xq = poly_mulmod(fq, &xq, &base, f);
        }
        base = poly_mulmod(fq, &base, &base, f);
        e >>= 1;
    }
    let mut rows = Vec::with_capacity(m);
    let mut cur = poly_rem(fq, &[1], f);
    for _ in 0..m {
        let mut padded = cur.clone();
        padded.resize(m, 0);
        rows.push(padded);
        cur = poly_mulmod(fq, &cur, &xq, f);
    }
    rows
}

fn apply_rows(fq: PrimeField, v: &[u16], rows: &[Vec<u16>]) -> Vec<u16> {
    let m = rows.first().map_or(0, |r| r.len());
    let mut out = vec![0u16; m];
    for (&c, row) in v.iter().zip(rows) {
        fq.add_scaled(&mut out, row, &c);
    }
    out
}

/// Ben-Or irreducibility test for a monic polynomial of degree `m >= 1`.
pub fn is_irreducible(fq: PrimeField, f: &[u16]) -> bool {
    let Some(m) = poly_degree(f) else {
        return false;
    };
    if m == 0 || f.len() != m + 1 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let frob = frobenius_rows(fq, f);
    let mut h = vec![0u16; m];
    h[1] = 1;
    let x = [0u16, 1];
    for _ in 1..=m / 2 {
        h = apply_rows(fq, &h, &frob);
        let d = poly_sub(fq, &h, &x);
        let g = poly_gcd(fq, &d, f);
        if poly_degree(&g).unwrap_or(0) > 0 || d.is_empty() {
            return false;
        }
    }
    true
}

/// Lexicographically smallest monic irreducible polynomial of degree `m`,
/// comparing the constant coefficient first.
fn smallest_irreducible(fq: PrimeField, m: usize) -> Vec<u16> {
    let q = fq.q() as u16;
    let mut digits = vec![0u16; m];
    if m >= 2 {
        // anything with zero constant term is divisible by x
        digits[0] = 1;
    }
    loop {
        let mut f = digits.clone();
        f.push(1);
        if is_irreducible(fq, &f) {
            return f;
        }
        let mut i = m - 1;
        loop {
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
            assert!(i > 0, "no irreducible polynomial found");
            i -= 1;
        }
    }
}

/// An element of `F_{q^m}`: coordinates in the power basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExtElem(Vec<u16>);

impl ExtElem {
    pub fn coeffs(&self) -> &[u16] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

struct ExtInner {
    base: PrimeField,
    m: usize,
    modulus: Vec<u16>,
    /// `x^{m+j} mod f` for `j < m - 1`
    reduce: Vec<Vec<u16>>,
    frob: Vec<Vec<u16>>,
    /// `Tr(x^j)`
    trace_tab: Vec<u16>,
}

/// The extension field `F_{q^m} = F_q[x]/(f)`. Cheap to clone.
#[derive(Clone)]
pub struct ExtField(Arc<ExtInner>);

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) mod {:?}", self.0.base.q, self.0.m, self.0.modulus)
    }
}

impl PartialEq for ExtField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.base == other.0.base && self.0.modulus == other.0.modulus)
    }
}

impl Eq for ExtField {}

static FIELD_CACHE: OnceLock<Mutex<HashMap<(u32, usize), ExtField>>> = OnceLock::new();

/// Builds `F_{q^m}` with the default modulus. Results are cached per `(q, m)`.
pub fn make_ext_field(q: u32, m: usize) -> Result<ExtField, GfError> {
    let base = PrimeField::new(q)?;
    if m == 0 || m > MAX_DEGREE {
        return Err(GfError::DegreeOutOfRange(m));
    }
    let cache = FIELD_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&(q, m)) {
        return Ok(f.clone());
    }
    let modulus = smallest_irreducible(base, m);
    let field = ExtField::build(base, modulus);
    cache.lock().unwrap().insert((q, m), field.clone());
    Ok(field)
}

impl ExtField {
    /// Field with an explicit monic modulus, checked for irreducibility.
    pub fn with_modulus(q: u32, modulus: Vec<u16>) -> Result<Self, GfError> {
        let base = PrimeField::new(q)?;
        let m = modulus.len().saturating_sub(1);
        if m == 0 || m > MAX_DEGREE {
            return Err(GfError::DegreeOutOfRange(m));
        }
        if let Some(&c) = modulus.iter().find(|&&c| c as u32 >= q) {
            return Err(GfError::Unreduced(c as u32));
        }
        if modulus[m] != 1 || !is_irreducible(base, &modulus) {
            return Err(GfError::Reducible);
        }
        Ok(Self::build(base, modulus))
    }

    fn build(base: PrimeField, modulus: Vec<u16>) -> Self {
        let m = modulus.len() - 1;
        let mut reduce = Vec::with_capacity(m.saturating_sub(1));
        // x^m = -(f_0 + ... + f_{m-1} x^{m-1})
        let mut cur: Vec<u16> = modulus[..m].iter().map(|c| base.neg(c)).collect();
        for _ in 0..m.saturating_sub(1) {
            reduce.push(cur.clone());
            // multiply by x
            let top = cur[m - 1];
            let mut next = vec![0u16; m];
            next[1..m].copy_from_slice(&cur[..m - 1]);
            for (j, n) in next.iter_mut().enumerate() {
                *n = base.sub(n, &base.mul(&top, &modulus[j]));
            }
            cur = next;
        }
        let frob = frobenius_rows(base, &modulus);
        let mut inner = ExtInner {
            base,
            m,
            modulus,
            reduce,
            frob,
            trace_tab: Vec::new(),
        };
        let mut trace_tab = Vec::with_capacity(m);
        for j in 0..m {
            let mut xj = vec![0u16; m];
            xj[j] = 1;
            let mut acc = vec![0u16; m];
            let mut cur = xj;
            for _ in 0..m {
                for (a, c) in acc.iter_mut().zip(&cur) {
                    *a = base.add(a, c);
                }
                cur = apply_rows(base, &cur, &inner.frob);
            }
            debug_assert!(acc[1..].iter().all(|&c| c == 0));
            trace_tab.push(acc[0]);
        }
        inner.trace_tab = trace_tab;
        ExtField(Arc::new(inner))
    }

    pub fn base(&self) -> PrimeField {
        self.0.base
    }

    pub fn q(&self) -> u32 {
        self.0.base.q()
    }

    pub fn degree(&self) -> usize {
        self.0.m
    }

    pub fn modulus(&self) -> &[u16] {
        &self.0.modulus
    }

    pub fn elem(&self, coeffs: Vec<u16>) -> Result<ExtElem, GfError> {
        if coeffs.len() != self.0.m {
            return Err(GfError::LengthMismatch {
                expected: self.0.m,
                got: coeffs.len(),
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c as u32 >= self.q()) {
            return Err(GfError::Unreduced(c as u32));
        }
        Ok(ExtElem(coeffs))
    }

    /// Embeds a base-field value.
    pub fn from_base(&self, c: u16) -> ExtElem {
        let mut v = vec![0u16; self.0.m];
        v[0] = c % self.0.base.q;
        ExtElem(v)
    }

    /// The class of `x`. For `m = 1` this is the root of the linear modulus.
    pub fn generator(&self) -> ExtElem {
        if self.0.m == 1 {
            return ExtElem(vec![self.0.base.neg(&self.0.modulus[0])]);
        }
        let mut v = vec![0u16; self.0.m];
        v[1] = 1;
        ExtElem(v)
    }

    /// `a^{q^i}`; negative `i` is taken modulo `m`.
    pub fn frobenius(&self, a: &ExtElem, i: i64) -> ExtElem {
        let r = i.rem_euclid(self.0.m as i64);
        let mut cur = a.0.clone();
        for _ in 0..r {
            cur = apply_rows(self.0.base, &cur, &self.0.frob);
        }
        ExtElem(cur)
    }

    pub fn trace(&self, a: &ExtElem) -> u16 {
        let q = self.0.base.q as u64;
        let s: u64 = a
            .0
            .iter()
            .zip(&self.0.trace_tab)
            .map(|(&c, &t)| c as u64 * t as u64 % q)
            .sum();
        (s % q) as u16
    }

    pub fn pow(&self, a: &ExtElem, mut e: u128) -> ExtElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl Field for ExtField {
    type Elem = ExtElem;

    fn zero(&self) -> ExtElem {
        ExtElem(vec![0; self.0.m])
    }

    fn one(&self) -> ExtElem {
        self.from_base(1)
    }

    fn is_zero(&self, a: &ExtElem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let fq = self.0.base;
        ExtElem(a.0.iter().zip(&b.0).map(|(x, y)| fq.add(x, y)).collect())
    }

    fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let fq = self.0.base;
        ExtElem(a.0.iter().zip(&b.0).map(|(x, y)| fq.sub(x, y)).collect())
    }

    fn neg(&self, a: &ExtElem) -> ExtElem {
        let fq = self.0.base;
        ExtElem(a.0.iter().map(|x| fq.neg(x)).collect())
    }

    fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        let m = self.0.m;
        let q = self.0.base.q as u64;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &ai) in a.0.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u64;
            for (p, &bj) in prod[i..i + m].iter_mut().zip(&b.0) {
                *p += ai * bj as u64;
            }
        }
        let mut out: Vec<u64> = prod[..m].iter().map(|&c| c % q).collect();
        for (h, row) in prod[m..].iter().zip(&self.0.reduce) {
            let h = h % q;
            if h == 0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o += h * r as u64;
            }
        }
        ExtElem(out.into_iter().map(|c| (c % q) as u16).collect())
    }

    fn inv(&self, a: &ExtElem) -> Option<ExtElem> {
        if a.is_zero() {
            return None;
        }
        let fq = self.0.base;
        // extended Euclid on (f, a)
        let mut r0 = self.0.modulus.clone();
        let mut r1 = a.0.clone();
        poly_trim(&mut r1);
        let mut s0: Vec<u16> = Vec::new();
        let mut s1: Vec<u16> = vec![1];
        while poly_degree(&r1).unwrap_or(0) > 0 {
            let (quot, rem) = poly_divrem(fq, &r0, &r1);
            let s2 = poly_sub(fq, &s0, &poly_mul(fq, &quot, &s1));
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        let c = fq.inv(&r1[0])?;
        let mut out = poly_rem(fq, &s1, &self.0.modulus);
        out.iter_mut().for_each(|x| *x = fq.mul(x, &c));
        out.resize(self.0.m, 0);
        Some(ExtElem(out))
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> ExtElem {
        ExtElem((0..self.0.m).map(|_| self.0.base.random(rng)).collect())
    }
}

/// A basis of `F_{q^m}` over `F_q` together with its trace-dual basis.
#[derive(Debug, Clone)]
pub struct BasisPair {
    field: ExtField,
    primal: Vec<ExtElem>,
    dual: Vec<ExtElem>,
    /// rows: power-basis coordinates of the primal elements
    coords: MatrixQ,
    coords_inv: MatrixQ,
}

impl PartialEq for BasisPair {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.primal == other.primal
    }
}

impl Eq for BasisPair {}

/// Coordinate matrix (one row per element) of a list of extension elements.
pub fn coordinate_matrix(field: &ExtField, elems: &[ExtElem]) -> MatrixQ {
    let m = field.degree();
    let mut data = Vec::with_capacity(elems.len() * m);
    for e in elems {
        data.extend_from_slice(e.coeffs());
    }
    Matrix::from_vec(field.base(), elems.len(), m, data)
}

/// Computes the dual basis of `primal` (which must be a basis).
pub fn dual_basis(field: &ExtField, primal: &[ExtElem]) -> Result<BasisPair, GfError> {
    let m = field.degree();
    if primal.len() != m {
        return Err(GfError::LengthMismatch {
            expected: m,
            got: primal.len(),
        });
    }
    let fq = field.base();
    let coords = coordinate_matrix(field, primal);
    let coords_inv = coords.inverse().ok_or(GfError::DependentBasis)?;
    // trace form Tr(x^{a+b})
    let mut powers = Vec::with_capacity(2 * m);
    let x = field.generator();
    let mut cur = field.one();
    for _ in 0..2 * m - 1 {
        powers.push(field.trace(&cur));
        cur = field.mul(&cur, &x);
    }
    let mut tform = Matrix::zeros(fq, m, m);
    for a in 0..m {
        for b in 0..m {
            tform.set(a, b, powers[a + b]);
        }
    }
    let pt = coords.mul(&tform);
    let d = pt.inverse().ok_or(GfError::DependentBasis)?.transpose();
    let dual = (0..m)
        .map(|i| ExtElem(d.row(i).to_vec()))
        .collect::<Vec<_>>();
    Ok(BasisPair {
        field: field.clone(),
        primal: primal.to_vec(),
        dual,
        coords,
        coords_inv,
    })
}

/// Uniformly random basis: a random invertible matrix applied to the power
/// basis.
pub fn random_basis<R: Rng + ?Sized>(field: &ExtField, rng: &mut R) -> BasisPair {
    let a = random_invertible(field.base(), field.degree(), rng);
    let primal: Vec<ExtElem> = (0..field.degree())
        .map(|i| ExtElem(a.row(i).to_vec()))
        .collect();
    dual_basis(field, &primal).expect("invertible matrix gives a basis")
}

/// The power basis `1, x, ..., x^{m-1}`.
pub fn power_basis(field: &ExtField) -> BasisPair {
    let m = field.degree();
    let primal: Vec<ExtElem> = (0..m)
        .map(|i| {
            let mut v = vec![0u16; m];
            v[i] = 1;
            ExtElem(v)
        })
        .collect();
    dual_basis(field, &primal).expect("power basis is a basis")
}

impl BasisPair {
    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn primal(&self) -> &[ExtElem] {
        &self.primal
    }

    pub fn dual(&self) -> &[ExtElem] {
        &self.dual
    }

    /// Power-basis coordinates of the primal basis, one row per element.
    pub fn coordinate_matrix(&self) -> &MatrixQ {
        &self.coords
    }

    /// Coordinates of a single element with respect to this basis.
    pub fn coords_of(&self, a: &ExtElem) -> Vec<u16> {
        self.coords_inv.vec_mul(a.coeffs())
    }

    pub fn elem_from_coords(&self, w: &[u16]) -> ExtElem {
        ExtElem(self.coords.vec_mul(w))
    }
}

/// `φ_B(v)`: concatenated basis coordinates of every component.
pub fn phi(basis: &BasisPair, v: &[ExtElem]) -> Vec<u16> {
    let mut out = Vec::with_capacity(v.len() * basis.field.degree());
    for a in v {
        out.extend(basis.coords_of(a));
    }
    out
}

pub fn phi_inv(basis: &BasisPair, w: &[u16]) -> Result<Vec<ExtElem>, GfError> {
    let m = basis.field.degree();
    if w.len() % m != 0 {
        return Err(GfError::LengthMismatch {
            expected: (w.len() / m + 1) * m,
            got: w.len(),
        });
    }
    if let Some(&c) = w.iter().find(|&&c| c as u32 >= basis.field.q()) {
        return Err(GfError::Unreduced(c as u32));
    }
    Ok(w.chunks(m).map(|blk| basis.elem_from_coords(blk)).collect())
}

/// `Φ_B(α)`: the `m x m` matrix whose row `i` is `φ_B(α α_i)`.
pub fn phi_elem_matrix(basis: &BasisPair, a: &ExtElem) -> MatrixQ {
    let field = &basis.field;
    let m = field.degree();
    let mut data = Vec::with_capacity(m * m);
    for ai in &basis.primal {
        data.extend(basis.coords_of(&field.mul(a, ai)));
    }
    Matrix::from_vec(field.base(), m, m, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandMode {
    /// Each row `v` becomes the single row `φ_B(v)`.
    Rows,
    /// Each entry becomes the `m x m` block `Φ_B(M_ij)`.
    Full,
}

pub fn phi_matrix(basis: &BasisPair, mat: &MatrixQm, mode: ExpandMode) -> MatrixQ {
    let fq = basis.field.base();
    let m = basis.field.degree();
    match mode {
        ExpandMode::Rows => {
            let mut data = Vec::with_capacity(mat.rows() * mat.cols() * m);
            for r in 0..mat.rows() {
                data.extend(phi(basis, mat.row(r)));
            }
            Matrix::from_vec(fq, mat.rows(), mat.cols() * m, data)
        }
        ExpandMode::Full => {
            let mut out = Matrix::zeros(fq, mat.rows() * m, mat.cols() * m);
            for r in 0..mat.rows() {
                for c in 0..mat.cols() {
                    let blk = phi_elem_matrix(basis, mat.get(r, c));
                    out.set_block(r * m, c * m, &blk);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f4() -> ExtField {
        make_ext_field(2, 2).unwrap()
    }

    fn el(f: &ExtField, c: &[u16]) -> ExtElem {
        f.elem(c.to_vec()).unwrap()
    }

    // exhaustive root/factor oracle for tiny degrees
    fn brute_irreducible(q: u16, f: &[u16]) -> bool {
        let fq = PrimeField::new(q as u32).unwrap();
        let d = f.len() - 1;
        // any monic divisor of degree 1..=d/2
        for dd in 1..=d / 2 {
            let count = (q as u64).pow(dd as u32);
            for idx in 0..count {
                let mut g = Vec::with_capacity(dd + 1);
                let mut x = idx;
                for _ in 0..dd {
                    g.push((x % q as u64) as u16);
                    x /= q as u64;
                }
                g.push(1);
                if poly_rem(fq, f, &g).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_ext_field(4, 2).unwrap_err(), GfError::NotPrime(4));
        assert_eq!(make_ext_field(1, 2).unwrap_err(), GfError::NotPrime(1));
        assert_eq!(make_ext_field(2, 0).unwrap_err(), GfError::DegreeOutOfRange(0));
        assert_eq!(make_ext_field(2, 129).unwrap_err(), GfError::DegreeOutOfRange(129));
    }

    #[test]
    fn default_moduli() {
        assert_eq!(make_ext_field(2, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(make_ext_field(2, 2).unwrap().modulus(), &[1, 1, 1]);
        let f = make_ext_field(13, 2).unwrap();
        let md = f.modulus().to_vec();
        assert!(brute_irreducible(13, &md));
        // nothing lexicographically smaller (constant term first) is irreducible
        for c0 in 0..13u16 {
            for c1 in 0..13u16 {
                if (c0, c1) >= (md[0], md[1]) {
                    continue;
                }
                assert!(!brute_irreducible(13, &[c0, c1, 1]));
            }
        }
        // no root in F_13
        for x in 0..13u32 {
            let v = (x * x + md[1] as u32 * x + md[0] as u32) % 13;
            assert_ne!(v, 0);
        }
    }

    #[test]
    fn ben_or_matches_exhaustive_search() {
        for (q, d) in [(2u16, 3usize), (2, 4), (2, 6), (3, 3), (3, 4), (5, 2), (5, 3)] {
            let fq = PrimeField::new(q as u32).unwrap();
            let count = (q as u64).pow(d as u32);
            for idx in 0..count {
                let mut f = Vec::new();
                let mut x = idx;
                for _ in 0..d {
                    f.push((x % q as u64) as u16);
                    x /= q as u64;
                }
                f.push(1);
                assert_eq!(is_irreducible(fq, &f), brute_irreducible(q, &f), "{f:?}");
            }
        }
    }

    #[test]
    fn frobenius_f4() {
        let f = f4();
        let w = f.generator();
        assert_eq!(f.frobenius(&w, 0), w);
        assert_eq!(f.frobenius(&w, 1), el(&f, &[1, 1]));
        assert_eq!(f.frobenius(&w, 2), w);
        assert_eq!(f.frobenius(&w, -1), el(&f, &[1, 1]));
    }

    #[test]
    fn trace_f4() {
        let f = f4();
        assert_eq!(f.trace(&f.zero()), 0);
        assert_eq!(f.trace(&f.generator()), 1);
        assert_eq!(f.trace(&f.one()), 0);
    }

    #[test]
    fn frobenius_agrees_with_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (q, m) in [(2u32, 8usize), (3, 5), (13, 6), (7, 4)] {
            let f = make_ext_field(q, m).unwrap();
            for _ in 0..20 {
                let a = f.random(&mut rng);
                let mut e = 1u128;
                for i in 0..m as i64 {
                    assert_eq!(f.frobenius(&a, i), f.pow(&a, e));
                    e *= q as u128;
                }
                assert_eq!(f.frobenius(&a, m as i64), a);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = make_ext_field(7, 9).unwrap();
        assert!(f.inv(&f.zero()).is_none());
        for _ in 0..100 {
            let a = f.random(&mut rng);
            if a.is_zero() {
                continue;
            }
            let b = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &b), f.one());
        }
    }

    #[test]
    fn dual_basis_examples() {
        let f = f4();
        let w = f.generator();
        let w2 = f.mul(&w, &w);
        let bp = dual_basis(&f, &[w.clone(), w2.clone()]).unwrap();
        assert_eq!(bp.dual(), &[w.clone(), w2.clone()]);

        let dep = dual_basis(&f, &[w.clone(), w.clone()]);
        assert_eq!(dep.unwrap_err(), GfError::DependentBasis);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = make_ext_field(5, 7).unwrap();
        for _ in 0..10 {
            let b = random_basis(&f, &mut rng);
            let back = dual_basis(&f, b.dual()).unwrap();
            assert_eq!(back.dual(), b.primal());
        }
    }

    #[test]
    fn phi_examples() {
        let f = f4();
        let w = f.generator();
        let w2 = f.mul(&w, &w);
        let bp = dual_basis(&f, &[f.one(), w.clone()]).unwrap();
        assert_eq!(phi(&bp, &[w2.clone()]), vec![1, 1]);
        assert_eq!(phi_inv(&bp, &[1, 1]).unwrap(), vec![w2]);
        assert_eq!(phi(&bp, &[f.zero(), f.zero()]), vec![0; 4]);
        assert_eq!(phi(&bp, &[w.clone()]), vec![0, 1]);
        assert_eq!(phi_inv(&bp, &[0, 1]).unwrap(), vec![w]);
        assert!(phi_inv(&bp, &[1, 0, 1]).is_err());
    }

    #[test]
    fn phi_matches_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (q, m) in [(2u32, 8usize), (13, 6), (3, 4)] {
            let f = make_ext_field(q, m).unwrap();
            let b = random_basis(&f, &mut rng);
            for _ in 0..30 {
                let a = f.random(&mut rng);
                let via_trace: Vec<u16> =
                    b.dual().iter().map(|d| f.trace(&f.mul(&a, d))).collect();
                assert_eq!(phi(&b, std::slice::from_ref(&a)), via_trace);
            }
        }
    }

    #[test]
    fn phi_elem_matrix_examples() {
        let f = f4();
        let w = f.generator();
        let w2 = f.mul(&w, &w);
        let bp = dual_basis(&f, &[f.one(), w.clone()]).unwrap();
        assert!(phi_elem_matrix(&bp, &f.zero()).is_zero());
        assert_eq!(phi_elem_matrix(&bp, &f.one()), Matrix::identity(f.base(), 2));
        let prod = phi_elem_matrix(&bp, &w).mul(&phi_elem_matrix(&bp, &w2));
        assert_eq!(prod, Matrix::identity(f.base(), 2));
    }

    #[test]
    fn full_expansion_of_single_entry_is_elem_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = make_ext_field(3, 4).unwrap();
        let b = random_basis(&f, &mut rng);
        let a = f.random(&mut rng);
        let mat = Matrix::from_vec(f.clone(), 1, 1, vec![a.clone()]);
        assert_eq!(phi_matrix(&b, &mat, ExpandMode::Full), phi_elem_matrix(&b, &a));
        assert_eq!(
            phi_matrix(&b, &mat, ExpandMode::Rows).row(0),
            &phi(&b, &[a])[..]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field_strategy() -> impl Strategy<Value = ExtField> {
            prop_oneof![
                Just(make_ext_field(2, 8).unwrap()),
                Just(make_ext_field(3, 5).unwrap()),
                Just(make_ext_field(13, 6).unwrap()),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn frobenius_is_a_field_automorphism(f in field_strategy(), seed: u64, i in -20i64..20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                prop_assert_eq!(f.frobenius(&f.mul(&a, &b), i),
                    f.mul(&f.frobenius(&a, i), &f.frobenius(&b, i)));
                prop_assert_eq!(f.frobenius(&f.add(&a, &b), i),
                    f.add(&f.frobenius(&a, i), &f.frobenius(&b, i)));
            }

            #[test]
            fn trace_is_frobenius_invariant(f in field_strategy(), seed: u64) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = f.random(&mut rng);
                // the full sum of conjugates lands in F_q
                let mut acc = f.zero();
                for i in 0..f.degree() as i64 {
                    acc = f.add(&acc, &f.frobenius(&a, i));
                }
                prop_assert!(acc.coeffs()[1..].iter().all(|&c| c == 0));
                prop_assert_eq!(acc.coeffs()[0], f.trace(&a));
                prop_assert_eq!(f.trace(&f.frobenius(&a, 1)), f.trace(&a));
            }

            #[test]
            fn phi_round_trip_and_matrix_model(f in field_strategy(), seed: u64) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let b = random_basis(&f, &mut rng);
                let a = f.random(&mut rng);
                let c = f.random(&mut rng);
                let w = phi(&b, std::slice::from_ref(&a));
                prop_assert_eq!(phi_inv(&b, &w).unwrap(), vec![a.clone()]);
                // coordinate row of c times Φ_B(a) is the coordinate row of ac
                let lhs = phi_elem_matrix(&b, &a).vec_mul(&phi(&b, std::slice::from_ref(&c)));
                prop_assert_eq!(lhs, phi(&b, &[f.mul(&a, &c)]));
            }

            #[test]
            fn phi_elem_matrix_is_a_ring_map(f in field_strategy(), seed: u64) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let b = random_basis(&f, &mut rng);
                let a = f.random(&mut rng);
                let c = f.random(&mut rng);
                prop_assert_eq!(phi_elem_matrix(&b, &f.mul(&a, &c)),
                    phi_elem_matrix(&b, &a).mul(&phi_elem_matrix(&b, &c)));
                prop_assert_eq!(phi_elem_matrix(&b, &f.add(&a, &c)),
                    phi_elem_matrix(&b, &a).add(&phi_elem_matrix(&b, &c)));
                prop_assert_eq!(phi_elem_matrix(&b, &a).inverse().is_some(), !a.is_zero());
            }

            #[test]
            fn dual_basis_is_an_involution(f in field_strategy(), seed: u64) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let b = random_basis(&f, &mut rng);
                let bb = dual_basis(&f, b.dual()).unwrap();
                prop_assert_eq!(bb.dual(), b.primal());
            }
        }
    }
}
