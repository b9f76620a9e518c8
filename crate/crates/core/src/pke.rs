//! The two McEliece-type schemes built on expanded Gabidulin codes, and the
//! byte format for their keys and ciphertexts.
//!
//! Proposal I keeps `λ` columns out of every length-`m` block of the
//! expanded code and hides the result with `T = I_n ⊗ A`. Proposal II keeps
//! the whole expanded code but mixes `λ` consecutive blocks at a time, and
//! uses an error of the matching structured shape.
//!
//! Both public keys are in systematic form `[I_K | *]`, so a plaintext is
//! read back as the first `K` coordinates of `y - e`.

use rand::Rng;
use thiserror::Error;

use crate::expand::{error_matrix, expand_code, ExpandedCode};
use crate::gabidulin::{make_gabidulin, random_independent, rank_weight, CodeError};
use crate::gf::{dual_basis, make_ext_field, random_basis, BasisPair, ExtElem, Field, GfError, PrimeField, MAX_DEGREE};
use crate::matq::{random_invertible, random_rank_t, systematic_generator, BlockDiagonal, MatError, Matrix, MatrixQ};

/// Attempts per mixing matrix before the code itself is redrawn, and
/// attempts per code before keygen gives up.
pub const RETRY_CAP: usize = 100;

pub const MAGIC: &[u8; 4] = b"XGAB";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PkeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("no systematic public key after {0} attempts")]
    RetryExhausted(usize),
    #[error("expected {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("element {value} is not reduced modulo {q}")]
    OutOfRange { value: u16, q: u32 },
    #[error("key belongs to the other proposal")]
    WrongProposal,
    #[error("secret key material is inconsistent: {0}")]
    BadSecret(&'static str),
    #[error("decryption failed")]
    DecryptFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u8),
    #[error("unknown object tag {0}")]
    BadTag(u8),
    #[error("expected object tag {expected}, found {got}")]
    WrongTag { expected: u8, got: u8 },
    #[error("truncated: need {expected} bytes, have {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("byte {value} is not an element of F_{q}")]
    ElementOutOfRange { value: u8, q: u32 },
    #[error("one byte per element needs q <= 256, got {0}")]
    UnsupportedField(u32),
    #[error("header parameters {0:?} do not match the key")]
    ParamsMismatch(Dims),
    #[error(transparent)]
    Invariant(#[from] PkeError),
}

/// Raw `(q, m, n, k, λ)` as found in a file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub q: u32,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
}

fn check_common(d: &Dims) -> Result<(), PkeError> {
    PrimeField::new(d.q)?;
    if d.m == 0 || d.m > MAX_DEGREE {
        return Err(PkeError::InvalidParams(format!("m = {} outside 1..={MAX_DEGREE}", d.m)));
    }
    if !(d.k < d.n && d.n <= d.m) {
        return Err(PkeError::InvalidParams("need k < n <= m".into()));
    }
    Ok(())
}

/// Proposal I parameters: `k < n <= m`, `m(n-k)/n < λ < m`, `n - k >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamsI(Dims);

impl ParamsI {
    pub fn new(q: u32, m: usize, n: usize, k: usize, lambda: usize) -> Result<Self, PkeError> {
        let d = Dims { q, m, n, k, lambda };
        check_common(&d)?;
        if !(lambda < m && lambda * n > m * (n - k)) {
            return Err(PkeError::InvalidParams("need m(n-k)/n < lambda < m".into()));
        }
        if n - k < 2 {
            return Err(PkeError::InvalidParams("need n - k >= 2".into()));
        }
        Ok(ParamsI(d))
    }

    pub fn dims(&self) -> Dims {
        self.0
    }

    /// `K = λn - m(n-k)`
    pub fn big_k(&self) -> usize {
        let d = self.0;
        d.lambda * d.n - d.m * (d.n - d.k)
    }

    /// `N = λn`
    pub fn big_n(&self) -> usize {
        self.0.lambda * self.0.n
    }

    pub fn t(&self) -> usize {
        (self.0.n - self.0.k) / 2
    }

    /// Kept columns: the first `λ` of every `m`-block.
    pub fn support(&self) -> Vec<usize> {
        let d = self.0;
        (0..d.n).flat_map(|j| (0..d.lambda).map(move |i| j * d.m + i)).collect()
    }
}

/// Proposal II parameters: `λ < k < n <= m` and `⌊(n-k)/(2λ)⌋ >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamsII(Dims);

impl ParamsII {
    pub fn new(q: u32, m: usize, n: usize, k: usize, lambda: usize) -> Result<Self, PkeError> {
        let d = Dims { q, m, n, k, lambda };
        check_common(&d)?;
        if !(lambda >= 1 && lambda < k) {
            return Err(PkeError::InvalidParams("need 1 <= lambda < k".into()));
        }
        if (n - k) / (2 * lambda) == 0 {
            return Err(PkeError::InvalidParams("need (n-k)/(2 lambda) >= 1".into()));
        }
        Ok(ParamsII(d))
    }

    pub fn dims(&self) -> Dims {
        self.0
    }

    pub fn big_k(&self) -> usize {
        self.0.k * self.0.m
    }

    pub fn big_n(&self) -> usize {
        self.0.n * self.0.m
    }

    pub fn t(&self) -> usize {
        (self.0.n - self.0.k) / (2 * self.0.lambda)
    }

    pub fn u_f(&self) -> usize {
        self.0.n / self.0.lambda
    }

    pub fn u_c(&self) -> usize {
        self.0.n.div_ceil(self.0.lambda)
    }

    pub fn v(&self) -> usize {
        self.0.n - self.0.lambda * self.u_f()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeParams {
    I(ParamsI),
    II(ParamsII),
}

impl SchemeParams {
    pub fn new(proposal: u8, q: u32, m: usize, n: usize, k: usize, lambda: usize) -> Result<Self, PkeError> {
        match proposal {
            1 => Ok(SchemeParams::I(ParamsI::new(q, m, n, k, lambda)?)),
            2 => Ok(SchemeParams::II(ParamsII::new(q, m, n, k, lambda)?)),
            p => Err(PkeError::InvalidParams(format!("unknown proposal {p}"))),
        }
    }

    pub fn proposal(&self) -> u8 {
        match self {
            SchemeParams::I(_) => 1,
            SchemeParams::II(_) => 2,
        }
    }

    pub fn dims(&self) -> Dims {
        match self {
            SchemeParams::I(p) => p.dims(),
            SchemeParams::II(p) => p.dims(),
        }
    }

    pub fn big_k(&self) -> usize {
        match self {
            SchemeParams::I(p) => p.big_k(),
            SchemeParams::II(p) => p.big_k(),
        }
    }

    pub fn big_n(&self) -> usize {
        match self {
            SchemeParams::I(p) => p.big_n(),
            SchemeParams::II(p) => p.big_n(),
        }
    }

    /// Error radius published with the key.
    pub fn t(&self) -> usize {
        match self {
            SchemeParams::I(p) => p.t(),
            SchemeParams::II(p) => p.t(),
        }
    }

    pub fn base_field(&self) -> PrimeField {
        PrimeField::new(self.dims().q).expect("validated")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    params: SchemeParams,
    gpub: MatrixQ,
}

impl PublicKey {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// `K x N`, systematic.
    pub fn generator(&self) -> &MatrixQ {
        &self.gpub
    }

    pub fn t(&self) -> usize {
        self.params.t()
    }
}

/// The secret `(B, g, A)` plus everything derived from it.
#[derive(Debug, Clone)]
pub struct PrivateKey {
    params: SchemeParams,
    basis: BasisPair,
    g: Vec<ExtElem>,
    a: MatrixQ,
    code: ExpandedCode,
    t_mat: BlockDiagonal,
    t_inv: BlockDiagonal,
    /// Proposal I only: `Ĥ` restricted to the kept columns.
    hhat_s: Option<MatrixQ>,
}

impl PartialEq for PrivateKey {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.basis == other.basis && self.g == other.g && self.a == other.a
    }
}

impl Eq for PrivateKey {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub y: Vec<u16>,
}

/// Intermediate values of a decryption, for inspection in tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptTrace {
    pub plaintext: Vec<u16>,
    /// the error added at encryption time
    pub error: Vec<u16>,
    /// what the expanded decoder returned: `[EA | 0]` for Proposal I, `eT`
    /// for Proposal II
    pub decoded: Vec<u16>,
}

fn expanded(params: &SchemeParams, basis: &BasisPair, g: &[ExtElem]) -> Result<ExpandedCode, PkeError> {
    let code = make_gabidulin(basis.field(), g, params.dims().k)?;
    Ok(expand_code(&code, basis))
}

/// Proposal II mixing matrix; `None` when `A_sub` is singular.
fn mixing_ii(p: &ParamsII, a: &MatrixQ) -> Option<BlockDiagonal> {
    let m = p.dims().m;
    let mut blocks = vec![a.clone(); p.u_f()];
    if p.v() > 0 {
        let sub = a.block(0, 0, m * p.v(), m * p.v());
        sub.inverse()?;
        blocks.push(sub);
    }
    Some(BlockDiagonal::new(blocks))
}

fn mixing_i(p: &ParamsI, a: &MatrixQ) -> BlockDiagonal {
    BlockDiagonal::new(vec![a.clone(); p.dims().n])
}

/// Systematic generator of `G T^{-1}`; `Ok(None)` when the leading block is
/// singular.
fn public_generator(g: &MatrixQ, t_inv: &BlockDiagonal) -> Result<Option<MatrixQ>, PkeError> {
    match systematic_generator(&t_inv.right_mul(g)) {
        Ok(s) => Ok(Some(s)),
        Err(MatError::NotSystematic) => Ok(None),
        Err(_) => Err(PkeError::BadSecret("private code lost rank")),
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Result<(PublicKey, PrivateKey), PkeError> {
    match params {
        SchemeParams::I(p) => keygen_i(p, rng),
        SchemeParams::II(p) => keygen_ii(p, rng),
    }
}

pub fn keygen_i<R: Rng + ?Sized>(p: &ParamsI, rng: &mut R) -> Result<(PublicKey, PrivateKey), PkeError> {
    let d = p.dims();
    let params = SchemeParams::I(*p);
    let field = make_ext_field(d.q, d.m)?;
    let fq = field.base();
    for _ in 0..RETRY_CAP {
        let g = random_independent(&field, d.n, rng);
        let basis = random_basis(&field, rng);
        let code = expanded(&params, &basis, &g)?;
        let hs = code.parity_check().select_columns(&p.support());
        let gs = hs.right_kernel();
        if gs.rows() != p.big_k() {
            continue;
        }
        for _ in 0..RETRY_CAP {
            let a = random_invertible(fq, d.lambda, rng);
            let t_mat = mixing_i(p, &a);
            let t_inv = t_mat.inverse().expect("invertible blocks");
            if let Some(gpub) = public_generator(&gs, &t_inv)? {
                let sk = PrivateKey {
                    params,
                    basis,
                    g,
                    a,
                    code,
                    t_mat,
                    t_inv,
                    hhat_s: Some(hs),
                };
                return Ok((PublicKey { params, gpub }, sk));
            }
        }
    }
    Err(PkeError::RetryExhausted(RETRY_CAP * RETRY_CAP))
}

pub fn keygen_ii<R: Rng + ?Sized>(p: &ParamsII, rng: &mut R) -> Result<(PublicKey, PrivateKey), PkeError> {
    let d = p.dims();
    let params = SchemeParams::II(*p);
    let field = make_ext_field(d.q, d.m)?;
    let fq = field.base();
    for _ in 0..RETRY_CAP {
        let g = random_independent(&field, d.n, rng);
        let basis = random_basis(&field, rng);
        let code = expanded(&params, &basis, &g)?;
        for _ in 0..RETRY_CAP {
            let a = random_invertible(fq, d.m * d.lambda, rng);
            let Some(t_mat) = mixing_ii(p, &a) else { continue };
            let t_inv = t_mat.inverse().expect("invertible blocks");
            if let Some(gpub) = public_generator(code.generator(), &t_inv)? {
                let sk = PrivateKey {
                    params,
                    basis,
                    g,
                    a,
                    code,
                    t_mat,
                    t_inv,
                    hhat_s: None,
                };
                return Ok((PublicKey { params, gpub }, sk));
            }
        }
    }
    Err(PkeError::RetryExhausted(RETRY_CAP * RETRY_CAP))
}

impl PrivateKey {
    /// Rebuilds a private key from its secret parts.
    pub fn from_parts(params: SchemeParams, basis: BasisPair, g: Vec<ExtElem>, a: MatrixQ) -> Result<Self, PkeError> {
        let d = params.dims();
        let field = make_ext_field(d.q, d.m)?;
        if *basis.field() != field {
            return Err(PkeError::BadSecret("basis lives in another field"));
        }
        if g.len() != d.n || rank_weight(&field, &g) != d.n {
            return Err(PkeError::BadSecret("g must have n independent components"));
        }
        let code = expanded(&params, &basis, &g)?;
        let (t_mat, hhat_s) = match &params {
            SchemeParams::I(p) => {
                if a.rows() != d.lambda || a.cols() != d.lambda {
                    return Err(PkeError::BadSecret("A has the wrong shape"));
                }
                let hs = code.parity_check().select_columns(&p.support());
                if hs.rank() != d.m * (d.n - d.k) {
                    return Err(PkeError::BadSecret("restricted parity check is rank deficient"));
                }
                (mixing_i(p, &a), Some(hs))
            }
            SchemeParams::II(p) => {
                let s = d.m * d.lambda;
                if a.rows() != s || a.cols() != s {
                    return Err(PkeError::BadSecret("A has the wrong shape"));
                }
                let t = mixing_ii(p, &a).ok_or(PkeError::BadSecret("leading block of A is singular"))?;
                (t, None)
            }
        };
        let t_inv = t_mat.inverse().ok_or(PkeError::BadSecret("A is singular"))?;
        Ok(PrivateKey {
            params,
            basis,
            g,
            a,
            code,
            t_mat,
            t_inv,
            hhat_s,
        })
    }

    /// Re-derives the public key.
    pub fn public_key(&self) -> Result<PublicKey, PkeError> {
        let g = match &self.hhat_s {
            Some(hs) => hs.right_kernel(),
            None => self.code.generator().clone(),
        };
        let gpub = public_generator(&g, &self.t_inv)?.ok_or(PkeError::BadSecret("public generator is not systematic"))?;
        Ok(PublicKey {
            params: self.params,
            gpub,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn basis(&self) -> &BasisPair {
        &self.basis
    }

    pub fn g(&self) -> &[ExtElem] {
        &self.g
    }

    /// The mixing matrix `A`.
    pub fn mixing(&self) -> &MatrixQ {
        &self.a
    }

    pub fn code(&self) -> &ExpandedCode {
        &self.code
    }

    /// `T` in block form.
    pub fn transform(&self) -> &BlockDiagonal {
        &self.t_mat
    }
}

fn check_elems(fq: PrimeField, x: &[u16], expected: usize) -> Result<(), PkeError> {
    if x.len() != expected {
        return Err(PkeError::LengthMismatch { expected, got: x.len() });
    }
    if let Some(&value) = x.iter().find(|&&v| v as u32 >= fq.q()) {
        return Err(PkeError::OutOfRange { value, q: fq.q() });
    }
    Ok(())
}

fn add_error(pk: &PublicKey, x: &[u16], e: &[u16]) -> Ciphertext {
    let fq = pk.params.base_field();
    let mut y = pk.gpub.vec_mul(x);
    for (a, b) in y.iter_mut().zip(e) {
        *a = fq.add(a, b);
    }
    Ciphertext { y }
}

/// Proposal I error: an `n x λ` matrix of rank exactly `t`, row-major.
pub fn sample_error_i<R: Rng + ?Sized>(p: &ParamsI, rng: &mut R) -> Vec<u16> {
    let d = p.dims();
    let fq = PrimeField::new(d.q).expect("validated");
    random_rank_t(fq, d.n, d.lambda, p.t(), rng).expect("t < min(n, lambda)").into_data()
}

/// Proposal II error.
///
/// The `n` blocks of length `m` are laid out `λ` per row of a
/// `u_c x mλ` matrix `E` of rank exactly `t`. When `λ` does not divide `n`
/// the last row only holds `v` blocks and is zero afterwards.
pub fn sample_error_ii<R: Rng + ?Sized>(p: &ParamsII, rng: &mut R) -> Vec<u16> {
    let d = p.dims();
    let fq = PrimeField::new(d.q).expect("validated");
    let (uc, t, w) = (p.u_c(), p.t(), d.m * d.lambda);
    let filled = d.m * p.v();
    loop {
        let mut u = Matrix::random(fq, uc, t, rng);
        let mut v = Matrix::random(fq, t, w, rng);
        if p.v() > 0 {
            for c in 1..t {
                u.set(uc - 1, c, 0);
            }
            for c in filled..w {
                v.set(0, c, 0);
            }
        }
        let e = u.mul(&v);
        if e.rank() == t {
            let mut data = e.into_data();
            data.truncate(d.n * d.m);
            return data;
        }
    }
}

pub fn encrypt<R: Rng + ?Sized>(pk: &PublicKey, x: &[u16], rng: &mut R) -> Result<Ciphertext, PkeError> {
    check_elems(pk.params.base_field(), x, pk.params.big_k())?;
    let e = match &pk.params {
        SchemeParams::I(p) => sample_error_i(p, rng),
        SchemeParams::II(p) => sample_error_ii(p, rng),
    };
    Ok(add_error(pk, x, &e))
}

pub fn encrypt_i<R: Rng + ?Sized>(pk: &PublicKey, x: &[u16], rng: &mut R) -> Result<Ciphertext, PkeError> {
    match pk.params {
        SchemeParams::I(_) => encrypt(pk, x, rng),
        SchemeParams::II(_) => Err(PkeError::WrongProposal),
    }
}

pub fn encrypt_ii<R: Rng + ?Sized>(pk: &PublicKey, x: &[u16], rng: &mut R) -> Result<Ciphertext, PkeError> {
    match pk.params {
        SchemeParams::II(_) => encrypt(pk, x, rng),
        SchemeParams::I(_) => Err(PkeError::WrongProposal),
    }
}

/// Encrypts with a caller-chosen error, skipping the shape checks.
pub fn encrypt_with_error(pk: &PublicKey, x: &[u16], e: &[u16]) -> Result<Ciphertext, PkeError> {
    let fq = pk.params.base_field();
    check_elems(fq, x, pk.params.big_k())?;
    check_elems(fq, e, pk.params.big_n())?;
    Ok(add_error(pk, x, e))
}

pub fn decrypt(sk: &PrivateKey, ct: &Ciphertext) -> Result<Vec<u16>, PkeError> {
    decrypt_traced(sk, ct).map(|tr| tr.plaintext)
}

pub fn decrypt_i(sk: &PrivateKey, ct: &Ciphertext) -> Result<Vec<u16>, PkeError> {
    match sk.params {
        SchemeParams::I(_) => decrypt(sk, ct),
        SchemeParams::II(_) => Err(PkeError::WrongProposal),
    }
}

pub fn decrypt_ii(sk: &PrivateKey, ct: &Ciphertext) -> Result<Vec<u16>, PkeError> {
    match sk.params {
        SchemeParams::II(_) => decrypt(sk, ct),
        SchemeParams::I(_) => Err(PkeError::WrongProposal),
    }
}

pub fn decrypt_traced(sk: &PrivateKey, ct: &Ciphertext) -> Result<DecryptTrace, PkeError> {
    let params = sk.params;
    let d = params.dims();
    let fq = params.base_field();
    check_elems(fq, &ct.y, params.big_n())?;
    let yt = sk.t_mat.apply_row(&ct.y);
    let (decoded, error) = match &params {
        SchemeParams::I(p) => {
            let hs = sk.hhat_s.as_ref().expect("proposal I key caches the restricted parity check");
            let s = hs.mul_vec(&yt);
            let full = sk.code.decode_syndrome(&s).map_err(|_| PkeError::DecryptFailure)?;
            let support = p.support();
            let mut kept = vec![false; full.len()];
            for &c in &support {
                kept[c] = true;
            }
            if full.iter().zip(&kept).any(|(&x, &k)| !k && x != 0) {
                return Err(PkeError::DecryptFailure);
            }
            let e_prime: Vec<u16> = support.iter().map(|&c| full[c]).collect();
            let e = sk.t_inv.apply_row(&e_prime);
            if error_matrix(fq, &e, d.lambda).rank() > p.t() {
                return Err(PkeError::DecryptFailure);
            }
            (full, e)
        }
        SchemeParams::II(p) => {
            let s = sk.code.syndrome(&yt)?;
            let e_prime = sk.code.decode_syndrome(&s).map_err(|_| PkeError::DecryptFailure)?;
            let e = sk.t_inv.apply_row(&e_prime);
            if error_matrix(fq, &e, d.m).rank() > d.lambda * p.t() {
                return Err(PkeError::DecryptFailure);
            }
            (e_prime, e)
        }
    };
    let plaintext = ct.y[..params.big_k()].iter().zip(&error).map(|(a, b)| fq.sub(a, b)).collect();
    Ok(DecryptTrace {
        plaintext,
        error,
        decoded,
    })
}

// ---- byte format ----

const TAG_PK_I: u8 = 1;
const TAG_SK_I: u8 = 2;
const TAG_PK_II: u8 = 3;
const TAG_SK_II: u8 = 4;
pub const TAG_CT: u8 = 5;

fn write_header(out: &mut Vec<u8>, tag: u8, d: &Dims) -> Result<(), FormatError> {
    if d.q > 256 {
        return Err(FormatError::UnsupportedField(d.q));
    }
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.push(tag);
    for v in [d.q as usize, d.m, d.n, d.k, d.lambda] {
        out.extend_from_slice(&(v as u16).to_le_bytes());
    }
    Ok(())
}

fn write_elems(out: &mut Vec<u8>, xs: &[u16]) {
    out.extend(xs.iter().map(|&x| x as u8));
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    q: u32,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() - self.pos < len {
            return Err(FormatError::Truncated {
                expected: self.pos + len,
                got: self.buf.len(),
            });
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn elems(&mut self, len: usize) -> Result<Vec<u16>, FormatError> {
        let q = self.q;
        self.take(len)?
            .iter()
            .map(|&b| {
                if (b as u32) < q {
                    Ok(b as u16)
                } else {
                    Err(FormatError::ElementOutOfRange { value: b, q })
                }
            })
            .collect()
    }

    fn matrix(&mut self, fq: PrimeField, rows: usize, cols: usize) -> Result<MatrixQ, FormatError> {
        Ok(Matrix::from_vec(fq, rows, cols, self.elems(rows * cols)?))
    }

    fn finish(&self) -> Result<(), FormatError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            extra => Err(FormatError::TrailingBytes(extra)),
        }
    }
}

/// Reads and checks the fixed header.
pub fn read_header(bytes: &[u8]) -> Result<(u8, Dims), FormatError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            expected: HEADER_LEN,
            got: bytes.len(),
        });
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(FormatError::BadVersion(bytes[4]));
    }
    let tag = bytes[5];
    if !(TAG_PK_I..=TAG_CT).contains(&tag) {
        return Err(FormatError::BadTag(tag));
    }
    let f = |i: usize| u16::from_le_bytes([bytes[6 + 2 * i], bytes[7 + 2 * i]]) as usize;
    let d = Dims {
        q: f(0) as u32,
        m: f(1),
        n: f(2),
        k: f(3),
        lambda: f(4),
    };
    if d.q > 256 {
        return Err(FormatError::UnsupportedField(d.q));
    }
    Ok((tag, d))
}

fn params_for_tag(tag: u8, d: &Dims) -> Result<SchemeParams, FormatError> {
    let proposal = if tag == TAG_PK_I || tag == TAG_SK_I { 1 } else { 2 };
    Ok(SchemeParams::new(proposal, d.q, d.m, d.n, d.k, d.lambda)?)
}

fn reader(bytes: &[u8], q: u32) -> Reader<'_> {
    Reader { buf: bytes, pos: HEADER_LEN, q }
}

pub fn encode_public_key(pk: &PublicKey) -> Result<Vec<u8>, FormatError> {
    let tag = if pk.params.proposal() == 1 { TAG_PK_I } else { TAG_PK_II };
    let (kk, nn) = (pk.params.big_k(), pk.params.big_n());
    let mut out = Vec::with_capacity(HEADER_LEN + kk * (nn - kk));
    write_header(&mut out, tag, &pk.params.dims())?;
    for r in 0..kk {
        write_elems(&mut out, &pk.gpub.row(r)[kk..]);
    }
    Ok(out)
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey, FormatError> {
    let (tag, d) = read_header(bytes)?;
    if tag != TAG_PK_I && tag != TAG_PK_II {
        return Err(FormatError::WrongTag { expected: TAG_PK_I, got: tag });
    }
    let params = params_for_tag(tag, &d)?;
    let fq = params.base_field();
    let (kk, nn) = (params.big_k(), params.big_n());
    let mut rd = reader(bytes, d.q);
    let redundancy = rd.matrix(fq, kk, nn - kk)?;
    rd.finish()?;
    let gpub = Matrix::identity(fq, kk).hstack(&redundancy);
    Ok(PublicKey { params, gpub })
}

pub fn encode_private_key(sk: &PrivateKey) -> Result<Vec<u8>, FormatError> {
    let tag = if sk.params.proposal() == 1 { TAG_SK_I } else { TAG_SK_II };
    let mut out = Vec::new();
    write_header(&mut out, tag, &sk.params.dims())?;
    write_elems(&mut out, sk.basis.coordinate_matrix().data());
    for gi in &sk.g {
        write_elems(&mut out, gi.coeffs());
    }
    write_elems(&mut out, sk.a.data());
    Ok(out)
}

pub fn decode_private_key(bytes: &[u8]) -> Result<PrivateKey, FormatError> {
    let (tag, d) = read_header(bytes)?;
    if tag != TAG_SK_I && tag != TAG_SK_II {
        return Err(FormatError::WrongTag { expected: TAG_SK_I, got: tag });
    }
    let params = params_for_tag(tag, &d)?;
    let field = make_ext_field(d.q, d.m).map_err(PkeError::from)?;
    let fq = field.base();
    let mut rd = reader(bytes, d.q);
    let coords = rd.matrix(fq, d.m, d.m)?;
    let g = rd.matrix(fq, d.n, d.m)?;
    let a_size = if tag == TAG_SK_I { d.lambda } else { d.lambda * d.m };
    let a = rd.matrix(fq, a_size, a_size)?;
    rd.finish()?;
    let to_elems = |mat: &MatrixQ| -> Vec<ExtElem> {
        (0..mat.rows())
            .map(|r| field.elem(mat.row(r).to_vec()).expect("reduced coordinates"))
            .collect()
    };
    let basis = dual_basis(&field, &to_elems(&coords)).map_err(PkeError::from)?;
    Ok(PrivateKey::from_parts(params, basis, to_elems(&g), a)?)
}

pub fn encode_ciphertext(params: &SchemeParams, ct: &Ciphertext) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::with_capacity(HEADER_LEN + ct.y.len());
    write_header(&mut out, TAG_CT, &params.dims())?;
    write_elems(&mut out, &ct.y);
    Ok(out)
}

/// Parses a ciphertext meant for a key with the given parameters.
pub fn decode_ciphertext(bytes: &[u8], params: &SchemeParams) -> Result<Ciphertext, FormatError> {
    let (tag, d) = read_header(bytes)?;
    if tag != TAG_CT {
        return Err(FormatError::WrongTag { expected: TAG_CT, got: tag });
    }
    if d != params.dims() {
        return Err(FormatError::ParamsMismatch(d));
    }
    let mut rd = reader(bytes, d.q);
    let y = rd.elems(params.big_n())?;
    rd.finish()?;
    Ok(Ciphertext { y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_plain(params: &SchemeParams, r: &mut ChaCha8Rng) -> Vec<u16> {
        let fq = params.base_field();
        (0..params.big_k()).map(|_| fq.random(r)).collect()
    }

    #[test]
    fn params_i_validation_and_sizes() {
        let p = ParamsI::new(2, 8, 8, 4, 7).unwrap();
        assert_eq!((p.big_k(), p.big_n(), p.t()), (24, 56, 2));
        let p = ParamsI::new(13, 25, 25, 15, 23).unwrap();
        assert_eq!((p.big_k(), p.big_n(), p.t()), (325, 575, 5));
        assert!(ParamsI::new(2, 8, 8, 4, 8).is_err());
        assert!(ParamsI::new(2, 8, 8, 4, 4).is_err());
        assert!(ParamsI::new(2, 8, 8, 7, 7).is_err());
        assert!(ParamsI::new(4, 8, 8, 4, 7).is_err());
        assert!(ParamsI::new(2, 8, 9, 4, 7).is_err());
    }

    #[test]
    fn params_ii_validation_and_sizes() {
        let p = ParamsII::new(2, 8, 8, 4, 2).unwrap();
        assert_eq!((p.u_f(), p.u_c(), p.v(), p.t(), p.big_k(), p.big_n()), (4, 4, 0, 1, 32, 64));
        let p = ParamsII::new(7, 35, 35, 23, 2).unwrap();
        assert_eq!((p.u_f(), p.u_c(), p.v(), p.t()), (17, 18, 1, 3));
        assert!(ParamsII::new(2, 8, 8, 4, 4).is_err());
        assert!(ParamsII::new(2, 8, 8, 6, 2).is_err());
    }

    #[test]
    fn keygen_i_is_systematic_and_orthogonal() {
        let p = ParamsI::new(2, 8, 8, 4, 7).unwrap();
        let (pk, sk) = keygen_i(&p, &mut rng(1)).unwrap();
        let g = pk.generator();
        assert_eq!((g.rows(), g.cols()), (24, 56));
        assert_eq!(g.block(0, 0, 24, 24), Matrix::identity(g.field().clone(), 24));
        // G_pub T is orthogonal to the restricted parity check
        let gt = sk.transform().right_mul(g);
        assert!(gt.mul(&sk.hhat_s.as_ref().unwrap().transpose()).is_zero());
        assert_eq!(pk.t(), 2);
    }

    #[test]
    fn keygen_ii_is_systematic_and_orthogonal() {
        for (m, n, k, l) in [(8, 8, 4, 2), (7, 7, 2, 1), (9, 9, 4, 2)] {
            let p = ParamsII::new(2, m, n, k, l).unwrap();
            let (pk, sk) = keygen_ii(&p, &mut rng(2)).unwrap();
            let g = pk.generator();
            assert_eq!(g.block(0, 0, k * m, k * m), Matrix::identity(g.field().clone(), k * m));
            let gt = sk.transform().right_mul(g);
            assert!(gt.mul(&sk.code().parity_check().transpose()).is_zero());
        }
    }

    #[test]
    fn keygen_is_deterministic_and_rederivable() {
        let params = SchemeParams::new(1, 3, 6, 6, 2, 5).unwrap();
        let (pk1, sk1) = keygen(&params, &mut rng(3)).unwrap();
        let (pk2, sk2) = keygen(&params, &mut rng(3)).unwrap();
        assert_eq!(pk1, pk2);
        assert_eq!(sk1, sk2);
        assert_eq!(sk1.public_key().unwrap(), pk1);
        let rebuilt = PrivateKey::from_parts(params, sk1.basis().clone(), sk1.g().to_vec(), sk1.mixing().clone()).unwrap();
        assert_eq!(rebuilt.public_key().unwrap(), pk1);
    }

    #[test]
    fn round_trip_proposal_i() {
        let params = SchemeParams::new(1, 2, 8, 8, 4, 7).unwrap();
        let mut r = rng(4);
        let (pk, sk) = keygen(&params, &mut r).unwrap();
        for _ in 0..200 {
            let x = random_plain(&params, &mut r);
            let ct = encrypt_i(&pk, &x, &mut r).unwrap();
            let tr = decrypt_traced(&sk, &ct).unwrap();
            assert_eq!(tr.plaintext, x);
            let fq = params.base_field();
            assert_eq!(error_matrix(fq, &tr.error, 7).rank(), 2);
            // padded decoder output keeps the rank of E
            assert_eq!(error_matrix(fq, &tr.decoded, 8).rank(), 2);
        }
    }

    #[test]
    fn round_trip_proposal_ii() {
        let params = SchemeParams::new(2, 2, 8, 8, 4, 2).unwrap();
        let mut r = rng(5);
        let (pk, sk) = keygen(&params, &mut r).unwrap();
        for _ in 0..200 {
            let x = random_plain(&params, &mut r);
            let ct = encrypt_ii(&pk, &x, &mut r).unwrap();
            let tr = decrypt_traced(&sk, &ct).unwrap();
            assert_eq!(tr.plaintext, x);
            assert!(error_matrix(params.base_field(), &tr.decoded, 8).rank() <= 2);
        }
    }

    #[test]
    fn zero_error_and_zero_plaintext() {
        for params in [SchemeParams::new(1, 2, 8, 8, 4, 7).unwrap(), SchemeParams::new(2, 2, 8, 8, 4, 2).unwrap()] {
            let mut r = rng(6);
            let (pk, sk) = keygen(&params, &mut r).unwrap();
            let x = random_plain(&params, &mut r);
            let ct = encrypt_with_error(&pk, &x, &vec![0; params.big_n()]).unwrap();
            assert_eq!(decrypt(&sk, &ct).unwrap(), x);
            let zero = vec![0; params.big_k()];
            let ct = encrypt(&pk, &zero, &mut r).unwrap();
            assert_eq!(decrypt(&sk, &ct).unwrap(), zero);
        }
    }

    #[test]
    fn zero_plaintext_exposes_rank_t_error() {
        let p = ParamsI::new(2, 8, 8, 4, 7).unwrap();
        let mut r = rng(7);
        let (pk, _) = keygen_i(&p, &mut r).unwrap();
        let ct = encrypt_i(&pk, &[0; 24], &mut r).unwrap();
        assert_eq!(error_matrix(PrimeField::new(2).unwrap(), &ct.y, 7).rank(), 2);
    }

    #[test]
    fn oversized_error_is_rejected() {
        let params = SchemeParams::new(1, 2, 8, 8, 4, 7).unwrap();
        let mut r = rng(8);
        let (pk, sk) = keygen(&params, &mut r).unwrap();
        let fq = params.base_field();
        let mut failures = 0;
        for _ in 0..50 {
            let x = random_plain(&params, &mut r);
            let e = random_rank_t(fq, 8, 7, 4, &mut r).unwrap().into_data();
            let ct = encrypt_with_error(&pk, &x, &e).unwrap();
            match decrypt(&sk, &ct) {
                Err(PkeError::DecryptFailure) => failures += 1,
                Ok(out) => assert_ne!(out, x),
                Err(other) => panic!("unexpected {other}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn structured_error_shape() {
        let p = ParamsII::new(2, 8, 8, 4, 2).unwrap();
        let mut r = rng(9);
        let fq = PrimeField::new(2).unwrap();
        for _ in 0..20 {
            let e = sample_error_ii(&p, &mut r);
            assert_eq!(Matrix::from_vec(fq, 4, 16, e).rank(), 1);
        }
        let p = ParamsII::new(3, 7, 7, 3, 2).unwrap();
        assert_eq!((p.v(), p.t()), (1, 1));
        let fq = PrimeField::new(3).unwrap();
        for _ in 0..50 {
            let mut e = sample_error_ii(&p, &mut r);
            assert_eq!(e.len(), 49);
            e.resize(4 * 14, 0);
            let em = Matrix::from_vec(fq, 4, 14, e);
            assert_eq!(em.rank(), 1);
            assert!(em.row(3)[7..].iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn wrong_proposal_and_bad_lengths() {
        let params = SchemeParams::new(2, 2, 8, 8, 4, 2).unwrap();
        let mut r = rng(10);
        let (pk, sk) = keygen(&params, &mut r).unwrap();
        assert_eq!(encrypt_i(&pk, &[0; 32], &mut r), Err(PkeError::WrongProposal));
        assert!(matches!(encrypt(&pk, &[0; 31], &mut r), Err(PkeError::LengthMismatch { .. })));
        assert!(matches!(encrypt(&pk, &[2; 32], &mut r), Err(PkeError::OutOfRange { .. })));
        assert!(matches!(decrypt(&sk, &Ciphertext { y: vec![0; 63] }), Err(PkeError::LengthMismatch { .. })));
        assert_eq!(decrypt_i(&sk, &Ciphertext { y: vec![0; 64] }), Err(PkeError::WrongProposal));
    }

    #[test]
    fn codec_round_trips() {
        for params in [SchemeParams::new(1, 3, 6, 6, 2, 5).unwrap(), SchemeParams::new(2, 5, 5, 5, 3, 1).unwrap()] {
            let mut r = rng(11);
            let (pk, sk) = keygen(&params, &mut r).unwrap();
            let pk_bytes = encode_public_key(&pk).unwrap();
            let (kk, nn) = (params.big_k(), params.big_n());
            assert_eq!(pk_bytes.len(), HEADER_LEN + kk * (nn - kk));
            assert_eq!(decode_public_key(&pk_bytes).unwrap(), pk);
            let sk_bytes = encode_private_key(&sk).unwrap();
            let sk2 = decode_private_key(&sk_bytes).unwrap();
            assert_eq!(sk2, sk);
            assert_eq!(encode_private_key(&sk2).unwrap(), sk_bytes);
            let x = random_plain(&params, &mut r);
            let ct = encrypt(&pk, &x, &mut r).unwrap();
            let ct_bytes = encode_ciphertext(&params, &ct).unwrap();
            assert_eq!(ct_bytes.len(), HEADER_LEN + nn);
            let ct2 = decode_ciphertext(&ct_bytes, &params).unwrap();
            assert_eq!(decrypt(&sk2, &ct2).unwrap(), x);
        }
    }

    #[test]
    fn codec_rejects_mutations() {
        let params = SchemeParams::new(1, 3, 6, 6, 2, 5).unwrap();
        let mut r = rng(12);
        let (pk, sk) = keygen(&params, &mut r).unwrap();
        let bytes = encode_public_key(&pk).unwrap();
        let mut b = bytes.clone();
        b[0] = b'Y';
        assert_eq!(decode_public_key(&b), Err(FormatError::BadMagic));
        let mut b = bytes.clone();
        b[4] = 2;
        assert_eq!(decode_public_key(&b), Err(FormatError::BadVersion(2)));
        let mut b = bytes.clone();
        b[5] = 9;
        assert_eq!(decode_public_key(&b), Err(FormatError::BadTag(9)));
        let mut b = bytes.clone();
        b[5] = TAG_CT;
        assert!(matches!(decode_public_key(&b), Err(FormatError::WrongTag { .. })));
        // lambda = m violates the parameter invariant
        let mut b = bytes.clone();
        b[14] = 6;
        assert!(matches!(decode_public_key(&b), Err(FormatError::Invariant(PkeError::InvalidParams(_)))));
        assert!(matches!(decode_public_key(&bytes[..bytes.len() - 1]), Err(FormatError::Truncated { .. })));
        let mut b = bytes.clone();
        b.push(0);
        assert_eq!(decode_public_key(&b), Err(FormatError::TrailingBytes(1)));
        let mut b = bytes.clone();
        *b.last_mut().unwrap() = 3;
        assert!(matches!(decode_public_key(&b), Err(FormatError::ElementOutOfRange { value: 3, q: 3 })));
        assert_eq!(decode_public_key(&bytes[..3]), Err(FormatError::BadMagic));

        let skb = encode_private_key(&sk).unwrap();
        let mut b = skb.clone();
        // zero basis: no longer a basis
        for x in &mut b[HEADER_LEN..HEADER_LEN + 36] {
            *x = 0;
        }
        assert!(matches!(decode_private_key(&b), Err(FormatError::Invariant(_))));
        assert!(matches!(decode_private_key(&bytes), Err(FormatError::WrongTag { .. })));

        let ct = encrypt(&pk, &[0; 6], &mut r).unwrap();
        let cb = encode_ciphertext(&params, &ct).unwrap();
        assert!(matches!(decode_ciphertext(&cb[..cb.len() - 1], &params), Err(FormatError::Truncated { .. })));
        let other = SchemeParams::new(1, 3, 6, 6, 3, 4).unwrap();
        assert!(matches!(decode_ciphertext(&cb, &other), Err(FormatError::ParamsMismatch(_))));
    }

    #[test]
    fn large_fields_cannot_be_serialised() {
        let params = SchemeParams::new(1, 257, 4, 4, 2, 3).unwrap();
        let (pk, _) = keygen(&params, &mut rng(13)).unwrap();
        assert_eq!(encode_public_key(&pk), Err(FormatError::UnsupportedField(257)));
    }
}
