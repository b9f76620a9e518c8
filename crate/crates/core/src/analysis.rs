//! Structural and cost analysis.
//!
//! - twisted Frobenius powers of block codes and the dimension test that
//!   tells expanded Gabidulin codes apart from random ones;
//! - the reduction of a ciphertext to a MinRank instance, with an
//!   exhaustive solver for tiny instances;
//! - log2 work factors of the combinatorial and algebraic attacks, public
//!   key sizes and information rates.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::expand::expand_code;
use crate::gabidulin::{make_gabidulin, random_independent, CodeError, GabidulinCode};
use crate::gf::{make_ext_field, phi_matrix, random_basis, BasisPair, ExpandMode, Field, GfError, PrimeField};
use crate::matq::{log2_big, subspace_prob_log2, Matrix, MatrixQ, MatrixQm};
use crate::pke::{Ciphertext, Dims, ParamsI, ParamsII, PublicKey, SchemeParams};

/// Linear algebra exponent used by the algebraic MinRank estimates.
pub const OMEGA: f64 = 2.8;

/// Largest search space the brute-force MinRank solver accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{cols} columns / {rows} rows are not multiples of the block size {m}")]
    BlockShape { rows: usize, cols: usize, m: usize },
    #[error("distinguisher needs {0}")]
    Precondition(&'static str),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("instance matrices have different shapes")]
    RaggedInstance,
    #[error("search space {size} exceeds {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("invalid cost parameters: {0}")]
    BadCostParams(&'static str),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

// ---- block codes and twisted powers ----

/// A code over `F_q` whose coordinates are cut into blocks of length `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCode {
    g: MatrixQ,
    m: usize,
}

impl BlockCode {
    pub fn new(g: MatrixQ, m: usize) -> Result<Self, AnalysisError> {
        if m == 0 || g.rows() % m != 0 || g.cols() % m != 0 {
            return Err(AnalysisError::BlockShape {
                rows: g.rows(),
                cols: g.cols(),
                m,
            });
        }
        Ok(BlockCode { g, m })
    }

    pub fn generator(&self) -> &MatrixQ {
        &self.g
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    /// Number of blocks.
    pub fn n(&self) -> usize {
        self.g.cols() / self.m
    }

    /// Dimension in blocks.
    pub fn k(&self) -> usize {
        self.g.rows() / self.m
    }

    pub fn q(&self) -> u32 {
        self.g.field().q()
    }

    pub fn dual(&self) -> Result<BlockCode, AnalysisError> {
        BlockCode::new(self.g.right_kernel(), self.m)
    }

    fn block_columns(&self, blocks: &[usize]) -> Vec<usize> {
        blocks.iter().flat_map(|&b| b * self.m..(b + 1) * self.m).collect()
    }
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// First `k`-subset of blocks (lexicographic) whose columns are an
/// information set, as block indices.
pub fn block_information_set(bc: &BlockCode) -> Option<Vec<usize>> {
    let (n, k) = (bc.n(), bc.k());
    if k == 0 || k > n || bc.g.rank() < bc.g.rows() {
        return None;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if bc.g.select_columns(&bc.block_columns(&idx)).rank() == bc.g.rows() {
            return Some(idx);
        }
        if !next_combination(&mut idx, n) {
            return None;
        }
    }
}

/// `a^{q^s}` as a matrix power.
fn frobenius_matrix_power(a: &MatrixQ, q: u32, s: usize) -> MatrixQ {
    let mut cur = a.clone();
    for _ in 0..s {
        let mut acc = Matrix::identity(*a.field(), a.rows());
        let mut base = cur.clone();
        let mut e = q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        cur = acc;
    }
    cur
}

/// `s`-th twisted Frobenius power.
///
/// The generator is first normalised to the identity on the first block
/// information set, then every `m x m` block is raised to the power `q^s`.
/// Without a block information set the reduced echelon generator is used.
pub fn twisted_power(bc: &BlockCode, s: usize) -> BlockCode {
    let m = bc.m;
    let base = match block_information_set(bc) {
        Some(set) => {
            let sub = bc.g.select_columns(&bc.block_columns(&set));
            sub.inverse().expect("information set").mul(&bc.g)
        }
        None => bc.g.rref().matrix,
    };
    let mut out = Matrix::zeros(*bc.g.field(), base.rows(), base.cols());
    for bi in 0..base.rows() / m {
        for bj in 0..base.cols() / m {
            let blk = base.block(bi * m, bj * m, m, m);
            out.set_block(bi * m, bj * m, &frobenius_matrix_power(&blk, bc.q(), s));
        }
    }
    BlockCode { g: out, m }
}

/// Dimension of `C + C^(1) + ... + C^(i)`.
pub fn sum_of_powers_dim(bc: &BlockCode, i: usize) -> usize {
    let mut stacked = bc.g.clone();
    for s in 1..=i {
        stacked = stacked.vstack(&twisted_power(bc, s).g);
    }
    stacked.rank()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ExpandedGabidulinLike,
    RandomLike,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ExpandedGabidulinLike => "expanded-gabidulin",
            Verdict::RandomLike => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Distinguished {
    pub dim: usize,
    pub verdict: Verdict,
    pub dual_dim: usize,
    pub dual_verdict: Verdict,
}

fn verdict_for(bc: &BlockCode) -> (usize, Verdict) {
    let (m, n, k) = (bc.m, bc.n(), bc.k());
    let dim = sum_of_powers_dim(bc, 1);
    let bound = (k + 1) * m;
    let verdict = if dim <= bound && bound < (n * m).min(2 * k * m) {
        Verdict::ExpandedGabidulinLike
    } else {
        Verdict::RandomLike
    };
    (dim, verdict)
}

/// Compares `dim(C + C^(1))` with `(k+1)m`, on the code and on its dual.
pub fn distinguish(bc: &BlockCode) -> Result<Distinguished, AnalysisError> {
    if bc.q() < 3 {
        return Err(AnalysisError::Precondition("q >= 3"));
    }
    if bc.m < 2 {
        return Err(AnalysisError::Precondition("block size >= 2"));
    }
    if bc.k() == 0 || bc.k() >= bc.n() {
        return Err(AnalysisError::Precondition("0 < K < N"));
    }
    let (dim, verdict) = verdict_for(bc);
    let (dual_dim, dual_verdict) = verdict_for(&bc.dual()?);
    Ok(Distinguished {
        dim,
        verdict,
        dual_dim,
        dual_verdict,
    })
}

/// An expanded Gabidulin code with random support and basis, returned with
/// the parent code and the basis.
pub fn random_expanded_gabidulin<R: Rng + ?Sized>(
    q: u32,
    m: usize,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<(GabidulinCode, BasisPair, BlockCode), AnalysisError> {
    let field = make_ext_field(q, m)?;
    let g = random_independent(&field, n, rng);
    let parent = make_gabidulin(&field, &g, k)?;
    let basis = random_basis(&field, rng);
    let ec = expand_code(&parent, &basis);
    let bc = BlockCode::new(ec.generator().clone(), m)?;
    Ok((parent, basis, bc))
}

/// Expansion of a random `[n, k]` code over `F_{q^m}`.
pub fn random_expanded_code<R: Rng + ?Sized>(q: u32, m: usize, n: usize, k: usize, rng: &mut R) -> Result<BlockCode, AnalysisError> {
    let field = make_ext_field(q, m)?;
    let basis = random_basis(&field, rng);
    let g: MatrixQm = loop {
        let g = Matrix::random(field.clone(), k, n, rng);
        if g.rank() == k {
            break g;
        }
    };
    BlockCode::new(phi_matrix(&basis, &g, ExpandMode::Full), m)
}

/// A random `[nm, km]` code over `F_q`, read in blocks of `m`.
pub fn random_block_code<R: Rng + ?Sized>(q: u32, m: usize, n: usize, k: usize, rng: &mut R) -> Result<BlockCode, AnalysisError> {
    let fq = PrimeField::new(q)?;
    let g = loop {
        let g = Matrix::random(fq, k * m, n * m, rng);
        if g.rank() == k * m {
            break g;
        }
    };
    BlockCode::new(g, m)
}

// ---- MinRank reduction ----

/// `σ_n`: cuts `x` into `n` rows.
pub fn sigma(fq: PrimeField, x: &[u16], n: usize) -> Result<MatrixQ, AnalysisError> {
    if n == 0 || x.len() % n != 0 {
        return Err(AnalysisError::LengthMismatch {
            expected: (x.len() / n.max(1) + 1) * n,
            got: x.len(),
        });
    }
    Ok(Matrix::from_vec(fq, n, x.len() / n, x.to_vec()))
}

pub fn flatten(x: &MatrixQ) -> Vec<u16> {
    x.data().to_vec()
}

/// Find `a` with `rank(Σ a_i M_i) <= target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinRankInstance {
    pub matrices: Vec<MatrixQ>,
    pub target: usize,
}

impl MinRankInstance {
    pub fn new(matrices: Vec<MatrixQ>, target: usize) -> Result<Self, AnalysisError> {
        let Some(first) = matrices.first() else {
            return Err(AnalysisError::RaggedInstance);
        };
        let shape = (first.rows(), first.cols());
        if matrices.iter().any(|m| (m.rows(), m.cols()) != shape || m.field() != first.field()) {
            return Err(AnalysisError::RaggedInstance);
        }
        Ok(MinRankInstance { matrices, target })
    }

    pub fn combination(&self, a: &[u16]) -> MatrixQ {
        let first = &self.matrices[0];
        let fq = *first.field();
        let mut acc = vec![0u16; first.rows() * first.cols()];
        for (mi, c) in self.matrices.iter().zip(a) {
            if *c != 0 {
                fq.add_scaled(&mut acc, mi.data(), c);
            }
        }
        Matrix::from_vec(fq, first.rows(), first.cols(), acc)
    }

    pub fn is_solution(&self, a: &[u16]) -> bool {
        a.iter().any(|&c| c != 0) && self.combination(a).rank() <= self.target
    }
}

/// `M_0 = σ_n(y)`, `M_i = σ_n(row i of G_pub)`. The target is `t` for
/// Proposal I and `λt` for Proposal II.
pub fn minrank_from_ciphertext(pk: &PublicKey, ct: &Ciphertext) -> Result<MinRankInstance, AnalysisError> {
    let params = pk.params();
    let n_total = params.big_n();
    if ct.y.len() != n_total {
        return Err(AnalysisError::LengthMismatch {
            expected: n_total,
            got: ct.y.len(),
        });
    }
    let fq = params.base_field();
    let d = params.dims();
    let target = match params {
        SchemeParams::I(p) => p.t(),
        SchemeParams::II(p) => d.lambda * p.t(),
    };
    let g = pk.generator();
    let mut mats = Vec::with_capacity(g.rows() + 1);
    mats.push(sigma(fq, &ct.y, d.n)?);
    for r in 0..g.rows() {
        mats.push(sigma(fq, g.row(r), d.n)?);
    }
    MinRankInstance::new(mats, target)
}

/// Exhaustive search in odometer order, first coefficient least
/// significant. With `normalize_first` the coefficient of `M_0` is fixed
/// to 1.
pub fn minrank_bruteforce(inst: &MinRankInstance, normalize_first: bool) -> Result<Option<Vec<u16>>, AnalysisError> {
    let fq = *inst.matrices[0].field();
    let q = fq.q() as u128;
    let free = inst.matrices.len() - usize::from(normalize_first);
    let size = q.checked_pow(free as u32).unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(AnalysisError::TooLarge {
            size,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let offset = usize::from(normalize_first);
    let mut a = vec![0u16; inst.matrices.len()];
    if normalize_first {
        a[0] = 1;
    }
    for step in 0..size {
        if step > 0 {
            let mut i = offset;
            loop {
                a[i] += 1;
                if (a[i] as u128) < q {
                    break;
                }
                a[i] = 0;
                i += 1;
            }
        }
        if inst.is_solution(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

// ---- costs ----

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn log2_poly(m: usize, r: usize) -> f64 {
    3.0 * (m as f64).log2() + 3.0 * (r as f64).log2()
}

/// Combinatorial attack on an RSD instance `(q, m, n, k, t)`: guess a
/// `t'`-dimensional space containing the error support.
pub fn cost_rsd_combinatorial(q: u32, m: usize, n: usize, k: usize, t: usize) -> Result<f64, AnalysisError> {
    if !(k < n) || t > n - k {
        return Err(AnalysisError::BadCostParams("need k < n and t <= n - k"));
    }
    let (u, t_prime) = if n > m {
        (m, m - (k * m).div_ceil(n))
    } else {
        (n, n - k)
    };
    if t > t_prime {
        return Ok(f64::INFINITY);
    }
    let logp = subspace_prob_log2(u, t_prime, t, q).map_err(|_| AnalysisError::BadCostParams("subspace dimensions"))?;
    Ok(log2_poly(m, n - k) - logp)
}

/// Proposal I combinatorial cost for an explicit error rank `t`.
pub fn cost_proposal_i_with_t(p: &ParamsI, t: usize) -> f64 {
    let d = p.dims();
    let exponent = if d.n > d.lambda {
        // t (λ - m + ⌈km/n⌉), never negative since K >= 1
        t as i64 * (d.lambda as i64 - d.m as i64 + (d.k * d.m).div_ceil(d.n) as i64)
    } else {
        t as i64 * (d.n as i64 - (d.m * (d.n - d.k) / d.lambda) as i64)
    };
    log2_poly(d.m, d.n - d.k) + exponent.max(0) as f64 * (d.q as f64).log2()
}

pub fn cost_proposal_i(p: &ParamsI) -> f64 {
    cost_proposal_i_with_t(p, p.t())
}

/// The two Proposal II combinatorial costs: guessing the support of the
/// `n` blocks, and guessing the row space of the structured error matrix.
pub fn cost_proposal_ii_parts(p: &ParamsII, t: usize) -> (f64, f64) {
    let d = p.dims();
    let lq = (d.q as f64).log2();
    let poly = log2_poly(d.m, d.n - d.k);
    let support = poly + (d.lambda * t * d.k) as f64 * lq;
    let rows = t as i64 * (p.u_c() as i64 - ((d.n - d.k) / d.lambda) as i64);
    (support, poly + rows.max(0) as f64 * lq)
}

pub fn cost_proposal_ii_with_t(p: &ParamsII, t: usize) -> f64 {
    let (a, b) = cost_proposal_ii_parts(p, t);
    a.min(b)
}

pub fn cost_proposal_ii(p: &ParamsII) -> f64 {
    cost_proposal_ii_with_t(p, p.t())
}

/// Log2 costs of the three algebraic MinRank attacks; `None` where the
/// attack's condition fails.
///
/// `numMat` matrices of size `rows x cols`, target rank `r`.
pub fn cost_minrank_algebraic_rows(q: u32, rows: usize, cols: usize, num_mat: usize, r: usize) -> [Option<f64>; 3] {
    // symbols of the MinRank literature
    let (m, n, k, t) = (rows, cols, num_mat, r);
    let mut out = [None; 3];
    let a = BigUint::from(k) * binom(n, t);
    let b = BigUint::from(m) * binom(n, t + 1);
    if !a.is_zero() && a.clone() - BigUint::one() <= b {
        out[0] = Some(log2_big(&b) + (OMEGA - 1.0) * log2_big(&a));
    }
    let factor = ((k * (t + 1)) as f64).log2();
    let as_big = |x: &BigUint| BigInt::from_biguint(Sign::Plus, x.clone());
    // q > b, searching b < t + 2
    for b in 1..t + 2 {
        let ab = binom(n, t) * binom(k + b - 1, b);
        let mut bb = BigInt::zero();
        for i in 1..=b {
            let term = as_big(&(binom(n, t + i) * binom(m + i - 1, i) * binom(k + b - i - 1, b - i)));
            if i % 2 == 1 {
                bb += term;
            } else {
                bb -= term;
            }
        }
        if as_big(&ab) - BigInt::one() <= bb {
            if (q as usize) > b {
                out[1] = Some(factor + 2.0 * log2_big(&ab));
            }
            break;
        }
    }
    if q == 2 {
        let mut ab = BigUint::zero();
        let mut bb = BigInt::zero();
        for b in 1..t + 2 {
            ab += binom(n, t) * binom(k, b);
            let j = b;
            for i in 1..=j {
                let term = as_big(&(binom(n, t + i) * binom(m + i - 1, i) * binom(k, j - i)));
                if i % 2 == 1 {
                    bb += term;
                } else {
                    bb -= term;
                }
            }
            if as_big(&ab) - BigInt::one() <= bb {
                out[2] = Some(factor + 2.0 * log2_big(&ab));
                break;
            }
        }
    }
    out
}

/// Cheapest applicable algebraic attack, `+inf` when none applies.
pub fn cost_minrank_algebraic(q: u32, rows: usize, cols: usize, num_mat: usize, r: usize) -> f64 {
    cost_minrank_algebraic_rows(q, rows, cols, num_mat, r)
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min)
}

/// Public key size in bytes (`ceil(bits / 8)`) and information rate in
/// hundredths, rounded half up.
pub fn key_size_and_rate(params: &SchemeParams) -> (u64, u32) {
    let d = params.dims();
    let r = (d.n - d.k) as u128;
    let (m, n, k, l) = (d.m as u128, d.n as u128, d.k as u128, d.lambda as u128);
    let (elems, num, den) = match params {
        SchemeParams::I(_) => (m * r * (n * l - m * r), n * l - m * r, n * l),
        SchemeParams::II(_) => (r * k * m * m, k, n),
    };
    let bits = elems as f64 * (d.q as f64).log2();
    let bytes = (bits / 8.0).ceil() as u64;
    let hundredths = ((200 * num + den) / (2 * den)) as u32;
    (bytes, hundredths)
}

pub const ATTACK_NAMES: [&str; 5] = ["comb_a", "comb_b", "minrank_linear", "minrank_b", "minrank_b_q2"];

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub params: SchemeParams,
    pub t: usize,
    /// log2 costs in the order of [`ATTACK_NAMES`]; `None` = not applicable
    pub attacks: [Option<f64>; 5],
    pub security_bits: u32,
    pub key_bytes: u64,
    pub rate_hundredths: u32,
}

impl CostReport {
    pub fn min_cost(&self) -> f64 {
        self.attacks.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn csv_header() -> String {
        let mut s = String::from("q,m,n,k,lambda,proposal,keybytes,rate,security_bits");
        for name in ATTACK_NAMES {
            s.push(',');
            s.push_str(name);
        }
        s
    }

    pub fn csv_row(&self) -> String {
        let d = self.params.dims();
        let mut s = format!(
            "{},{},{},{},{},{},{},{},{}",
            d.q,
            d.m,
            d.n,
            d.k,
            d.lambda,
            self.params.proposal(),
            self.key_bytes,
            format_rate(self.rate_hundredths),
            self.security_bits
        );
        for c in &self.attacks {
            s.push(',');
            s.push_str(&format_cost(*c));
        }
        s
    }
}

pub fn format_rate(hundredths: u32) -> String {
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

fn format_cost(c: Option<f64>) -> String {
    match c {
        None => "NA".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.2}"),
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.params.dims();
        writeln!(
            f,
            "proposal {} (q={}, m={}, n={}, k={}, lambda={}), t = {}",
            self.params.proposal(),
            d.q,
            d.m,
            d.n,
            d.k,
            d.lambda,
            self.t
        )?;
        for (name, c) in ATTACK_NAMES.iter().zip(&self.attacks) {
            writeln!(f, "  {name:<16} log2 cost {}", format_cost(*c))?;
        }
        writeln!(f, "  security bits    {}", self.security_bits)?;
        writeln!(f, "  public key bytes {}", self.key_bytes)?;
        write!(f, "  information rate {}", format_rate(self.rate_hundredths))
    }
}

/// Cost report for an explicit error rank `t` (the scheme's own `t` in
/// [`security_report`]).
pub fn security_report_with_t(params: &SchemeParams, t: usize) -> CostReport {
    let d = params.dims();
    let (comb_a, comb_b, alg) = match params {
        SchemeParams::I(p) => {
            let alg = cost_minrank_algebraic_rows(d.q, d.n, d.lambda, p.big_k() + 1, t);
            (Some(cost_proposal_i_with_t(p, t)), None, alg)
        }
        SchemeParams::II(p) => {
            let (a, b) = cost_proposal_ii_parts(p, t);
            let alg = cost_minrank_algebraic_rows(d.q, d.n, d.m, p.big_k() + 1, d.lambda * t);
            (Some(a), Some(b), alg)
        }
    };
    let attacks = [comb_a, comb_b, alg[0], alg[1], alg[2]];
    let (key_bytes, rate_hundredths) = key_size_and_rate(params);
    let mut report = CostReport {
        params: *params,
        t,
        attacks,
        security_bits: 0,
        key_bytes,
        rate_hundredths,
    };
    let min = report.min_cost();
    report.security_bits = if min.is_finite() { min.floor() as u32 } else { u32::MAX };
    report
}

pub fn security_report(params: &SchemeParams) -> CostReport {
    security_report_with_t(params, params.t())
}

/// A row of the published parameter tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuggestedRow {
    pub proposal: u8,
    pub dims: Dims,
    pub key_bytes: u64,
    pub rate_hundredths: u32,
    pub target_bits: u32,
}

impl SuggestedRow {
    pub fn params(&self) -> SchemeParams {
        let d = self.dims;
        SchemeParams::new(self.proposal, d.q, d.m, d.n, d.k, d.lambda).expect("published parameters are valid")
    }
}

const fn row(proposal: u8, q: u32, m: usize, n: usize, k: usize, lambda: usize, key_bytes: u64, rate_hundredths: u32, target_bits: u32) -> SuggestedRow {
    SuggestedRow {
        proposal,
        dims: Dims { q, m, n, k, lambda },
        key_bytes,
        rate_hundredths,
        target_bits,
    }
}

/// The published parameter sets with their key sizes, rates and security
/// targets, as printed.
pub const SUGGESTED_PARAMETERS: [SuggestedRow; 18] = [
    row(1, 2, 31, 31, 19, 29, 24506, 59, 128),
    row(1, 2, 38, 38, 20, 36, 58482, 50, 192),
    row(1, 2, 45, 45, 25, 43, 116438, 53, 256),
    row(2, 2, 56, 56, 28, 2, 307328, 49, 128),
    row(2, 2, 72, 72, 32, 2, 829440, 44, 192),
    row(2, 2, 84, 84, 40, 2, 1552320, 48, 256),
    row(1, 7, 20, 20, 12, 18, 11230, 56, 128),
    row(1, 7, 24, 24, 14, 22, 24256, 55, 192),
    row(1, 7, 28, 28, 16, 26, 46221, 54, 256),
    row(2, 7, 35, 35, 23, 2, 118646, 66, 128),
    row(2, 7, 45, 45, 29, 2, 329724, 64, 192),
    row(2, 7, 51, 51, 31, 2, 565900, 61, 256),
    row(1, 13, 18, 18, 12, 16, 8993, 63, 128),
    row(1, 13, 21, 21, 11, 19, 18359, 47, 192),
    row(1, 13, 25, 25, 15, 23, 37583, 57, 256),
    row(2, 13, 29, 29, 17, 2, 79358, 59, 128),
    row(2, 13, 37, 37, 21, 2, 212768, 57, 192),
    row(2, 13, 43, 43, 23, 2, 393422, 53, 256),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabidulin::moore_matrix;
    use crate::pke::{encrypt, keygen};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), BigUint::from(10u32));
        assert_eq!(binom(5, 6), BigUint::zero());
        assert_eq!(binom(84, 42), binom(84, 42));
        let s: BigUint = (0..=20).map(|i| binom(20, i)).sum();
        assert_eq!(s, BigUint::from(1u32 << 20));
    }

    #[test]
    fn combinations_in_lex_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn information_set_cases() {
        let fq = PrimeField::new(3).unwrap();
        let (_, _, bc) = random_expanded_gabidulin(3, 4, 4, 2, &mut rng(1)).unwrap();
        assert!(block_information_set(&bc).is_some());
        // systematic generator: first k blocks
        let sys = bc.generator().rref().matrix;
        let bc2 = BlockCode::new(sys, 4).unwrap();
        assert_eq!(block_information_set(&bc2), Some(vec![0, 1]));
        // a zero column in every block
        let mut g = Matrix::random(fq, 4, 4, &mut rng(2));
        for r in 0..4 {
            g.set(r, 0, 0);
            g.set(r, 2, 0);
        }
        let bc3 = BlockCode::new(g, 2).unwrap();
        assert_eq!(block_information_set(&bc3), None);
        assert!(BlockCode::new(Matrix::zeros(fq, 3, 8), 2).is_err());
    }

    #[test]
    fn matrix_frobenius_power_matches_field_frobenius() {
        let f = make_ext_field(5, 3).unwrap();
        let basis = random_basis(&f, &mut rng(3));
        for _ in 0..20 {
            let a = f.random(&mut rng(4));
            let lhs = frobenius_matrix_power(&crate::gf::phi_elem_matrix(&basis, &a), 5, 2);
            let rhs = crate::gf::phi_elem_matrix(&basis, &f.frobenius(&a, 2));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn twisted_power_of_expanded_code_is_expanded_frobenius_code() {
        for (q, seed) in [(3u32, 5u64), (5, 6)] {
            for s in [1usize, 2] {
                let (parent, basis, bc) = random_expanded_gabidulin(q, 4, 4, 2, &mut rng(seed + s as u64)).unwrap();
                let f = parent.field();
                let gs: Vec<_> = parent.g().iter().map(|x| f.frobenius(x, s as i64)).collect();
                let expect = phi_matrix(&basis, &moore_matrix(f, &gs, 2), ExpandMode::Full);
                assert!(twisted_power(&bc, s).generator().same_row_space(&expect));
                // independent of the generator used
                let mixed = Matrix::random(*bc.generator().field(), 8, 8, &mut rng(7));
                if mixed.rank() == 8 {
                    let other = BlockCode::new(mixed.mul(bc.generator()), 4).unwrap();
                    assert!(twisted_power(&other, s).generator().same_row_space(&expect));
                }
            }
        }
    }

    #[test]
    fn twisted_power_zero_is_identity() {
        let (_, _, bc) = random_expanded_gabidulin(3, 4, 4, 2, &mut rng(8)).unwrap();
        assert!(twisted_power(&bc, 0).generator().same_row_space(bc.generator()));
    }

    #[test]
    fn sum_of_powers_dimensions() {
        let mut r = rng(9);
        let (_, _, bc) = random_expanded_gabidulin(3, 4, 4, 2, &mut r).unwrap();
        assert_eq!(sum_of_powers_dim(&bc, 1), 12);
        assert_eq!(sum_of_powers_dim(&bc, 2), 16);
        let rnd = random_expanded_code(3, 4, 4, 2, &mut r).unwrap();
        assert_eq!(sum_of_powers_dim(&rnd, 1), 16);
        // a plain random code only has to exceed the (k+1)m of the structured case
        let plain = random_block_code(3, 4, 4, 2, &mut r).unwrap();
        assert!(sum_of_powers_dim(&plain, 1) > 12);
    }

    #[test]
    fn distinguisher_verdicts() {
        let mut r = rng(10);
        let (_, _, bc) = random_expanded_gabidulin(3, 4, 4, 2, &mut r).unwrap();
        let v = distinguish(&bc).unwrap();
        assert_eq!((v.dim, v.verdict), (12, Verdict::ExpandedGabidulinLike));
        assert_eq!(v.dual_verdict, Verdict::ExpandedGabidulinLike);
        let rnd = random_block_code(3, 4, 4, 2, &mut r).unwrap();
        assert_eq!(distinguish(&rnd).unwrap().verdict, Verdict::RandomLike);
        let (_, _, b2) = random_expanded_gabidulin(2, 4, 4, 2, &mut r).unwrap();
        assert!(matches!(distinguish(&b2), Err(AnalysisError::Precondition(_))));
    }

    #[test]
    fn sigma_round_trip() {
        let fq = PrimeField::new(5).unwrap();
        let x: Vec<u16> = (0..12).map(|i| (i % 5) as u16).collect();
        let s = sigma(fq, &x, 3).unwrap();
        assert_eq!((s.rows(), s.cols()), (3, 4));
        assert_eq!(flatten(&s), x);
        assert!(sigma(fq, &[0; 12], 4).unwrap().is_zero());
        assert!(sigma(fq, &x, 5).is_err());
    }

    #[test]
    fn minrank_instance_shapes() {
        let mut r = rng(11);
        let params = SchemeParams::new(1, 2, 8, 8, 4, 7).unwrap();
        let (pk, _) = keygen(&params, &mut r).unwrap();
        let x = vec![0u16; 24];
        let ct = encrypt(&pk, &x, &mut r).unwrap();
        let inst = minrank_from_ciphertext(&pk, &ct).unwrap();
        assert_eq!(inst.matrices.len(), 25);
        assert_eq!((inst.matrices[0].rows(), inst.matrices[0].cols(), inst.target), (8, 7, 2));
        let mut a = vec![0u16; 25];
        a[0] = 1;
        assert!(inst.is_solution(&a));

        let params = SchemeParams::new(2, 2, 8, 8, 4, 2).unwrap();
        let (pk, _) = keygen(&params, &mut r).unwrap();
        let x: Vec<u16> = (0..32).map(|i| (i % 2) as u16).collect();
        let ct = encrypt(&pk, &x, &mut r).unwrap();
        let inst = minrank_from_ciphertext(&pk, &ct).unwrap();
        assert_eq!(inst.matrices.len(), 33);
        assert_eq!((inst.matrices[0].rows(), inst.matrices[0].cols(), inst.target), (8, 8, 2));
        let mut a = vec![1u16];
        a.extend(x.iter().map(|&v| (2 - v) % 2));
        assert!(inst.is_solution(&a));
    }

    #[test]
    fn bruteforce_trivial_cases() {
        let fq = PrimeField::new(3).unwrap();
        let inst = MinRankInstance::new(vec![Matrix::zeros(fq, 2, 2)], 0).unwrap();
        assert_eq!(minrank_bruteforce(&inst, false).unwrap(), Some(vec![1]));
        let mats = vec![Matrix::identity(fq, 2), Matrix::from_rows(fq, &[vec![0, 1], vec![1, 0]])];
        let inst = MinRankInstance::new(mats, 0).unwrap();
        assert_eq!(minrank_bruteforce(&inst, false).unwrap(), None);
        let big = MinRankInstance::new(vec![Matrix::zeros(fq, 1, 1); 20], 0).unwrap();
        assert!(matches!(minrank_bruteforce(&big, true), Err(AnalysisError::TooLarge { .. })));
        assert!(MinRankInstance::new(vec![Matrix::zeros(fq, 1, 1), Matrix::zeros(fq, 1, 2)], 0).is_err());
    }

    #[test]
    fn bruteforce_recovers_plaintext() {
        let mut r = rng(12);
        let params = SchemeParams::new(1, 2, 4, 4, 2, 3).unwrap();
        let (pk, _) = keygen(&params, &mut r).unwrap();
        for _ in 0..5 {
            let x: Vec<u16> = (0..4).map(|_| r.gen_range(0..2)).collect();
            let ct = encrypt(&pk, &x, &mut r).unwrap();
            let inst = minrank_from_ciphertext(&pk, &ct).unwrap();
            let a = minrank_bruteforce(&inst, true).unwrap().unwrap();
            let rec: Vec<u16> = a[1..].iter().map(|&v| (2 - v) % 2).collect();
            assert_eq!(rec, x);
        }
    }

    #[test]
    fn rsd_cost_cases() {
        // t = 0: only the polynomial factor
        let c = cost_rsd_combinatorial(2, 10, 8, 4, 0).unwrap();
        assert!((c - (3.0 * 10f64.log2() + 3.0 * 4f64.log2())).abs() < 1e-9);
        let c = cost_rsd_combinatorial(2, 31, 31, 19, 6).unwrap();
        let poly = 3.0 * 31f64.log2() + 3.0 * 12f64.log2();
        assert!((c - poly - 114.0).abs() < 1.0, "{c}");
        for (q, m, n, k, t) in [(2u32, 20usize, 24usize, 12usize, 3usize), (3, 12, 12, 6, 2), (7, 9, 9, 3, 2)] {
            let c = cost_rsd_combinatorial(q, m, n, k, t).unwrap();
            let (u, tp) = if n > m { (m, m - (k * m).div_ceil(n)) } else { (n, n - k) };
            let asym = (t * (u - tp)) as f64 * (q as f64).log2();
            assert!((c - log2_poly(m, n - k) - asym).abs() < 1.0);
        }
        assert!(cost_rsd_combinatorial(2, 8, 8, 8, 1).is_err());
    }

    #[test]
    fn proposal_costs() {
        let p = ParamsI::new(13, 18, 18, 12, 16).unwrap();
        let expect = 30.0 * 13f64.log2() + (18f64.powi(3) * 216.0).log2();
        assert!((cost_proposal_i(&p) - expect).abs() < 1e-9);
        let p = ParamsII::new(13, 29, 29, 17, 2).unwrap();
        let expect = 27.0 * 13f64.log2() + (29f64.powi(3) * 1728.0).log2();
        assert!((cost_proposal_ii(&p) - expect).abs() < 1e-9);
        let p = ParamsI::new(2, 31, 31, 19, 29).unwrap();
        assert!((cost_proposal_i(&p) - 127.6).abs() < 0.1);
    }

    #[test]
    fn algebraic_rows() {
        // rank 0: linear solving
        let rows = cost_minrank_algebraic_rows(2, 4, 4, 3, 0);
        assert!(rows[0].is_some());
        let small = cost_minrank_algebraic(2, 8, 8, 33, 1);
        let larger = cost_minrank_algebraic(2, 8, 8, 33, 2);
        assert!(larger.is_finite());
        assert!(small < larger);
        // A - 1 > B: the first attack does not apply
        assert!(cost_minrank_algebraic_rows(7, 35, 35, 806, 6)[0].is_none());
        // b = 3 for this shape over F_2
        let r = cost_minrank_algebraic_rows(2, 8, 8, 33, 2);
        let ab = 168476f64;
        assert!((r[2].unwrap() - ((33.0 * 3.0f64).log2() + 2.0 * ab.log2())).abs() < 1e-9);
        assert!(r[1].is_none());
    }

    #[test]
    fn key_sizes_match_examples() {
        let p = SchemeParams::new(1, 13, 25, 25, 15, 23).unwrap();
        assert_eq!(key_size_and_rate(&p), (37583, 57));
        let p = SchemeParams::new(2, 7, 35, 35, 23, 2).unwrap();
        assert_eq!(key_size_and_rate(&p), (118646, 66));
        let p = SchemeParams::new(1, 2, 31, 31, 19, 29).unwrap();
        assert_eq!(key_size_and_rate(&p), (24506, 59));
        assert_eq!(format_rate(5), "0.05");
    }

    #[test]
    fn report_rendering() {
        let rep = security_report(&SUGGESTED_PARAMETERS[12].params());
        assert_eq!(rep.key_bytes, 8993);
        assert!(rep.to_string().contains("security bits"));
        let line = rep.csv_row();
        assert_eq!(line.split(',').count(), CostReport::csv_header().split(',').count());
        assert!(line.starts_with("13,18,18,12,16,1,8993,0.63,"));
    }

    #[test]
    fn security_is_monotone_in_t() {
        for row in SUGGESTED_PARAMETERS {
            let p = row.params();
            let mut prev = u32::MAX;
            for t in (1..=p.t()).rev() {
                let s = security_report_with_t(&p, t).security_bits;
                assert!(s <= prev || prev == u32::MAX || t == p.t());
                prev = s;
            }
            let full = security_report_with_t(&p, p.t()).security_bits;
            let less = security_report_with_t(&p, p.t() - 1).security_bits;
            assert!(less <= full);
        }
    }
}
