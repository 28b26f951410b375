//! Exact rank of dense matrices over prime fields `F_p` with `p < 2^32`.
//!
//! The working copy is held as `f64` so that the trailing update of each
//! elimination panel is a plain floating-point GEMM. Every value that flows
//! through the GEMM is an integer of magnitude below `2^53`, so the products
//! and sums are exact and modular reduction only happens once per panel.
//! Primes too large for that bound use a slower all-integer path.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Largest integer magnitude an `f64` carries exactly.
const EXACT_F64: f64 = 9_007_199_254_740_992.0; // 2^53

/// Panel width used when the prime allows it.
const DEFAULT_PANEL: usize = 192;

/// Default working-memory budget for one elimination.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

const FPMX_MAGIC: &[u8; 4] = b"FPMX";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("{0} is not a prime below 2^32")]
    NotPrime(u64),
    #[error("entry {value} at ({row}, {col}) is not reduced modulo {prime}")]
    UnreducedEntry { row: usize, col: usize, value: u32, prime: u32 },
    #[error("matrix data has {got} entries, expected {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("elimination needs {needed} bytes, over the budget of {budget} bytes")]
    MemoryBudgetExceeded { needed: u64, budget: u64 },
    #[error("malformed FPMX dump: {0}")]
    BadDump(&'static str),
}

/// Dense row-major matrix over `F_p`, entries stored as reduced residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrixFp {
    prime: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl DenseMatrixFp {
    pub fn new(prime: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self, RankError> {
        check_prime(prime)?;
        if data.len() != rows * cols {
            return Err(RankError::ShapeMismatch { rows, cols, got: data.len() });
        }
        if let Some(pos) = data.iter().position(|&x| x >= prime) {
            return Err(RankError::UnreducedEntry {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
                value: data[pos],
                prime,
            });
        }
        Ok(Self { prime, rows, cols, data })
    }

    pub fn zeros(prime: u32, rows: usize, cols: usize) -> Result<Self, RankError> {
        check_prime(prime)?;
        Ok(Self { prime, rows, cols, data: vec![0; rows * cols] })
    }

    pub fn identity(prime: u32, n: usize) -> Result<Self, RankError> {
        let mut m = Self::zeros(prime, n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        Ok(m)
    }

    /// Builds a matrix from a closure returning arbitrary residues; values are
    /// reduced modulo `prime`.
    pub fn from_fn(
        prime: u32,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u64,
    ) -> Result<Self, RankError> {
        check_prime(prime)?;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push((f(i, j) % prime as u64) as u32);
            }
        }
        Ok(Self { prime, rows, cols, data })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        self.data[i * self.cols + j] = value % self.prime;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self { prime: self.prime, rows: self.cols, cols: self.rows, data }
    }

    /// Matrix product over `F_p`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        assert_eq!(self.prime, rhs.prime, "matrices over different fields");
        let p = self.prime as u64;
        let mut data = vec![0u32; self.rows * rhs.cols];
        for i in 0..self.rows {
            let mut acc = vec![0u64; rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(rhs.row(k)) {
                    *slot = (*slot + a * b as u64) % p;
                }
            }
            for (d, a) in data[i * rhs.cols..(i + 1) * rhs.cols].iter_mut().zip(acc) {
                *d = a as u32;
            }
        }
        Self { prime: self.prime, rows: self.rows, cols: rhs.cols, data }
    }

    /// Serializes as `FPMX` followed by little-endian `u32` prime, rows,
    /// cols and the row-major entries.
    pub fn to_fpmx(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        out.extend_from_slice(FPMX_MAGIC);
        out.extend_from_slice(&self.prime.to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_fpmx(bytes: &[u8]) -> Result<Self, RankError> {
        if bytes.len() < 16 || &bytes[..4] != FPMX_MAGIC {
            return Err(RankError::BadDump("missing FPMX header"));
        }
        let word = |k: usize| u32::from_le_bytes([bytes[k], bytes[k + 1], bytes[k + 2], bytes[k + 3]]);
        let (prime, rows, cols) = (word(4), word(8) as usize, word(12) as usize);
        let body = &bytes[16..];
        if body.len() != 4 * rows * cols {
            return Err(RankError::BadDump("payload length does not match header"));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::new(prime, rows, cols, data)
    }
}

/// Knobs for a single elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOptions {
    /// Worker threads for the trailing updates; `0` means the ambient rayon
    /// pool. Ignored without the `std` feature.
    pub threads: usize,
    pub memory_budget: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { threads: 0, memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

pub fn rank_mod_p(m: &DenseMatrixFp) -> Result<usize, RankError> {
    rank_with(m, &RankOptions::default())
}

pub fn kernel_dim(m: &DenseMatrixFp) -> Result<usize, RankError> {
    Ok(m.cols - rank_mod_p(m)?)
}

pub fn kernel_dim_with(m: &DenseMatrixFp, opts: &RankOptions) -> Result<usize, RankError> {
    Ok(m.cols - rank_with(m, opts)?)
}

/// Bytes of working memory an elimination of `rows x cols` needs.
pub fn working_bytes(rows: usize, cols: usize) -> u64 {
    let cells = rows as u64 * cols as u64;
    cells * 8 + rows as u64 * DEFAULT_PANEL as u64 * 8
}

pub fn rank_with(m: &DenseMatrixFp, opts: &RankOptions) -> Result<usize, RankError> {
    if m.rows == 0 || m.cols == 0 {
        return Ok(0);
    }
    let needed = working_bytes(m.rows, m.cols);
    if needed > opts.memory_budget {
        return Err(RankError::MemoryBudgetExceeded { needed, budget: opts.memory_budget });
    }
    let panel = panel_width(m.prime);
    if panel == 0 {
        return Ok(rank_integer(m));
    }
    #[cfg(feature = "std")]
    {
        if opts.threads != 1 {
            let run = || rank_blocked(m, panel, true);
            if opts.threads == 0 {
                return Ok(run());
            }
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build() {
                return Ok(pool.install(run));
            }
        }
    }
    Ok(rank_blocked(m, panel, false))
}

/// Widest panel whose delayed accumulation stays exactly representable.
fn panel_width(prime: u32) -> usize {
    let p = prime as f64;
    let sq = (p - 1.0) * (p - 1.0);
    if sq == 0.0 {
        return DEFAULT_PANEL;
    }
    let fit = (EXACT_F64 - 2.0 * p) / sq;
    if fit < 1.0 {
        0
    } else {
        (fit as usize).min(DEFAULT_PANEL)
    }
}

#[derive(Clone, Copy)]
struct Modulus {
    p: f64,
    inv: f64,
    pi: u64,
}

impl Modulus {
    fn new(prime: u32) -> Self {
        Self { p: prime as f64, inv: 1.0 / prime as f64, pi: prime as u64 }
    }

    /// Reduces an exact integer `|x| < 2^53` into `[0, p)`.
    #[inline(always)]
    fn reduce(self, x: f64) -> f64 {
        // round-half-even via the 1.5 * 2^52 trick; no libm call
        const MAGIC: f64 = 6_755_399_441_055_744.0;
        let q = (x * self.inv - 0.5 + MAGIC) - MAGIC;
        let mut r = x - q * self.p;
        if r < 0.0 {
            r += self.p;
        }
        if r >= self.p {
            r -= self.p;
        }
        r
    }

    fn reduce_slice(self, xs: &mut [f64]) {
        for x in xs {
            *x = self.reduce(*x);
        }
    }

    fn mul(self, a: f64, b: f64) -> f64 {
        ((a as u64 * b as u64) % self.pi) as f64
    }

    fn inverse(self, a: f64) -> f64 {
        pow_mod(a as u64, self.pi - 2, self.pi) as f64
    }
}

fn rank_blocked(m: &DenseMatrixFp, panel: usize, parallel: bool) -> usize {
    let (rows, n) = (m.rows, m.cols);
    let md = Modulus::new(m.prime);
    let mut w: Vec<f64> = m.data.iter().map(|&x| x as f64).collect();
    let mut lbuf: Vec<f64> = Vec::new();
    let mut piv_cols: Vec<usize> = Vec::with_capacity(panel);

    let mut r = 0;
    let mut c0 = 0;
    while c0 < n && r < rows {
        let cend = (c0 + panel).min(n);
        piv_cols.clear();
        let mut pr = r;

        for j in c0..cend {
            if pr == rows {
                break;
            }
            let mut found = None;
            for i in pr..rows {
                let x = md.reduce(w[i * n + j]);
                w[i * n + j] = x;
                if found.is_none() && x != 0.0 {
                    found = Some(i);
                }
            }
            let Some(i) = found else { continue };
            swap_rows(&mut w, n, i, pr);
            md.reduce_slice(&mut w[pr * n + j..pr * n + cend]);
            let inv = md.inverse(w[pr * n + j]);

            let (top, below) = w.split_at_mut((pr + 1) * n);
            let prow = &top[pr * n + j + 1..pr * n + cend];
            eliminate_panel(below, n, j, cend, prow, inv, md, parallel);

            piv_cols.push(j);
            pr += 1;
        }

        let k = piv_cols.len();
        if k > 0 && cend < n {
            let tail = n - cend;
            // U12 = L11^{-1} A12, computed in place on the pivot rows
            for t in 1..k {
                let (done, rest) = w.split_at_mut((r + t) * n);
                let row = &mut rest[..n];
                for (s, &pc) in piv_cols.iter().enumerate().take(t) {
                    let l = row[pc];
                    if l == 0.0 {
                        continue;
                    }
                    let src = &done[(r + s) * n + cend..(r + s) * n + n];
                    for (x, &u) in row[cend..].iter_mut().zip(src) {
                        *x -= l * u;
                    }
                }
                md.reduce_slice(&mut row[cend..]);
            }

            let below_rows = rows - r - k;
            if below_rows > 0 {
                lbuf.clear();
                lbuf.reserve(below_rows * k);
                for i in r + k..rows {
                    for &pc in &piv_cols {
                        lbuf.push(w[i * n + pc]);
                    }
                }
                let (top, bottom) = w.split_at_mut((r + k) * n);
                let upper = &top[r * n..];
                trailing_update(bottom, n, cend, tail, upper, &lbuf, k, md, parallel);
            }
        }

        r += k;
        c0 = cend;
    }
    r
}

fn swap_rows(w: &mut [f64], n: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (first, second) = w.split_at_mut(hi * n);
    first[lo * n..lo * n + n].swap_with_slice(&mut second[..n]);
}

/// Eliminates column `j` from every row of `below`, storing the multiplier
/// in place of the eliminated entry and updating the panel columns
/// `j+1..cend` without reduction.
#[allow(clippy::too_many_arguments)]
fn eliminate_panel(below: &mut [f64], n: usize, j: usize, cend: usize, prow: &[f64], inv: f64, md: Modulus, parallel: bool) {
    let body = |row: &mut [f64]| {
        let x = row[j];
        if x == 0.0 {
            return;
        }
        let f = md.mul(x, inv);
        row[j] = f;
        for (y, &u) in row[j + 1..cend].iter_mut().zip(prow) {
            *y -= f * u;
        }
    };
    #[cfg(feature = "std")]
    if parallel && below.len() >= 64 * n {
        use rayon::prelude::*;
        below.par_chunks_mut(n).for_each(body);
        return;
    }
    let _ = parallel;
    below.chunks_mut(n).for_each(body);
}

/// `C <- (C - L * U) mod p` on the trailing block, where `C` is the column
/// range `cend..cend+tail` of every row in `bottom`.
#[allow(clippy::too_many_arguments)]
fn trailing_update(
    bottom: &mut [f64],
    n: usize,
    cend: usize,
    tail: usize,
    upper: &[f64],
    lbuf: &[f64],
    k: usize,
    md: Modulus,
    parallel: bool,
) {
    let block = |c_rows: &mut [f64], l_rows: &[f64]| {
        let m_rows = l_rows.len() / k;
        if m_rows == 0 {
            return;
        }
        // SAFETY: all pointers address live, disjoint buffers; the C block
        // spans m_rows rows of stride n starting at column cend, the U block
        // k rows of stride n starting at column cend, and L is m_rows x k
        // dense row-major.
        unsafe {
            matrixmultiply::dgemm(
                m_rows,
                k,
                tail,
                -1.0,
                l_rows.as_ptr(),
                k as isize,
                1,
                upper.as_ptr().add(cend),
                n as isize,
                1,
                1.0,
                c_rows.as_mut_ptr().add(cend),
                n as isize,
                1,
            );
        }
        for row in c_rows.chunks_mut(n) {
            md.reduce_slice(&mut row[cend..cend + tail]);
        }
    };
    #[cfg(feature = "std")]
    if parallel {
        use rayon::prelude::*;
        let threads = rayon::current_num_threads().max(1);
        let total = bottom.len() / n;
        let chunk = total.div_ceil(threads * 4).max(16);
        bottom
            .par_chunks_mut(chunk * n)
            .zip(lbuf.par_chunks(chunk * k))
            .for_each(|(c, l)| block(c, l));
        return;
    }
    let _ = parallel;
    block(bottom, lbuf);
}

/// Row reduction with every operation reduced immediately in `u64`; used when
/// the prime is too large for exact delayed accumulation in `f64`.
fn rank_integer(m: &DenseMatrixFp) -> usize {
    let p = m.prime as u64;
    let n = m.cols;
    let mut w: Vec<u64> = m.data.iter().map(|&x| x as u64).collect();
    let mut r = 0;
    for j in 0..n {
        if r == m.rows {
            break;
        }
        let Some(i) = (r..m.rows).find(|&i| w[i * n + j] != 0) else { continue };
        if i != r {
            for c in 0..n {
                w.swap(i * n + c, r * n + c);
            }
        }
        let inv = pow_mod(w[r * n + j], p - 2, p);
        for i in r + 1..m.rows {
            let x = w[i * n + j];
            if x == 0 {
                continue;
            }
            let f = mul_mod(x, inv, p);
            for c in j..n {
                let u = w[r * n + c];
                w[i * n + c] = (w[i * n + c] + mul_mod(f, p - u, p)) % p;
            }
        }
        r += 1;
    }
    r
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 32-bit inputs.
pub fn is_prime_u32(n: u32) -> bool {
    let n = n as u64;
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        if a % n == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn check_prime(p: u32) -> Result<(), RankError> {
    if is_prime_u32(p) {
        Ok(())
    } else {
        Err(RankError::NotPrime(p as u64))
    }
}
