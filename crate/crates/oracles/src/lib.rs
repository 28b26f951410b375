//! Deliberately naive reference computations. Nothing here is fast, and
//! nothing here shares code with `pv-core`.

/// Rank over `F_p` by textbook row reduction with a modular inverse per pivot.
pub fn naive_rank(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = inverse(m[rank][c], p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    let sub = f * m[rank][k] % p;
                    m[r][k] = (m[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn inverse(a: u64, p: u64) -> u64 {
    // extended Euclid
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

fn falling(a: u64, k: u64, p: u64) -> u64 {
    (0..k).fold(1, |acc, t| acc * ((a - t) % p) % p)
}

fn pow(b: u64, e: u64, p: u64) -> u64 {
    (0..e).fold(1 % p, |acc, _| acc * (b % p) % p)
}

/// Exponents `(e_s, e_t)` of all monomials of total degree at most `d`.
pub fn plane_monomials(d: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a in 0..=d {
        for b in 0..=d - a {
            out.push((a, b));
        }
    }
    out
}

/// Exponents `(e, k)` with `k <= a`, `e <= b - n k`, the chart sections of
/// `aC + bF` on `F_n`.
pub fn hirzebruch_monomials(n: u64, a: u64, b: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for k in 0..=a {
        if n * k > b {
            continue;
        }
        for e in 0..=b - n * k {
            out.push((e, k));
        }
    }
    out
}

/// Dimension of the span of `monomials` vanishing to order `m_i` at each
/// point, imposing every formal partial derivative of order `< m_i`.
pub fn derivative_h0(monomials: &[(u64, u64)], points: &[(u64, u64)], mults: &[u64], p: u64) -> usize {
    let mut rows = Vec::new();
    for (&(s0, t0), &m) in points.iter().zip(mults) {
        for i in 0..m {
            for j in 0..m - i {
                let row = monomials
                    .iter()
                    .map(|&(a, b)| {
                        if a < i || b < j {
                            0
                        } else {
                            falling(a, i, p) * falling(b, j, p) % p * pow(s0, a - i, p) % p * pow(t0, b - j, p) % p
                        }
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return monomials.len();
    }
    monomials.len() - naive_rank(&rows, p)
}

/// Minimum over every nonempty increasing chain, by enumerating subsets.
/// `None` stands for infinity.
pub fn exhaustive_chain_min(
    n: usize,
    forward: impl Fn(usize, usize) -> Option<i64>,
    closer: impl Fn(usize, usize) -> Option<i64>,
) -> Option<i64> {
    assert!(n < 30);
    let mut best: Option<i64> = None;
    for mask in 1u32..(1 << n) {
        let chain: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let mut total = Some(0i64);
        for w in chain.windows(2) {
            total = total.zip(forward(w[0], w[1])).map(|(a, b)| a + b - 1);
        }
        total = total.zip(closer(chain[0], *chain.last().unwrap())).map(|(a, b)| a + b);
        if let Some(v) = total {
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best
}
