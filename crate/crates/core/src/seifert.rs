//! Integer matrices, minor-gcd profiles and unimodular congruence.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeifertError {
    #[error("minor size {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("matrix sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("transform is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("witness search supports n <= 3 and entry bound <= 2 (got n={n}, bound={bound})")]
    SearchTooLarge { n: usize, bound: i64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A dense square matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(n: usize) -> Self {
        IntMatrix {
            n,
            entries: vec![BigInt::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = BigInt::one();
        }
        m
    }

    /// Panics if the rows are not square.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix rows must have length {n}");
            entries.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: impl Into<BigInt>) {
        self.entries[i * self.n + j] = v.into();
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|i| self.get(i % n, i / n).clone()).collect();
        IntMatrix { n, entries }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, SeifertError> {
        if self.n != other.n {
            return Err(SeifertError::SizeMismatch(self.n, other.n));
        }
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> BigInt {
        let idx: Vec<usize> = (0..self.n).collect();
        self.minor(&idx, &idx)
    }

    /// Determinant of the submatrix on the given rows and columns (Bareiss).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        let k = rows.len();
        if k == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.get(r, c).clone()).collect())
            .collect();
        let mut sign = false;
        let mut prev = BigInt::one();
        for p in 0..k - 1 {
            if a[p][p].is_zero() {
                let Some(swap) = (p + 1..k).find(|&r| !a[r][p].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(p, swap);
                sign = !sign;
            }
            for i in p + 1..k {
                for j in p + 1..k {
                    let v = &a[i][j] * &a[p][p] - &a[i][p] * &a[p][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[p][p].clone();
        }
        let d = a[k - 1][k - 1].clone();
        if sign {
            -d
        } else {
            d
        }
    }

    /// Parses: first line `n`, then `n` rows of `n` integers.
    pub fn parse(text: &str) -> Result<IntMatrix, SeifertError> {
        let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("").trim();
            (!l.is_empty()).then_some((i + 1, l))
        });
        let (line, head) = lines.next().ok_or(SeifertError::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let n: usize = head.parse().map_err(|_| SeifertError::Parse {
            line,
            msg: format!("expected matrix size, found `{head}`"),
        })?;
        let mut entries = Vec::with_capacity(n * n);
        for r in 0..n {
            let (line, row) = lines.next().ok_or(SeifertError::Parse {
                line,
                msg: format!("expected {n} rows, found {r}"),
            })?;
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != n {
                return Err(SeifertError::Parse {
                    line,
                    msg: format!("expected {n} entries, found {}", vals.len()),
                });
            }
            for v in vals {
                entries.push(v.parse::<BigInt>().map_err(|_| SeifertError::Parse {
                    line,
                    msg: format!("bad integer `{v}`"),
                })?);
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(SeifertError::Parse {
                line,
                msg: "trailing content".into(),
            });
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `g[k-1]` is the gcd of all `k × k` minors (0 when they all vanish).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GcdProfile {
    pub g: Vec<BigInt>,
}

impl GcdProfile {
    /// Value for minor size `k` (1-based).
    pub fn at(&self, k: usize) -> &BigInt {
        &self.g[k - 1]
    }

    /// Largest `s` with a nonzero `s × s` minor (0 if none).
    pub fn rank(&self) -> usize {
        self.g.iter().take_while(|v| !v.is_zero()).count()
    }
}

impl fmt::Display for GcdProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.g.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn gcd_over_rows(m: &IntMatrix, rows: &[Vec<usize>], cols: &[Vec<usize>]) -> BigInt {
    let mut g = BigInt::zero();
    for r in rows {
        for c in cols {
            g = g.gcd(&m.minor(r, c));
            if g.is_one() {
                return g;
            }
        }
    }
    g
}

/// Gcd of all `k × k` minors, nonnegative.
pub fn minor_gcd(m: &IntMatrix, k: usize) -> Result<BigInt, SeifertError> {
    minor_gcd_jobs(m, k, 1)
}

/// As [`minor_gcd`], splitting the row subsets over `jobs` threads.
pub fn minor_gcd_jobs(m: &IntMatrix, k: usize, jobs: usize) -> Result<BigInt, SeifertError> {
    if k == 0 || k > m.size() {
        return Err(SeifertError::KOutOfRange { k, n: m.size() });
    }
    let sets = subsets(m.size(), k);
    if jobs <= 1 {
        return Ok(gcd_over_rows(m, &sets, &sets));
    }
    let chunk = sets.len().div_ceil(jobs);
    let run = || {
        sets.par_chunks(chunk.max(1))
            .map(|rows| gcd_over_rows(m, rows, &sets))
            .reduce(BigInt::zero, |a, b| a.gcd(&b))
    };
    Ok(match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    })
}

pub fn gcd_profile(m: &IntMatrix) -> GcdProfile {
    gcd_profile_jobs(m, 1)
}

pub fn gcd_profile_jobs(m: &IntMatrix, jobs: usize) -> GcdProfile {
    let mut g = Vec::with_capacity(m.size());
    for k in 1..=m.size() {
        // once every k-minor vanishes so do all larger ones
        if g.last().is_some_and(|v: &BigInt| v.is_zero()) {
            g.push(BigInt::zero());
        } else {
            g.push(minor_gcd_jobs(m, k, jobs).expect("k in range"));
        }
    }
    GcdProfile { g }
}

/// The block matrix with upper-left block
/// `(0,0,0,0), (0,0,1,0), (−1,0,4,0), (−1,0,0,4+2k)` and lower-right block `v`.
pub fn build_vk(v: &IntMatrix, k: i64) -> IntMatrix {
    let n = v.size() + 4;
    let mut m = IntMatrix::zero(n);
    m.set(1, 2, 1);
    m.set(2, 0, -1);
    m.set(2, 2, 4);
    m.set(3, 0, -1);
    m.set(3, 3, BigInt::from(4) + BigInt::from(2) * k);
    for i in 0..v.size() {
        for j in 0..v.size() {
            m.set(4 + i, 4 + j, v.get(i, j).clone());
        }
    }
    m
}

/// True when the gcd profiles differ, which rules out unimodular congruence.
pub fn profiles_distinguish(m1: &IntMatrix, m2: &IntMatrix) -> Result<bool, SeifertError> {
    if m1.size() != m2.size() {
        return Err(SeifertError::SizeMismatch(m1.size(), m2.size()));
    }
    Ok(gcd_profile(m1) != gcd_profile(m2))
}

/// `PᵀMP` for unimodular `P`.
pub fn congruent_transform(m: &IntMatrix, p: &IntMatrix) -> Result<IntMatrix, SeifertError> {
    if m.size() != p.size() {
        return Err(SeifertError::SizeMismatch(m.size(), p.size()));
    }
    let det = p.det();
    if det.abs() != BigInt::one() {
        return Err(SeifertError::NotUnimodular(det));
    }
    p.transpose().mul(m)?.mul(p)
}

/// Product of `steps` seeded elementary matrices: row additions with
/// coefficients in `[−3, 3]`, row transpositions and sign flips.
pub fn random_unimodular(n: usize, steps: usize, seed: u64) -> IntMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = IntMatrix::identity(n);
    for _ in 0..steps {
        let kind = if n < 2 { 2 } else { rng.gen_range(0..3) };
        match kind {
            0 => {
                // column j += c * column i of p, i.e. p := p * (I + c e_ij)
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let c = BigInt::from(rng.gen_range(-3..=3i64));
                for r in 0..n {
                    let add = p.get(r, i) * &c;
                    p.entries[r * n + j] += add;
                }
            }
            1 => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                for r in 0..n {
                    p.entries.swap(r * n + i, r * n + j);
                }
            }
            _ => {
                let i = rng.gen_range(0..n);
                for r in 0..n {
                    let v = -p.get(r, i);
                    p.set(r, i, v);
                }
            }
        }
    }
    p
}

fn small_entries(m: &IntMatrix) -> Option<Vec<i64>> {
    m.entries.iter().map(|v| i64::try_from(v).ok()).collect()
}

/// Searches all `P` with entries in `[−bound, bound]` for `PᵀM₁P = M₂`.
/// Limited to `n ≤ 3` and `bound ≤ 2`.
pub fn congruence_witness_search(
    m1: &IntMatrix,
    m2: &IntMatrix,
    bound: i64,
) -> Result<Option<IntMatrix>, SeifertError> {
    let n = m1.size();
    if n != m2.size() {
        return Err(SeifertError::SizeMismatch(n, m2.size()));
    }
    if n > 3 || !(0..=2).contains(&bound) {
        return Err(SeifertError::SearchTooLarge { n, bound });
    }
    if m1 == m2 {
        return Ok(Some(IntMatrix::identity(n)));
    }
    if gcd_profile(m1) != gcd_profile(m2) {
        return Ok(None);
    }
    let (Some(a), Some(b)) = (small_entries(m1), small_entries(m2)) else {
        return Ok(None);
    };
    let width = (2 * bound + 1) as usize;
    let cells = n * n;
    let total = width.pow(cells as u32);
    let mut p = vec![0i64; cells];
    for code in 0..total {
        let mut c = code;
        for e in p.iter_mut() {
            *e = (c % width) as i64 - bound;
            c /= width;
        }
        if det_small(&p, n).abs() != 1 {
            continue;
        }
        if congruent_small(&a, &p, n) == b {
            let rows: Vec<Vec<i64>> = p.chunks(n).map(<[i64]>::to_vec).collect();
            return Ok(Some(IntMatrix::from_rows(&rows)));
        }
    }
    Ok(None)
}

fn det_small(p: &[i64], n: usize) -> i64 {
    match n {
        0 => 1,
        1 => p[0],
        2 => p[0] * p[3] - p[1] * p[2],
        _ => {
            p[0] * (p[4] * p[8] - p[5] * p[7]) - p[1] * (p[3] * p[8] - p[5] * p[6])
                + p[2] * (p[3] * p[7] - p[4] * p[6])
        }
    }
}

fn congruent_small(m: &[i64], p: &[i64], n: usize) -> Vec<i64> {
    // (PᵀMP)_ij = Σ_kl p_ki m_kl p_lj
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0;
            for k in 0..n {
                for l in 0..n {
                    s += p[k * n + i] * m[k * n + l] * p[l * n + j];
                }
            }
            out[i * n + j] = s;
        }
    }
    out
}
