//! Linear block codes: construction, encoding, weight enumeration, the
//! MacWilliams transform, dual distance, and the pair-sum statistic used by
//! the moment machinery.
//!
//! A code is defined by its row list `h_1..h_n` over `F(q)^k`: the codeword
//! of a message `x` has `t`-th coordinate `<h_t, x>`. The dual distance is
//! always computed through MacWilliams from the primal weight enumerator,
//! never by enumerating the (possibly huge) dual code.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::race::OnceBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::galois::{Fe, FieldSpec};

/// Enumeration guard: codes are only walked codeword-by-codeword when
/// `q^k <= 2^26`.
pub const ENUMERATION_BUDGET: u128 = 1 << 26;

/// Hamming weight census of a code: `counts[w]` = number of codewords of
/// weight `w`. Counts are exact big integers since dual enumerators can
/// exceed any machine word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightEnumerator {
    counts: Vec<BigUint>,
}

impl WeightEnumerator {
    pub fn new(counts: Vec<BigUint>) -> Self {
        Self { counts }
    }

    pub fn from_u64s(counts: &[u64]) -> Self {
        Self { counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    /// Code length (= len - 1).
    pub fn length(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn count(&self, w: usize) -> &BigUint {
        &self.counts[w]
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Counts as u64s, if they all fit.
    pub fn as_u64s(&self) -> Option<Vec<u64>> {
        self.counts.iter().map(|c| c.to_u64()).collect()
    }

    /// Smallest w >= 1 with a nonzero count, or `None` for the trivial
    /// all-zero enumerator.
    pub fn min_nonzero_weight(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&w| !self.counts[w].is_zero())
    }

    fn validate(&self, q: u64, k: u32) -> Result<()> {
        if self.counts.is_empty() || !self.counts[0].is_one() {
            return Err(Error::consistency("weight enumerator must have W[0] = 1"));
        }
        let expect = BigUint::from(q).pow(k);
        if self.total() != expect {
            return Err(Error::consistency(format!(
                "weight enumerator sums to {} instead of q^k = {}",
                self.total(),
                expect
            )));
        }
        Ok(())
    }
}

/// An `[n, k]` linear code over `F(q)`, stored by its generator rows.
#[derive(Debug)]
pub struct LinearCode {
    field: FieldSpec,
    n: usize,
    k: usize,
    /// Row `t` is a length-k vector of raw field elements.
    rows: Vec<Vec<u64>>,
    /// Bit-packed rows when q = 2 (bit j = coefficient j).
    masks: Option<Vec<u64>>,
    label: String,
    weights: OnceBox<WeightEnumerator>,
}

impl Clone for LinearCode {
    fn clone(&self) -> Self {
        Self {
            field: self.field.clone(),
            n: self.n,
            k: self.k,
            rows: self.rows.clone(),
            masks: self.masks.clone(),
            label: self.label.clone(),
            weights: OnceBox::new(),
        }
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.rows == other.rows
    }
}

impl LinearCode {
    /// Build a code from explicit generator rows; rejects rank-deficient row
    /// matrices (the code must have exactly `q^k` codewords).
    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<u64>>, label: impl Into<String>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::usage("a code needs at least one coordinate"));
        }
        let k = rows[0].len();
        if k == 0 || k > n {
            return Err(Error::usage(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        for row in &rows {
            if row.len() != k {
                return Err(Error::usage("ragged generator rows"));
            }
            for &c in row {
                field.element(c)?;
            }
        }
        let rank = matrix_rank(&field, &rows, k)?;
        if rank != k {
            return Err(Error::construction(format!(
                "generator rows have rank {rank} < k = {k}"
            )));
        }
        let masks = if field.order() == 2 && k <= 64 {
            Some(rows.iter().map(|r| r.iter().enumerate().fold(0u64, |m, (j, &c)| m | (c << j))).collect())
        } else {
            None
        };
        Ok(Self { field, n, k, rows, masks, label: label.into(), weights: OnceBox::new() })
    }

    /// The `[2^m - 1, m]` binary simplex code: rows are all nonzero vectors
    /// of `F(2)^m` in increasing integer order.
    pub fn simplex(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::usage("simplex needs m >= 2"));
        }
        let k = m as usize;
        let rows = (1u64..(1 << m))
            .map(|t| (0..k).map(|j| (t >> j) & 1).collect())
            .collect();
        Self::from_rows(FieldSpec::prime(2)?, rows, format!("simplex(m={m})"))
    }

    /// The `[n, n-1]` binary even-weight code.
    pub fn even_weight(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::usage("even-weight code needs n >= 2"));
        }
        let k = n - 1;
        let mut rows: Vec<Vec<u64>> = (0..k).map(|t| (0..k).map(|j| u64::from(j == t)).collect()).collect();
        rows.push(vec![1; k]);
        Self::from_rows(FieldSpec::prime(2)?, rows, format!("even_weight(n={n})"))
    }

    /// The binary Gold code of length `2^m - 1` and dimension `2m`, built
    /// from the preferred pair `(alpha, alpha^d)` with `d = 2^k0 + 1`.
    ///
    /// Codewords are the trace sequences `t -> tr(x a^t + y a^(d t))`.
    pub fn gold(m: u32, k0: u32) -> Result<Self> {
        if m < 3 || m % 2 == 0 {
            return Err(Error::usage(format!("gold construction needs odd m >= 3, got m = {m}")));
        }
        if gcd(k0 as u64, m as u64) != 1 {
            return Err(Error::usage(format!(
                "gold construction needs gcd(k0, m) = 1, got k0 = {k0}, m = {m}"
            )));
        }
        let field = FieldSpec::binary(m)?;
        let alpha = Fe(0b10);
        if !field.is_primitive(alpha)? {
            return Err(Error::construction("default modulus does not make x primitive"));
        }
        let n = (1usize << m) - 1;
        let d = ((1u64 << k0) + 1) % n as u64;
        // Trace table tr(alpha^e) for e in 0..n.
        let mut tr = Vec::with_capacity(n);
        let mut pow = Fe::ONE;
        for _ in 0..n {
            tr.push(field.trace(pow)?);
            pow = field.mul(pow, alpha)?;
        }
        let km = m as usize;
        let rows: Vec<Vec<u64>> = (0..n)
            .map(|t| {
                let dt = (d as usize * t) % n;
                (0..2 * km)
                    .map(|j| if j < km { tr[(t + j) % n] } else { tr[(dt + j - km) % n] })
                    .collect()
            })
            .collect();
        let code = Self::from_rows(FieldSpec::prime(2)?, rows, format!("gold(m={m},k0={k0})"));
        match code {
            Ok(c) => Ok(c),
            Err(e) => Err(Error::construction(format!(
                "(alpha, alpha^{d}) is not a preferred pair: {}",
                e.message
            ))),
        }
    }

    /// A random `[n, k]` code over `F(q)` with uniform generator rows,
    /// resampled (at most 100 times) until the rank is `k`.
    pub fn random(n: usize, k: usize, q: u64, seed: u64) -> Result<Self> {
        if k > n {
            return Err(Error::usage(format!("need k <= n, got k = {k}, n = {n}")));
        }
        let field = FieldSpec::prime(q)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let rows: Vec<Vec<u64>> =
                (0..n).map(|_| (0..k).map(|_| rng.gen_range(0..q)).collect()).collect();
            if matrix_rank(&field, &rows, k)? == k {
                return Self::from_rows(field, rows, format!("random(n={n},k={k},q={q},seed={seed})"));
            }
        }
        Err(Error::construction("no full-rank generator found in 100 draws"))
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn length(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Bit-packed rows, present exactly when q = 2 and k <= 64.
    pub fn row_masks(&self) -> Option<&[u64]> {
        self.masks.as_deref()
    }

    /// Number of codewords `q^k`.
    pub fn codeword_count(&self) -> u128 {
        (self.field.order() as u128).pow(self.k as u32)
    }

    fn enumeration_guard(&self) -> Result<u64> {
        let count = self.codeword_count();
        if count > ENUMERATION_BUDGET {
            return Err(Error::resource(format!(
                "q^k = {count} exceeds the enumeration budget {ENUMERATION_BUDGET}"
            )));
        }
        Ok(count as u64)
    }

    /// Codeword coordinates `<h_t, x>` for a length-k message.
    pub fn encode(&self, message: &[u64]) -> Result<Vec<u64>> {
        if message.len() != self.k {
            return Err(Error::usage(format!(
                "message length {} != k = {}",
                message.len(),
                self.k
            )));
        }
        if let Some(masks) = &self.masks {
            let mut msg_mask = 0u64;
            for (j, &x) in message.iter().enumerate() {
                self.field.element(x)?;
                msg_mask |= x << j;
            }
            return Ok(masks.iter().map(|&m| u64::from((m & msg_mask).count_ones() & 1 == 1)).collect());
        }
        for &x in message {
            self.field.element(x)?;
        }
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Fe::ZERO;
                for (&h, &x) in row.iter().zip(message) {
                    acc = self.field.add(acc, self.field.mul(Fe(h), Fe(x))?)?;
                }
                Ok(acc.0)
            })
            .collect()
    }

    /// Message vector number `index` in base-q digit order.
    pub fn message_from_index(&self, index: u64) -> Vec<u64> {
        let q = self.field.order();
        let mut idx = index;
        (0..self.k)
            .map(|_| {
                let digit = idx % q;
                idx /= q;
                digit
            })
            .collect()
    }

    /// All `q^k` codewords, in message-index order. Guarded by the
    /// enumeration budget.
    pub fn codewords(&self) -> Result<impl Iterator<Item = Vec<u64>> + '_> {
        let count = self.enumeration_guard()?;
        Ok((0..count).map(move |i| {
            self.encode(&self.message_from_index(i)).expect("message built in range")
        }))
    }

    /// Exact weight census, cached after the first call.
    pub fn weight_enumerator(&self) -> Result<&WeightEnumerator> {
        if let Some(w) = self.weights.get() {
            return Ok(w);
        }
        let mut counts = vec![0u64; self.n + 1];
        for cw in self.codewords()? {
            let w = cw.iter().filter(|&&c| c != 0).count();
            counts[w] += 1;
        }
        let built = WeightEnumerator::from_u64s(&counts);
        let _ = self.weights.set(alloc::boxed::Box::new(built));
        Ok(self.weights.get().expect("just set"))
    }

    /// Minimum weight of the dual code, via MacWilliams on the primal
    /// enumerator. Returns `n + 1` for the trivial dual (k = n).
    pub fn dual_distance(&self) -> Result<usize> {
        let primal = self.weight_enumerator()?;
        let dual = macwilliams_dual(primal, self.n, self.k as u32, self.field.order())?;
        Ok(dual.min_nonzero_weight().unwrap_or(self.n + 1))
    }

    /// `max_{v != 0} #{(t1, t2) : h_t1 + h_t2 = v}` over all row pairs.
    pub fn max_pair_sum_multiplicity(&self) -> Result<u64> {
        if (self.n as u128) * (self.n as u128) > ENUMERATION_BUDGET {
            return Err(Error::resource(format!("n^2 = {} exceeds the pair budget", self.n * self.n)));
        }
        let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for t1 in 0..self.n {
            for t2 in 0..self.n {
                let sum: Result<Vec<u64>> = (0..self.k)
                    .map(|j| Ok(self.field.add(Fe(self.rows[t1][j]), Fe(self.rows[t2][j]))?.0))
                    .collect();
                let sum = sum?;
                if sum.iter().any(|&c| c != 0) {
                    *counts.entry(sum).or_insert(0) += 1;
                }
            }
        }
        Ok(counts.values().copied().max().unwrap_or(0))
    }

    /// Plain-text listing: one generator row per line, elements separated by
    /// single spaces.
    pub fn export_rows(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut first = true;
            for &c in row {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{c}"));
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rank of an n x k matrix of raw field elements.
fn matrix_rank(field: &FieldSpec, rows: &[Vec<u64>], k: usize) -> Result<usize> {
    let mut work: Vec<Vec<Fe>> = rows.iter().map(|r| r.iter().map(|&c| Fe(c)).collect()).collect();
    let mut rank = 0usize;
    for col in 0..k {
        let Some(pivot) = (rank..work.len()).find(|&r| work[r][col] != Fe::ZERO) else {
            continue;
        };
        work.swap(rank, pivot);
        let inv = field.inv(work[rank][col])?;
        for j in col..k {
            work[rank][j] = field.mul(work[rank][j], inv)?;
        }
        for r in 0..work.len() {
            if r != rank && work[r][col] != Fe::ZERO {
                let factor = work[r][col];
                for j in col..k {
                    let scaled = field.mul(factor, work[rank][j])?;
                    work[r][j] = field.sub(work[r][j], scaled)?;
                }
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    Ok(rank)
}

/// Pascal triangle of exact binomials up to `C(n, n)`.
fn binomials(n: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut row = vec![BigUint::one(); r + 1];
        for c in 1..r {
            row[c] = &table[r - 1][c - 1] + &table[r - 1][c];
        }
        table.push(row);
    }
    table
}

/// MacWilliams transform: the weight enumerator of the dual code from the
/// primal one, exactly.
///
/// `W'_j = q^{-k} sum_w W_w K_j(w)` with the Krawtchouk kernel
/// `K_j(w) = sum_s (-1)^s (q-1)^{j-s} C(w, s) C(n-w, j-s)`.
pub fn macwilliams_dual(w: &WeightEnumerator, n: usize, k: u32, q: u64) -> Result<WeightEnumerator> {
    if w.length() != n {
        return Err(Error::usage(format!("enumerator length {} != n = {n}", w.length())));
    }
    w.validate(q, k)?;
    let binom = binomials(n);
    let qk = BigInt::from(q).pow(k);
    let qm1 = BigInt::from(q - 1);
    let mut dual = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut acc = BigInt::zero();
        for weight in 0..=n {
            let count = w.count(weight);
            if count.is_zero() {
                continue;
            }
            let mut kraw = BigInt::zero();
            for s in 0..=j.min(weight) {
                if j - s > n - weight {
                    continue;
                }
                let mut term = BigInt::from_biguint(Sign::Plus, &binom[weight][s] * &binom[n - weight][j - s]);
                term *= qm1.pow((j - s) as u32);
                if s % 2 == 1 {
                    term = -term;
                }
                kraw += term;
            }
            acc += BigInt::from_biguint(Sign::Plus, count.clone()) * kraw;
        }
        if acc.is_negative() || !(&acc % &qk).is_zero() {
            return Err(Error::consistency(format!(
                "MacWilliams transform gave non-enumerator value {acc}/{qk} at weight {j}"
            )));
        }
        dual.push((acc / &qk).to_biguint().expect("checked nonnegative"));
    }
    Ok(WeightEnumerator::new(dual))
}
