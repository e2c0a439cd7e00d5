//! Bit-packed linear algebra over GF(2).
//!
//! Bit order is little-endian throughout: bit `i` (0-based) of a vector lives in
//! word `i / 64` at position `i % 64`, so bit 0 is the least significant bit of
//! the first word. A row of an `E x m` matrix therefore packs column `c` at bit
//! `c`, and the index vector of `i` in `0..2^m` is the word `i` itself. Bits at
//! or beyond `len` are always zero, which keeps equality and hashing exact.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Uniform word with only the low `bits` bits populated.
#[inline]
fn random_low_bits<R: Rng + ?Sized>(rng: &mut R, bits: usize) -> u64 {
    match bits {
        0 => 0,
        64.. => rng.random::<u64>(),
        b => rng.random::<u64>() & ((1u64 << b) - 1),
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from packed words, clearing anything past `len`.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Self { len, words }
    }

    /// Single-word constructor for `len <= 64`.
    pub fn from_word(len: usize, word: u64) -> Self {
        assert!(len <= 64, "from_word needs len <= 64, got {len}");
        Self::from_words(len, vec![word])
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The first packed word; the whole vector when `len <= 64`.
    #[inline]
    pub fn as_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Position of the highest set bit.
    pub fn highest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Appends `other` after the last bit of `self`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, ")")
    }
}

/// Dense `rows x cols` matrix over GF(2), stored row-major with each row packed
/// like a [`BitVector`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let stride = words_for(cols);
        Ok(Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, true);
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut m = Self::zeros(rows.len(), cols)?;
        for (r, v) in rows.iter().enumerate() {
            if v.len() != cols {
                return Err(Error::Dimension {
                    op: "BitMatrix::from_rows",
                    expected: cols,
                    got: v.len(),
                });
            }
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        Ok(m)
    }

    /// Rows given as single words; requires `cols <= 64`.
    pub fn from_row_words(cols: usize, rows: &[u64]) -> Result<Self> {
        if cols > 64 {
            return Err(Error::invalid("from_row_words needs cols <= 64"));
        }
        let mut m = Self::zeros(rows.len(), cols)?;
        let mask = tail_mask(cols);
        for (r, &w) in rows.iter().enumerate() {
            m.data[r] = w & mask;
        }
        Ok(m)
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for r in 0..rows {
            let v = BitVector::random(cols, rng);
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        let mask = 1u64 << (c % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    /// Row `r` as one word; only meaningful when `cols <= 64`.
    #[inline]
    pub fn row_word(&self, r: usize) -> u64 {
        debug_assert!(self.cols <= 64);
        self.data[r * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn column(&self, c: usize) -> BitVector {
        BitVector::from_bits((0..self.rows).map(|r| self.get(r, c)))
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows).expect("positive dims");
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        rank(&self.row_vectors()).expect("rows share a length")
    }

    pub fn is_nonsingular(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Appends zero rows until the matrix has `rows` rows.
    pub fn pad_rows(&self, rows: usize) -> Result<BitMatrix> {
        if rows < self.rows {
            return Err(Error::invalid(format!(
                "cannot pad {} rows down to {rows}",
                self.rows
            )));
        }
        let mut out = BitMatrix::zeros(rows, self.cols)?;
        out.data[..self.data.len()].copy_from_slice(&self.data);
        Ok(out)
    }

    /// Each row rendered as hex of its packed words, most significant word first.
    pub fn to_hex_rows(&self) -> Vec<String> {
        (0..self.rows)
            .map(|r| {
                self.row_words(r)
                    .iter()
                    .rev()
                    .map(|w| format!("{w:016x}"))
                    .collect::<String>()
            })
            .collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `M v` over GF(2).
pub fn mat_vec_mul(m: &BitMatrix, v: &BitVector) -> Result<BitVector> {
    if v.len() != m.cols {
        return Err(Error::Dimension {
            op: "mat_vec_mul",
            expected: m.cols,
            got: v.len(),
        });
    }
    let mut out = BitVector::zeros(m.rows);
    for r in 0..m.rows {
        let parity = m
            .row_words(r)
            .iter()
            .zip(v.words())
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
        if parity & 1 == 1 {
            out.set(r, true);
        }
    }
    Ok(out)
}

/// `A B` over GF(2): row `r` of the product is the XOR of the rows of `B`
/// selected by row `r` of `A`.
pub fn mat_mul(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.cols != b.rows {
        return Err(Error::Dimension {
            op: "mat_mul",
            expected: a.cols,
            got: b.rows,
        });
    }
    let mut out = BitMatrix::zeros(a.rows, b.cols)?;
    let mut acc = vec![0u64; b.stride];
    for r in 0..a.rows {
        acc.iter_mut().for_each(|w| *w = 0);
        for (wi, &w) in a.row_words(r).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let k = wi * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                for (x, y) in acc.iter_mut().zip(b.row_words(k)) {
                    *x ^= y;
                }
            }
        }
        out.row_words_mut(r).copy_from_slice(&acc);
    }
    Ok(out)
}

/// Incremental XOR basis keyed by highest set bit.
#[derive(Clone, Debug, Default)]
struct XorBasis {
    by_pivot: std::collections::BTreeMap<usize, BitVector>,
}

impl XorBasis {
    /// Reduces `v` against the basis; inserts it and returns true if it was
    /// independent.
    fn insert(&mut self, mut v: BitVector) -> bool {
        while let Some(p) = v.highest_one() {
            match self.by_pivot.get(&p) {
                Some(b) => v.xor_assign(b),
                None => {
                    self.by_pivot.insert(p, v);
                    return true;
                }
            }
        }
        false
    }

    fn len(&self) -> usize {
        self.by_pivot.len()
    }
}

/// GF(2) rank of a list of equal-length vectors; 0 for an empty list.
pub fn rank(vectors: &[BitVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let len = first.len();
    let mut basis = XorBasis::default();
    for v in vectors {
        if v.len() != len {
            return Err(Error::Dimension {
                op: "rank",
                expected: len,
                got: v.len(),
            });
        }
        basis.insert(v.clone());
    }
    Ok(basis.len())
}

/// Dimension of the affine solution space of `A x = b`, or `None` when the
/// system is inconsistent.
pub fn solution_space_dim(a: &BitMatrix, b: &BitVector) -> Result<Option<usize>> {
    if b.len() != a.rows {
        return Err(Error::Dimension {
            op: "count_solutions",
            expected: a.rows,
            got: b.len(),
        });
    }
    // Consistent iff appending b as an extra column does not raise the rank.
    let mut plain = XorBasis::default();
    let mut augmented = XorBasis::default();
    for r in 0..a.rows {
        let row = a.row(r);
        let extra = BitVector::from_bits([b.get(r)]);
        augmented.insert(row.concat(&extra));
        plain.insert(row);
    }
    if plain.len() == augmented.len() {
        Ok(Some(a.cols - plain.len()))
    } else {
        Ok(None)
    }
}

/// Number of `x` with `A x = b`; `0` if inconsistent, else `2^(cols - rank A)`.
pub fn count_solutions(a: &BitMatrix, b: &BitVector) -> Result<u128> {
    match solution_space_dim(a, b)? {
        None => Ok(0),
        Some(d) if d < 128 => Ok(1u128 << d),
        Some(d) => Err(Error::Resource(format!(
            "solution count 2^{d} does not fit in 128 bits"
        ))),
    }
}

/// Random `E x m` lower-triangular matrix with unit diagonal in the top `m x m`
/// block and independent fair bits everywhere below the diagonal.
pub fn sample_lower_triangular<R: Rng + ?Sized>(
    e: usize,
    m: usize,
    rng: &mut R,
) -> Result<BitMatrix> {
    if m == 0 || e < m {
        return Err(Error::invalid(format!(
            "lower-triangular sample needs E >= m >= 1, got E={e}, m={m}"
        )));
    }
    let mut out = BitMatrix::zeros(e, m)?;
    for r in 0..e {
        let free = r.min(m);
        let row = out.row_words_mut(r);
        for (wi, w) in row.iter_mut().enumerate() {
            let bits = free.saturating_sub(wi * 64).min(64);
            *w = random_low_bits(rng, bits);
        }
        if r < m {
            out.set(r, r, true);
        }
    }
    Ok(out)
}

/// Uniform draw from the invertible `m x m` matrices.
///
/// Rows are built one at a time. Given a reduced basis of the previous rows
/// (pivot = highest bit, every other basis vector zero at that pivot), each
/// vector outside their span is uniquely `r + sum c_p b_p` with `r` nonzero and
/// zero on all pivots. Drawing `r` and the coefficients `c_p` uniformly
/// therefore draws the next row uniformly from the complement of the span.
pub fn sample_nonsingular<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<BitMatrix> {
    if m == 0 {
        return Err(Error::invalid("sample_nonsingular needs m >= 1"));
    }
    let mut basis: Vec<(usize, BitVector)> = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let free: Vec<usize> = {
            let mut pivot = vec![false; m];
            basis.iter().for_each(|(p, _)| pivot[*p] = true);
            (0..m).filter(|&c| !pivot[c]).collect()
        };
        let pattern = random_nonzero_pattern(free.len(), rng);
        let mut r = BitVector::zeros(m);
        for (bit, &pos) in free.iter().enumerate() {
            if pattern.get(bit) {
                r.set(pos, true);
            }
        }
        let mut row = r.clone();
        for (_, b) in &basis {
            if rng.random::<bool>() {
                row.xor_assign(b);
            }
        }
        rows.push(row);

        let pivot = r.highest_one().expect("pattern is nonzero");
        for (_, b) in basis.iter_mut() {
            if b.get(pivot) {
                b.xor_assign(&r);
            }
        }
        basis.push((pivot, r));
    }
    BitMatrix::from_rows(&rows)
}

fn random_nonzero_pattern<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> BitVector {
    debug_assert!(bits >= 1);
    if bits <= 64 {
        let hi = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        BitVector::from_word(bits, rng.random_range(1..=hi))
    } else {
        loop {
            let v = BitVector::random(bits, rng);
            if !v.is_zero() {
                return v;
            }
        }
    }
}

/// Rejection sampler over all `m x m` matrices; also returns the number of
/// draws taken. Kept for cross-checking [`sample_nonsingular`].
pub fn sample_nonsingular_rejection<R: Rng + ?Sized>(
    m: usize,
    rng: &mut R,
) -> Result<(BitMatrix, usize)> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let candidate = BitMatrix::random(m, m, rng)?;
        if candidate.is_nonsingular() {
            return Ok((candidate, attempts));
        }
    }
}

/// Probability that a uniform `m x m` matrix is invertible:
/// `prod_{l=1..m} (1 - 2^(l-1-m))`.
pub fn nonsingular_fraction(m: usize) -> f64 {
    (1..=m)
        .map(|l| 1.0 - 2f64.powi(l as i32 - 1 - m as i32))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn naive_mul(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(a.rows(), b.cols()).unwrap();
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0u8;
                for k in 0..a.cols() {
                    acc ^= (a.get(i, k) & b.get(k, j)) as u8;
                }
                out.set(i, j, acc == 1);
            }
        }
        out
    }

    /// Rank by brute force: the largest subset size whose every nonempty
    /// sub-subset XORs to nonzero, via the number of distinct subset sums.
    fn subset_rank(vs: &[BitVector]) -> usize {
        let n = vs.len();
        let mut sums = std::collections::HashSet::new();
        for mask in 0u32..(1 << n) {
            let mut acc = BitVector::zeros(vs[0].len());
            for (i, v) in vs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc.xor_assign(v);
                }
            }
            sums.insert(acc);
        }
        // The span has exactly 2^rank elements.
        sums.len().trailing_zeros() as usize
    }

    #[test]
    fn identity_mat_vec() {
        let id = BitMatrix::identity(3).unwrap();
        let v = BitVector::from_bits([true, false, true]);
        assert_eq!(mat_vec_mul(&id, &v).unwrap(), v);
    }

    #[test]
    fn parity_cancels() {
        let m = BitMatrix::from_row_words(2, &[0b11, 0b11, 0b11]).unwrap();
        let v = BitVector::from_bits([true, true]);
        assert!(mat_vec_mul(&m, &v).unwrap().is_zero());
    }

    #[test]
    fn mat_vec_matches_loop() {
        let mut r = rng(1);
        for _ in 0..50 {
            let m = BitMatrix::random(8, 8, &mut r).unwrap();
            let v = BitVector::random(8, &mut r);
            let got = mat_vec_mul(&m, &v).unwrap();
            for row in 0..8 {
                let mut acc = 0u8;
                for c in 0..8 {
                    acc ^= (m.get(row, c) & v.get(c)) as u8;
                }
                assert_eq!(got.get(row), acc == 1);
            }
        }
    }

    #[test]
    fn mat_vec_dimension_error() {
        let m = BitMatrix::identity(3).unwrap();
        assert!(matches!(
            mat_vec_mul(&m, &BitVector::zeros(4)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn mat_mul_identity_and_ones() {
        let mut r = rng(2);
        let a = BitMatrix::random(5, 7, &mut r).unwrap();
        assert_eq!(mat_mul(&a, &BitMatrix::identity(7).unwrap()).unwrap(), a);
        let ones = BitMatrix::from_row_words(6, &[0b111111]).unwrap();
        assert_eq!(
            mat_mul(&ones, &BitMatrix::identity(6).unwrap()).unwrap(),
            ones
        );
        assert!(mat_mul(&a, &a).is_err());
    }

    #[test]
    fn mat_mul_matches_naive_including_multiword() {
        let mut r = rng(3);
        for (n, k, p) in [(6, 6, 6), (3, 70, 130), (65, 64, 2)] {
            let a = BitMatrix::random(n, k, &mut r).unwrap();
            let b = BitMatrix::random(k, p, &mut r).unwrap();
            assert_eq!(mat_mul(&a, &b).unwrap(), naive_mul(&a, &b));
        }
    }

    #[test]
    fn rank_basics() {
        let units: Vec<_> = (0..5).map(|i| BitVector::from_word(5, 1 << i)).collect();
        assert_eq!(rank(&units).unwrap(), 5);
        let v = BitVector::from_word(5, 0b10110);
        assert_eq!(rank(&[v.clone(), v.clone(), v]).unwrap(), 1);
        assert_eq!(rank(&[]).unwrap(), 0);
        assert!(rank(&[BitVector::zeros(3), BitVector::zeros(4)]).is_err());
    }

    #[test]
    fn rank_matches_subset_oracle() {
        let mut r = rng(4);
        for _ in 0..40 {
            let vs: Vec<_> = (0..10).map(|_| BitVector::random(6, &mut r)).collect();
            assert_eq!(rank(&vs).unwrap(), subset_rank(&vs));
        }
    }

    #[test]
    fn count_solutions_basics() {
        let z = BitMatrix::zeros(4, 4).unwrap();
        assert_eq!(count_solutions(&z, &BitVector::zeros(4)).unwrap(), 16);
        assert_eq!(count_solutions(&z, &BitVector::from_word(4, 1)).unwrap(), 0);
        let id = BitMatrix::identity(5).unwrap();
        let mut r = rng(5);
        for _ in 0..10 {
            let b = BitVector::random(5, &mut r);
            assert_eq!(count_solutions(&id, &b).unwrap(), 1);
        }
    }

    #[test]
    fn count_solutions_matches_enumeration() {
        let mut r = rng(6);
        for _ in 0..60 {
            let a = BitMatrix::random(5, 7, &mut r).unwrap();
            // Bias toward consistent systems half the time.
            let b = if r.random::<bool>() {
                mat_vec_mul(&a, &BitVector::random(7, &mut r)).unwrap()
            } else {
                BitVector::random(5, &mut r)
            };
            let brute = (0u64..128)
                .filter(|&x| mat_vec_mul(&a, &BitVector::from_word(7, x)).unwrap() == b)
                .count() as u128;
            assert_eq!(count_solutions(&a, &b).unwrap(), brute);
        }
    }

    #[test]
    fn lower_triangular_structure() {
        let mut r = rng(7);
        let one = sample_lower_triangular(1, 1, &mut r).unwrap();
        assert_eq!(one, BitMatrix::identity(1).unwrap());
        for _ in 0..100 {
            let m = sample_lower_triangular(12, 5, &mut r).unwrap();
            for row in 0..5 {
                assert!(m.get(row, row));
                for c in row + 1..5 {
                    assert!(!m.get(row, c));
                }
            }
        }
        assert!(sample_lower_triangular(3, 4, &mut r).is_err());
    }

    #[test]
    fn lower_triangular_entry_is_fair() {
        let mut r = rng(8);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| sample_lower_triangular(6, 4, &mut r).unwrap().get(2, 0))
            .count();
        let p = hits as f64 / n as f64;
        assert!(
            (p - 0.5).abs() <= 4.0 * (0.25f64 / n as f64).sqrt(),
            "p = {p}"
        );
    }

    #[test]
    fn nonsingular_draws_are_full_rank() {
        let mut r = rng(9);
        for m in [1, 2, 5, 17, 64, 70] {
            for _ in 0..20 {
                assert_eq!(sample_nonsingular(m, &mut r).unwrap().rank(), m);
            }
        }
    }

    #[test]
    fn nonsingular_2x2_is_uniform() {
        // Enumerate all 16 2x2 matrices and keep the invertible ones.
        let invertible: Vec<u64> = (0u64..16)
            .filter(|&bits| {
                BitMatrix::from_row_words(2, &[bits & 3, bits >> 2])
                    .unwrap()
                    .is_nonsingular()
            })
            .collect();
        assert_eq!(invertible.len(), 6);

        let mut r = rng(10);
        let draws = 6_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let m = sample_nonsingular(2, &mut r).unwrap();
            *counts
                .entry(m.row_word(0) | m.row_word(1) << 2)
                .or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for key in invertible {
            let c = counts[&key] as f64;
            assert!((c - draws as f64 * p).abs() <= 4.0 * sd, "{key}: {c}");
        }
    }

    #[test]
    fn rejection_acceptance_rate() {
        // 15 * 14 * 12 * 8 invertible matrices out of 2^16.
        let exact = 20160.0 / 65536.0;
        assert!((nonsingular_fraction(4) - exact).abs() < 1e-15);
        let mut r = rng(11);
        let trials = 4000;
        let attempts: usize = (0..trials)
            .map(|_| sample_nonsingular_rejection(4, &mut r).unwrap().1)
            .sum();
        let rate = trials as f64 / attempts as f64;
        let sd = (exact * (1.0 - exact) / attempts as f64).sqrt();
        assert!((rate - exact).abs() <= 4.0 * sd, "rate {rate}");
    }

    #[test]
    fn transpose_and_pad() {
        let mut r = rng(12);
        let a = BitMatrix::random(4, 9, &mut r).unwrap();
        assert_eq!(a.transpose().transpose(), a);
        let p = a.pad_rows(6).unwrap();
        assert_eq!(p.rows(), 6);
        assert!(p.row(5).is_zero());
        assert_eq!(p.row(2), a.row(2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
            proptest::collection::vec(any::<u64>(), rows)
                .prop_map(move |ws| BitMatrix::from_row_words(cols, &ws).unwrap())
        }

        proptest! {
            #[test]
            fn associativity(a in matrix(5, 6), b in matrix(6, 7), c in matrix(7, 4)) {
                let left = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
                let right = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                prop_assert_eq!(left, naive_mul(&naive_mul(&a, &b), &c));
            }

            #[test]
            fn product_rank_bound(a in matrix(6, 5), b in matrix(5, 8)) {
                let ab = mat_mul(&a, &b).unwrap();
                prop_assert!(ab.rank() <= a.rank().min(b.rank()));
            }

            #[test]
            fn homogeneous_always_solvable(a in matrix(6, 9)) {
                let n = count_solutions(&a, &BitVector::zeros(6)).unwrap();
                prop_assert!(n >= 1);
                prop_assert_eq!(n, 1u128 << (9 - a.rank()));
            }
        }
    }
}
