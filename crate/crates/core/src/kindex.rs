//! Multi-indices `k = (k_1, ..., k_s)` viewed as bit-sets, and the weight-bounded
//! index sets `Q_N = { k != 0 : ||k||_1 <= N }`.
//!
//! Coordinate `k_j` is stored as the integer whose binary digits are the set
//! `kappa_j`: position `l >= 1` is in `kappa_j` iff bit `l - 1` of `k_j` is one.
//! Positions are therefore capped at 64.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::f2linalg::{self, BitVector};

/// `3 (ln 2)^2 / pi^2`, the growth constant relating `N_m` to `m^2 / s`.
pub const LAMBDA: f64 = 3.0 * std::f64::consts::LN_2 * std::f64::consts::LN_2
    / (std::f64::consts::PI * std::f64::consts::PI);

/// Largest bit position a coordinate may hold.
pub const MAX_POSITION: u32 = 64;

/// Default cap on materialized `Q_N` members.
pub const DEFAULT_ENUMERATION_CAP: u128 = 5_000_000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KIndex {
    coords: Vec<u64>,
}

impl KIndex {
    pub fn zero(s: usize) -> Self {
        Self { coords: vec![0; s] }
    }

    /// From the integers `k_j`.
    pub fn from_ints(coords: Vec<u64>) -> Self {
        Self { coords }
    }

    /// From explicit position sets, e.g. `&[&[1, 3], &[]]`.
    pub fn from_sets(sets: &[&[u32]]) -> Result<Self> {
        let mut coords = Vec::with_capacity(sets.len());
        for set in sets {
            let mut k = 0u64;
            for &l in *set {
                if l == 0 || l > MAX_POSITION {
                    return Err(Error::invalid(format!(
                        "bit position {l} outside 1..={MAX_POSITION}"
                    )));
                }
                k |= 1 << (l - 1);
            }
            coords.push(k);
        }
        Ok(Self { coords })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn coord(&self, j: usize) -> u64 {
        self.coords[j]
    }

    #[inline]
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    /// Positions of `kappa_j`, ascending, 1-based.
    pub fn positions(&self, j: usize) -> impl Iterator<Item = u32> {
        let mut w = self.coords[j];
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros();
            w &= w - 1;
            Some(b + 1)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&k| k == 0)
    }

    /// `||k||_0`: total number of set positions.
    pub fn norm0(&self) -> u32 {
        self.coords.iter().map(|k| k.count_ones()).sum()
    }

    /// `||k||_1`: sum of all set positions.
    pub fn norm1(&self) -> u32 {
        (0..self.dim())
            .map(|j| self.positions(j).sum::<u32>())
            .sum()
    }

    /// `ceil(k)`: the largest set position over all coordinates.
    pub fn ceil(&self) -> u32 {
        self.coords
            .iter()
            .map(|k| 64 - k.leading_zeros())
            .max()
            .unwrap_or(0)
    }

    /// Coordinatewise symmetric difference.
    pub fn xor(&self, other: &KIndex) -> Result<KIndex> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                op: "KIndex::xor",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(KIndex {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Concatenates the digits `1..=up_to_bit` of every coordinate.
    pub fn flatten(&self, up_to_bit: u32) -> Result<BitVector> {
        if self.ceil() > up_to_bit {
            return Err(Error::Precision {
                needed: self.ceil(),
                precision: up_to_bit,
            });
        }
        let width = up_to_bit as usize;
        let mut v = BitVector::zeros(width * self.dim());
        for j in 0..self.dim() {
            for l in self.positions(j) {
                v.set(j * width + (l as usize - 1), true);
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for KIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for j in 0..self.dim() {
            if j > 0 {
                write!(f, ", ")?;
            }
            let set: Vec<u32> = self.positions(j).collect();
            write!(f, "{set:?}")?;
        }
        write!(f, ")")
    }
}

/// `Q_N` for a given dimension: its exact size and, optionally, its members in
/// lexicographic order of `(k_1, ..., k_s)`.
#[derive(Clone, Debug)]
pub struct QSet {
    pub s: usize,
    pub n: u32,
    pub cardinality: u128,
    pub members: Option<Vec<KIndex>>,
}

/// Counting tables shared by [`count_qn`] and [`QSampler`].
#[derive(Clone, Debug)]
struct PartitionTables {
    n: usize,
    /// `distinct[t][k]`: sets of distinct parts `<= k` with sum `t`.
    distinct: Vec<Vec<u128>>,
    /// `cumulative[r][b]`: r-tuples of such sets (empty allowed) with total `<= b`.
    cumulative: Vec<Vec<u128>>,
}

impl PartitionTables {
    fn new(s: usize, n: u32) -> Self {
        let n = n as usize;
        let mut distinct = vec![vec![0u128; n + 1]; n + 1];
        for row in distinct[0].iter_mut() {
            *row = 1;
        }
        for t in 1..=n {
            for k in 1..=n {
                let without = distinct[t][k - 1];
                let with = if k <= t { distinct[t - k][k - 1] } else { 0 };
                distinct[t][k] = without.saturating_add(with);
            }
        }
        let q: Vec<u128> = (0..=n).map(|t| distinct[t][n]).collect();

        let mut exact = vec![vec![0u128; n + 1]; s + 1];
        exact[0][0] = 1;
        for r in 1..=s {
            for t in 0..=n {
                let mut acc = 0u128;
                for u in 0..=t {
                    acc = acc.saturating_add(q[u].saturating_mul(exact[r - 1][t - u]));
                }
                exact[r][t] = acc;
            }
        }
        let cumulative = exact
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0u128, |acc, &x| {
                        *acc = acc.saturating_add(x);
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            distinct,
            cumulative,
        }
    }

    fn q(&self, t: usize) -> u128 {
        self.distinct[t][self.n]
    }
}

/// Exact `|Q_N|` by convolving distinct-part partition counts `s` times.
pub fn count_qn(s: usize, n: u32) -> u128 {
    assert!(s >= 1, "dimension must be positive");
    let tables = PartitionTables::new(s, n);
    tables.cumulative[s][n as usize] - 1
}

/// Subsets of `{1..=n}` with element sum `<= n`, as `(bits, sum)`, ascending by bits.
fn weighted_subsets(n: u32) -> Vec<(u64, u32)> {
    fn walk(next: u32, n: u32, bits: u64, sum: u32, out: &mut Vec<(u64, u32)>) {
        out.push((bits, sum));
        for l in next..=n {
            if sum + l > n {
                break;
            }
            walk(l + 1, n, bits | 1 << (l - 1), sum + l, out);
        }
    }
    let mut out = Vec::new();
    walk(1, n, 0, 0, &mut out);
    out.sort_unstable();
    out
}

/// All nonzero `k` with `||k||_1 <= n`, in lexicographic order.
pub fn enumerate_qn(s: usize, n: u32, cap: u128) -> Result<QSet> {
    if s == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if n > MAX_POSITION {
        return Err(Error::Resource(format!(
            "N = {n} would need bit positions beyond {MAX_POSITION}"
        )));
    }
    let cardinality = count_qn(s, n);
    if cardinality > cap {
        return Err(Error::Resource(format!(
            "|Q_{n}| = {cardinality} for s = {s} exceeds the enumeration cap {cap}"
        )));
    }
    let subsets = weighted_subsets(n);
    let mut members = Vec::with_capacity(cardinality as usize);
    let mut current = vec![0u64; s];

    fn product(
        j: usize,
        budget: u32,
        subsets: &[(u64, u32)],
        current: &mut Vec<u64>,
        out: &mut Vec<KIndex>,
    ) {
        if j == current.len() {
            if current.iter().any(|&k| k != 0) {
                out.push(KIndex::from_ints(current.clone()));
            }
            return;
        }
        for &(bits, w) in subsets {
            if w <= budget {
                current[j] = bits;
                product(j + 1, budget - w, subsets, current, out);
            }
        }
    }
    product(0, n, &subsets, &mut current, &mut members);
    debug_assert_eq!(members.len() as u128, cardinality);
    Ok(QSet {
        s,
        n,
        cardinality,
        members: Some(members),
    })
}

/// Largest `N` with `|Q_N| <= budget`; satisfies
/// `count_qn(s, N) <= budget < count_qn(s, N + 1)`.
pub fn compute_nm(s: usize, budget: u128) -> u32 {
    let mut n = 0u32;
    while count_qn(s, n + 1) <= budget {
        n += 1;
    }
    n
}

/// `m 2^m`, the default budget (unit constant in front of `m 2^m`).
pub fn default_budget(m: u32) -> u128 {
    (m as u128) << m
}

/// `floor((1/2) log2(m) 2^m)`, the budget used for general randomizations.
pub fn log_budget(m: u32) -> u128 {
    if m <= 1 {
        return 0;
    }
    (0.5 * (m as f64).log2() * 2f64.powi(m as i32)).floor() as u128
}

/// GF(2) rank of a set of indices, flattening digits `1..=up_to_bit` per coordinate.
pub fn rank_of_set(indices: &[KIndex], up_to_bit: u32) -> Result<usize> {
    if let Some(first) = indices.first() {
        if let Some(bad) = indices.iter().find(|k| k.dim() != first.dim()) {
            return Err(Error::Dimension {
                op: "rank_of_set",
                expected: first.dim(),
                got: bad.dim(),
            });
        }
    }
    let flat = indices
        .iter()
        .map(|k| k.flatten(up_to_bit))
        .collect::<Result<Vec<_>>>()?;
    f2linalg::rank(&flat)
}

/// Uniform sampler over `Q_N` that never materializes the set.
#[derive(Clone, Debug)]
pub struct QSampler {
    s: usize,
    n: u32,
    tables: PartitionTables,
}

impl QSampler {
    pub fn new(s: usize, n: u32) -> Result<Self> {
        if s == 0 || n == 0 {
            return Err(Error::invalid(
                "sampling needs s >= 1 and N >= 1 (Q_0 is empty)",
            ));
        }
        if n > MAX_POSITION {
            return Err(Error::Resource(format!(
                "N = {n} would need bit positions beyond {MAX_POSITION}"
            )));
        }
        Ok(Self {
            s,
            n,
            tables: PartitionTables::new(s, n),
        })
    }

    pub fn cardinality(&self) -> u128 {
        self.tables.cumulative[self.s][self.n as usize] - 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> KIndex {
        loop {
            let mut budget = self.n as usize;
            let mut coords = Vec::with_capacity(self.s);
            for j in 0..self.s {
                let rest = self.s - j - 1;
                let weight = |t: usize| {
                    self.tables
                        .q(t)
                        .saturating_mul(self.tables.cumulative[rest][budget - t])
                };
                let total: u128 = (0..=budget).map(weight).sum();
                let mut pick = rng.random_range(0..total);
                let mut t = 0;
                loop {
                    let w = weight(t);
                    if pick < w {
                        break;
                    }
                    pick -= w;
                    t += 1;
                }
                coords.push(self.sample_subset(t, rng));
                budget -= t;
            }
            if coords.iter().any(|&k| k != 0) {
                return KIndex::from_ints(coords);
            }
        }
    }

    /// Uniform set of distinct positive integers with sum `t`.
    fn sample_subset<R: Rng + ?Sized>(&self, mut t: usize, rng: &mut R) -> u64 {
        let mut bits = 0u64;
        let mut k = t.min(self.n as usize);
        while t > 0 {
            let all = self.tables.distinct[t][k];
            let with = if k <= t {
                self.tables.distinct[t - k][k - 1]
            } else {
                0
            };
            if with > 0 && rng.random_range(0..all) < with {
                bits |= 1 << (k - 1);
                t -= k;
            }
            k -= 1;
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force_qn(s: usize, n: u32) -> Vec<KIndex> {
        // Every coordinate of a member of Q_n is below 2^n.
        let side = 1u64 << n;
        let total = side.pow(s as u32);
        let mut out: Vec<KIndex> = (1..total)
            .map(|mut code| {
                let coords = (0..s)
                    .map(|_| {
                        let c = code % side;
                        code /= side;
                        c
                    })
                    .rev()
                    .collect();
                KIndex::from_ints(coords)
            })
            .filter(|k| k.norm1() <= n)
            .collect();
        out.sort();
        out
    }

    #[test]
    fn norms_by_hand() {
        let k = KIndex::from_ints(vec![5]);
        assert_eq!((k.norm0(), k.norm1(), k.ceil()), (2, 4, 3));
        let z = KIndex::zero(3);
        assert_eq!((z.norm0(), z.norm1(), z.ceil()), (0, 0, 0));
        let k = KIndex::from_sets(&[&[2], &[1, 2]]).unwrap();
        assert_eq!((k.norm0(), k.norm1(), k.ceil()), (3, 5, 2));
        assert!(KIndex::from_sets(&[&[0]]).is_err());
        assert!(KIndex::from_sets(&[&[65]]).is_err());
    }

    #[test]
    fn xor_by_hand() {
        let a = KIndex::from_sets(&[&[1, 2]]).unwrap();
        let b = KIndex::from_sets(&[&[2, 3]]).unwrap();
        assert_eq!(a.xor(&b).unwrap(), KIndex::from_sets(&[&[1, 3]]).unwrap());
        assert!(a.xor(&a).unwrap().is_zero());
        assert_eq!(a.xor(&KIndex::zero(1)).unwrap(), a);
        assert!(a.xor(&KIndex::zero(2)).is_err());
    }

    #[test]
    fn small_q_sets() {
        let q3 = enumerate_qn(1, 3, DEFAULT_ENUMERATION_CAP).unwrap();
        let ints: Vec<u64> = q3.members.unwrap().iter().map(|k| k.coord(0)).collect();
        assert_eq!(ints, vec![1, 2, 3, 4]); // {1}, {2}, {1,2}, {3}
        assert_eq!(q3.cardinality, 4);

        let q0 = enumerate_qn(1, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(q0.members.unwrap().is_empty());

        let q2 = enumerate_qn(2, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let expected: Vec<KIndex> = [[0, 1], [0, 2], [1, 0], [1, 1], [2, 0]]
            .iter()
            .map(|c| KIndex::from_ints(c.to_vec()))
            .collect();
        assert_eq!(q2.members.unwrap(), expected);
    }

    #[test]
    fn counts() {
        assert_eq!(count_qn(1, 3), 4);
        assert_eq!(count_qn(1, 4), 6);
        for s in 1..5 {
            assert_eq!(count_qn(s, 0), 0);
        }
    }

    #[test]
    fn enumeration_matches_brute_force_and_dp() {
        for (s, max_n) in [(1usize, 16u32), (2, 8), (3, 5)] {
            for n in 0..=max_n {
                let got = enumerate_qn(s, n, DEFAULT_ENUMERATION_CAP)
                    .unwrap()
                    .members
                    .unwrap();
                assert_eq!(got, brute_force_qn(s, n), "s={s} N={n}");
                assert_eq!(got.len() as u128, count_qn(s, n));
            }
        }
    }

    #[test]
    fn enumeration_cardinality_up_to_20() {
        for s in 1..=3 {
            for n in 0..=20 {
                let q = enumerate_qn(s, n, DEFAULT_ENUMERATION_CAP).unwrap();
                assert_eq!(q.members.as_ref().unwrap().len() as u128, q.cardinality);
                for k in q.members.unwrap() {
                    assert!(!k.is_zero() && k.norm1() <= n);
                    let n0 = k.norm0() as f64;
                    assert!(k.norm1() as f64 >= n0 * n0 / (2.0 * s as f64));
                }
            }
        }
    }

    #[test]
    fn enumeration_guards() {
        assert!(matches!(enumerate_qn(2, 20, 10), Err(Error::Resource(_))));
        assert!(matches!(
            enumerate_qn(1, 65, u128::MAX),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn nm_examples() {
        assert_eq!(compute_nm(1, 4), 3);
        assert_eq!(compute_nm(1, 5), 3);
        assert_eq!(compute_nm(1, 6), 4);
        assert_eq!(compute_nm(3, 0), 0);
        let mut prev = 0;
        for budget in 0..5000u128 {
            let n = compute_nm(2, budget);
            assert!(n >= prev);
            assert!(count_qn(2, n) <= budget && budget < count_qn(2, n + 1));
            prev = n;
        }
    }

    #[test]
    fn budgets() {
        assert_eq!(default_budget(10), 10 * 1024);
        assert_eq!(log_budget(4), 16);
        assert!((LAMBDA - 0.146_040_204_164_162_26).abs() < 1e-15);
    }

    #[test]
    fn growth_ratio_is_slowly_varying() {
        // |Q_N| N^(1/4) / exp(pi sqrt(sN/3)) should settle toward a constant.
        let ratio = |n: u32| {
            let n_f = n as f64;
            count_qn(2, n) as f64 * n_f.powf(0.25)
                / (std::f64::consts::PI * (2.0 * n_f / 3.0).sqrt()).exp()
        };
        let r: Vec<f64> = [40, 60, 80, 100, 120].iter().map(|&n| ratio(n)).collect();
        let steps: Vec<f64> = r.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
        assert!(steps.iter().all(|&d| d < 0.1), "{r:?}");
        assert!(steps.last().unwrap() < steps.first().unwrap());
    }

    #[test]
    fn rank_of_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sampler = QSampler::new(2, 8).unwrap();
        for _ in 0..100 {
            let a = sampler.sample(&mut rng);
            let b = sampler.sample(&mut rng);
            let ab = a.xor(&b).unwrap();
            let expected = if a == b { 1 } else { 2 };
            assert_eq!(rank_of_set(&[a.clone(), b.clone()], 8).unwrap(), expected);
            if a != b {
                assert_eq!(rank_of_set(&[a, b, ab], 8).unwrap(), 2);
            }
        }
        let k = KIndex::from_sets(&[&[5], &[]]).unwrap();
        assert!(matches!(rank_of_set(&[k], 4), Err(Error::Precision { .. })));
    }

    #[test]
    fn rank_of_set_matches_subset_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sampler = QSampler::new(2, 8).unwrap();
        for _ in 0..50 {
            let mut v: Vec<KIndex> = Vec::new();
            while v.len() < 5 {
                let k = sampler.sample(&mut rng);
                if !v.contains(&k) {
                    v.push(k);
                }
            }
            // Rank = log2 of the number of distinct subset XORs.
            let mut sums = std::collections::HashSet::new();
            for mask in 0..32u32 {
                let mut acc = KIndex::zero(2);
                for (i, k) in v.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        acc = acc.xor(k).unwrap();
                    }
                }
                sums.insert(acc);
            }
            assert_eq!(
                rank_of_set(&v, 8).unwrap(),
                sums.len().trailing_zeros() as usize
            );
        }
    }

    #[test]
    fn sampler_is_uniform_on_small_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (s, n) in [(1, 6), (2, 4)] {
            let members = enumerate_qn(s, n, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .members
                .unwrap();
            let sampler = QSampler::new(s, n).unwrap();
            assert_eq!(sampler.cardinality(), members.len() as u128);
            let draws = 20_000;
            let mut counts = std::collections::HashMap::new();
            for _ in 0..draws {
                *counts.entry(sampler.sample(&mut rng)).or_insert(0usize) += 1;
            }
            let p = 1.0 / members.len() as f64;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            for k in &members {
                let c = *counts.get(k).unwrap_or(&0) as f64;
                assert!((c - draws as f64 * p).abs() <= 4.5 * sd, "{k:?}: {c}");
            }
            assert_eq!(counts.len(), members.len());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn xor_norm0_subadditive(a in proptest::collection::vec(any::<u64>(), 3),
                                     b in proptest::collection::vec(any::<u64>(), 3)) {
                let a = KIndex::from_ints(a);
                let b = KIndex::from_ints(b);
                prop_assert!(a.xor(&b).unwrap().norm0() <= a.norm0() + b.norm0());
            }
        }
    }
}
