//! Walsh functions, numerical Walsh coefficients, the `W_kappa` functions and
//! the exact error decomposition of a digital-net estimate.
//!
//! For a randomized net and a Walsh polynomial `p = sum_k c_k wal_k`,
//! `mean_i p(x_i) - c_0 = sum_{k != 0} Z(k) S(k) c_k` holds exactly whenever
//! every `k` has `ceil(k) <= E`.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kindex::{KIndex, QSampler};
use crate::netgen::{FixedPoint, RandomizedNet};
use crate::numeric::{gauss_legendre, NeumaierSum};

/// Gauss-Legendre points per dyadic cell and axis.
pub const NODES_PER_CELL: usize = 8;

/// Largest number of dyadic cells (over all axes) a coefficient may use.
pub const MAX_QUADRATURE_CELLS: u64 = 1 << 24;

/// Largest `|kappa|` accepted by [`WKappa::new`].
pub const MAX_W_KAPPA_SIZE: usize = 4;

/// Largest element of `kappa` accepted by [`WKappa::new`].
pub const MAX_W_KAPPA_LEVEL: u32 = 20;

fn check_precision(k: &KIndex, precision: u32) -> Result<()> {
    let needed = k.ceil();
    if needed > precision {
        return Err(Error::Precision { needed, precision });
    }
    Ok(())
}

/// `(-1)^(sum_j sum_{l in kappa_j} digit_l(x_j))`.
pub fn wal(k: &KIndex, x: &[FixedPoint]) -> Result<i8> {
    if x.len() != k.dim() {
        return Err(Error::Dimension {
            op: "wal",
            expected: k.dim(),
            got: x.len(),
        });
    }
    let precision = x.iter().map(FixedPoint::precision).min().unwrap_or(64);
    check_precision(k, precision)?;
    let words: Vec<u64> = x.iter().map(FixedPoint::word).collect();
    Ok(wal_words(k.coords(), &words))
}

/// [`wal`] on raw fixed-point words, without checks.
#[inline]
pub fn wal_words(k: &[u64], words: &[u64]) -> i8 {
    let parity = k
        .iter()
        .zip(words)
        .map(|(&kj, &w)| (kj & w.reverse_bits()).count_ones())
        .sum::<u32>();
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Default quadrature level for coefficient `k`: two levels finer than `wal_k`.
pub fn default_level(k: &KIndex) -> u32 {
    k.ceil() + 2
}

/// `int f(x) wal_k(x) dx` over `[0,1]^s` by composite Gauss-Legendre on the
/// `2^level` dyadic cells of each axis, where `wal_k` is constant.
pub fn walsh_coeff_numeric<F>(f: &F, k: &KIndex, level: u32) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let s = k.dim();
    if s == 0 || s > 3 {
        return Err(Error::invalid(format!(
            "numerical Walsh coefficients support 1 <= s <= 3, got {s}"
        )));
    }
    if level < k.ceil() {
        return Err(Error::invalid(format!(
            "level {level} below ceil(k) = {}; wal_k is not constant on the cells",
            k.ceil()
        )));
    }
    let total_cells = (level as u64)
        .checked_mul(s as u64)
        .filter(|&bits| bits < 63)
        .map(|bits| 1u64 << bits)
        .filter(|&c| c <= MAX_QUADRATURE_CELLS)
        .ok_or_else(|| {
            Error::Resource(format!(
                "2^({level}*{s}) quadrature cells exceed the cap {MAX_QUADRATURE_CELLS}"
            ))
        })?;
    let (nodes, weights) = gauss_legendre(NODES_PER_CELL);
    let h = (-(level as f64)).exp2();
    let per_axis = 1u64 << level;
    let node_count = NODES_PER_CELL.pow(s as u32);
    let mut x = vec![0.0; s];
    let mut acc = NeumaierSum::new();
    for cell in 0..total_cells {
        let mut rest = cell;
        let mut parity = 0u32;
        let mut origin = [0.0f64; 3];
        for (j, o) in origin.iter_mut().enumerate().take(s) {
            let c = rest % per_axis;
            rest /= per_axis;
            *o = c as f64 * h;
            let digits = if level == 0 {
                0
            } else {
                c.reverse_bits() >> (64 - level)
            };
            parity += (k.coord(j) & digits).count_ones();
        }
        let mut cell_sum = 0.0;
        for node in 0..node_count {
            let mut rest = node;
            let mut w = 1.0;
            for j in 0..s {
                let q = rest % NODES_PER_CELL;
                rest /= NODES_PER_CELL;
                x[j] = origin[j] + h * nodes[q];
                w *= weights[q];
            }
            cell_sum += w * f(&x);
        }
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        acc.add(sign * cell_sum);
    }
    Ok(acc.value() * h.powi(s as i32))
}

/// `2^(-||kappa||_1) * ||f^(|kappa|)||_1`, the Holder bound on `|f_hat(k)|`.
pub fn coeff_upper_bound(k: &KIndex, deriv_l1: f64) -> f64 {
    (-(k.norm1() as f64)).exp2() * deriv_l1
}

/// `W_kappa` as an exact piecewise polynomial on the `2^max(kappa)` dyadic cells.
///
/// Built from the largest element down: `W_{l}(x) = int_0^x wal_{2^(l-1)}`, and
/// each smaller element `l` maps `W` to `int_0^x wal_{2^(l-1)}(t) W(t) dt`.
#[derive(Clone, Debug)]
pub struct WKappa {
    kappa: Vec<u32>,
    level: u32,
    /// `cells[c][d]`: coefficient of `t^d` on cell `c`, with `t` the offset into the cell.
    cells: Vec<Vec<f64>>,
}

impl WKappa {
    pub fn new(kappa: &[u32]) -> Result<Self> {
        let set: BTreeSet<u32> = kappa.iter().copied().collect();
        if set.len() != kappa.len() || set.contains(&0) {
            return Err(Error::invalid("kappa must be a set of positive integers"));
        }
        if set.len() > MAX_W_KAPPA_SIZE {
            return Err(Error::Resource(format!(
                "|kappa| = {} exceeds {MAX_W_KAPPA_SIZE}",
                set.len()
            )));
        }
        let level = set.iter().next_back().copied().unwrap_or(0);
        if level > MAX_W_KAPPA_LEVEL {
            return Err(Error::Resource(format!(
                "max(kappa) = {level} exceeds {MAX_W_KAPPA_LEVEL}"
            )));
        }
        let n = 1usize << level;
        let h = (-(level as f64)).exp2();
        let mut cells = vec![vec![1.0]; n];
        for &l in set.iter().rev() {
            let mut start = 0.0;
            for (c, poly) in cells.iter_mut().enumerate() {
                let sign = if (c >> (level - l)) & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let mut next = Vec::with_capacity(poly.len() + 1);
                next.push(start);
                next.extend(
                    poly.iter()
                        .enumerate()
                        .map(|(d, a)| sign * a / (d + 1) as f64),
                );
                start = horner(&next, h);
                *poly = next;
            }
        }
        Ok(Self {
            kappa: set.into_iter().collect(),
            level,
            cells,
        })
    }

    pub fn kappa(&self) -> &[u32] {
        &self.kappa
    }

    /// Value at `x`, extended with period 1.
    pub fn eval(&self, x: f64) -> f64 {
        let h = (-(self.level as f64)).exp2();
        let x = x.rem_euclid(1.0);
        let c = ((x / h) as usize).min(self.cells.len() - 1);
        horner(&self.cells[c], x - c as f64 * h)
    }

    /// Exact integral over `[0, 1]`.
    pub fn integral(&self) -> f64 {
        let h = (-(self.level as f64)).exp2();
        self.cells
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(d, a)| a * h.powi(d as i32 + 1) / (d + 1) as f64)
                    .sum::<f64>()
            })
            .collect::<NeumaierSum>()
            .value()
    }

    /// Maximum over `[0, 1]`: dense sampling followed by golden-section refinement.
    pub fn max(&self) -> f64 {
        const SAMPLES: usize = 256;
        let h = (-(self.level as f64)).exp2();
        let step = h / SAMPLES as f64;
        let total = self.cells.len() * SAMPLES;
        let (best_i, mut best) = (0..=total)
            .map(|i| (i, self.eval_closed(i as f64 * step)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let (mut a, mut b) = (
            (best_i as f64 - 1.0).max(0.0) * step,
            ((best_i + 1) as f64 * step).min(1.0),
        );
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if self.eval_closed(c) > self.eval_closed(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(self.eval_closed(0.5 * (a + b)));
        best
    }

    /// [`Self::eval`] on `[0, 1]` with `x = 1` taken as the right end of the last cell.
    fn eval_closed(&self, x: f64) -> f64 {
        if x >= 1.0 {
            let h = (-(self.level as f64)).exp2();
            horner(self.cells.last().expect("nonempty"), h)
        } else {
            self.eval(x)
        }
    }
}

fn horner(poly: &[f64], t: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

/// `W_kappa(x)`; `W_empty = 1`.
pub fn eval_w_kappa(kappa: &[u32], x: f64) -> Result<f64> {
    Ok(WKappa::new(kappa)?.eval(x))
}

/// `prod_{l in kappa} 2^(-l-1)`, the integral of `W_kappa`.
pub fn w_kappa_integral_identity(kappa: &[u32]) -> f64 {
    kappa.iter().map(|&l| (-(l as f64) - 1.0).exp2()).product()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZSRecord {
    pub k: KIndex,
    /// Whether `k` aliases to zero: `sum_j sum_{l in kappa_j} C_j(l,:) = 0`.
    pub z: bool,
    /// `(-1)^(sum_j sum_{l in kappa_j} D_j(l))`.
    pub s: i8,
}

fn check_net(net: &RandomizedNet, k: &KIndex) -> Result<()> {
    if k.dim() != net.dim() {
        return Err(Error::Dimension {
            op: "zs_record",
            expected: net.dim(),
            got: k.dim(),
        });
    }
    check_precision(k, net.precision() as u32)
}

/// `Z(k)` without validation; `k` must satisfy `ceil(k) <= E`.
#[inline]
pub fn z_unchecked(net: &RandomizedNet, k: &KIndex) -> bool {
    let mut acc = 0u64;
    for j in 0..k.dim() {
        for l in k.positions(j) {
            acc ^= net.row_word(j, l);
        }
    }
    acc == 0
}

pub fn zs_record(net: &RandomizedNet, k: &KIndex) -> Result<ZSRecord> {
    check_net(net, k)?;
    let mut flips = 0u32;
    for j in 0..k.dim() {
        flips += k.positions(j).filter(|&l| net.shift_digit(j, l)).count() as u32;
    }
    Ok(ZSRecord {
        k: k.clone(),
        z: z_unchecked(net, k),
        s: if flips.is_multiple_of(2) { 1 } else { -1 },
    })
}

/// A finite Walsh series `sum_k c_k wal_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshPolynomial {
    s: usize,
    terms: Vec<(KIndex, f64)>,
}

impl WalshPolynomial {
    pub fn new(s: usize, terms: Vec<(KIndex, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (k, _) in &terms {
            if k.dim() != s {
                return Err(Error::Dimension {
                    op: "WalshPolynomial::new",
                    expected: s,
                    got: k.dim(),
                });
            }
            if !seen.insert(k.clone()) {
                return Err(Error::invalid(format!("repeated index {k:?}")));
            }
        }
        Ok(Self { s, terms })
    }

    /// Zero-index term with coefficient `mean` plus `count` distinct random
    /// indices from `Q_n`, with coefficients uniform on `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(
        s: usize,
        n: u32,
        count: usize,
        mean: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let sampler = QSampler::new(s, n)?;
        if (count as u128) > sampler.cardinality() {
            return Err(Error::invalid(format!(
                "cannot draw {count} distinct indices from a set of {}",
                sampler.cardinality()
            )));
        }
        let mut chosen = BTreeSet::new();
        let mut terms = vec![(KIndex::zero(s), mean)];
        while chosen.len() < count {
            let k = sampler.sample(rng);
            if chosen.insert(k.clone()) {
                terms.push((k, rng.random_range(-1.0..=1.0)));
            }
        }
        Self::new(s, terms)
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn terms(&self) -> &[(KIndex, f64)] {
        &self.terms
    }

    /// Coefficient of the zero index.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| k.is_zero())
            .map(|(_, c)| *c)
            .sum()
    }

    pub fn max_ceil(&self) -> u32 {
        self.terms.iter().map(|(k, _)| k.ceil()).max().unwrap_or(0)
    }

    /// Value at a point given as fixed-point words.
    pub fn eval_words(&self, words: &[u64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| c * wal_words(k.coords(), words) as f64)
            .collect::<NeumaierSum>()
            .value()
    }

    pub fn eval(&self, x: &[FixedPoint]) -> Result<f64> {
        if x.len() != self.s {
            return Err(Error::Dimension {
                op: "WalshPolynomial::eval",
                expected: self.s,
                got: x.len(),
            });
        }
        let precision = x.iter().map(FixedPoint::precision).min().unwrap_or(64);
        if self.max_ceil() > precision {
            return Err(Error::Precision {
                needed: self.max_ceil(),
                precision,
            });
        }
        let words: Vec<u64> = x.iter().map(FixedPoint::word).collect();
        Ok(self.eval_words(&words))
    }
}

/// Returns `(mu_hat - mu, sum_{k != 0} Z(k) S(k) c_k)` for `p` on `net`.
pub fn decomposition_check(net: &RandomizedNet, p: &WalshPolynomial) -> Result<(f64, f64)> {
    if p.dim() != net.dim() {
        return Err(Error::Dimension {
            op: "decomposition_check",
            expected: net.dim(),
            got: p.dim(),
        });
    }
    let mut total = NeumaierSum::new();
    net.for_each_point_words(|_, w| total.add(p.eval_words(w)));
    let mut lhs = NeumaierSum::new();
    lhs.add(total.value() / net.len() as f64);
    lhs.add(-p.mean());
    let mut rhs = NeumaierSum::new();
    for (k, c) in p.terms() {
        if k.is_zero() {
            continue;
        }
        let rec = zs_record(net, k)?;
        if rec.z {
            rhs.add(rec.s as f64 * c);
        }
    }
    Ok((lhs.value(), rhs.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{randomize, GeneratingMatrices, ScrambleScheme};
    use crate::streams::stream_rng;
    use std::sync::Arc;

    fn k1(set: &[u32]) -> KIndex {
        KIndex::from_sets(&[set]).unwrap()
    }

    #[test]
    fn wal_first_digit() {
        let k = k1(&[1]);
        for (x, expect) in [(0.0, 1), (0.49, 1), (0.5, -1), (0.99, -1)] {
            let p = FixedPoint::new((x * 2f64.powi(64)) as u64, 64);
            assert_eq!(wal(&k, &[p]).unwrap(), expect, "x = {x}");
        }
        let zero = KIndex::zero(2);
        let pt = [FixedPoint::new(123, 64), FixedPoint::new(u64::MAX, 64)];
        assert_eq!(wal(&zero, &pt).unwrap(), 1);
        assert!(matches!(
            wal(&k1(&[9]), &[FixedPoint::new(0, 8)]),
            Err(Error::Precision {
                needed: 9,
                precision: 8
            })
        ));
    }

    #[test]
    fn orthonormal_on_dyadic_grid() {
        let level = 4u32;
        let grid: Vec<FixedPoint> = (0..1u64 << level)
            .map(|c| FixedPoint::new(c << (64 - level), level))
            .collect();
        for a in 0..16u64 {
            for b in 0..16u64 {
                let (ka, kb) = (KIndex::from_ints(vec![a]), KIndex::from_ints(vec![b]));
                let sum: i32 = grid
                    .iter()
                    .map(|x| (wal(&ka, &[*x]).unwrap() * wal(&kb, &[*x]).unwrap()) as i32)
                    .sum();
                assert_eq!(sum, if a == b { 16 } else { 0 });
            }
        }
    }

    #[test]
    fn coefficients_of_identity() {
        let f = |x: &[f64]| x[0];
        let c1 = walsh_coeff_numeric(&f, &k1(&[1]), 3).unwrap();
        let c2 = walsh_coeff_numeric(&f, &k1(&[2]), 4).unwrap();
        assert!((c1 + 0.25).abs() < 1e-12);
        assert!((c2 + 0.125).abs() < 1e-12);
        let constant = |_: &[f64]| 3.5;
        let c = walsh_coeff_numeric(&constant, &KIndex::from_ints(vec![5, 2]), 4).unwrap();
        assert!(c.abs() < 1e-13);
        assert!(walsh_coeff_numeric(&f, &k1(&[3]), 2).is_err());
        let k4 = KIndex::from_ints(vec![1, 1, 1, 1]);
        assert!(walsh_coeff_numeric(&|_: &[f64]| 1.0, &k4, 2).is_err());
    }

    #[test]
    fn coefficient_bounds_for_exponential() {
        let f = |x: &[f64]| x[0].exp();
        let e1 = std::f64::consts::E - 1.0;
        for k in 1..256u64 {
            let k = KIndex::from_ints(vec![k]);
            if k.norm1() > 8 {
                continue;
            }
            let c = walsh_coeff_numeric(&f, &k, default_level(&k)).unwrap();
            // Every derivative of e^x has L1 norm e - 1 and infimum 1.
            assert!(c.abs() <= coeff_upper_bound(&k, e1) * (1.0 + 1e-12));
            let lower = (-((k.norm1() + k.norm0()) as f64)).exp2();
            assert!(c.abs() >= lower * (1.0 - 1e-9), "{k:?}: {c}");
        }
        let k = k1(&[1, 2]);
        let c = walsh_coeff_numeric(&f, &k, 4).unwrap();
        assert!(c.abs() <= 0.125 * e1);
        assert_eq!(coeff_upper_bound(&k1(&[1]), 1.0), 0.5);
        assert_eq!(coeff_upper_bound(&k, 0.0), 0.0);
    }

    #[test]
    fn two_dimensional_coefficient_factorizes() {
        let f = |x: &[f64]| x[0] * x[1];
        let k = KIndex::from_ints(vec![1, 2]);
        let c = walsh_coeff_numeric(&f, &k, 3).unwrap();
        assert!((c - 0.25 * 0.125).abs() < 1e-12);
    }

    #[test]
    fn w_kappa_triangle() {
        let w = WKappa::new(&[1]).unwrap();
        assert_eq!(w.eval(0.0), 0.0);
        assert!((w.eval(0.5) - 0.5).abs() < 1e-15);
        assert!(w.eval_closed(1.0).abs() < 1e-15);
        assert!((w.eval(0.25) - 0.25).abs() < 1e-15);
        assert!((w.integral() - 0.25).abs() < 1e-15);
        assert_eq!(eval_w_kappa(&[], 0.3).unwrap(), 1.0);
    }

    #[test]
    fn w_kappa_identities() {
        let sets: Vec<Vec<u32>> = vec![
            vec![1],
            vec![2],
            vec![3],
            vec![1, 2],
            vec![1, 3],
            vec![2, 3],
            vec![1, 2, 3],
            vec![2, 4, 5, 7],
        ];
        for kappa in sets {
            let w = WKappa::new(&kappa).unwrap();
            let target = w_kappa_integral_identity(&kappa);
            assert!((w.integral() - target).abs() < 1e-12, "{kappa:?}");
            assert!((w.max() - 2.0 * target).abs() < 1e-10, "{kappa:?}");
            let period = (1.0 - kappa[0] as f64).exp2();
            for i in 0..200 {
                let x = i as f64 / 211.0;
                let v = w.eval(x);
                assert!(v >= -1e-15, "{kappa:?} negative at {x}");
                assert!((w.eval(x + period) - v).abs() < 1e-12, "{kappa:?} period");
            }
        }
        assert!(WKappa::new(&[1, 2, 3, 4, 5]).is_err());
        assert!(WKappa::new(&[0]).is_err());
    }

    #[test]
    fn w_kappa_against_quadrature() {
        // W_{1,2} = int_0^x wal_1 W_{2}; compare with a fine midpoint rule.
        let w = WKappa::new(&[1, 2]).unwrap();
        let w2 = WKappa::new(&[2]).unwrap();
        let n = 1 << 16;
        let mut acc = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let sign = if t < 0.5 { 1.0 } else { -1.0 };
            acc += sign * w2.eval(t) / n as f64;
            if (i + 1) % 4096 == 0 {
                let x = (i + 1) as f64 / n as f64;
                assert!((w.eval_closed(x) - acc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zs_algebra() {
        let g = Arc::new(GeneratingMatrices::builtin(2, 6).unwrap());
        let mut rng = stream_rng(11, 0);
        let sampler = QSampler::new(2, 12).unwrap();
        for scheme in [ScrambleScheme::Crd, ScrambleScheme::Rls(g)] {
            for _ in 0..100 {
                let net = randomize(&scheme, 2, 6, 16, &mut rng).unwrap();
                let zero = zs_record(&net, &KIndex::zero(2)).unwrap();
                assert!(zero.z && zero.s == 1);
                let (a, b) = (sampler.sample(&mut rng), sampler.sample(&mut rng));
                let ab = a.xor(&b).unwrap();
                let (ra, rb, rab) = (
                    zs_record(&net, &a).unwrap(),
                    zs_record(&net, &b).unwrap(),
                    zs_record(&net, &ab).unwrap(),
                );
                assert_eq!(rab.s, ra.s * rb.s);
                if ra.z && rb.z {
                    assert!(rab.z);
                }
            }
        }
    }

    #[test]
    fn single_term_mean_is_z_times_s() {
        let g = Arc::new(GeneratingMatrices::builtin(1, 6).unwrap());
        let mut rng = stream_rng(12, 0);
        let net = randomize(&ScrambleScheme::ShiftOnly(g), 1, 6, 12, &mut rng).unwrap();
        for k in 1..1u64 << 12 {
            let k = KIndex::from_ints(vec![k]);
            let p = WalshPolynomial::new(1, vec![(k.clone(), 1.0)]).unwrap();
            let (lhs, rhs) = decomposition_check(&net, &p).unwrap();
            let rec = zs_record(&net, &k).unwrap();
            let expect = if rec.z { rec.s as f64 } else { 0.0 };
            assert_eq!(lhs, expect);
            assert_eq!(rhs, expect);
        }
    }

    #[test]
    fn decomposition_is_exact() {
        let g = Arc::new(GeneratingMatrices::builtin(2, 6).unwrap());
        let mut rng = stream_rng(13, 0);
        for scheme in [ScrambleScheme::Crd, ScrambleScheme::Rls(g)] {
            for _ in 0..20 {
                let net = randomize(&scheme, 2, 6, 32, &mut rng).unwrap();
                let p = WalshPolynomial::random(2, 10, 20, 0.7, &mut rng).unwrap();
                let (lhs, rhs) = decomposition_check(&net, &p).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12, "{lhs} vs {rhs}");
            }
        }
        let constant = WalshPolynomial::new(1, vec![(KIndex::zero(1), 2.5)]).unwrap();
        let mut rng = stream_rng(14, 0);
        let net = randomize(&ScrambleScheme::Crd, 1, 4, 8, &mut rng).unwrap();
        assert_eq!(decomposition_check(&net, &constant).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn polynomial_validation() {
        let k = k1(&[1]);
        assert!(WalshPolynomial::new(1, vec![(k.clone(), 1.0), (k, 2.0)]).is_err());
        assert!(WalshPolynomial::new(2, vec![(k1(&[1]), 1.0)]).is_err());
        let p = WalshPolynomial::new(1, vec![(k1(&[20]), 1.0)]).unwrap();
        assert!(p.eval(&[FixedPoint::new(0, 16)]).is_err());
    }
}
