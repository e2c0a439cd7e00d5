//! Randomization-quality measurements: aliasing probabilities, rank
//! deficiency, marginal order, `Q_N` statistics and sign curves.
//!
//! Monte Carlo routines split their trials into fixed-size chunks, each drawing
//! from its own substream, so results depend only on the seed and not on the
//! number of worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::estimate;
use crate::f2linalg::{self, BitVector};
use crate::integrands::Integrand;
use crate::kindex::{enumerate_qn, KIndex, QSampler, DEFAULT_ENUMERATION_CAP, LAMBDA};
use crate::netgen::{
    random_grid_point, randomize, GeneratingMatrices, SchemeFactory, SchemeKind, ScrambleScheme,
};
use crate::streams::{substream, Purpose, StreamRng};
use crate::walsh::z_unchecked;

/// Trials per substream chunk.
pub const CHUNK: u64 = 1000;

/// Largest number of `(m + 1)^s - 1` profiles the exact rank computation visits.
pub const MAX_PROFILES: u64 = 1_000_000;

/// Default `|z|` threshold of [`marginal_order_check`].
pub const MARGINAL_Z_LIMIT: f64 = 4.5;

/// Runs `trials` Monte Carlo trials in chunks; `body(rng, trial, acc)` updates
/// a per-chunk accumulator, and the chunk accumulators are merged in order.
fn run_chunked<A, F, M>(seed: u64, tag: u64, trials: u64, init: A, body: F, merge: M) -> A
where
    A: Clone + Send + Sync,
    F: Fn(&mut StreamRng, u64, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, Purpose::Diagnostic, c, tag);
            let mut acc = init.clone();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                body(&mut rng, t, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = init;
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// A binomial proportion with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            hits,
            trials,
            p_hat: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// `|p_hat - p| / sqrt(p (1 - p) / trials)` for a hypothesized `p`.
    pub fn z_score(&self, p: f64) -> f64 {
        let sd = (p * (1.0 - p) / self.trials as f64).sqrt();
        if sd == 0.0 {
            if self.p_hat == p {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.p_hat - p).abs() / sd
        }
    }
}

fn check_indices(indices: &[KIndex], s: usize, e: usize) -> Result<()> {
    for k in indices {
        if k.dim() != s {
            return Err(Error::Dimension {
                op: "aliasing probability",
                expected: s,
                got: k.dim(),
            });
        }
        if k.ceil() as usize > e {
            return Err(Error::Precision {
                needed: k.ceil(),
                precision: e as u32,
            });
        }
    }
    Ok(())
}

/// Joint aliasing counts over independent randomizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZCounts {
    pub trials: u64,
    /// Trials with `Z(k) = 1`, per index.
    pub single: Vec<u64>,
    /// Trials with `Z(k_a) = Z(k_b) = 1`, per requested pair.
    pub pairs: Vec<u64>,
}

impl ZCounts {
    pub fn single(&self, i: usize) -> Proportion {
        Proportion::new(self.single[i], self.trials)
    }

    pub fn pair(&self, i: usize) -> Proportion {
        Proportion::new(self.pairs[i], self.trials)
    }
}

/// Counts `Z(k) = 1` for every index and `Z(k_a) Z(k_b) = 1` for every pair
/// of positions in `pairs`, sharing each random net across all of them.
#[allow(clippy::too_many_arguments)]
pub fn z_joint_counts(
    scheme: &ScrambleScheme,
    s: usize,
    m: usize,
    e: usize,
    indices: &[KIndex],
    pairs: &[(usize, usize)],
    trials: u64,
    seed: u64,
) -> Result<ZCounts> {
    check_indices(indices, s, e)?;
    if pairs
        .iter()
        .any(|&(a, b)| a >= indices.len() || b >= indices.len())
    {
        return Err(Error::invalid("pair refers to a missing index"));
    }
    // Fail early on size errors rather than inside the workers.
    let mut probe = substream(seed, Purpose::Diagnostic, 0, 0xff_ffff);
    randomize(scheme, s, m, e, &mut probe)?;
    let init = (vec![0u64; indices.len()], vec![0u64; pairs.len()]);
    let (single, pair) = run_chunked(
        seed,
        0,
        trials,
        init,
        |rng, _, (single, pair)| {
            let net = randomize(scheme, s, m, e, rng).expect("sizes checked");
            let z: Vec<bool> = indices.iter().map(|k| z_unchecked(&net, k)).collect();
            for (c, &zi) in single.iter_mut().zip(&z) {
                *c += zi as u64;
            }
            for (c, &(a, b)) in pair.iter_mut().zip(pairs) {
                *c += (z[a] && z[b]) as u64;
            }
        },
        |total, part| {
            total.0.iter_mut().zip(part.0).for_each(|(a, b)| *a += b);
            total.1.iter_mut().zip(part.1).for_each(|(a, b)| *a += b);
        },
    );
    Ok(ZCounts {
        trials,
        single,
        pairs: pair,
    })
}

/// Fraction of randomizations with `Z(k) = 1`.
pub fn empirical_z_prob(
    scheme: &ScrambleScheme,
    k: &KIndex,
    m: usize,
    e: usize,
    trials: u64,
    seed: u64,
) -> Result<Proportion> {
    if trials < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    let counts = z_joint_counts(
        scheme,
        k.dim(),
        m,
        e,
        std::slice::from_ref(k),
        &[],
        trials,
        seed,
    )?;
    Ok(counts.single(0))
}

/// Aliasing probability of one top-bit profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileProbability {
    /// `ceil(kappa_j)` per coordinate; 0 means `kappa_j` is empty.
    pub profile: Vec<u32>,
    pub probability: f64,
    /// Rank of the linear system's coefficient vectors.
    pub rank: usize,
    pub consistent: bool,
}

/// Exact `Pr(sum_j M_j(t_j,:) gen_j = 0)` for the profile `t`.
///
/// Row `t_j` of `M_j` is a one at column `t_j` plus fair bits in columns
/// `1..t_j`, so the event is the linear system
/// `sum_j sum_{c < t_j} f_{j,c} gen_j(c,:) = sum_j gen_j(t_j,:)` in the fair bits `f`.
pub fn profile_probability(
    gen: &GeneratingMatrices,
    profile: &[u32],
) -> Result<ProfileProbability> {
    let m = gen.m();
    if profile.len() != gen.dim() {
        return Err(Error::Dimension {
            op: "profile_probability",
            expected: gen.dim(),
            got: profile.len(),
        });
    }
    if profile.iter().any(|&t| t as usize > m) {
        return Err(Error::invalid("profile entries must lie in 0..=m"));
    }
    let mut columns = Vec::new();
    let mut target = BitVector::zeros(m);
    for (j, &t) in profile.iter().enumerate() {
        if t == 0 {
            continue;
        }
        let c = gen.matrix(j);
        target.xor_assign(&c.row(t as usize - 1));
        columns.extend((0..t as usize - 1).map(|r| c.row(r)));
    }
    let rank = f2linalg::rank(&columns)?;
    let mut augmented = columns;
    augmented.push(target);
    let consistent = f2linalg::rank(&augmented)? == rank;
    Ok(ProfileProbability {
        profile: profile.to_vec(),
        probability: if consistent {
            (-(rank as f64)).exp2()
        } else {
            0.0
        },
        rank,
        consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankDeficiency {
    pub m: usize,
    /// `R_{m,1} = m + log2(max probability)`.
    pub r: f64,
    pub max_probability: f64,
    /// Profile attaining the maximum; `None` when the `2^-m` baseline of
    /// profiles reaching past row `m` dominates.
    pub argmax: Option<Vec<u32>>,
    pub profiles: Vec<ProfileProbability>,
}

/// Exact one-way rank deficiency of random linear scrambling with `gen`.
///
/// Profiles with some `ceil(kappa_j) > m` have aliasing probability exactly
/// `2^-m` and enter only through that baseline.
pub fn rank_deficiency_r1(gen: &GeneratingMatrices) -> Result<RankDeficiency> {
    let (s, m) = (gen.dim(), gen.m());
    let count = (m as u64 + 1)
        .checked_pow(s as u32)
        .map(|c| c - 1)
        .filter(|&c| c <= MAX_PROFILES)
        .ok_or_else(|| {
            Error::Resource(format!(
                "(m + 1)^s - 1 profiles exceed {MAX_PROFILES}; reduce s or m"
            ))
        })?;
    let baseline = (-(m as f64)).exp2();
    let mut best = (baseline, None);
    let mut profiles = Vec::with_capacity(count as usize);
    let mut profile = vec![0u32; s];
    for _ in 0..count {
        for t in profile.iter_mut() {
            if (*t as usize) < m {
                *t += 1;
                break;
            }
            *t = 0;
        }
        let p = profile_probability(gen, &profile)?;
        if p.probability > best.0 {
            best = (p.probability, Some(p.profile.clone()));
        }
        profiles.push(p);
    }
    Ok(RankDeficiency {
        m,
        r: m as f64 + best.0.log2(),
        max_probability: best.0,
        argmax: best.1,
        profiles,
    })
}

/// Monte Carlo estimate of a profile's aliasing probability under random
/// linear scrambling, using `kappa_j = {t_j}`.
pub fn profile_probability_mc(
    gen: &GeneratingMatrices,
    profile: &[u32],
    trials: u64,
    seed: u64,
) -> Result<Proportion> {
    let sets: Vec<Vec<u32>> = profile
        .iter()
        .map(|&t| if t == 0 { vec![] } else { vec![t] })
        .collect();
    let refs: Vec<&[u32]> = sets.iter().map(Vec::as_slice).collect();
    let k = KIndex::from_sets(&refs)?;
    let scheme = ScrambleScheme::Rls(std::sync::Arc::new(gen.clone()));
    let counts = z_joint_counts(
        &scheme,
        gen.dim(),
        gen.m(),
        gen.m(),
        &[k],
        &[],
        trials,
        seed,
    )?;
    Ok(counts.single(0))
}

/// Monte Carlo lower envelope for `R_{m,r}`, `r >= 2`: draws `sets` random
/// full-rank `r`-subsets of `Q_n`, estimates each joint aliasing probability
/// from `trials` nets and returns `m r + log2` of the largest estimate
/// (`None` when no joint aliasing was observed).
#[allow(clippy::too_many_arguments)]
pub fn rank_deficiency_scan(
    scheme: &ScrambleScheme,
    s: usize,
    m: usize,
    e: usize,
    r: usize,
    n: u32,
    sets: usize,
    trials: u64,
    seed: u64,
) -> Result<Option<f64>> {
    if r < 2 {
        return Err(Error::invalid(
            "the scan covers r >= 2; use rank_deficiency_r1 for r = 1",
        ));
    }
    let sampler = QSampler::new(s, n)?;
    let mut rng = substream(seed, Purpose::Diagnostic, 0, 0xff_fffe);
    let mut best: Option<f64> = None;
    for set_id in 0..sets {
        let mut chosen: Vec<KIndex> = Vec::with_capacity(r);
        let mut attempts = 0;
        while chosen.len() < r {
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::Resource(
                    "could not draw a full-rank index set".into(),
                ));
            }
            let k = sampler.sample(&mut rng);
            let mut trial = chosen.clone();
            trial.push(k);
            if crate::kindex::rank_of_set(&trial, n)? == trial.len() {
                chosen = trial;
            }
        }
        let scheme_seed = seed.wrapping_add(set_id as u64 + 1);
        let all = run_chunked(
            scheme_seed,
            1,
            trials,
            0u64,
            |rng, _, acc| {
                let net = randomize(scheme, s, m, e, rng).expect("sizes checked");
                *acc += chosen.iter().all(|k| z_unchecked(&net, k)) as u64;
            },
            |a, b| *a += b,
        );
        if all > 0 {
            let p = all as f64 / trials as f64;
            let val = (m * r) as f64 + p.log2();
            best = Some(best.map_or(val, |b: f64| b.max(val)));
        }
    }
    Ok(best)
}

/// Per-row uniformity statistics of the randomized matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowUniformity {
    pub coordinate: usize,
    /// 1-based row.
    pub row: usize,
    pub max_abs_z: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub scheme: SchemeKind,
    pub m: usize,
    #[serde(rename = "E")]
    pub e: usize,
    pub trials: u64,
    pub z_limit: f64,
    pub rows: Vec<RowUniformity>,
}

impl MarginalReport {
    /// Whether every row from `first_row` on passed.
    pub fn passes_from(&self, first_row: usize) -> bool {
        self.rows
            .iter()
            .filter(|r| r.row >= first_row)
            .all(|r| !r.flagged)
    }

    /// Smallest `d` such that all rows after `d m` pass, if any.
    pub fn marginal_order(&self) -> Option<usize> {
        (0..=self.e.div_ceil(self.m)).find(|&d| self.passes_from(d * self.m + 1))
    }
}

/// Binomial uniformity test of every entry of `C_j` in rows `first_row..=E`.
pub fn marginal_order_check(
    scheme: &ScrambleScheme,
    s: usize,
    m: usize,
    e: usize,
    first_row: usize,
    trials: u64,
    seed: u64,
) -> Result<MarginalReport> {
    if first_row == 0 || first_row > e {
        return Err(Error::invalid(format!(
            "first row {first_row} outside 1..={e}"
        )));
    }
    let mut probe = substream(seed, Purpose::Diagnostic, 0, 0xff_fffd);
    randomize(scheme, s, m, e, &mut probe)?;
    let rows = e - first_row + 1;
    let ones = run_chunked(
        seed,
        2,
        trials,
        vec![0u64; s * rows * m],
        |rng, _, acc| {
            let net = randomize(scheme, s, m, e, rng).expect("sizes checked");
            for j in 0..s {
                for (ri, l) in (first_row..=e).enumerate() {
                    let mut w = net.row_word(j, l as u32);
                    while w != 0 {
                        let c = w.trailing_zeros() as usize;
                        w &= w - 1;
                        acc[(j * rows + ri) * m + c] += 1;
                    }
                }
            }
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    );
    let half = trials as f64 / 2.0;
    let sd = (trials as f64 / 4.0).sqrt();
    let mut out = Vec::with_capacity(s * rows);
    for j in 0..s {
        for (ri, l) in (first_row..=e).enumerate() {
            let base = (j * rows + ri) * m;
            let max_abs_z = ones[base..base + m]
                .iter()
                .map(|&c| (c as f64 - half).abs() / sd)
                .fold(0.0, f64::max);
            out.push(RowUniformity {
                coordinate: j + 1,
                row: l,
                max_abs_z,
                flagged: max_abs_z > MARGINAL_Z_LIMIT,
            });
        }
    }
    Ok(MarginalReport {
        scheme: scheme.kind(),
        m,
        e,
        trials,
        z_limit: MARGINAL_Z_LIMIT,
        rows: out,
    })
}

/// Monte Carlo `Pr(k1 xor k2 in Q_n)` for independent uniform `k1, k2` in `Q_n`.
pub fn xor_closure_prob(s: usize, n: u32, trials: u64, seed: u64) -> Result<Proportion> {
    let sampler = QSampler::new(s, n)?;
    if sampler.cardinality() == 0 {
        return Err(Error::invalid("Q_N is empty"));
    }
    let hits = run_chunked(
        seed,
        3,
        trials,
        0u64,
        |rng, _, acc| {
            let a = sampler.sample(rng);
            let b = sampler.sample(rng);
            let c = a.xor(&b).expect("same dimension");
            *acc += (!c.is_zero() && c.norm1() <= n) as u64;
        },
        |a, b| *a += b,
    );
    Ok(Proportion::new(hits, trials))
}

/// Exact `Pr(k1 xor k2 in Q_n)` by enumerating all ordered pairs.
pub fn xor_closure_exact(s: usize, n: u32) -> Result<f64> {
    let q = enumerate_qn(s, n, 20_000)?;
    let members = q.members.as_ref().expect("enumerated");
    if members.is_empty() {
        return Err(Error::invalid("Q_N is empty"));
    }
    let hits = members
        .iter()
        .flat_map(|a| {
            members
                .iter()
                .map(move |b| a.xor(b).expect("same dimension"))
        })
        .filter(|c| !c.is_zero() && c.norm1() <= n)
        .count();
    Ok(hits as f64 / (members.len() * members.len()) as f64)
}

/// Distribution of `|kappa_1|` for uniform `k` in `Q_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaHistogram {
    pub s: usize,
    pub n: u32,
    /// `sqrt(lambda n / s)`.
    pub scale: f64,
    pub total: u64,
    /// `|kappa_1|` to frequency.
    pub counts: BTreeMap<u32, u64>,
}

impl KappaHistogram {
    /// Fraction of mass with `| |kappa_1| / scale - 2 | <= eps`.
    pub fn mass_near_two(&self, eps: f64) -> Proportion {
        let hits = self
            .counts
            .iter()
            .filter(|(&size, _)| (size as f64 / self.scale - 2.0).abs() <= eps)
            .map(|(_, &c)| c)
            .sum();
        Proportion::new(hits, self.total)
    }
}

fn kappa_scale(s: usize, n: u32) -> f64 {
    (LAMBDA * n as f64 / s as f64).sqrt()
}

/// Monte Carlo histogram of `|kappa_1|`.
pub fn kappa_concentration(s: usize, n: u32, trials: u64, seed: u64) -> Result<KappaHistogram> {
    let sampler = QSampler::new(s, n)?;
    if sampler.cardinality() == 0 {
        return Err(Error::invalid("Q_N is empty"));
    }
    let counts = run_chunked(
        seed,
        4,
        trials,
        BTreeMap::new(),
        |rng, _, acc: &mut BTreeMap<u32, u64>| {
            *acc.entry(sampler.sample(rng).coord(0).count_ones())
                .or_insert(0) += 1;
        },
        |a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
        },
    );
    Ok(KappaHistogram {
        s,
        n,
        scale: kappa_scale(s, n),
        total: trials,
        counts,
    })
}

/// Exact histogram of `|kappa_1|` by enumeration.
pub fn kappa_concentration_exact(s: usize, n: u32) -> Result<KappaHistogram> {
    let q = enumerate_qn(s, n, DEFAULT_ENUMERATION_CAP)?;
    let mut counts = BTreeMap::new();
    for k in q.members.as_ref().expect("enumerated") {
        *counts.entry(k.coord(0).count_ones()).or_insert(0) += 1;
    }
    Ok(KappaHistogram {
        s,
        n,
        scale: kappa_scale(s, n),
        total: q.cardinality as u64,
        counts,
    })
}

/// One row of a sign curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub m: usize,
    pub scheme: SchemeKind,
    /// `Pr(mu_hat > mu)`, strict.
    pub p_gt: f64,
    /// `Pr(mu_hat = mu)`.
    pub p_eq: f64,
    /// Standard error of `p_gt`.
    pub stderr: f64,
    pub trials: u64,
}

/// `Pr(mu_hat > mu)` per `m`. At `m = 0` the single point is the digital
/// shift, a uniform draw from the `E`-bit grid.
pub fn sign_quantile_curve(
    factory: &SchemeFactory,
    f: &Integrand,
    m_list: &[usize],
    e: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<SignRow>> {
    let mu = f.reference_mu()?;
    let s = f.dim();
    m_list
        .iter()
        .map(|&m| {
            let scheme = if m == 0 {
                None
            } else {
                Some(factory.build(s, m)?)
            };
            if let Some(scheme) = &scheme {
                let mut probe = substream(seed, Purpose::Diagnostic, 0, 0xff_fffc);
                randomize(scheme, s, m, e, &mut probe)?;
            } else if e == 0 || e > 64 {
                return Err(Error::invalid(format!("precision E = {e} outside 1..=64")));
            }
            let (gt, eq) = run_chunked(
                seed,
                16 + m as u64,
                trials,
                (0u64, 0u64),
                |rng, _, (gt, eq)| {
                    let value = match &scheme {
                        Some(scheme) => {
                            let net = randomize(scheme, s, m, e, rng).expect("sizes checked");
                            estimate(&net, f).expect("dimension checked")
                        }
                        None => {
                            let x: Vec<f64> = (0..s)
                                .map(|_| random_grid_point(e as u32, rng).to_unit())
                                .collect();
                            f.eval(&x)
                        }
                    };
                    *gt += (value > mu) as u64;
                    *eq += (value == mu) as u64;
                },
                |a, b| {
                    a.0 += b.0;
                    a.1 += b.1;
                },
            );
            let p = Proportion::new(gt, trials);
            Ok(SignRow {
                m,
                scheme: factory.kind,
                p_gt: p.p_hat,
                p_eq: eq as f64 / trials as f64,
                stderr: p.stderr,
                trials,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2linalg::{sample_nonsingular, BitMatrix};
    use crate::integrands;
    use crate::netgen::DirectionSource;
    use crate::streams::stream_rng;
    use std::sync::Arc;

    #[test]
    fn zero_index_always_aliases() {
        let p = empirical_z_prob(&ScrambleScheme::Crd, &KIndex::zero(2), 4, 8, 1000, 1).unwrap();
        assert_eq!(p.p_hat, 1.0);
        assert!(empirical_z_prob(&ScrambleScheme::Crd, &KIndex::zero(2), 4, 8, 999, 1).is_err());
    }

    #[test]
    fn crd_alias_rate() {
        let k = KIndex::from_sets(&[&[1, 3], &[2]]).unwrap();
        let p = empirical_z_prob(&ScrambleScheme::Crd, &k, 6, 8, 100_000, 2).unwrap();
        assert!(p.z_score(2f64.powi(-6)) <= 4.0, "{p:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let k = KIndex::from_ints(vec![5]);
        let a = empirical_z_prob(&ScrambleScheme::Crd, &k, 3, 8, 5000, 3).unwrap();
        let b = empirical_z_prob(&ScrambleScheme::Crd, &k, 3, 8, 5000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_generator_has_no_deficiency() {
        for m in 1..=6 {
            let gen = GeneratingMatrices::identity(1, m).unwrap();
            let rd = rank_deficiency_r1(&gen).unwrap();
            assert_eq!(rd.r, 0.0);
            assert_eq!(rd.max_probability, 2f64.powi(-(m as i32)));
            assert!(rd.profiles.iter().all(|p| p.probability == 0.0));
        }
    }

    #[test]
    fn singular_generator_is_deficient() {
        // Rows 1 and 2 equal: profile t = 2 aliases whenever M(2,1) = 1.
        let c = BitMatrix::from_row_words(3, &[0b011, 0b011, 0b100]).unwrap();
        let gen = GeneratingMatrices::new(vec![c], "test").unwrap();
        let rd = rank_deficiency_r1(&gen).unwrap();
        assert_eq!(rd.max_probability, 0.5);
        assert_eq!(rd.argmax, Some(vec![2]));
        assert_eq!(rd.r, 2.0);
    }

    #[test]
    fn exact_profiles_match_monte_carlo() {
        let gen = GeneratingMatrices::builtin(2, 4).unwrap();
        let rd = rank_deficiency_r1(&gen).unwrap();
        assert_eq!(rd.profiles.len(), 24);
        for (i, p) in rd.profiles.iter().enumerate().step_by(5) {
            let mc = profile_probability_mc(&gen, &p.profile, 20_000, 10 + i as u64).unwrap();
            let sd = (p.probability * (1.0 - p.probability) / 20_000.0).sqrt();
            assert!(
                (mc.p_hat - p.probability).abs() <= 4.0 * sd.max(1.0 / 20_000.0),
                "{:?}: exact {} mc {}",
                p.profile,
                p.probability,
                mc.p_hat
            );
        }
    }

    #[test]
    fn nonsingular_one_dimensional_generators() {
        let mut rng = stream_rng(40, 0);
        for _ in 0..20 {
            let c = sample_nonsingular(6, &mut rng).unwrap();
            let gen = GeneratingMatrices::new(vec![c], "uniform").unwrap();
            assert_eq!(rank_deficiency_r1(&gen).unwrap().r, 0.0);
        }
    }

    #[test]
    fn profile_guard() {
        let gen = GeneratingMatrices::builtin(8, 10).unwrap();
        assert!(matches!(rank_deficiency_r1(&gen), Err(Error::Resource(_))));
    }

    #[test]
    fn marginal_orders() {
        let gen = Arc::new(GeneratingMatrices::builtin(2, 4).unwrap());
        let crd = marginal_order_check(&ScrambleScheme::Crd, 2, 4, 8, 1, 4000, 5).unwrap();
        assert!(crd.passes_from(1));
        assert_eq!(crd.marginal_order(), Some(0));
        let rls =
            marginal_order_check(&ScrambleScheme::Rls(gen.clone()), 2, 4, 8, 1, 4000, 6).unwrap();
        assert!(rls.passes_from(5));
        assert!(!rls.passes_from(1));
        assert_eq!(rls.marginal_order(), Some(1));
        let shift =
            marginal_order_check(&ScrambleScheme::ShiftOnly(gen), 2, 4, 8, 5, 4000, 7).unwrap();
        assert!(shift.rows.iter().all(|r| r.flagged));
    }

    #[test]
    fn xor_closure_small_cases() {
        assert_eq!(xor_closure_exact(1, 1).unwrap(), 0.0);
        assert_eq!(xor_closure_prob(1, 1, 1000, 8).unwrap().p_hat, 0.0);
        // Q_3 = {1, 2, 3, {1,2}} as integers 1, 2, 4, 3; brute force over 16 pairs.
        let q3 = [1u64, 2, 4, 3];
        let norm1 = |k: u64| {
            (0..64)
                .filter(|b| k >> b & 1 == 1)
                .map(|b| b + 1)
                .sum::<u32>()
        };
        let hits = q3
            .iter()
            .flat_map(|a| q3.iter().map(move |b| a ^ b))
            .filter(|&c| c != 0 && norm1(c) <= 3)
            .count();
        assert_eq!(xor_closure_exact(1, 3).unwrap(), hits as f64 / 16.0);
        let mc = xor_closure_prob(1, 3, 40_000, 9).unwrap();
        assert!(mc.z_score(hits as f64 / 16.0) <= 4.0);
    }

    #[test]
    fn kappa_histogram_q4() {
        let h = kappa_concentration_exact(1, 4).unwrap();
        assert_eq!(h.total, 6);
        assert_eq!(h.counts, BTreeMap::from([(1, 4), (2, 2)]));
        assert!((h.scale - (LAMBDA * 4.0).sqrt()).abs() < 1e-15);
        let mc = kappa_concentration(1, 4, 60_000, 11).unwrap();
        let p = Proportion::new(mc.counts[&2], mc.total);
        assert!(p.z_score(1.0 / 3.0) <= 4.0);
    }

    #[test]
    fn sign_curve_at_zero() {
        let f = integrands::get("x33exp").unwrap();
        let factory = SchemeFactory::new(SchemeKind::Crd, DirectionSource::Builtin);
        let rows = sign_quantile_curve(&factory, &f, &[0, 3], 64, 20_000, 12).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].p_gt - 0.0994).abs() < 4.0 * rows[0].stderr);
        assert!(rows[1].p_gt > rows[0].p_gt);
    }
}
