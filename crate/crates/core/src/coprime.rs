//! Reciprocal sums over pairwise coprime ground sets, and the numerator ν.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{delta, nat, nu, sigma, FinSet, Nat};
use crate::error::{Error, Result};
use crate::factor::{factor, FactorBudget, FactorMap};
use crate::primes::{is_probable_prime, small_sieve};

pub fn is_pairwise_coprime(x: &FinSet) -> bool {
    let xs = x.as_slice();
    xs.iter()
        .enumerate()
        .all(|(i, a)| xs[i + 1..].iter().all(|b| a.gcd(b).is_one()))
}

/// A finite set whose elements are pairwise coprime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeGround(FinSet);

impl CoprimeGround {
    pub fn new(x: FinSet) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::domain("ground set is empty"));
        }
        if !is_pairwise_coprime(&x) {
            return Err(Error::domain(format!("{x} is not pairwise coprime")));
        }
        Ok(CoprimeGround(x))
    }

    pub fn set(&self) -> &FinSet {
        &self.0
    }
}

/// Nonempty subsets of `x` of size `size`, lexicographic by position.
pub fn subsets_of_size(x: &FinSet, size: usize) -> Vec<FinSet> {
    use itertools::Itertools;
    x.iter()
        .cloned()
        .combinations(size)
        .map(|c| FinSet::new(c).expect("subset of a set"))
        .collect()
}

/// All nonempty subsets, by size then lexicographic.
pub fn rank_ordered_subsets(x: &FinSet) -> Vec<FinSet> {
    (1..=x.len()).flat_map(|k| subsets_of_size(x, k)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetPair {
    pub first: FinSet,
    pub second: FinSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityCheck {
    pub ground: FinSet,
    pub subsets: u64,
    pub delta_collisions: Vec<SubsetPair>,
    pub sigma_collisions: Vec<SubsetPair>,
    /// Subsets with integral reciprocal sum.
    pub integral: Vec<FinSet>,
}

impl InjectivityCheck {
    /// δ and σ injective, and the only integral sum is at `{1}`.
    pub fn holds(&self) -> bool {
        let one = FinSet::from_u64s([1]).expect("literal");
        self.delta_collisions.is_empty() && self.sigma_collisions.is_empty() && self.integral.iter().all(|c| *c == one)
    }

    /// Whether every δ collision pairs some `C` with `C ∪ {1}`. Adding 1 to a
    /// set adds an integer to σ and leaves δ unchanged, so such pairs are
    /// unavoidable whenever 1 is in the ground set.
    pub fn delta_collisions_only_from_one(&self) -> bool {
        let one = crate::arith::nat(1);
        self.delta_collisions.iter().all(|pair| {
            let (small, big) = if pair.first.len() < pair.second.len() {
                (&pair.first, &pair.second)
            } else {
                (&pair.second, &pair.first)
            };
            big.contains(&one) && big.len() == small.len() + 1 && small.iter().all(|x| big.contains(x))
        })
    }
}

fn first_collisions<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = (K, FinSet)>) -> Vec<SubsetPair> {
    let mut seen: HashMap<K, FinSet> = HashMap::new();
    let mut out = Vec::new();
    for (k, s) in keys {
        match seen.get(&k) {
            Some(prev) => out.push(SubsetPair {
                first: prev.clone(),
                second: s,
            }),
            None => {
                seen.insert(k, s);
            }
        }
    }
    out
}

/// Enumerates the `2^|X| - 1` nonempty subsets and checks injectivity of δ
/// and σ, listing every integral sum. `cap` bounds the subset count.
pub fn verify_coprime_injectivity(x: &CoprimeGround, cap: u64) -> Result<InjectivityCheck> {
    let n = x.0.len() as u32;
    let count = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if count > cap {
        return Err(Error::resource("subset enumeration", cap, 0));
    }
    let subsets = rank_ordered_subsets(&x.0);
    let values: Vec<(Nat, crate::arith::PosRational)> = subsets
        .par_iter()
        .map(|c| {
            let s = sigma(c).expect("nonempty");
            (s.denom().clone(), s)
        })
        .collect();
    let delta_collisions = first_collisions(values.iter().map(|(d, _)| d.clone()).zip(subsets.iter().cloned()));
    let sigma_collisions = first_collisions(values.iter().map(|(_, s)| s.clone()).zip(subsets.iter().cloned()));
    let integral = values
        .iter()
        .zip(&subsets)
        .filter(|((_, s), _)| s.is_integer())
        .map(|(_, c)| c.clone())
        .collect();
    Ok(InjectivityCheck {
        ground: x.0.clone(),
        subsets: count,
        delta_collisions,
        sigma_collisions,
        integral,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuCollision {
    pub size: usize,
    pub set_a: FinSet,
    pub set_b: FinSet,
    #[serde(serialize_with = "crate::arith::serialize_nat")]
    pub nu: Nat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuCollisionReport {
    pub pool: FinSet,
    pub size: usize,
    pub pairwise_coprime: bool,
    pub subsets: u64,
    pub collisions: Vec<NuCollision>,
}

pub(crate) fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Every unordered pair of distinct `size`-subsets of `pool` sharing ν,
/// in rank order of the pair.
pub fn nu_collision_scan(pool: &FinSet, size: usize, cap: u64) -> Result<NuCollisionReport> {
    if size == 0 || size > pool.len() {
        return Err(Error::domain(format!("subset size {size} outside 1..={}", pool.len())));
    }
    let count = binomial(pool.len() as u64, size as u64).unwrap_or(u64::MAX);
    if count > cap {
        return Err(Error::resource("subset enumeration", cap, 0));
    }
    let subsets = subsets_of_size(pool, size);
    let nus: Vec<Nat> = subsets.par_iter().map(|c| nu(c).expect("nonempty")).collect();
    let mut groups: BTreeMap<&Nat, Vec<usize>> = BTreeMap::new();
    for (i, v) in nus.iter().enumerate() {
        groups.entry(v).or_default().push(i);
    }
    let mut pairs: Vec<(usize, usize)> = groups
        .values()
        .flat_map(|ix| {
            ix.iter()
                .enumerate()
                .flat_map(move |(a, &i)| ix[a + 1..].iter().map(move |&j| (i, j)))
        })
        .collect();
    pairs.sort_unstable();
    let collisions = pairs
        .into_iter()
        .map(|(i, j)| NuCollision {
            size,
            set_a: subsets[i].clone(),
            set_b: subsets[j].clone(),
            nu: nus[i].clone(),
        })
        .collect();
    Ok(NuCollisionReport {
        pool: pool.clone(),
        size,
        pairwise_coprime: is_pairwise_coprime(pool),
        subsets: count,
        collisions,
    })
}

/// `νC · (max C)^|C| >= |C| · ∏C`, compared as integers.
pub fn check_nu_lower_bound(c: &FinSet) -> Result<bool> {
    let v = nu(c)?;
    let k = c.len();
    let max = c.max().expect("nonempty");
    let lhs = v * num_traits::pow(max.clone(), k);
    let prod: Nat = c.iter().product();
    Ok(lhs >= prod * nat(k as u64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HunterReport {
    #[serde(serialize_with = "crate::arith::serialize_nat")]
    pub nu: Nat,
    pub coprime_to_inputs: bool,
    pub factors: FactorMap,
    pub complete: bool,
}

/// ν of `{q_1^{e_1}, …, q_k^{e_k}}`, its coprimality to every `q_i`, and its
/// factorization (the primes it yields are new relative to the inputs).
pub fn prime_hunter(primes: &[u64], exponents: &[u32], budget: &FactorBudget) -> Result<HunterReport> {
    if primes.len() != exponents.len() || primes.is_empty() {
        return Err(Error::domain("need one exponent per prime"));
    }
    let mut seen = HashSet::new();
    for (&q, &e) in primes.iter().zip(exponents) {
        if !is_probable_prime(&nat(q)) {
            return Err(Error::domain(format!("{q} is not prime")));
        }
        if e == 0 {
            return Err(Error::domain("exponents must be at least 1"));
        }
        if !seen.insert(q) {
            return Err(Error::domain(format!("duplicate prime {q}")));
        }
    }
    let set = FinSet::new(
        primes
            .iter()
            .zip(exponents)
            .map(|(&q, &e)| num_traits::pow(nat(q), e as usize)),
    )?;
    let v = nu(&set)?;
    let coprime_to_inputs = primes.iter().all(|&q| v.gcd(&nat(q)).is_one());
    let f = factor(&v, budget)?;
    Ok(HunterReport {
        nu: v,
        coprime_to_inputs,
        complete: f.is_complete(),
        factors: f.factors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeNuRow {
    pub k: usize,
    pub primes: Vec<u64>,
    #[serde(serialize_with = "crate::arith::serialize_nat")]
    pub nu: Nat,
    /// `ν > k · p_1 ⋯ p_{k-1}` (vacuous for k = 1).
    pub exceeds_bound: bool,
    pub factors: FactorMap,
    pub complete: bool,
    /// Every prime divisor of ν exceeds `p_k`.
    pub divisors_exceed_pk: bool,
}

/// ν over the first `k` primes for `k = 1..=k_max`.
pub fn first_primes_nu(k_max: usize, budget: &FactorBudget) -> Result<Vec<PrimeNuRow>> {
    let all = small_sieve().primes();
    (1..=k_max)
        .map(|k| {
            let ps = all[..k].to_vec();
            let v = nu(&FinSet::from_u64s(ps.iter().copied())?)?;
            let bound: Nat = ps[..k - 1].iter().map(|&p| nat(p)).product::<Nat>() * nat(k as u64);
            let f = factor(&v, budget)?;
            let pk = ps[k - 1];
            let divisors_exceed_pk = f.factors.primes().all(|p| p.to_u64().is_none_or(|p| p > pk));
            Ok(PrimeNuRow {
                k,
                exceeds_bound: k == 1 || v > bound,
                divisors_exceed_pk,
                complete: f.is_complete(),
                factors: f.factors,
                primes: ps,
                nu: v,
            })
        })
        .collect()
}

/// Counts of ν values over all nonempty subsets of `x`, grouped by decimal
/// digit count of ν.
pub fn nu_digit_histogram(x: &FinSet, cap: u64) -> Result<BTreeMap<usize, u64>> {
    let n = x.len() as u32;
    let count = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if count > cap {
        return Err(Error::resource("subset enumeration", cap, 0));
    }
    let mut hist = BTreeMap::new();
    for c in rank_ordered_subsets(x) {
        *hist.entry(crate::arith::decimal_digits(&nu(&c)?)).or_default() += 1;
    }
    Ok(hist)
}

/// δ of each subset, exposed for callers that want the raw map.
pub fn subset_deltas(x: &FinSet) -> Vec<(FinSet, Nat)> {
    rank_ordered_subsets(x)
        .into_iter()
        .map(|c| {
            let d = delta(&c).expect("nonempty");
            (c, d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u64]) -> FinSet {
        FinSet::from_u64s(xs.iter().copied()).unwrap()
    }

    #[test]
    fn coprimality() {
        assert!(is_pairwise_coprime(&set(&[2, 3, 5, 7])));
        assert!(is_pairwise_coprime(&set(&[4, 9, 25])));
        assert!(!is_pairwise_coprime(&set(&[6, 10])));
        assert!(CoprimeGround::new(set(&[6, 10])).is_err());
    }

    #[test]
    fn injectivity_examples() {
        let g = CoprimeGround::new(set(&[1, 2, 3, 5, 7])).unwrap();
        let r = verify_coprime_injectivity(&g, 1 << 20).unwrap();
        assert_eq!(r.subsets, 31);
        assert!(r.sigma_collisions.is_empty());
        assert_eq!(r.integral, vec![set(&[1])]);
        // δ{2} = δ{1,2} = 2: one collision per nonempty subset of {2,3,5,7}
        assert_eq!(r.delta_collisions.len(), 15);
        assert_eq!(
            r.delta_collisions[0],
            SubsetPair {
                first: set(&[2]),
                second: set(&[1, 2])
            }
        );
        assert!(r.delta_collisions_only_from_one());
        assert!(!r.holds());
        let g = CoprimeGround::new(set(&[2, 3, 5, 7, 11])).unwrap();
        assert!(verify_coprime_injectivity(&g, 1 << 20).unwrap().holds());
        let ds: Vec<String> = subset_deltas(&set(&[2, 3]))
            .into_iter()
            .map(|(_, d)| d.to_string())
            .collect();
        assert_eq!(ds, ["2", "3", "6"]);
        assert!(matches!(
            verify_coprime_injectivity(&g, 30),
            Err(Error::Resource { .. })
        ));
        // without coprimality, injectivity fails: σ{2,3,6} = σ{1}
        let r = verify_coprime_injectivity(&CoprimeGround(set(&[1, 2, 3, 6])), 100).unwrap();
        assert!(!r.sigma_collisions.is_empty());
    }

    #[test]
    fn nu_collisions() {
        let primes = set(&[2, 3, 5, 7, 11, 13]);
        let r = nu_collision_scan(&primes, 2, 1000).unwrap();
        let found: Vec<(String, String, String)> = r
            .collisions
            .iter()
            .map(|c| (c.set_a.to_string(), c.set_b.to_string(), c.nu.to_string()))
            .collect();
        assert!(found.contains(&("{3,13}".into(), "{5,11}".into(), "16".into())));
        assert!(found.contains(&("{5,13}".into(), "{7,11}".into(), "18".into())));
        let singles = nu_collision_scan(&primes, 1, 1000).unwrap();
        assert_eq!(singles.collisions.len(), 15);
        assert!(singles.collisions.iter().all(|c| c.nu == nat(1)));
        assert!(nu_collision_scan(&set(&[2, 3, 5]), 2, 10)
            .unwrap()
            .collisions
            .is_empty());
        assert!(nu_collision_scan(&primes, 3, 5).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!(check_nu_lower_bound(&set(&[3, 13])).unwrap());
        assert!(check_nu_lower_bound(&set(&[7])).unwrap());
        assert!(check_nu_lower_bound(&set(&[2, 3])).unwrap());
    }

    #[test]
    fn hunter_examples() {
        let b = FactorBudget::default();
        let r = prime_hunter(&[2, 3], &[1, 1], &b).unwrap();
        assert_eq!((r.nu.to_string(), r.coprime_to_inputs), ("5".into(), true));
        let r = prime_hunter(&[2, 3], &[2, 1], &b).unwrap();
        assert_eq!(r.nu, nat(7));
        assert_eq!(prime_hunter(&[11], &[3], &b).unwrap().nu, nat(1));
        assert!(prime_hunter(&[3, 3], &[1, 2], &b).is_err());
        assert!(prime_hunter(&[4], &[1], &b).is_err());
    }

    #[test]
    fn first_primes() {
        let rows = first_primes_nu(10, &FactorBudget::default()).unwrap();
        assert_eq!(rows[1].nu, nat(5));
        assert_eq!(rows[2].nu, nat(31));
        assert!(rows
            .iter()
            .all(|r| r.exceeds_bound && r.divisors_exceed_pk && r.complete));
    }
}
