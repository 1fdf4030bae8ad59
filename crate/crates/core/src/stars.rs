//! Iterates of `★: n ↦ n(n+1)` and the prime exponents along them.
//!
//! Since `★^{j+1} b = ★^j b · (★^j b + 1)` and consecutive integers are
//! coprime, each step only needs `★^j b + 1` factored, and a prime's
//! exponent never changes after the first iterate it divides.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{decimal_digits, nat, parse_nat, Nat};
use crate::error::{Error, Result};
use crate::factor::{factor, FactorBudget, FactorMap};
use crate::primes::Sieve;
use crate::words::star;

/// `★^k b`, refusing values with more than `digit_cap` decimal digits.
pub fn star_iterate(b: &Nat, k: u32, digit_cap: usize) -> Result<Nat> {
    let mut x = b.clone();
    for j in 0..k {
        let next = star(&x);
        if decimal_digits(&next) > digit_cap {
            return Err(Error::resource("digit cap", digit_cap as u64, j as u64));
        }
        x = next;
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    /// Least `i` with `p | ★^i b`.
    pub first_index: u32,
    /// The `n` with `p^n ‖ ★^j b` for all `j >= i`.
    pub exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarProfile {
    pub b: Nat,
    /// Iterates `★^0 b, …, ★^depth b` are fully factored.
    pub depth: u32,
    pub entries: BTreeMap<Nat, ProfileEntry>,
    /// Set when factoring `★^depth b + 1` ran out of budget.
    pub truncated: bool,
    current: Nat,
}

impl StarProfile {
    /// The profile of `b` at depth 0.
    pub fn seed(b: &Nat, budget: &FactorBudget) -> Result<Self> {
        if *b < nat(2) {
            return Err(Error::domain("star profiles need b >= 2"));
        }
        let f = factor(b, budget)?;
        let mut profile = StarProfile {
            b: b.clone(),
            depth: 0,
            entries: BTreeMap::new(),
            truncated: !f.is_complete(),
            current: b.clone(),
        };
        profile.absorb(&f.factors, 0);
        Ok(profile)
    }

    fn absorb(&mut self, factors: &FactorMap, index: u32) {
        for (p, e) in factors.iter() {
            let prev = self.entries.insert(
                p.clone(),
                ProfileEntry {
                    first_index: index,
                    exponent: e,
                },
            );
            assert!(prev.is_none(), "{p} divides consecutive integers");
        }
    }

    /// `★^depth b`.
    pub fn current(&self) -> &Nat {
        &self.current
    }

    /// Distinct primes of `★^k b`, for `k <= depth`.
    pub fn primes_at(&self, k: u32) -> impl Iterator<Item = &Nat> {
        self.entries
            .iter()
            .filter(move |(_, e)| e.first_index <= k)
            .map(|(p, _)| p)
    }

    /// Deepens the profile to `depth`, stopping early if the budget runs out.
    pub fn extend(&mut self, depth: u32, budget: &FactorBudget, digit_cap: usize) -> Result<()> {
        while self.depth < depth && !self.truncated {
            let next_factor = &self.current + 1u32;
            assert!(self.current.gcd(&next_factor).is_one());
            let next = &self.current * &next_factor;
            if decimal_digits(&next) > digit_cap {
                return Err(Error::resource("digit cap", digit_cap as u64, self.depth as u64));
            }
            let f = factor(&next_factor, budget)?;
            if !f.is_complete() {
                self.truncated = true;
                break;
            }
            self.absorb(&f.factors, self.depth + 1);
            self.current = next;
            self.depth += 1;
        }
        Ok(())
    }

    /// Checks by direct division that every profiled exponent holds at every
    /// iterate from its first index through `depth`, that primes are absent
    /// before their first index, and that the profiled primes account for each
    /// iterate completely. Returns the first failure.
    pub fn verify(&self) -> std::result::Result<(), String> {
        let mut x = self.b.clone();
        for j in 0..=self.depth {
            let mut rest = x.clone();
            for (p, e) in &self.entries {
                let mut v = 0;
                loop {
                    let (q, r) = rest.div_rem(p);
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    v += 1;
                }
                let expected = if e.first_index <= j { e.exponent } else { 0 };
                if v != expected {
                    return Err(format!("{p}^{v} exactly divides iterate {j}, profile says {expected}"));
                }
            }
            if !rest.is_one() {
                return Err(format!("iterate {j} has unprofiled cofactor {rest}"));
            }
            x = star(&x);
        }
        Ok(())
    }

    pub fn records(&self) -> Vec<ProfileRecord> {
        self.entries
            .iter()
            .map(|(p, e)| ProfileRecord {
                b: self.b.to_string(),
                prime: p.to_string(),
                first_index: e.first_index,
                exponent: e.exponent,
                verified_through_depth: self.depth,
            })
            .collect()
    }

    /// Rebuilds a profile from stored records so it can be extended.
    pub fn from_records(records: &[ProfileRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::parse("no profile records"))?;
        let b = parse_nat(&first.b)?;
        let depth = first.verified_through_depth;
        let mut entries = BTreeMap::new();
        for r in records {
            if r.b != first.b || r.verified_through_depth != depth {
                return Err(Error::parse("profile records disagree on b or depth"));
            }
            if r.first_index > depth || r.exponent == 0 {
                return Err(Error::parse(format!("bad record for prime {}", r.prime)));
            }
            entries.insert(
                parse_nat(&r.prime)?,
                ProfileEntry {
                    first_index: r.first_index,
                    exponent: r.exponent,
                },
            );
        }
        let current = star_iterate(&b, depth, usize::MAX)?;
        let product: Nat = entries
            .iter()
            .map(|(p, e)| num_traits::pow(p.clone(), e.exponent as usize))
            .product();
        if product != current {
            return Err(Error::parse("profile records do not multiply to the iterate"));
        }
        Ok(StarProfile {
            b,
            depth,
            entries,
            truncated: false,
            current,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub b: String,
    pub prime: String,
    pub first_index: u32,
    pub exponent: u32,
    pub verified_through_depth: u32,
}

/// Profile of `b` through `depth`; truncated if the budget runs out.
pub fn exponent_profile(b: &Nat, depth: u32, budget: &FactorBudget, digit_cap: usize) -> Result<StarProfile> {
    let mut p = StarProfile::seed(b, budget)?;
    p.extend(depth, budget, digit_cap)?;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthRow {
    pub b: u64,
    pub k: u32,
    /// `★^k b > b^(2^k)`; not asked at `k = 0`.
    pub growth: Option<bool>,
    pub distinct_primes: usize,
    /// At least `k + 1` distinct primes for `k >= 1`, at least one at `k = 0`.
    pub prime_count_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Bases whose profile did not reach the requested depth.
    pub truncated: Vec<u64>,
    /// Bases whose profile failed direct verification, with the reason.
    pub unstable: Vec<(u64, String)>,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.truncated.is_empty()
            && self.unstable.is_empty()
            && self.rows.iter().all(|r| r.growth != Some(false) && r.prime_count_ok)
    }
}

pub fn check_star_growth_and_primecount(
    bases: std::ops::RangeInclusive<u64>,
    depth: u32,
    budget: &FactorBudget,
    digit_cap: usize,
) -> Result<GrowthReport> {
    use rayon::prelude::*;
    let profiles: Vec<(u64, StarProfile)> = bases
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| exponent_profile(&nat(b), depth, budget, digit_cap).map(|p| (b, p)))
        .collect::<Result<_>>()?;
    let mut report = GrowthReport {
        rows: Vec::new(),
        truncated: Vec::new(),
        unstable: Vec::new(),
    };
    for (b, profile) in profiles {
        if profile.depth < depth {
            report.truncated.push(b);
        }
        if let Err(why) = profile.verify() {
            report.unstable.push((b, why));
        }
        let mut x = nat(b);
        for k in 0..=profile.depth {
            let distinct = profile.primes_at(k).count();
            let growth = (k >= 1).then(|| x > num_traits::pow(nat(b), 1usize << k));
            let needed = if k == 0 { 1 } else { k as usize + 1 };
            report.rows.push(GrowthRow {
                b,
                k,
                growth,
                distinct_primes: distinct,
                prime_count_ok: distinct >= needed,
            });
            x = star(&x);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PbReport {
    pub b: String,
    pub depth: u32,
    pub prime_bound: u64,
    /// Primes dividing some `★^j b` with `j <= depth`.
    pub observed: Vec<u64>,
    /// Primes not seen within `depth`.
    pub unobserved: Vec<u64>,
    /// The unobserved primes whose orbit `b, ★b, … mod p` enters a cycle
    /// avoiding 0, so they divide no iterate at all.
    pub excluded: Vec<u64>,
}

fn orbit_hits_zero(start: u64, p: u64, steps: Option<u32>) -> bool {
    let mut x = start % p;
    let mut seen = BTreeSet::new();
    let mut j = 0u32;
    loop {
        if x == 0 {
            return true;
        }
        if steps.is_some_and(|s| j >= s) || !seen.insert(x) {
            return false;
        }
        x = ((x as u128 * (x as u128 + 1)) % p as u128) as u64;
        j += 1;
    }
}

/// Membership of primes up to `prime_bound` in `P_b`, via the iteration
/// reduced mod each prime.
pub fn pb_membership(b: &Nat, depth: u32, prime_bound: u64) -> PbReport {
    let sieve = Sieve::new(prime_bound.max(2));
    let mut report = PbReport {
        b: b.to_string(),
        depth,
        prime_bound,
        observed: Vec::new(),
        unobserved: Vec::new(),
        excluded: Vec::new(),
    };
    for &p in sieve.primes() {
        let start = (b % p).to_u64().expect("reduced mod p");
        if orbit_hits_zero(start, p, Some(depth)) {
            report.observed.push(p);
        } else {
            report.unobserved.push(p);
            if !orbit_hits_zero(start, p, None) {
                report.excluded.push(p);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primes_of(p: &StarProfile) -> Vec<(u64, u32, u32)> {
        p.entries
            .iter()
            .map(|(q, e)| (q.to_u64().unwrap(), e.first_index, e.exponent))
            .collect()
    }

    #[test]
    fn iterates() {
        assert_eq!(star_iterate(&nat(5), 0, 100).unwrap(), nat(5));
        assert_eq!(star_iterate(&nat(2), 3, 100).unwrap(), nat(1806));
        assert_eq!(star_iterate(&nat(3), 2, 100).unwrap(), nat(156));
        assert_eq!(star_iterate(&nat(2), 10, 50), Err(Error::resource("digit cap", 50, 6)));
    }

    #[test]
    fn profile_of_two() {
        let p = exponent_profile(&nat(2), 4, &FactorBudget::default(), 10_000).unwrap();
        assert_eq!(
            primes_of(&p),
            vec![(2, 0, 1), (3, 1, 1), (7, 2, 1), (13, 4, 1), (43, 3, 1), (139, 4, 1)]
        );
        assert_eq!(p.current(), &nat(3_263_442));
        assert!(p.verify().is_ok());
        let p0 = exponent_profile(&nat(2), 0, &FactorBudget::default(), 10_000).unwrap();
        assert_eq!(primes_of(&p0), vec![(2, 0, 1)]);
    }

    #[test]
    fn profile_of_three() {
        let p = exponent_profile(&nat(3), 2, &FactorBudget::default(), 10_000).unwrap();
        assert_eq!(primes_of(&p), vec![(2, 1, 2), (3, 0, 1), (13, 2, 1)]);
    }

    #[test]
    fn records_round_trip_and_extend() {
        let budget = FactorBudget::default();
        let shallow = exponent_profile(&nat(6), 3, &budget, 10_000).unwrap();
        let mut resumed = StarProfile::from_records(&shallow.records()).unwrap();
        resumed.extend(5, &budget, 10_000).unwrap();
        let direct = exponent_profile(&nat(6), 5, &budget, 10_000).unwrap();
        assert_eq!(resumed, direct);
        let mut bad = shallow.records();
        bad[0].exponent += 1;
        assert!(StarProfile::from_records(&bad).is_err());
    }

    #[test]
    fn tiny_budget_truncates() {
        let tight = FactorBudget {
            trial_limit: 10,
            rho_iterations: 10,
        };
        let p = exponent_profile(&nat(2), 6, &tight, 10_000).unwrap();
        assert!(p.truncated);
        assert!(p.depth < 6);
        assert!(p.verify().is_ok());
    }

    #[test]
    fn growth_small() {
        let r = check_star_growth_and_primecount(2..=4, 4, &FactorBudget::default(), 10_000).unwrap();
        assert!(r.holds());
        let row = r.rows.iter().find(|r| r.b == 2 && r.k == 3).unwrap();
        assert_eq!((row.growth, row.distinct_primes), (Some(true), 4));
        assert_eq!(r.rows.iter().find(|r| r.b == 3 && r.k == 0).unwrap().growth, None);
    }

    #[test]
    fn pb_sets() {
        let r = pb_membership(&nat(2), 4, 50);
        for p in [2, 3, 7, 13, 43] {
            assert!(r.observed.contains(&p));
        }
        assert!(r.excluded.iter().all(|p| r.unobserved.contains(p)));
        // 5 never divides: the orbit of 2 mod 5 is 2, 1, 2, ...
        assert!(r.excluded.contains(&5));
        let shifted = pb_membership(&nat(6), 3, 50);
        assert_eq!(shifted.observed, r.observed);
    }
}
