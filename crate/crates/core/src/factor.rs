//! Integer factorization: trial division by sieve primes, then Brent's
//! variant of Pollard's rho on what remains, under an iteration budget.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::Nat;
use crate::error::{Error, Result};
use crate::primes::{certify_prime, small_sieve, PrimeCertificate};

/// Prime → exponent, iterated in ascending prime order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FactorMap(BTreeMap<Nat, u32>);

impl FactorMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Multiplies `p^e` into the map.
    pub fn insert(&mut self, p: Nat, e: u32) {
        if e > 0 {
            *self.0.entry(p).or_insert(0) += e;
        }
    }

    pub fn exponent(&self, p: &Nat) -> u32 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Nat, u32)> {
        self.0.iter().map(|(p, e)| (p, *e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &Nat> {
        self.0.keys()
    }

    /// Number of distinct primes.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> Nat {
        self.0
            .iter()
            .fold(Nat::one(), |acc, (p, e)| acc * num_traits::pow(p.clone(), *e as usize))
    }

    pub fn merge(&mut self, other: &FactorMap) {
        for (p, e) in other.iter() {
            self.insert(p.clone(), e);
        }
    }
}

impl fmt::Display for FactorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (p, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for FactorMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(p, e)| (p.to_string(), e)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorBudget {
    /// Trial-divide by every prime up to this bound (at most 2^20).
    pub trial_limit: u64,
    /// Total rho iterations allowed across the whole factorization.
    pub rho_iterations: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_limit: 1 << 16,
            rho_iterations: 20_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: FactorMap,
    /// Composite cofactors left when the budget ran out.
    pub unfactored: Vec<Nat>,
    /// Prime factors known only as probable primes.
    pub uncertified: Vec<Nat>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }
}

/// Factors `n >= 1`. An exhausted budget is not an error: the leftover
/// composite parts are listed in `unfactored`.
pub fn factor(n: &Nat, budget: &FactorBudget) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut out = Factorization {
        factors: FactorMap::new(),
        unfactored: Vec::new(),
        uncertified: Vec::new(),
    };
    let mut rest = n.clone();
    let sieve = small_sieve();
    let limit = budget.trial_limit.min(sieve.limit());
    for &p in sieve.primes_between(2, limit) {
        if let Some(small) = rest.to_u64() {
            if small < p * p {
                break;
            }
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.factors.insert(BigUint::from(p), e);
        }
    }
    if rest.is_one() {
        return Ok(out);
    }
    if let Some(small) = rest.to_u64() {
        if small <= limit.saturating_mul(limit) {
            // No prime factor up to `limit` remains, so `rest` is prime.
            out.factors.insert(rest, 1);
            return Ok(out);
        }
    }
    let mut remaining = budget.rho_iterations;
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        // Cofactor certification may factor m - 1; it gets a fresh, smaller budget.
        let sub = FactorBudget {
            trial_limit: budget.trial_limit,
            rho_iterations: budget.rho_iterations / 4,
        };
        if let Some(cert) = certify_prime(&m, &sub) {
            if cert == PrimeCertificate::Probable {
                out.uncertified.push(m.clone());
            }
            out.factors.insert(m, 1);
            continue;
        }
        match split(&m, &mut remaining) {
            Some(d) => {
                let other = &m / &d;
                stack.push(d);
                stack.push(other);
            }
            None => out.unfactored.push(m),
        }
    }
    out.unfactored.sort();
    out.uncertified.sort();
    Ok(out)
}

/// A nontrivial divisor of the composite `n`, or `None` once the budget is
/// spent.
fn split(n: &Nat, remaining: &mut u64) -> Option<Nat> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(r) = perfect_square_root(n) {
        return Some(r);
    }
    let mut c = 1u32;
    while *remaining > 0 {
        if let Some(d) = brent(n, &BigUint::from(c), remaining) {
            return Some(d);
        }
        c += 1;
    }
    None
}

fn perfect_square_root(n: &Nat) -> Option<Nat> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

fn abs_diff(a: &Nat, b: &Nat) -> Nat {
    if a > b {
        a - b
    } else {
        b - a
    }
}

/// One Brent cycle-finding run with `f(x) = x² + c mod n`. Returns `None`
/// when this `c` fails or the budget runs out.
fn brent(n: &Nat, c: &Nat, remaining: &mut u64) -> Option<Nat> {
    const BATCH: u64 = 128;
    let f = |x: &Nat| (x * x + c) % n;
    let mut y = BigUint::from(2u32);
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut q = Nat::one();
    let mut g = Nat::one();
    let mut r: u64 = 1;
    while g.is_one() {
        x = y.clone();
        if *remaining < r {
            *remaining = 0;
            return None;
        }
        *remaining -= r;
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            if *remaining < steps {
                *remaining = 0;
                return None;
            }
            *remaining -= steps;
            for _ in 0..steps {
                y = f(&y);
                q = (q * abs_diff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += steps;
        }
        r *= 2;
    }
    if &g == n {
        // The batch overshot; redo it one step at a time.
        loop {
            ys = f(&ys);
            g = abs_diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nat;

    fn fmap(pairs: &[(u64, u32)]) -> FactorMap {
        let mut m = FactorMap::new();
        for &(p, e) in pairs {
            m.insert(nat(p), e);
        }
        m
    }

    #[test]
    fn small_examples() {
        let b = FactorBudget::default();
        assert_eq!(
            factor(&nat(1001), &b).unwrap().factors,
            fmap(&[(7, 1), (11, 1), (13, 1)])
        );
        assert_eq!(
            factor(&nat(1806), &b).unwrap().factors,
            fmap(&[(2, 1), (3, 1), (7, 1), (43, 1)])
        );
        assert_eq!(factor(&nat(104_729), &b).unwrap().factors, fmap(&[(104_729, 1)]));
        assert!(factor(&nat(1), &b).unwrap().factors.is_empty());
        assert!(factor(&nat(0), &b).is_err());
    }

    #[test]
    fn rho_splits_large_semiprimes() {
        // two 10-digit primes
        let p = nat(1_000_000_007);
        let q = nat(9_999_999_967);
        let n = &p * &q * nat(12);
        let f = factor(&n, &FactorBudget::default()).unwrap();
        assert!(f.is_complete());
        assert_eq!(
            f.factors,
            fmap(&[(2, 2), (3, 1), (1_000_000_007, 1), (9_999_999_967, 1)])
        );
        assert_eq!(f.factors.product(), n);
    }

    #[test]
    fn exhausted_budget_reports_cofactor() {
        let p: Nat = "1000000000000000000000007".parse().unwrap();
        let q: Nat = "1000000000000000000000049".parse().unwrap();
        let n = &p * &q;
        let tight = FactorBudget {
            trial_limit: 100,
            rho_iterations: 1_000,
        };
        let f = factor(&(&n * nat(6)), &tight).unwrap();
        assert!(!f.is_complete());
        assert_eq!(f.unfactored, vec![n]);
        assert_eq!(f.factors, fmap(&[(2, 1), (3, 1)]));
    }

    #[test]
    fn squares_of_large_primes() {
        let p = nat(4_294_967_311); // > 2^32
        let f = factor(&(&p * &p), &FactorBudget::default()).unwrap();
        assert_eq!(f.factors, fmap(&[(4_294_967_311, 2)]));
    }

    #[test]
    fn display_form() {
        assert_eq!(fmap(&[(2, 3), (5, 3)]).to_string(), "2^3·5^3");
        assert_eq!(FactorMap::new().to_string(), "1");
    }
}
