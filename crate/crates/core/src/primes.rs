//! Prime sieving and primality certificates.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::Nat;
use crate::factor::{factor, FactorBudget};

/// Smallest-prime-factor sieve up to `limit`.
#[derive(Clone, Debug)]
pub struct Sieve {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u64>,
}

impl Sieve {
    pub fn new(limit: u64) -> Self {
        assert!(limit < u32::MAX as u64, "sieve limit too large");
        let size = limit as usize + 1;
        let mut spf = vec![0u32; size];
        let mut primes = Vec::new();
        for i in 2..size {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u64);
            }
            let si = spf[i] as u64;
            for &p in &primes {
                let m = p * i as u64;
                if p > si || m as usize >= size {
                    break;
                }
                spf[m as usize] = p as u32;
            }
        }
        Sieve { limit, spf, primes }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p` with `lo <= p <= hi` (clipped to the sieve limit).
    pub fn primes_between(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p < lo);
        let b = self.primes.partition_point(|&p| p <= hi);
        &self.primes[a..b.max(a)]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        assert!(n <= self.limit, "{n} beyond sieve limit {}", self.limit);
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// `(prime, exponent)` pairs of `n`, ascending. `n` must be within the limit.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        assert!(n >= 1 && n <= self.limit, "{n} outside sieve range");
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// Shared sieve used for trial division.
pub(crate) fn small_sieve() -> &'static Sieve {
    static SIEVE: OnceLock<Sieve> = OnceLock::new();
    SIEVE.get_or_init(|| Sieve::new(1 << 20))
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller-Rabin with the first 13 prime bases is exact below this bound.
fn deterministic_mr_bound() -> &'static Nat {
    static BOUND: OnceLock<Nat> = OnceLock::new();
    BOUND.get_or_init(|| "3317044064679887385961981".parse().expect("literal"))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality test for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for a in MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn strong_probable_prime(n: &Nat, a: &Nat, d: &Nat, s: u64) -> bool {
    let n1 = n - 1u32;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Miller-Rabin over the first 13 prime bases: a proof below ~3.3·10^24,
/// a probable-prime test above.
pub fn is_probable_prime(n: &Nat) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    for p in MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> s;
    MR_BASES
        .iter()
        .all(|&a| strong_probable_prime(n, &BigUint::from(a), &d, s))
}

/// How primality of a factor was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimeCertificate {
    /// Miller-Rabin below its deterministic bound.
    Deterministic,
    /// Pocklington-Lehmer test over a factored part of `n - 1` exceeding √n.
    Pocklington,
    /// Passed Miller-Rabin only.
    Probable,
}

/// `None` if `n` is composite (or < 2); otherwise how strongly it is known prime.
pub fn certify_prime(n: &Nat, budget: &FactorBudget) -> Option<PrimeCertificate> {
    if n < &BigUint::from(2u32) || !is_probable_prime(n) {
        return None;
    }
    if n < deterministic_mr_bound() {
        return Some(PrimeCertificate::Deterministic);
    }
    if pocklington(n, budget) {
        Some(PrimeCertificate::Pocklington)
    } else {
        Some(PrimeCertificate::Probable)
    }
}

/// If `n - 1 = F·R` with `F² > n` fully factored into proven primes, and for
/// each prime `q | F` some base `a` has `a^{n-1} ≡ 1` and
/// `gcd(a^{(n-1)/q} - 1, n) = 1`, then `n` is prime.
fn pocklington(n: &Nat, budget: &FactorBudget) -> bool {
    let n1 = n - 1u32;
    let Ok(f) = factor(&n1, budget) else {
        return false;
    };
    let proven: Vec<(&Nat, u32)> = f.factors.iter().filter(|(p, _)| !f.uncertified.contains(p)).collect();
    let big_f = proven.iter().fold(Nat::one(), |acc, (p, e)| {
        acc * num_traits::pow(BigUint::clone(p), *e as usize)
    });
    if &big_f * &big_f <= *n {
        return false;
    }
    proven.iter().all(|(q, _)| {
        let exp = &n1 / *q;
        (2u32..200).any(|a| {
            let a = BigUint::from(a);
            if !a.modpow(&n1, n).is_one() {
                return false;
            }
            let t = a.modpow(&exp, n);
            t != Nat::zero() && (t - 1u32).gcd(n).is_one()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_basics() {
        let s = Sieve::new(1000);
        assert_eq!(s.primes_between(1, 100).len(), 25);
        assert_eq!(s.primes_between(10, 20), &[11, 13, 17, 19]);
        assert_eq!(s.primes_between(90, 100), &[97]);
        assert_eq!(s.factor(1000), vec![(2, 3), (5, 3)]);
        assert_eq!(s.factor(1), vec![]);
        assert!(s.is_prime(97) && !s.is_prime(91) && !s.is_prime(1));
    }

    #[test]
    fn u64_primality_matches_sieve() {
        let s = Sieve::new(100_000);
        for n in 0..100_000u64 {
            assert_eq!(is_prime_u64(n), n >= 2 && s.is_prime(n), "{n}");
        }
        // strong pseudoprimes to several small bases
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn big_certificates() {
        let budget = FactorBudget::default();
        let p: Nat = "170141183460469231731687303715884105727".parse().unwrap(); // 2^127 - 1
        assert_eq!(certify_prime(&p, &budget), Some(PrimeCertificate::Pocklington));
        let c = &p * BigUint::from(3u32);
        assert_eq!(certify_prime(&c, &budget), None);
        let q: Nat = "1000000000000000000000007".parse().unwrap();
        assert!(is_probable_prime(&q));
        assert_eq!(certify_prime(&q, &budget), Some(PrimeCertificate::Deterministic));
    }
}
