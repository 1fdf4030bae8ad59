//! Exact arithmetic over finite sets of positive integers.
//!
//! Everything here is exact: sums of reciprocals are carried as reduced
//! fractions of arbitrary-precision integers, and no floating point value is
//! ever produced.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative integer.
pub type Nat = BigUint;

pub fn nat(n: u64) -> Nat {
    Nat::from(n)
}

/// Number of decimal digits of `n` (`0` has one digit).
pub fn decimal_digits(n: &Nat) -> usize {
    // log10(2) < 0.30103; the estimate is exact except near powers of ten.
    let bits = n.bits();
    if bits <= 3 {
        return 1;
    }
    let lo = ((bits - 1) as f64 * std::f64::consts::LOG10_2).floor() as usize + 1;
    let hi = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize;
    if lo == hi {
        lo
    } else if *n >= Nat::from(10u32).pow(hi as u32 - 1) {
        hi
    } else {
        hi - 1
    }
}

/// A positive rational number in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PosRational {
    num: Nat,
    den: Nat,
}

impl PosRational {
    /// Builds `num/den` reduced to lowest terms. Both parts must be positive.
    pub fn new(num: Nat, den: Nat) -> Result<Self> {
        if num.is_zero() || den.is_zero() {
            return Err(Error::domain(format!(
                "positive rational needs positive parts, got {num}/{den}"
            )));
        }
        let g = num.gcd(&den);
        if g.is_one() {
            Ok(PosRational { num, den })
        } else {
            Ok(PosRational {
                num: num / &g,
                den: den / g,
            })
        }
    }

    /// The unit fraction `1/x`.
    pub fn unit(x: &Nat) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::domain("1/0 is not a positive rational"));
        }
        Ok(PosRational {
            num: Nat::one(),
            den: x.clone(),
        })
    }

    pub fn integer(n: Nat) -> Result<Self> {
        PosRational::new(n, Nat::one())
    }

    pub fn numer(&self) -> &Nat {
        &self.num
    }

    pub fn denom(&self) -> &Nat {
        &self.den
    }

    pub fn into_parts(self) -> (Nat, Nat) {
        (self.num, self.den)
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }
}

impl Add for &PosRational {
    type Output = PosRational;

    fn add(self, rhs: &PosRational) -> PosRational {
        // a/b + c/d with g = gcd(b, d); the result's common factor divides g.
        let g = self.den.gcd(&rhs.den);
        if g.is_one() {
            let num = &self.num * &rhs.den + &rhs.num * &self.den;
            let den = &self.den * &rhs.den;
            return PosRational { num, den };
        }
        let b = &self.den / &g;
        let d = &rhs.den / &g;
        let t = &self.num * &d + &rhs.num * &b;
        let g2 = t.gcd(&g);
        PosRational {
            num: t / &g2,
            den: b * (&rhs.den / g2),
        }
    }
}

impl Add for PosRational {
    type Output = PosRational;

    fn add(self, rhs: PosRational) -> PosRational {
        &self + &rhs
    }
}

impl Ord for PosRational {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl PartialOrd for PosRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PosRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for PosRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num = parse_nat(n)?;
        let den = parse_nat(d)?;
        PosRational::new(num, den)
    }
}

impl Serialize for PosRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

pub(crate) fn parse_nat(s: &str) -> Result<Nat> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
        return Err(Error::parse(format!("not a decimal integer: {s:?}")));
    }
    Nat::parse_bytes(s.as_bytes(), 10).ok_or_else(|| Error::parse(format!("bad integer {s:?}")))
}

/// A finite set of distinct positive integers, stored in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FinSet {
    elems: Vec<Nat>,
}

impl FinSet {
    /// Builds a set from unordered input. Zeros and repeated values are
    /// rejected rather than silently dropped.
    pub fn new(elems: impl IntoIterator<Item = Nat>) -> Result<Self> {
        let mut elems: Vec<Nat> = elems.into_iter().collect();
        elems.sort_unstable();
        if elems.first().is_some_and(Zero::is_zero) {
            return Err(Error::domain("set elements must be positive"));
        }
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate element {}", w[0])));
        }
        Ok(FinSet { elems })
    }

    pub fn from_u64s(elems: impl IntoIterator<Item = u64>) -> Result<Self> {
        FinSet::new(elems.into_iter().map(Nat::from))
    }

    /// Wraps a vector that is already strictly increasing and positive.
    pub(crate) fn from_sorted(elems: Vec<Nat>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elems.first().is_none_or(|x| !x.is_zero()));
        FinSet { elems }
    }

    pub fn singleton(x: Nat) -> Result<Self> {
        FinSet::new([x])
    }

    /// The interval `[m, n] = {m, m+1, ..., n}`.
    pub fn interval(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::domain(format!("bad interval [{m},{n}]")));
        }
        Ok(FinSet {
            elems: (m..=n).map(Nat::from).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Nat> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Nat] {
        &self.elems
    }

    pub fn min(&self) -> Option<&Nat> {
        self.elems.first()
    }

    pub fn max(&self) -> Option<&Nat> {
        self.elems.last()
    }

    pub fn contains(&self, x: &Nat) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn is_disjoint(&self, other: &FinSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.elems.len() && j < other.elems.len() {
            match self.elems[i].cmp(&other.elems[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.elems.len() && j < other.elems.len() {
            match self.elems[i].cmp(&other.elems[j]) {
                Ordering::Less => {
                    out.push(self.elems[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.elems[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(self.elems[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.elems[i..]);
        out.extend_from_slice(&other.elems[j..]);
        FinSet { elems: out }
    }

    /// Removes `x` (if present) and inserts every element of `add`.
    /// Fails if an added element is already present.
    pub fn replace(&self, x: &Nat, add: &[Nat]) -> Result<FinSet> {
        let mut elems: Vec<Nat> = self.elems.iter().filter(|e| *e != x).cloned().collect();
        for a in add {
            match elems.binary_search(a) {
                Ok(_) => return Err(Error::domain(format!("{a} already in set"))),
                Err(pos) => elems.insert(pos, a.clone()),
            }
        }
        Ok(FinSet { elems })
    }

    pub fn into_vec(self) -> Vec<Nat> {
        self.elems
    }

    fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::domain(format!("{what} of the empty set is undefined")))
        } else {
            Ok(())
        }
    }
}

impl<'a> IntoIterator for &'a FinSet {
    type Item = &'a Nat;
    type IntoIter = std::slice::Iter<'a, Nat>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.elems.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for FinSet {
    type Err = Error;

    /// Parses the canonical `{a,b,c}` form. Element order in the input is
    /// free; duplicates are an error.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::parse(format!("set literal must look like {{a,b,c}}: {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(FinSet::default());
        }
        let elems = inner.split(',').map(parse_nat).collect::<Result<Vec<_>>>()?;
        FinSet::new(elems)
    }
}

impl Serialize for FinSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.elems.iter().map(|x| x.to_string()))
    }
}

impl<'de> Deserialize<'de> for FinSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(de)?;
        let elems = v
            .iter()
            .map(|s| parse_nat(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        FinSet::new(elems).map_err(serde::de::Error::custom)
    }
}

/// Serializes a big integer as a decimal string.
pub fn serialize_nat<S: Serializer>(n: &Nat, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    serializer.collect_str(n)
}

/// Adds fractions as a balanced binary tree so operands stay of similar size.
fn tree_sum(mut terms: Vec<PosRational>) -> Option<PosRational> {
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(&a + &b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop()
}

/// σS: the exact sum of reciprocals of the elements of `s`.
pub fn sigma(s: &FinSet) -> Result<PosRational> {
    s.require_nonempty("sigma")?;
    let terms = s.iter().map(PosRational::unit).collect::<Result<Vec<_>>>()?;
    Ok(tree_sum(terms).expect("nonempty"))
}

/// νS, the numerator of σS in lowest terms.
pub fn nu(s: &FinSet) -> Result<Nat> {
    sigma(s).map(|r| r.num)
}

/// δS, the denominator of σS in lowest terms.
pub fn delta(s: &FinSet) -> Result<Nat> {
    sigma(s).map(|r| r.den)
}

/// μS, the least common multiple of the elements.
pub fn mu(s: &FinSet) -> Result<Nat> {
    s.require_nonempty("mu")?;
    Ok(s.iter().fold(Nat::one(), |acc, x| acc.lcm(x)))
}

/// One term `weight / base^exponent` of a weighted reciprocal sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedTerm {
    pub base: Nat,
    pub weight: Nat,
    pub exponent: u32,
}

impl WeightedTerm {
    pub fn new(base: u64, weight: u64, exponent: u32) -> Self {
        WeightedTerm {
            base: nat(base),
            weight: nat(weight),
            exponent,
        }
    }
}

/// Exact value of `Σ weight_i / base_i^exponent_i`. Bases must be distinct
/// and every base, weight and exponent positive.
pub fn weighted_sigma(terms: &[WeightedTerm]) -> Result<PosRational> {
    if terms.is_empty() {
        return Err(Error::domain("weighted sum of no terms"));
    }
    let mut bases: Vec<&Nat> = terms.iter().map(|t| &t.base).collect();
    bases.sort_unstable();
    if let Some(w) = bases.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::domain(format!("duplicate base {}", w[0])));
    }
    let fracs = terms
        .iter()
        .map(|t| {
            if t.exponent == 0 {
                return Err(Error::domain("exponents must be at least 1"));
            }
            PosRational::new(t.weight.clone(), Pow::pow(&t.base, t.exponent))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tree_sum(fracs).expect("nonempty"))
}

/// Running sum of reciprocals kept over the least common multiple of the
/// terms seen so far: the value is `numer / lcm` with `lcm = μ` of the terms.
///
/// Pushing a term costs a handful of big-by-small operations, which is what
/// interval scans need.
#[derive(Clone, Debug)]
pub struct ReciprocalAccumulator {
    numer: Nat,
    lcm: Nat,
}

impl Default for ReciprocalAccumulator {
    fn default() -> Self {
        ReciprocalAccumulator {
            numer: Nat::zero(),
            lcm: Nat::one(),
        }
    }
}

impl ReciprocalAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: u64) {
        assert!(x > 0, "reciprocal of zero");
        let rem = (&self.lcm % x).to_u64_digits().first().copied().unwrap_or(0);
        let g = rem.gcd(&x);
        let scale = x / g;
        if scale != 1 {
            self.numer *= scale;
            self.lcm *= scale;
        }
        self.numer += &self.lcm / x;
    }

    /// The current lcm of all pushed terms.
    pub fn lcm(&self) -> &Nat {
        &self.lcm
    }

    /// Σ lcm/x over the pushed terms.
    pub fn scaled_sum(&self) -> &Nat {
        &self.numer
    }

    pub fn is_integral(&self) -> bool {
        !self.numer.is_zero() && (&self.numer % &self.lcm).is_zero()
    }

    pub fn value(&self) -> Result<PosRational> {
        PosRational::new(self.numer.clone(), self.lcm.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u64]) -> FinSet {
        FinSet::from_u64s(xs.iter().copied()).unwrap()
    }

    fn q(s: &str) -> PosRational {
        s.parse().unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&set(&[1])).unwrap(), q("1/1"));
        assert_eq!(sigma(&set(&[2, 3, 6])).unwrap(), q("1/1"));
        assert_eq!(sigma(&set(&[3, 13])).unwrap(), q("16/39"));
        assert_eq!(sigma(&FinSet::interval(2, 4).unwrap()).unwrap(), q("13/12"));
    }

    #[test]
    fn nu_delta_mu_examples() {
        assert_eq!(delta(&set(&[2, 3, 6])).unwrap(), nat(1));
        assert_eq!(nu(&set(&[5, 11])).unwrap(), nat(16));
        assert_eq!(delta(&set(&[7])).unwrap(), nat(7));
        assert_eq!(mu(&set(&[2, 3, 6])).unwrap(), nat(6));
        assert_eq!(mu(&set(&[4, 6])).unwrap(), nat(12));
        // 1000 = 2^3 5^3, 1001 = 7 11 13, 1002 = 2 3 167, 1003 = 17 59, 1004 = 2^2 251
        let expected = 8u64 * 125 * 7 * 11 * 13 * 3 * 167 * 17 * 59 * 251;
        assert_eq!(mu(&FinSet::interval(1000, 1004).unwrap()).unwrap(), nat(expected));
    }

    #[test]
    fn empty_set_is_a_domain_error() {
        let e = FinSet::default();
        assert!(matches!(sigma(&e), Err(Error::Domain(_))));
        assert!(matches!(nu(&e), Err(Error::Domain(_))));
        assert!(matches!(mu(&e), Err(Error::Domain(_))));
    }

    #[test]
    fn weighted_examples() {
        let t = |v: &[(u64, u64, u32)]| {
            v.iter()
                .map(|&(b, w, e)| WeightedTerm::new(b, w, e))
                .collect::<Vec<_>>()
        };
        assert_eq!(weighted_sigma(&t(&[(2, 1, 1), (3, 1, 1), (6, 1, 1)])).unwrap(), q("1"));
        assert_eq!(weighted_sigma(&t(&[(4, 1, 1), (3, 1, 1)])).unwrap(), q("7/12"));
        assert_eq!(weighted_sigma(&t(&[(9, 1, 1)])).unwrap(), q("1/9"));
        // 1/2^2 + 1/3 written with exponent rather than base 4
        assert_eq!(weighted_sigma(&t(&[(2, 1, 2), (3, 1, 1)])).unwrap(), q("7/12"));
        assert!(matches!(
            weighted_sigma(&t(&[(4, 1, 1), (4, 3, 1)])),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn finset_rejects_duplicates_and_zero() {
        assert!(FinSet::from_u64s([3, 1, 3]).is_err());
        assert!(FinSet::from_u64s([0, 1]).is_err());
        assert_eq!(set(&[6, 2, 3]).to_string(), "{2,3,6}");
        assert!("{2,2}".parse::<FinSet>().is_err());
        assert_eq!("{ 6, 3,2 }".parse::<FinSet>().unwrap(), set(&[2, 3, 6]));
        assert!("2,3".parse::<FinSet>().is_err());
    }

    #[test]
    fn rational_text_form() {
        assert_eq!(q("6/4").to_string(), "3/2");
        assert!("0/3".parse::<PosRational>().is_err());
        assert!("3/0".parse::<PosRational>().is_err());
        assert!(q("1/3") < q("1/2"));
    }

    #[test]
    fn decimal_digit_counts() {
        for n in [0u64, 1, 9, 10, 99, 100, 999_999, 1_000_000, u64::MAX] {
            assert_eq!(decimal_digits(&nat(n)), n.to_string().len(), "{n}");
        }
        let big = Nat::from(10u32).pow(200u32);
        assert_eq!(decimal_digits(&big), 201);
        assert_eq!(decimal_digits(&(big - 1u32)), 200);
    }

    #[test]
    fn accumulator_matches_sigma_on_intervals() {
        for m in 1..30u64 {
            let mut acc = ReciprocalAccumulator::new();
            for n in m..60 {
                acc.push(n);
                let s = FinSet::interval(m, n).unwrap();
                assert_eq!(acc.value().unwrap(), sigma(&s).unwrap());
                assert_eq!(acc.lcm(), &mu(&s).unwrap());
                assert_eq!(acc.is_integral(), m == 1 && n == 1);
            }
        }
    }
}
