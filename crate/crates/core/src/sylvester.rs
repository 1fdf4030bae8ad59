//! Prime-power valuations, sylvester powers, and exhaustive checks of the
//! classical results about reciprocal sums over intervals.
//!
//! A prime power `p^v` is a *sylvester power* of a finite set `X` when
//! `p^v ‖ μX` and `p^v` divides exactly one element of `X`. Every sylvester
//! power of `X` exactly divides `δX`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{
    delta, mu, nat, sigma, weighted_sigma, FinSet, Nat, PosRational, ReciprocalAccumulator, WeightedTerm,
};
use crate::error::{Error, Result};
use crate::factor::{factor, FactorBudget, FactorMap};
use crate::primes::{is_probable_prime, Sieve};

/// The interval `[m, n] = {m, ..., n}` of positive integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Interval {
    pub m: u64,
    pub n: u64,
}

impl Interval {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::domain(format!(
                "[{m},{n}] is not an interval of positive integers"
            )));
        }
        Ok(Interval { m, n })
    }

    pub fn len(&self) -> u64 {
        self.n - self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_finset(&self) -> FinSet {
        FinSet::interval(self.m, self.n).expect("validated")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.m, self.n)
    }
}

/// The `v` with `p^v ‖ n`.
pub fn valuation(p: &Nat, n: &Nat) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::domain("valuation of 0 is unbounded"));
    }
    if !is_probable_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    Ok(valuation_unchecked(p, n))
}

fn valuation_unchecked(p: &Nat, n: &Nat) -> u32 {
    let mut v = 0;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        rest = q;
        v += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SylvesterPower {
    pub prime: Nat,
    pub exponent: u32,
}

impl SylvesterPower {
    pub fn new(prime: u64, exponent: u32) -> Self {
        SylvesterPower {
            prime: nat(prime),
            exponent,
        }
    }

    pub fn value(&self) -> Nat {
        num_traits::pow(self.prime.clone(), self.exponent as usize)
    }
}

impl fmt::Display for SylvesterPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exponent)
        }
    }
}

impl Serialize for SylvesterPower {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Factors every element; the maximal exponent of each prime gives `μX`,
/// and a direct divisibility count decides which prime powers are sylvester.
pub fn sylvester_powers(x: &FinSet, budget: &FactorBudget) -> Result<BTreeSet<SylvesterPower>> {
    if x.is_empty() {
        return Err(Error::domain("sylvester powers of the empty set"));
    }
    let mut mu_exponents: BTreeMap<Nat, u32> = BTreeMap::new();
    for elem in x {
        let f = factor(elem, budget)?;
        if !f.is_complete() {
            return Err(Error::resource(
                "factoring budget (rho iterations)",
                budget.rho_iterations,
                0,
            ));
        }
        for (p, e) in f.factors.iter() {
            let slot = mu_exponents.entry(p.clone()).or_insert(0);
            *slot = (*slot).max(e);
        }
    }
    Ok(mu_exponents
        .into_iter()
        .filter_map(|(p, v)| {
            let pv = num_traits::pow(p.clone(), v as usize);
            let count = x.iter().filter(|e| (*e % &pv).is_zero()).count();
            (count == 1).then_some(SylvesterPower { prime: p, exponent: v })
        })
        .collect())
}

/// Sylvester powers of `[m, n]` as sorted `(p, v)` pairs, computed without
/// factoring: for each prime `p <= n` the largest `v` with a multiple of `p^v`
/// in the interval, then a count of those multiples.
pub fn interval_sylvester_key(m: u64, n: u64, sieve: &Sieve) -> Vec<(u64, u32)> {
    assert!(1 <= m && m <= n && n <= sieve.limit());
    let mut out = Vec::new();
    for &p in sieve.primes_between(2, n) {
        let (v, pv) = interval_mu_valuation(m, n, p);
        if v > 0 && n / pv - (m - 1) / pv == 1 {
            out.push((p, v));
        }
    }
    out
}

/// `(v, p^v)` with `p^v ‖ μ[m, n]`.
fn interval_mu_valuation(m: u64, n: u64, p: u64) -> (u32, u64) {
    let mut v = 0;
    let mut pv = 1u64;
    while let Some(next) = pv.checked_mul(p) {
        if next > n || n / next < m.div_ceil(next) {
            break;
        }
        v += 1;
        pv = next;
    }
    (v, pv)
}

pub fn interval_sylvester_powers(iv: Interval, sieve: &Sieve) -> BTreeSet<SylvesterPower> {
    interval_sylvester_key(iv.m, iv.n, sieve)
        .into_iter()
        .map(|(p, v)| SylvesterPower::new(p, v))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationAt {
    pub interval: Interval,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoPowerReport {
    pub bound: u64,
    pub intervals_checked: u64,
    pub violations: Vec<ViolationAt>,
}

/// Whenever `2^v ‖ μ[m, n]`, exactly one element of `[m, n]` is a multiple of
/// `2^v`, and `n - m + 1 < 2^{v+1}`. Checked for all `1 <= m <= n <= bound`.
pub fn verify_two_power_lemma(bound: u64) -> TwoPowerReport {
    let mut report = TwoPowerReport {
        bound,
        intervals_checked: 0,
        violations: Vec::new(),
    };
    for m in 1..=bound {
        for n in m..=bound {
            report.intervals_checked += 1;
            if let Some(reason) = two_power_violation(m, n) {
                report.violations.push(ViolationAt {
                    interval: Interval { m, n },
                    reason,
                });
            }
        }
    }
    report
}

fn two_power_violation(m: u64, n: u64) -> Option<String> {
    let (v, pv) = interval_mu_valuation(m, n, 2);
    let multiples = (m..=n).filter(|x| x % pv == 0).count();
    if multiples != 1 {
        return Some(format!("{multiples} multiples of 2^{v}"));
    }
    if n - m + 1 >= 2 * pv {
        return Some(format!("length {} >= 2^{}", n - m + 1, v + 1));
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaCheck {
    pub power: SylvesterPower,
    pub delta_valuation: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaReport {
    pub delta: String,
    pub checks: Vec<DeltaCheck>,
}

impl DeltaReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.delta_valuation == c.power.exponent)
    }
}

/// For each sylvester power `p^v` of `x`, the valuation of `p` in `δx`.
pub fn verify_delta_divisibility(x: &FinSet, budget: &FactorBudget) -> Result<DeltaReport> {
    let d = delta(x)?;
    let checks = sylvester_powers(x, budget)?
        .into_iter()
        .map(|power| DeltaCheck {
            delta_valuation: valuation_unchecked(&power.prime, &d),
            power,
        })
        .collect();
    Ok(DeltaReport {
        delta: d.to_string(),
        checks,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationReport {
    /// A sylvester power of `x`, not of `y`, larger than `max y - min y`.
    pub witness: Option<SylvesterPower>,
    pub delta_differs: bool,
    pub sigma_differs: bool,
}

impl SeparationReport {
    /// A witness forces both δ and σ to differ.
    pub fn holds(&self) -> bool {
        self.witness.is_none() || (self.delta_differs && self.sigma_differs)
    }
}

pub fn check_delta_separation(x: &FinSet, y: &FinSet, budget: &FactorBudget) -> Result<SeparationReport> {
    let sx = sylvester_powers(x, budget)?;
    let sy = sylvester_powers(y, budget)?;
    let spread = y.max().expect("nonempty") - y.min().expect("nonempty");
    let witness = sx.difference(&sy).find(|pw| pw.value() > spread).cloned();
    Ok(SeparationReport {
        witness,
        delta_differs: delta(x)? != delta(y)?,
        sigma_differs: sigma(x)? != sigma(y)?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegralityReport {
    pub m_max: u64,
    pub n_max: u64,
    pub intervals_checked: u64,
    /// Intervals whose reciprocal sum is an integer.
    pub integral: Vec<Interval>,
}

impl IntegralityReport {
    /// Only `[1,1]` may have an integral sum.
    pub fn holds(&self) -> bool {
        self.integral.iter().all(|iv| iv.m == 1 && iv.n == 1)
    }
}

/// Integral reciprocal sums among intervals `[m, n]` starting at `m`,
/// `m <= n <= n_max`.
pub fn integral_intervals_from(m: u64, n_max: u64) -> Vec<Interval> {
    let mut acc = ReciprocalAccumulator::new();
    let mut out = Vec::new();
    for n in m..=n_max {
        acc.push(n);
        if acc.is_integral() {
            out.push(Interval { m, n });
        }
    }
    out
}

/// Every interval `[m, n]` with `m <= m_max`, `n <= n_max` whose reciprocal
/// sum is an integer. Runs in parallel over `m`.
pub fn check_theisinger_kurschak(m_max: u64, n_max: u64) -> IntegralityReport {
    let m_top = m_max.min(n_max);
    let integral: Vec<Interval> = (1..=m_top)
        .into_par_iter()
        .flat_map_iter(|m| integral_intervals_from(m, n_max))
        .collect();
    let intervals_checked = (1..=m_top).map(|m| n_max - m + 1).sum();
    IntegralityReport {
        m_max,
        n_max,
        intervals_checked,
        integral,
    }
}

/// Reduced reciprocal sums of `[m, n]` for `m <= n <= n_max`.
pub fn interval_sums_from(m: u64, n_max: u64) -> Vec<PosRational> {
    let mut acc = ReciprocalAccumulator::new();
    (m..=n_max)
        .map(|n| {
            acc.push(n);
            acc.value().expect("positive")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collision {
    pub first: Interval,
    pub second: Interval,
    pub value: PosRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    pub n_max: u64,
    pub intervals: u64,
    pub distinct_values: u64,
    pub collisions: Vec<Collision>,
}

impl InjectivityReport {
    pub fn holds(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Detects equal reciprocal sums among all intervals inside `[1, n_max]`,
/// keyed on the reduced fraction.
pub fn erdos_niven_scan(n_max: u64) -> InjectivityReport {
    let rows: Vec<Vec<PosRational>> = (1..=n_max)
        .into_par_iter()
        .map(|m| interval_sums_from(m, n_max))
        .collect();
    let mut seen: HashMap<PosRational, Interval> = HashMap::new();
    let mut collisions = Vec::new();
    let mut intervals = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let m = i as u64 + 1;
        for (j, value) in row.into_iter().enumerate() {
            let iv = Interval { m, n: m + j as u64 };
            intervals += 1;
            if let Some(prev) = seen.get(&value) {
                collisions.push(Collision {
                    first: *prev,
                    second: iv,
                    value,
                });
            } else {
                seen.insert(value, iv);
            }
        }
    }
    InjectivityReport {
        n_max,
        intervals,
        distinct_values: seen.len() as u64,
        collisions,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quadruple {
    pub first: Interval,
    pub second: Interval,
    pub powers: Vec<SylvesterPower>,
    /// `n - m <= n' - m'`: a counterexample to the conjectured inequality.
    pub violates: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadrupleReport {
    pub bound: u64,
    pub quadruples: Vec<Quadruple>,
}

impl QuadrupleReport {
    pub fn violations(&self) -> impl Iterator<Item = &Quadruple> {
        self.quadruples.iter().filter(|q| q.violates)
    }
}

/// Intervals grouped by their sylvester powers, as prime and exponent pairs.
pub type KeyGroups = HashMap<Vec<(u64, u32)>, Vec<Interval>>;

/// Sylvester keys of every `[m, n]` with `1 < m < n <= bound`, grouped by
/// equal key. Groups with a single interval are dropped.
pub fn sylvester_key_groups(bound: u64, sieve: &Sieve) -> KeyGroups {
    let keyed: Vec<(Interval, Vec<(u64, u32)>)> = (2..bound.max(2))
        .into_par_iter()
        .flat_map_iter(|m| (m + 1..=bound).map(move |n| (Interval { m, n }, interval_sylvester_key(m, n, sieve))))
        .collect();
    let mut groups: KeyGroups = HashMap::new();
    for (iv, key) in keyed {
        groups.entry(key).or_default().push(iv);
    }
    groups.retain(|_, v| v.len() > 1);
    groups
}

/// Quadruples `1 < m < n < m' < n' <= bound` whose first interval starts at
/// `m`, given the groups from [`sylvester_key_groups`]. Sorted.
pub fn quadruples_from(m: u64, groups: &KeyGroups) -> Vec<Quadruple> {
    let mut out = Vec::new();
    for (key, ivs) in groups {
        for a in ivs.iter().filter(|iv| iv.m == m) {
            for b in ivs.iter().filter(|iv| iv.m > a.n) {
                out.push(Quadruple {
                    first: *a,
                    second: *b,
                    powers: key.iter().map(|&(p, v)| SylvesterPower::new(p, v)).collect(),
                    violates: a.n - a.m <= b.n - b.m,
                });
            }
        }
    }
    out.sort_by_key(|q| (q.first, q.second));
    out
}

pub fn quadruple_scan(bound: u64) -> QuadrupleReport {
    let sieve = Sieve::new(bound.max(2));
    let groups = sylvester_key_groups(bound, &sieve);
    let quadruples = (2..bound.max(2)).flat_map(|m| quadruples_from(m, &groups)).collect();
    QuadrupleReport { bound, quadruples }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeGapReport {
    pub checked: u64,
    /// Cases where no witness prime was found.
    pub failures: Vec<Interval>,
    /// Cases outside the statement's range that were not checked.
    pub skipped: Vec<Interval>,
}

impl PrimeGapReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The least prime `p` with `n < p < 2n`.
pub fn chebyshev_witness(n: u64, sieve: &Sieve) -> Option<u64> {
    let lo = sieve.primes().partition_point(|&p| p <= n);
    sieve.primes().get(lo).copied().filter(|&p| p < 2 * n)
}

/// Checks for each `2 <= n <= n_max` that a prime lies strictly between
/// `n` and `2n`. Intervals are reported as `[n, 2n]`.
pub fn verify_chebyshev(n_max: u64) -> PrimeGapReport {
    let sieve = Sieve::new(2 * n_max.max(2));
    let failures = (2..=n_max)
        .filter(|&n| chebyshev_witness(n, &sieve).is_none())
        .map(|n| Interval { m: n, n: 2 * n })
        .collect();
    PrimeGapReport {
        checked: n_max.saturating_sub(1),
        failures,
        skipped: Vec::new(),
    }
}

/// The largest prime `p > n - m` dividing some element of `[m, n]`.
pub fn sylvester_witness(m: u64, n: u64, sieve: &Sieve) -> Option<u64> {
    sieve
        .primes_between(n - m + 1, n)
        .iter()
        .rev()
        .copied()
        .find(|&p| (n / p) * p >= m)
}

/// For all `m <= n < 2m` with `n <= n_max`: some prime `p > n - m` divides
/// `μ[m, n]`. `[1, 1]` is skipped since `μ[1,1] = 1` has no prime divisor.
pub fn verify_sylvester_theorem(n_max: u64) -> PrimeGapReport {
    let sieve = Sieve::new(n_max.max(2));
    let per_m: Vec<(u64, Vec<Interval>)> = (1..=n_max)
        .into_par_iter()
        .map(|m| {
            let mut checked = 0;
            let mut failures = Vec::new();
            for n in m..=n_max.min(2 * m - 1) {
                if m == 1 && n == 1 {
                    continue;
                }
                checked += 1;
                if sylvester_witness(m, n, &sieve).is_none() {
                    failures.push(Interval { m, n });
                }
            }
            (checked, failures)
        })
        .collect();
    let skipped = if n_max >= 1 {
        vec![Interval { m: 1, n: 1 }]
    } else {
        Vec::new()
    };
    PrimeGapReport {
        checked: per_m.iter().map(|(c, _)| c).sum(),
        failures: per_m.into_iter().flat_map(|(_, f)| f).collect(),
        skipped,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeTheoremsReport {
    pub chebyshev: PrimeGapReport,
    pub sylvester: PrimeGapReport,
}

impl PrimeTheoremsReport {
    pub fn holds(&self) -> bool {
        self.chebyshev.holds() && self.sylvester.holds()
    }
}

/// Both prime-existence checks up to `n_max`.
pub fn verify_prime_theorems(n_max: u64) -> Result<PrimeTheoremsReport> {
    if n_max < 2 {
        return Err(Error::domain("n_max must be at least 2"));
    }
    Ok(PrimeTheoremsReport {
        chebyshev: verify_chebyshev(n_max),
        sylvester: verify_sylvester_theorem(n_max),
    })
}

/// Which classical non-integrality statement a sum instantiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumFamily {
    /// `Σ_{j<k} 1/(m + dj)`
    Progression,
    /// `Σ_{j<k} 1/(m + dj)^{a_j}`
    PoweredProgression,
    /// `Σ_{i=m}^{n} a_i / i`
    WeightedInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumCase {
    pub family: SumFamily,
    pub m: u64,
    pub d: u64,
    pub k: u64,
    /// Per-term exponents (powered progressions) or numerators (weighted intervals).
    pub extra: Vec<u64>,
}

impl SumCase {
    pub fn progression(m: u64, d: u64, k: u64) -> Self {
        SumCase {
            family: SumFamily::Progression,
            m,
            d,
            k,
            extra: Vec::new(),
        }
    }

    pub fn powered(m: u64, d: u64, exponents: Vec<u64>) -> Self {
        SumCase {
            family: SumFamily::PoweredProgression,
            m,
            d,
            k: exponents.len() as u64,
            extra: exponents,
        }
    }

    /// `Σ_{i=m}^{m+len-1} a_i / i` with `a = weights`.
    pub fn weighted(m: u64, weights: Vec<u64>) -> Self {
        SumCase {
            family: SumFamily::WeightedInterval,
            m,
            d: 1,
            k: weights.len() as u64,
            extra: weights,
        }
    }

    /// Whether the case satisfies the hypotheses of its statement.
    pub fn in_hypothesis(&self) -> bool {
        if self.d == 0 || self.k == 0 || self.m == 0 || (self.m == 1 && self.k == 1) {
            return false;
        }
        match self.family {
            SumFamily::Progression => true,
            SumFamily::PoweredProgression => self.extra.iter().all(|&a| a >= 1),
            SumFamily::WeightedInterval => {
                let pairs = || (self.m..).zip(self.extra.iter().copied());
                let coprime = pairs().all(|(i, a)| a >= 1 && i.gcd(&a) == 1);
                // Odd numerators at even positions suffice once the interval
                // holds an even number.
                let has_even = self.k >= 2 || self.m.is_multiple_of(2);
                let odd_on_even = pairs().all(|(i, a)| a >= 1 && (i % 2 == 1 || a % 2 == 1));
                coprime || (has_even && odd_on_even)
            }
        }
    }

    pub fn terms(&self) -> Vec<WeightedTerm> {
        (0..self.k)
            .map(|j| {
                let base = self.m + self.d * j;
                match self.family {
                    SumFamily::Progression => WeightedTerm::new(base, 1, 1),
                    SumFamily::PoweredProgression => WeightedTerm::new(base, 1, self.extra[j as usize] as u32),
                    SumFamily::WeightedInterval => WeightedTerm::new(base, self.extra[j as usize], 1),
                }
            })
            .collect()
    }

    pub fn value(&self) -> Result<PosRational> {
        weighted_sigma(&self.terms())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonintegralityConfig {
    pub m: RangeInclusive<u64>,
    pub d: RangeInclusive<u64>,
    pub k: RangeInclusive<u64>,
    pub powered_samples: usize,
    pub weighted_samples: usize,
    pub seed: u64,
}

impl Default for NonintegralityConfig {
    fn default() -> Self {
        NonintegralityConfig {
            m: 2..=50,
            d: 1..=50,
            k: 1..=50,
            powered_samples: 200,
            weighted_samples: 200,
            seed: 0x5eed,
        }
    }
}

impl NonintegralityConfig {
    /// All cases, in a fixed order: progressions by `(m, d, k)`, then the
    /// seeded random powered progressions, then weighted intervals.
    pub fn cases(&self) -> Vec<SumCase> {
        let mut out = Vec::new();
        for m in self.m.clone() {
            for d in self.d.clone() {
                for k in self.k.clone() {
                    out.push(SumCase::progression(m, d, k));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.powered_samples {
            let m = rng.gen_range(1..=40);
            let d = rng.gen_range(1..=20);
            let k = rng.gen_range(1..=12);
            let exps = (0..k).map(|_| rng.gen_range(1..=4)).collect();
            out.push(SumCase::powered(m, d, exps));
        }
        for i in 0..self.weighted_samples {
            let m = rng.gen_range(1..=40);
            let len = rng.gen_range(1..=15);
            let weights = (m..m + len)
                .map(|x| loop {
                    let a: u64 = rng.gen_range(1..=60);
                    // alternate between the coprime rule and the odd-on-even rule
                    let ok = if i % 2 == 0 {
                        x.gcd(&a) == 1
                    } else {
                        x % 2 == 1 || a % 2 == 1
                    };
                    if ok {
                        break a;
                    }
                })
                .collect();
            out.push(SumCase::weighted(m, weights));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonintegralityReport {
    pub checked: BTreeMap<SumFamily, u64>,
    pub skipped: Vec<SumCase>,
    pub failures: Vec<SumCase>,
}

impl NonintegralityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outcome of one case: `None` when skipped, `Some(integral?)` otherwise.
pub fn evaluate_case(case: &SumCase) -> Result<Option<bool>> {
    if !case.in_hypothesis() {
        return Ok(None);
    }
    Ok(Some(case.value()?.is_integer()))
}

pub fn verify_nonintegrality(cfg: &NonintegralityConfig) -> Result<NonintegralityReport> {
    let cases = cfg.cases();
    let outcomes: Vec<Option<bool>> = cases.par_iter().map(evaluate_case).collect::<Result<_>>()?;
    let mut report = NonintegralityReport {
        checked: BTreeMap::new(),
        skipped: Vec::new(),
        failures: Vec::new(),
    };
    for (case, outcome) in cases.into_iter().zip(outcomes) {
        match outcome {
            None => report.skipped.push(case),
            Some(integral) => {
                *report.checked.entry(case.family).or_default() += 1;
                if integral {
                    report.failures.push(case);
                }
            }
        }
    }
    Ok(report)
}

/// Factorization of `μ` of an interval, from the per-prime valuations.
pub fn interval_mu_factors(iv: Interval, sieve: &Sieve) -> FactorMap {
    let mut f = FactorMap::new();
    for &p in sieve.primes_between(2, iv.n) {
        let (v, _) = interval_mu_valuation(iv.m, iv.n, p);
        if v > 0 {
            f.insert(BigUint::from(p), v);
        }
    }
    f
}

/// `μX` from the general routine, for cross-checks against [`interval_mu_factors`].
pub fn mu_of(iv: Interval) -> Nat {
    mu(&iv.to_finset()).expect("nonempty")
}

/// `p^v ‖ μX` with `p^v > max X - min X` forces `p^v` to be sylvester.
pub fn large_powers_are_sylvester(x: &FinSet, budget: &FactorBudget) -> Result<bool> {
    let s = sylvester_powers(x, budget)?;
    let m = mu(x)?;
    let f = factor(&m, budget)?;
    let spread = x.max().expect("nonempty") - x.min().expect("nonempty");
    let all = f.factors.iter().all(|(p, v)| {
        let pw = SylvesterPower {
            prime: p.clone(),
            exponent: v,
        };
        pw.value() <= spread || s.contains(&pw)
    });
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn set(xs: &[u64]) -> FinSet {
        FinSet::from_u64s(xs.iter().copied()).unwrap()
    }

    fn powers(s: &BTreeSet<SylvesterPower>) -> String {
        s.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(&nat(2), &nat(1000)).unwrap(), 3);
        assert_eq!(valuation(&nat(7), &nat(10)).unwrap(), 0);
        assert_eq!(valuation(&nat(3), &nat(54)).unwrap(), 3);
        assert!(valuation(&nat(4), &nat(16)).is_err());
        assert!(valuation(&nat(2), &nat(0)).is_err());
    }

    #[test]
    fn sylvester_examples() {
        let b = FactorBudget::default();
        // 1002 = 2·3·167 is the only multiple of 3 in the interval.
        assert_eq!(
            powers(&sylvester_powers(&FinSet::interval(1000, 1004).unwrap(), &b).unwrap()),
            "2^3,3,5^3,7,11,13,17,59,167,251"
        );
        assert_eq!(powers(&sylvester_powers(&set(&[12]), &b).unwrap()), "2^2,3");
        assert_eq!(
            powers(&sylvester_powers(&FinSet::interval(4, 7).unwrap(), &b).unwrap()),
            "2^2,3,5,7"
        );
        assert!(sylvester_powers(&set(&[2, 3, 6]), &b).unwrap().is_empty());
    }

    /// Straight from the definition: trial-divide every element by every
    /// prime power up to the maximum.
    fn brute_sylvester(xs: &[u64]) -> Vec<(u64, u32)> {
        let max = *xs.iter().max().unwrap();
        let mut out = Vec::new();
        for p in 2..=max {
            if !(2..p).all(|d| p % d != 0) {
                continue;
            }
            let val = |mut x: u64| {
                let mut v = 0;
                while x.is_multiple_of(p) {
                    x /= p;
                    v += 1;
                }
                v
            };
            let v = xs.iter().map(|&x| val(x)).max().unwrap();
            if v > 0 && xs.iter().filter(|&&x| val(x) >= v).count() == 1 {
                out.push((p, v));
            }
        }
        out
    }

    #[test]
    fn interval_keys_agree_with_definition_and_factoring() {
        let sieve = Sieve::new(200);
        let budget = FactorBudget::default();
        for m in 1..60 {
            for n in m..(m + 25).min(200) {
                let xs: Vec<u64> = (m..=n).collect();
                let key = interval_sylvester_key(m, n, &sieve);
                assert_eq!(key, brute_sylvester(&xs), "[{m},{n}]");
                let via_factoring: Vec<(u64, u32)> = sylvester_powers(&FinSet::interval(m, n).unwrap(), &budget)
                    .unwrap()
                    .into_iter()
                    .map(|p| (p.prime.to_u64().unwrap(), p.exponent))
                    .collect();
                assert_eq!(key, via_factoring);
                let iv = Interval::new(m, n).unwrap();
                assert_eq!(interval_mu_factors(iv, &sieve).product(), mu_of(iv));
            }
        }
    }

    #[test]
    fn prime_theorems_small() {
        assert!(verify_prime_theorems(1).is_err());
        let r = verify_prime_theorems(300).unwrap();
        assert!(r.holds());
        let sieve = Sieve::new(20);
        assert_eq!(chebyshev_witness(2, &sieve), Some(3));
        assert!([5, 7].contains(&chebyshev_witness(4, &sieve).unwrap()));
        assert_eq!(sylvester_witness(4, 7, &sieve), Some(7));
    }

    #[test]
    fn two_power_lemma_small() {
        assert_eq!(two_power_violation(5, 7), None);
        assert_eq!(interval_mu_valuation(5, 7, 2), (1, 2));
        assert_eq!(mu_of(Interval::new(5, 7).unwrap()), nat(210));
        assert!(verify_two_power_lemma(120).violations.is_empty());
    }

    #[test]
    fn delta_divisibility_examples() {
        let b = FactorBudget::default();
        let r = verify_delta_divisibility(&FinSet::interval(1000, 1004).unwrap(), &b).unwrap();
        assert!(r.holds());
        assert_eq!(r.checks.len(), 10);
        let r = verify_delta_divisibility(&set(&[2, 3, 6]), &b).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.delta, "1");
        let r = verify_delta_divisibility(&set(&[7]), &b).unwrap();
        assert_eq!(r.delta, "7");
        assert_eq!(
            r.checks,
            vec![DeltaCheck {
                power: SylvesterPower::new(7, 1),
                delta_valuation: 1
            }]
        );
    }

    #[test]
    fn separation_spot_checks() {
        let b = FactorBudget::default();
        // 7 is sylvester for [4,7] and absent from [8,10]
        let r =
            check_delta_separation(&FinSet::interval(4, 7).unwrap(), &FinSet::interval(8, 10).unwrap(), &b).unwrap();
        assert!(r.witness.is_some());
        assert!(r.holds());
        // equal sylvester sets give no witness
        let r =
            check_delta_separation(&FinSet::interval(4, 7).unwrap(), &FinSet::interval(20, 21).unwrap(), &b).unwrap();
        assert_eq!(r.witness, None);
    }

    #[test]
    fn integrality_small() {
        let r = check_theisinger_kurschak(100, 100);
        assert_eq!(r.integral, vec![Interval { m: 1, n: 1 }]);
        assert_eq!(r.intervals_checked, 5050);
        assert!(r.holds());
        assert!(!sigma(&FinSet::interval(2, 4).unwrap()).unwrap().is_integer());
    }

    #[test]
    fn erdos_niven_small() {
        let r = erdos_niven_scan(10);
        assert_eq!(r.intervals, 55);
        assert_eq!(r.distinct_values, 55);
        assert!(r.holds());
        assert_eq!(erdos_niven_scan(1).intervals, 1);
    }

    #[test]
    fn quadruples_to_25() {
        let r = quadruple_scan(25);
        let found: Vec<(u64, u64, u64, u64)> = r
            .quadruples
            .iter()
            .map(|q| (q.first.m, q.first.n, q.second.m, q.second.n))
            .collect();
        assert_eq!(found, vec![(4, 7, 20, 21), (5, 7, 14, 15)]);
        assert_eq!(r.violations().count(), 0);
        assert!(quadruple_scan(4).quadruples.is_empty());
    }

    #[test]
    fn prime_witnesses() {
        let sieve = Sieve::new(1000);
        assert_eq!(chebyshev_witness(2, &sieve), Some(3));
        assert_eq!(chebyshev_witness(4, &sieve), Some(5));
        assert_eq!(sylvester_witness(4, 7, &sieve), Some(7));
        assert_eq!(sylvester_witness(1, 1, &sieve), None);
        let r = verify_sylvester_theorem(200);
        assert!(r.holds());
        assert_eq!(r.skipped, vec![Interval { m: 1, n: 1 }]);
        assert!(verify_chebyshev(1000).holds());
    }

    #[test]
    fn nonintegrality_examples() {
        let c = SumCase::progression(2, 3, 4);
        assert_eq!(c.value().unwrap().to_string(), "403/440");
        assert_eq!(evaluate_case(&c).unwrap(), Some(false));
        let c = SumCase::progression(1, 1, 1);
        assert_eq!(evaluate_case(&c).unwrap(), None);
        let c = SumCase::powered(2, 1, vec![2, 1]);
        assert_eq!(c.value().unwrap().to_string(), "7/12");
        // odd singleton under the relaxed rule is outside the hypothesis: 3/3 = 1
        let c = SumCase::weighted(3, vec![3]);
        assert!(!c.in_hypothesis());
        assert!(c.value().unwrap().is_integer());
        let c = SumCase::weighted(3, vec![3, 5]);
        assert!(c.in_hypothesis());
        assert_eq!(evaluate_case(&c).unwrap(), Some(false));
    }

    #[test]
    fn nonintegrality_small_config() {
        let cfg = NonintegralityConfig {
            m: 1..=8,
            d: 1..=8,
            k: 1..=8,
            powered_samples: 30,
            weighted_samples: 30,
            seed: 7,
        };
        let r = verify_nonintegrality(&cfg).unwrap();
        assert!(r.holds());
        assert_eq!(r.checked[&SumFamily::Progression], 8 * 8 * 8 - 8);
        assert!(r
            .skipped
            .iter()
            .any(|c| c.family == SumFamily::Progression && c.m == 1 && c.k == 1));
        assert_eq!(cfg.cases(), cfg.cases());
    }
}
