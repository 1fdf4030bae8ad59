use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::collection::btree_set;
use proptest::prelude::*;

use unitfrac::arith::ReciprocalAccumulator;
use unitfrac::factor::{factor, FactorBudget};
use unitfrac::primes::Sieve;
use unitfrac::scan::Checkpoint;
use unitfrac::sequence::step;
use unitfrac::sylvester::{interval_sylvester_powers, large_powers_are_sylvester, sylvester_powers, Interval};
use unitfrac::words::Word;
use unitfrac::{delta, mu, nat, nu, sigma, FinSet, PosRational};

fn finset(xs: &BTreeSet<u64>) -> FinSet {
    FinSet::from_u64s(xs.iter().copied()).unwrap()
}

fn small_set() -> impl Strategy<Value = BTreeSet<u64>> {
    btree_set(1u64..500, 1..12)
}

fn word() -> impl Strategy<Value = String> {
    "[ds]{0,6}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sigma_adds_over_disjoint_unions(a in small_set(), b in small_set()) {
        let b: BTreeSet<u64> = b.difference(&a).copied().collect();
        prop_assume!(!b.is_empty());
        let (x, y) = (finset(&a), finset(&b));
        prop_assert_eq!(sigma(&x.union(&y)).unwrap(), sigma(&x).unwrap() + sigma(&y).unwrap());
    }

    #[test]
    fn sigma_grows_with_the_set(a in small_set(), extra in 1u64..1000) {
        prop_assume!(!a.contains(&extra));
        let x = finset(&a);
        let mut bigger = a.clone();
        bigger.insert(extra);
        prop_assert!(sigma(&finset(&bigger)).unwrap() > sigma(&x).unwrap());
    }

    #[test]
    fn parts_are_reduced_and_delta_divides_mu(a in small_set()) {
        let x = finset(&a);
        let (n, d, m) = (nu(&x).unwrap(), delta(&x).unwrap(), mu(&x).unwrap());
        prop_assert!(n.gcd(&d).is_one());
        prop_assert!((&m % &d).is_zero());
        let lcm = a.iter().fold(BigUint::one(), |acc, v| acc.lcm(&BigUint::from(*v)));
        prop_assert_eq!(m, lcm);
    }

    #[test]
    fn accumulator_matches_sigma(a in small_set()) {
        let mut acc = ReciprocalAccumulator::new();
        for v in &a {
            acc.push(*v);
        }
        prop_assert_eq!(acc.value().unwrap(), sigma(&finset(&a)).unwrap());
        prop_assert_eq!(acc.lcm(), &mu(&finset(&a)).unwrap());
    }

    #[test]
    fn splitting_keeps_the_sum(z in 1u64..1_000_000) {
        let lhs = PosRational::unit(&nat(z)).unwrap();
        let rhs = sigma(&FinSet::from_u64s([z + 1, z * (z + 1)]).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn words_are_strictly_monotone(w in word(), n in 1u64..10_000) {
        let w: Word = w.parse().unwrap();
        let here = w.apply(&nat(n)).unwrap();
        let next = w.apply(&nat(n + 1)).unwrap();
        prop_assert!(next > here);
        prop_assert!(here >= nat(n) + w.len() as u64);
    }

    #[test]
    fn words_round_trip_through_text(w in word(), v in word()) {
        let a: Word = w.parse().unwrap();
        let b: Word = v.parse().unwrap();
        prop_assert_eq!(a.to_string(), w.clone());
        // Concatenation applies the right word first.
        let joined: Word = format!("{w}{v}").parse().unwrap();
        prop_assert_eq!(joined.apply(&nat(3)).unwrap(), a.apply(&b.apply(&nat(3)).unwrap()).unwrap());
    }

    #[test]
    fn a_step_keeps_sigma_and_adds_one(a in btree_set(2u64..200, 1..10)) {
        let x = finset(&a);
        let y = step(&x).unwrap();
        prop_assert_eq!(y.len(), x.len() + 1);
        prop_assert_eq!(sigma(&y).unwrap(), sigma(&x).unwrap());
        prop_assert!(y.min() >= x.min());
    }

    #[test]
    fn sylvester_routes_agree(m in 1u64..3000, len in 0u64..40) {
        let n = m + len;
        let sieve = Sieve::new(n.max(2));
        let by_interval = interval_sylvester_powers(Interval::new(m, n).unwrap(), &sieve);
        let by_factoring = sylvester_powers(&FinSet::interval(m, n).unwrap(), &FactorBudget::default()).unwrap();
        prop_assert_eq!(by_interval, by_factoring);
    }

    #[test]
    fn wide_prime_powers_are_sylvester(a in btree_set(1u64..100_000, 1..8)) {
        prop_assert!(large_powers_are_sylvester(&finset(&a), &FactorBudget::default()).unwrap());
    }

    #[test]
    fn sylvester_powers_divide_delta_exactly(a in btree_set(1u64..5000, 1..10)) {
        let x = finset(&a);
        let d = delta(&x).unwrap();
        for p in sylvester_powers(&x, &FactorBudget::default()).unwrap() {
            let pv = p.value();
            prop_assert!((&d % &pv).is_zero());
            prop_assert!(!(&d % (pv * &p.prime)).is_zero());
        }
    }

    #[test]
    fn factoring_multiplies_back(n in 1u64..u64::MAX) {
        let f = factor(&nat(n), &FactorBudget::default()).unwrap();
        prop_assert!(f.is_complete());
        prop_assert_eq!(f.factors.product(), nat(n));
    }

    #[test]
    fn tokens_round_trip_and_reject_edits(cursor in 0u64..1_000_000, at in 0usize..40) {
        let cp = Checkpoint {
            kind: "tk".into(),
            parameters: serde_json::json!({ "m_max": 10, "n_max": 10, "chunk": 3 }),
            cursor,
            counters: [("intervals".to_string(), cursor)].into(),
        };
        let token = cp.token();
        prop_assert_eq!(Checkpoint::from_token(&token).unwrap(), cp);
        let mut bytes = token.into_bytes();
        let i = at % bytes.len();
        bytes[i] = if bytes[i] == b'x' { b'y' } else { b'x' };
        prop_assert!(Checkpoint::from_token(&String::from_utf8(bytes).unwrap()).is_err());
    }
}
