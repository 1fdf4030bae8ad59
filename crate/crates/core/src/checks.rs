//! The catalog behind `unitfrac verify`: each check runs one statement over
//! a bounded range and says whether it held.

use crate::arith::{nat, sigma, FinSet, Nat};
use crate::cli::RunConfig;
use crate::coprime::{
    check_nu_lower_bound, first_primes_nu, nu_collision_scan, rank_ordered_subsets, verify_coprime_injectivity,
    CoprimeGround,
};
use crate::error::Result;
use crate::family::{assemble_family, IndexStrategy, RationalTarget};
use crate::primes::Sieve;
use crate::sequence::{disjoint_subsequence, run};
use crate::stars::{check_star_growth_and_primecount, pb_membership};
use crate::sylvester::{
    check_theisinger_kurschak, erdos_niven_scan, interval_sylvester_powers, quadruple_scan, sylvester_powers,
    verify_chebyshev, verify_delta_divisibility, verify_nonintegrality, verify_sylvester_theorem,
    verify_two_power_lemma, Interval, NonintegralityConfig,
};
use crate::words::{check_length_uniqueness, level_max_expected, level_min_expected, level_multiset, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub holds: bool,
    pub detail: String,
}

type Runner = Box<dyn Fn(&RunConfig) -> Result<CheckOutcome> + Send + Sync>;

pub struct Check {
    pub name: &'static str,
    pub run: Runner,
}

fn check(name: &'static str, f: impl Fn(&RunConfig) -> Result<CheckOutcome> + Send + Sync + 'static) -> Check {
    Check { name, run: Box::new(f) }
}

fn outcome(holds: bool, detail: impl Into<String>) -> Result<CheckOutcome> {
    Ok(CheckOutcome {
        holds,
        detail: detail.into(),
    })
}

fn set(xs: &[u64]) -> FinSet {
    FinSet::from_u64s(xs.iter().copied()).expect("literal set")
}

/// All checks, at full bounds or (with `quick`) small ones.
pub fn catalog(quick: bool) -> Vec<Check> {
    let pick = move |full: u64, small: u64| if quick { small } else { full };
    vec![
        check("word", |_| {
            let w: Word = "dssddd".parse()?;
            let v = w.apply(&nat(1))?;
            outcome(
                v == nat(421) && w.len() == 6,
                format!("{w} 1 = {v}, length {}", w.len()),
            )
        }),
        check("levels", move |cfg| {
            let k_top = pick(10, 6) as u32;
            let mut bad = Vec::new();
            for b in [2u64, 3, 5] {
                let bn = nat(b);
                for k in 0..=k_top {
                    let lvl = level_multiset(k, &bn, &cfg.levels)?;
                    let sum_ok = lvl
                        .to_finset()
                        .and_then(|s| sigma(&s))
                        .is_ok_and(|s| s == crate::arith::PosRational::new(nat(1), bn.clone()).expect("b > 0"));
                    let ok = lvl.is_simple()
                        && lvl.distinct_len() == 1 << k
                        && sum_ok
                        && *lvl.min() == level_min_expected(k, &bn)
                        && *lvl.max() == level_max_expected(k, &bn);
                    if !ok {
                        bad.push(format!("W_{k}({b})"));
                    }
                }
            }
            outcome(
                bad.is_empty(),
                format!("b in {{2,3,5}}, k <= {k_top}; failures: {bad:?}"),
            )
        }),
        check("lengths", move |_| {
            let n = pick(1000, 200);
            let r = check_length_uniqueness(2, n)?;
            outcome(
                r.holds(),
                format!(
                    "b=2, n <= {n}: {} words, {} violations",
                    r.words_checked,
                    r.violations.len()
                ),
            )
        }),
        check("family", |cfg| {
            let mut ok = true;
            let mut notes = Vec::new();
            for (a, count) in [(1, 3), (2, 2), (3, 2)] {
                let f = assemble_family(
                    &RationalTarget::new(a, 2)?,
                    count,
                    cfg.levels.max_k,
                    IndexStrategy::Greedy,
                    &cfg.levels,
                )?;
                ok &= f.verify();
                notes.push(format!("{a}/2 -> {} sets", f.blocks.len()));
            }
            outcome(ok, notes.join(", "))
        }),
        check("sequence", |cfg| {
            let t = run(&set(&[2]), 60, cfg.step_cap)?;
            let a6 = &t.states[5].set;
            let d = disjoint_subsequence(&set(&[2]), 30)?;
            let first7 = t
                .first_index_with_min(&nat(7))
                .map_or("beyond 60 terms".to_string(), |i| format!("A_{i}"));
            let ok = *a6 == set(&[6, 7, 12, 20, 30, 42]) && d.indices == [1, 2, 5] && t.sigma == sigma(a6)?;
            outcome(
                ok,
                format!(
                    "A_6 = {a6}, disjoint indices {:?}, first minimum 7 at {first7}",
                    d.indices
                ),
            )
        }),
        check("two-power", move |_| {
            let b = pick(500, 100);
            let r = verify_two_power_lemma(b);
            outcome(
                r.violations.is_empty(),
                format!(
                    "{} intervals up to {b}, {} violations",
                    r.intervals_checked,
                    r.violations.len()
                ),
            )
        }),
        check("sylvester-delta", |cfg| {
            let x = FinSet::interval(1000, 1004)?;
            let r = verify_delta_divisibility(&x, &cfg.factoring)?;
            let powers: Vec<String> = r.checks.iter().map(|c| c.power.to_string()).collect();
            outcome(r.holds(), format!("S[1000,1004] = {{{}}}", powers.join(",")))
        }),
        check("sylvester-routes", move |cfg| {
            let top = pick(150, 60);
            let sieve = Sieve::new(top);
            let mut mismatches = 0;
            for m in 1..=top {
                for n in m..=top.min(m + 30) {
                    let via_interval = interval_sylvester_powers(Interval::new(m, n)?, &sieve);
                    if via_interval != sylvester_powers(&FinSet::interval(m, n)?, &cfg.factoring)? {
                        mismatches += 1;
                    }
                }
            }
            outcome(
                mismatches == 0,
                format!("intervals up to {top}, {mismatches} mismatches"),
            )
        }),
        check("tk", move |_| {
            let n = pick(2000, 200);
            let r = check_theisinger_kurschak(n, n);
            let found: Vec<String> = r.integral.iter().map(ToString::to_string).collect();
            outcome(
                r.holds(),
                format!(
                    "{} intervals up to {n}; integral: {}",
                    r.intervals_checked,
                    found.join(" ")
                ),
            )
        }),
        check("erdos-niven", move |_| {
            let n = pick(400, 60);
            let r = erdos_niven_scan(n);
            outcome(
                r.holds(),
                format!(
                    "{} intervals, {} distinct sums, {} collisions",
                    r.intervals,
                    r.distinct_values,
                    r.collisions.len()
                ),
            )
        }),
        check("quadruple", move |_| {
            let b = pick(300, 60);
            let r = quadruple_scan(b);
            let v = r.violations().count();
            let list: Vec<String> = r
                .quadruples
                .iter()
                .map(|q| format!("{}~{}", q.first, q.second))
                .collect();
            outcome(
                v == 0,
                format!(
                    "bound {b}: {} equal pairs [{}], {v} violations",
                    list.len(),
                    list.join(" ")
                ),
            )
        }),
        check("chebyshev", move |_| {
            let n = pick(100_000, 1000);
            let r = verify_chebyshev(n);
            outcome(r.holds(), format!("2 <= n <= {n}, {} failures", r.failures.len()))
        }),
        check("sylvester-prime", move |_| {
            let n = pick(2000, 200);
            let r = verify_sylvester_theorem(n);
            outcome(
                r.holds(),
                format!(
                    "{} intervals up to {n}, {} failures, {} skipped",
                    r.checked,
                    r.failures.len(),
                    r.skipped.len()
                ),
            )
        }),
        check("nonintegrality", move |_| {
            let cfg = if quick {
                NonintegralityConfig {
                    m: 2..=10,
                    d: 1..=10,
                    k: 1..=10,
                    powered_samples: 20,
                    weighted_samples: 20,
                    ..NonintegralityConfig::default()
                }
            } else {
                NonintegralityConfig::default()
            };
            let r = verify_nonintegrality(&cfg)?;
            let checked: Vec<String> = r.checked.iter().map(|(f, n)| format!("{n} {f:?}")).collect();
            outcome(
                r.holds(),
                format!(
                    "checked {}; {} skipped, {} integral",
                    checked.join(", "),
                    r.skipped.len(),
                    r.failures.len()
                ),
            )
        }),
        check("coprime", |cfg| {
            let x = set(&[1, 2, 3, 5, 7, 11, 13, 17, 19, 23]);
            let with_one = verify_coprime_injectivity(&CoprimeGround::new(x.clone())?, cfg.subset_cap)?;
            let without: FinSet = FinSet::new(x.iter().filter(|v| **v != nat(1)).cloned())?;
            let without_one = verify_coprime_injectivity(&CoprimeGround::new(without)?, cfg.subset_cap)?;
            let ok = with_one.sigma_collisions.is_empty()
                && with_one.integral == vec![set(&[1])]
                && with_one.delta_collisions_only_from_one()
                && without_one.holds();
            outcome(
                ok,
                format!(
                    "{} subsets of {x}: sigma injective, integral only at {{1}}, {} delta collisions all of the form C vs C+{{1}}; without 1 delta is injective",
                    with_one.subsets,
                    with_one.delta_collisions.len()
                ),
            )
        }),
        check("nu", |cfg| {
            let pool = set(&[2, 3, 5, 7, 11, 13]);
            let r = nu_collision_scan(&pool, 2, cfg.subset_cap)?;
            let has = |a: &[u64], b: &[u64], v: u64| {
                r.collisions
                    .iter()
                    .any(|c| c.set_a == set(a) && c.set_b == set(b) && c.nu == nat(v))
            };
            let bound_ok = rank_ordered_subsets(&pool)
                .iter()
                .map(check_nu_lower_bound)
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .all(|b| b);
            let rows = first_primes_nu(10, &cfg.factoring)?;
            let rows_ok = rows
                .iter()
                .all(|r| r.exceeds_bound && r.divisors_exceed_pk && r.complete);
            let ok = has(&[3, 13], &[5, 11], 16) && has(&[5, 13], &[7, 11], 18) && bound_ok && rows_ok;
            outcome(
                ok,
                format!(
                    "{} equal-nu pairs among 2-subsets of primes <= 13; lower bound {}; first-prime rows {}",
                    r.collisions.len(),
                    if bound_ok { "holds" } else { "fails" },
                    if rows_ok { "hold" } else { "fail" }
                ),
            )
        }),
        check("stars", move |cfg| {
            let (b_top, depth) = if quick { (5, 4) } else { (10, 6) };
            let r = check_star_growth_and_primecount(2..=b_top, depth, &cfg.factoring, cfg.levels.digit_cap)?;
            outcome(
                r.holds(),
                format!(
                    "b in 2..={b_top}, depth {depth}: {} rows, truncated {:?}, unstable {}",
                    r.rows.len(),
                    r.truncated,
                    r.unstable.len()
                ),
            )
        }),
        check("pb", move |_| {
            let bound = pick(1000, 100);
            let b: Nat = nat(2);
            let here = pb_membership(&b, 6, bound);
            let shifted = pb_membership(&crate::words::star(&b), 5, bound);
            let ok = here.observed == shifted.observed && here.excluded.iter().all(|p| !here.observed.contains(p));
            outcome(
                ok,
                format!(
                    "b=2, depth 6, primes <= {bound}: {} observed, {} unobserved ({} excluded)",
                    here.observed.len(),
                    here.unobserved.len(),
                    here.excluded.len()
                ),
            )
        }),
    ]
}
