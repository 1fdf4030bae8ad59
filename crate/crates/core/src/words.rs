//! The free monoid over the two letters ◇ (`n ↦ n+1`) and ★ (`n ↦ n(n+1)`).
//!
//! Words are written left to right and act right to left: in `◇★★◇◇◇` the
//! rightmost ◇ is applied first. The text form uses `d` for ◇ and `s` for ★,
//! so that word is `"dssddd"`.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{decimal_digits, FinSet, Nat};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    /// ◇: n ↦ n+1
    Diamond,
    /// ★: n ↦ n(n+1)
    Star,
}

impl Letter {
    pub fn apply(self, n: &Nat) -> Nat {
        match self {
            Letter::Diamond => n + 1u32,
            Letter::Star => star(n),
        }
    }

    fn symbol(self) -> char {
        match self {
            Letter::Diamond => 'd',
            Letter::Star => 's',
        }
    }
}

/// ★n = n(n+1).
pub fn star(n: &Nat) -> Nat {
    n * (n + 1u32)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    /// ◇^k
    pub fn diamonds(k: usize) -> Self {
        Word {
            letters: vec![Letter::Diamond; k],
        }
    }

    /// ★^k
    pub fn stars(k: usize) -> Self {
        Word {
            letters: vec![Letter::Star; k],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `self · other`: `other` acts first.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Applies the word to `n`, rightmost letter first.
    pub fn apply(&self, n: &Nat) -> Result<Nat> {
        if n.is_zero() {
            return Err(Error::domain("words act on positive integers"));
        }
        Ok(self.letters.iter().rev().fold(n.clone(), |acc, l| l.apply(&acc)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.letters.iter().try_for_each(|l| write!(f, "{}", l.symbol()))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                'd' | '◇' | '⋄' => Ok(Letter::Diamond),
                's' | '★' | '⋆' => Ok(Letter::Star),
                other => Err(Error::parse(format!("unknown letter {other:?} in word"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Caps on level enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelCaps {
    /// Largest level index whose 2^k values may be materialized.
    pub max_k: u32,
    /// Largest decimal digit count allowed for any single value.
    pub digit_cap: usize,
}

impl Default for LevelCaps {
    fn default() -> Self {
        LevelCaps {
            max_k: 20,
            digit_cap: 20_000,
        }
    }
}

/// The multiset W_k b of values of all 2^k words of length k applied to b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMultiset {
    pub k: u32,
    pub base: Nat,
    /// Distinct values in ascending order with their multiplicities.
    pub values: Vec<(Nat, u64)>,
}

impl LevelMultiset {
    pub fn total_multiplicity(&self) -> u64 {
        self.values.iter().map(|(_, m)| m).sum()
    }

    pub fn is_simple(&self) -> bool {
        self.values.iter().all(|(_, m)| *m == 1)
    }

    pub fn distinct_len(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> &Nat {
        &self.values[0].0
    }

    pub fn max(&self) -> &Nat {
        &self.values[self.values.len() - 1].0
    }

    /// The level as a set; fails when some value has multiplicity above one.
    pub fn to_finset(&self) -> Result<FinSet> {
        if !self.is_simple() {
            return Err(Error::domain(format!(
                "W_{}({}) is not a simple set",
                self.k, self.base
            )));
        }
        Ok(FinSet::from_sorted(
            self.values.iter().map(|(v, _)| v.clone()).collect(),
        ))
    }
}

/// Enumerates W_k b level by level: each value v at level j spawns ◇v and
/// ★v at level j+1.
pub fn level_multiset(k: u32, b: &Nat, caps: &LevelCaps) -> Result<LevelMultiset> {
    if b.is_zero() {
        return Err(Error::domain("level base must be positive"));
    }
    if k > caps.max_k {
        return Err(Error::resource("level index (max_k)", caps.max_k as u64, k as u64));
    }
    // The largest value at level k is ★^k b; check its size before expanding.
    let mut top = b.clone();
    for j in 0..k {
        top = star(&top);
        if decimal_digits(&top) > caps.digit_cap {
            return Err(Error::resource("digit", caps.digit_cap as u64, j as u64));
        }
    }
    let mut level = vec![b.clone()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * 2);
        for v in &level {
            next.push(v + 1u32);
            next.push(star(v));
        }
        level = next;
    }
    level.sort_unstable();
    let mut values: Vec<(Nat, u64)> = Vec::new();
    for v in level {
        match values.last_mut() {
            Some((last, m)) if *last == v => *m += 1,
            _ => values.push((v, 1)),
        }
    }
    Ok(LevelMultiset {
        k,
        base: b.clone(),
        values,
    })
}

fn require_base(b: u64) -> Result<()> {
    if b < 2 {
        return Err(Error::domain("preimage search needs base b >= 2"));
    }
    Ok(())
}

/// Memoized table of all words `w` with `w b = n`, for `b <= n <= n_max`.
///
/// A word reaching `n` is either `◇^{n-b}`, or ends (on the left) in
/// `◇^{n-★k} ★` after some word reaching `k`, where `b <= k` and `★k <= n`.
#[derive(Clone, Debug)]
pub struct PreimageTable {
    base: u64,
    rows: Vec<Vec<Word>>,
}

impl PreimageTable {
    pub fn build(b: u64, n_max: u64) -> Result<Self> {
        require_base(b)?;
        let mut rows: Vec<Vec<Word>> = Vec::new();
        for n in b..=n_max.max(b) {
            let mut words = vec![Word::diamonds((n - b) as usize)];
            let mut k = b;
            while k * (k + 1) <= n {
                let pad = Word::diamonds((n - k * (k + 1)) as usize);
                let head = pad.concat(&Word::new(vec![Letter::Star]));
                for u in &rows[(k - b) as usize] {
                    words.push(head.concat(u));
                }
                k += 1;
            }
            words.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            rows.push(words);
        }
        if n_max < b {
            rows.clear();
        }
        Ok(PreimageTable { base: b, rows })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Words reaching `n`, longest first.
    pub fn get(&self, n: u64) -> Option<&[Word]> {
        n.checked_sub(self.base)
            .and_then(|i| self.rows.get(i as usize))
            .map(Vec::as_slice)
    }
}

/// All words `w` with `w b = n`, longest first.
pub fn preimages(b: u64, n: u64) -> Result<Vec<Word>> {
    require_base(b)?;
    if n < b {
        return Err(Error::domain(format!("no word maps {b} to the smaller value {n}")));
    }
    let table = PreimageTable::build(b, n)?;
    Ok(table.get(n).expect("row exists").to_vec())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthViolation {
    pub n: u64,
    pub lengths: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthReport {
    pub base: u64,
    pub n_max: u64,
    pub targets_checked: u64,
    pub words_checked: u64,
    pub violations: Vec<LengthViolation>,
}

impl LengthReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every `n` in `[b, n_max]`, checks that distinct words reaching `n`
/// have distinct lengths and that `◇^{n-b}` is the unique longest one.
pub fn check_length_uniqueness(b: u64, n_max: u64) -> Result<LengthReport> {
    let table = PreimageTable::build(b, n_max)?;
    let mut report = LengthReport {
        base: b,
        n_max,
        targets_checked: 0,
        words_checked: 0,
        violations: Vec::new(),
    };
    for n in b..=n_max {
        let words = table.get(n).expect("row exists");
        report.targets_checked += 1;
        report.words_checked += words.len() as u64;
        let mut lengths: Vec<usize> = words.iter().map(Word::len).collect();
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        let distinct = lengths.windows(2).all(|w| w[0] != w[1]);
        let longest_ok =
            words[0] == Word::diamonds((n - b) as usize) && words[1..].iter().all(|w| w.len() < (n - b) as usize);
        let hits = words.iter().all(|w| w.apply(&Nat::from(b)).ok() == Some(Nat::from(n)));
        let reason = match (distinct, longest_ok, hits) {
            (true, true, true) => continue,
            (false, _, _) => "repeated word length",
            (_, false, _) => "longest word is not the pure diamond power",
            _ => "table word does not reach its target",
        };
        report.violations.push(LengthViolation {
            n,
            lengths,
            reason: reason.to_string(),
        });
    }
    Ok(report)
}

/// `◇^k b = b + k`, the expected minimum of W_k b.
pub fn level_min_expected(k: u32, b: &Nat) -> Nat {
    b + k
}

/// `★^k b`, the expected maximum of W_k b.
pub fn level_max_expected(k: u32, b: &Nat) -> Nat {
    (0..k).fold(b.clone(), |acc, _| star(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{nat, sigma, PosRational};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn paradigm_word() {
        let word = w("dssddd");
        assert_eq!(word.len(), 6);
        assert_eq!(word.apply(&nat(1)).unwrap(), nat(421));
        assert_eq!(Word::empty().apply(&nat(17)).unwrap(), nat(17));
        assert_eq!(w("dddd").apply(&nat(2)).unwrap(), nat(6));
        assert_eq!(w("s").apply(&nat(2)).unwrap(), nat(6));
        assert!(matches!(w("d").apply(&nat(0)), Err(Error::Domain(_))));
        assert_eq!(w("◇★★◇◇◇"), word);
        assert!("dx".parse::<Word>().is_err());
    }

    #[test]
    fn small_levels() {
        let caps = LevelCaps::default();
        let vals = |k, b| {
            level_multiset(k, &nat(b), &caps)
                .unwrap()
                .to_finset()
                .unwrap()
                .to_string()
        };
        assert_eq!(vals(0, 2), "{2}");
        assert_eq!(vals(2, 2), "{4,7,12,42}");
        assert_eq!(vals(3, 2), "{5,8,13,20,43,56,156,1806}");
    }

    #[test]
    fn base_one_keeps_multiplicities() {
        let l = level_multiset(1, &nat(1), &LevelCaps::default()).unwrap();
        assert_eq!(l.values, vec![(nat(2), 2)]);
        assert!(!l.is_simple());
        assert!(l.to_finset().is_err());
        let l = level_multiset(3, &nat(1), &LevelCaps::default()).unwrap();
        assert_eq!(l.total_multiplicity(), 8);
    }

    #[test]
    fn level_caps_are_enforced() {
        let caps = LevelCaps {
            max_k: 4,
            digit_cap: 10,
        };
        assert!(matches!(
            level_multiset(5, &nat(2), &caps),
            Err(Error::Resource { cap: 4, .. })
        ));
        // ★^4 2 has 7 digits, ★^5 2 has 14.
        let caps = LevelCaps {
            max_k: 10,
            digit_cap: 10,
        };
        assert!(level_multiset(4, &nat(2), &caps).is_ok());
        assert!(matches!(
            level_multiset(5, &nat(2), &caps),
            Err(Error::Resource { achieved: 4, .. })
        ));
    }

    #[test]
    fn level_sums_to_reciprocal_of_base() {
        for b in 2..6u64 {
            for k in 0..8 {
                let l = level_multiset(k, &nat(b), &LevelCaps::default()).unwrap();
                assert_eq!(l.distinct_len(), 1 << k);
                assert_eq!(l.min(), &level_min_expected(k, &nat(b)));
                assert_eq!(l.max(), &level_max_expected(k, &nat(b)));
                let s = sigma(&l.to_finset().unwrap()).unwrap();
                assert_eq!(s, PosRational::unit(&nat(b)).unwrap());
            }
        }
    }

    #[test]
    fn preimage_examples() {
        assert_eq!(preimages(2, 2).unwrap(), vec![Word::empty()]);
        assert_eq!(preimages(2, 6).unwrap(), vec![w("dddd"), w("s")]);
        assert_eq!(preimages(2, 5).unwrap(), vec![w("ddd")]);
        assert!(matches!(preimages(3, 2), Err(Error::Domain(_))));
        assert!(matches!(preimages(1, 4), Err(Error::Domain(_))));
    }

    /// Every word of length <= n - b, applied to b, with pruning once a
    /// partial image exceeds n (letters only increase values).
    fn brute_preimages(b: u64, n: u64) -> Vec<Word> {
        let mut found = Vec::new();
        // (word acting so far, value); letters are prepended on the left.
        let mut frontier = vec![(Vec::<Letter>::new(), b)];
        while let Some((letters, v)) = frontier.pop() {
            if v == n {
                found.push(Word::new(letters.clone()));
            }
            if letters.len() as u64 >= n - b {
                continue;
            }
            for l in [Letter::Diamond, Letter::Star] {
                let next = match l {
                    Letter::Diamond => v + 1,
                    Letter::Star => v * (v + 1),
                };
                if next <= n {
                    let mut ls = vec![l];
                    ls.extend_from_slice(&letters);
                    frontier.push((ls, next));
                }
            }
        }
        found.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        found
    }

    #[test]
    fn preimages_match_exhaustive_search() {
        for b in 2..5 {
            let table = PreimageTable::build(b, 20).unwrap();
            for n in b..=20 {
                assert_eq!(table.get(n).unwrap(), brute_preimages(b, n).as_slice(), "b={b} n={n}");
            }
        }
    }

    #[test]
    fn length_uniqueness_small() {
        let r = check_length_uniqueness(2, 6).unwrap();
        assert!(r.holds());
        let six = preimages(2, 6).unwrap();
        assert_eq!(six.iter().map(Word::len).collect::<Vec<_>>(), vec![4, 1]);
        let r = check_length_uniqueness(2, 2).unwrap();
        assert_eq!(r.targets_checked, 1);
        assert!(r.holds());
    }
}
