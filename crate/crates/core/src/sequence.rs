//! σ-sequences: repeatedly split the least replaceable element `x` of a set
//! into `x+1` and `x(x+1)`, which keeps the reciprocal sum fixed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{sigma, FinSet, Nat, PosRational};
use crate::error::{Error, Result};
use crate::words::star;

/// The least `x` in `a` with neither `x+1` nor `x(x+1)` in `a`.
pub fn replaceable(a: &FinSet) -> Result<Nat> {
    if a.is_empty() {
        return Err(Error::domain("the empty set has no replaceable element"));
    }
    let r = a
        .iter()
        .find(|x| {
            let succ = *x + 1u32;
            !a.contains(&succ) && !a.contains(&star(x))
        })
        // Both children of the maximum exceed it.
        .expect("the maximum element always qualifies");
    Ok(r.clone())
}

/// One recursion step; returns the next set and the replaced element.
pub fn step_with_replaced(a: &FinSet) -> Result<(FinSet, Nat)> {
    let r = replaceable(a)?;
    let next = a.replace(&r, &[&r + 1u32, star(&r)])?;
    Ok((next, r))
}

/// `A_{i+1} = (A_i \ {r}) ∪ {r+1, r(r+1)}` for the replaceable `r`.
pub fn step(a: &FinSet) -> Result<FinSet> {
    step_with_replaced(a).map(|(s, _)| s)
}

/// One term of a σ-sequence together with the element it will give up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqState {
    pub index: u64,
    pub set: FinSet,
    pub min: Nat,
    pub replaced: Nat,
    /// The replaced element is the minimum, so it never returns.
    pub doomed: bool,
}

impl SeqState {
    fn new(index: u64, set: FinSet) -> Result<Self> {
        let replaced = replaceable(&set)?;
        let min = set.min().expect("nonempty").clone();
        Ok(SeqState {
            index,
            doomed: replaced == min,
            set,
            min,
            replaced,
        })
    }

    pub fn record(&self) -> SeqRecord {
        SeqRecord {
            index: self.index,
            elements: self.set.clone(),
            min: self.min.to_string(),
            replaced: self.replaced.to_string(),
            doomed: self.doomed,
        }
    }
}

/// Persisted form of a [`SeqState`]; a run can resume from any record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqRecord {
    pub index: u64,
    pub elements: FinSet,
    pub min: String,
    pub replaced: String,
    pub doomed: bool,
}

/// Iterator over the terms `A_1, A_2, ...` of a σ-sequence.
#[derive(Clone, Debug)]
pub struct SigmaSequence {
    next_index: u64,
    current: FinSet,
}

impl SigmaSequence {
    pub fn new(seed: FinSet) -> Result<Self> {
        SigmaSequence::resume(1, seed)
    }

    /// Continues a sequence whose term number `index` is `set`.
    pub fn resume(index: u64, set: FinSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::domain("σ-sequence seed must be nonempty"));
        }
        if index == 0 {
            return Err(Error::domain("σ-sequence terms are numbered from 1"));
        }
        Ok(SigmaSequence {
            next_index: index,
            current: set,
        })
    }

    pub fn from_record(rec: &SeqRecord) -> Result<Self> {
        SigmaSequence::resume(rec.index, rec.elements.clone())
    }
}

impl Iterator for SigmaSequence {
    type Item = SeqState;

    fn next(&mut self) -> Option<SeqState> {
        let state = SeqState::new(self.next_index, self.current.clone()).expect("nonempty term");
        self.current = self
            .current
            .replace(&state.replaced, &[&state.replaced + 1u32, star(&state.replaced)])
            .expect("children of the replaceable element are absent");
        self.next_index += 1;
        Some(state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub sigma: PosRational,
    pub states: Vec<SeqState>,
    /// `(index, element)` for every doomed replacement.
    pub doomed: Vec<(u64, Nat)>,
    /// First index at which each minimum value appears.
    pub first_min_index: BTreeMap<Nat, u64>,
}

impl Trace {
    fn collect(seed: &FinSet, states: Vec<SeqState>) -> Result<Self> {
        let mut first_min_index = BTreeMap::new();
        for s in &states {
            first_min_index.entry(s.min.clone()).or_insert(s.index);
        }
        Ok(Trace {
            sigma: sigma(seed)?,
            doomed: states
                .iter()
                .filter(|s| s.doomed)
                .map(|s| (s.index, s.replaced.clone()))
                .collect(),
            first_min_index,
            states,
        })
    }

    pub fn last(&self) -> &SeqState {
        self.states.last().expect("trace holds at least the seed")
    }

    pub fn first_index_with_min(&self, m: &Nat) -> Option<u64> {
        self.first_min_index.get(m).copied()
    }
}

/// The terms `A_1..A_terms` of the σ-sequence from `seed` (always at least
/// the seed itself). More than `cap` terms is an error carrying the partial
/// trace of `cap` terms.
pub fn run(seed: &FinSet, terms: u64, cap: u64) -> Result<Trace> {
    let take = terms.clamp(1, cap.max(1));
    let states: Vec<SeqState> = SigmaSequence::new(seed.clone())?.take(take as usize).collect();
    let trace = Trace::collect(seed, states)?;
    if terms > cap {
        return Err(Error::TraceCap {
            cap,
            partial: Box::new(trace),
        });
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointSubsequence {
    /// Selected indices `j_1 < j_2 < ...`, all at most the horizon.
    pub indices: Vec<u64>,
    /// `secure_bounds[i]` is the largest element among the first `i+1`
    /// selected terms. Any later term whose minimum exceeds it is disjoint
    /// from all of them.
    pub secure_bounds: Vec<Nat>,
    pub horizon: u64,
}

impl DisjointSubsequence {
    /// The minimum a term must exceed to be a guaranteed next selection.
    pub fn next_secure_bound(&self) -> &Nat {
        self.secure_bounds.last().expect("j_1 is always selected")
    }
}

/// Greedy pairwise disjoint subsequence: `j_1 = 1`, then each next index is
/// the least `j <= horizon` whose term is disjoint from every selected term.
pub fn disjoint_subsequence(seed: &FinSet, horizon: u64) -> Result<DisjointSubsequence> {
    let mut indices = Vec::new();
    let mut secure_bounds = Vec::new();
    let mut taken = FinSet::default();
    for state in SigmaSequence::new(seed.clone())?.take(horizon.max(1) as usize) {
        if state.set.is_disjoint(&taken) {
            taken = taken.union(&state.set);
            secure_bounds.push(taken.max().expect("nonempty").clone());
            indices.push(state.index);
        }
    }
    Ok(DisjointSubsequence {
        indices,
        secure_bounds,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::nat;

    fn set(xs: &[u64]) -> FinSet {
        FinSet::from_u64s(xs.iter().copied()).unwrap()
    }

    #[test]
    fn replaceable_examples() {
        assert_eq!(replaceable(&set(&[3, 4, 5, 10, 12, 30])).unwrap(), nat(10));
        assert_eq!(replaceable(&set(&[2])).unwrap(), nat(2));
        assert_eq!(replaceable(&set(&[5, 6, 12, 20])).unwrap(), nat(6));
        assert!(replaceable(&FinSet::default()).is_err());
    }

    #[test]
    fn step_examples() {
        assert_eq!(
            step(&set(&[3, 4, 5, 10, 12, 30])).unwrap(),
            set(&[3, 4, 5, 11, 12, 30, 110])
        );
        assert_eq!(step(&set(&[2])).unwrap(), set(&[3, 6]));
        assert_eq!(step(&set(&[3, 6])).unwrap(), set(&[4, 6, 12]));
    }

    #[test]
    fn first_terms_from_two() {
        let t = run(&set(&[2]), 6, 100).unwrap();
        let shown: Vec<String> = t.states.iter().map(|s| s.set.to_string()).collect();
        assert_eq!(
            shown,
            [
                "{2}",
                "{3,6}",
                "{4,6,12}",
                "{5,6,12,20}",
                "{5,7,12,20,42}",
                "{6,7,12,20,30,42}"
            ]
        );
        assert!(t.states.iter().all(|s| sigma(&s.set).unwrap() == t.sigma));
        assert_eq!(run(&set(&[2]), 0, 100).unwrap().states.len(), 1);
    }

    /// Direct simulation over a `BTreeSet<u64>`, independent of `FinSet`.
    fn brute_first_min_index(target_min: u64, limit: usize) -> Option<u64> {
        let mut a = std::collections::BTreeSet::from([2u64]);
        for i in 1..=limit as u64 {
            if *a.first().unwrap() == target_min {
                return Some(i);
            }
            let r = *a
                .iter()
                .find(|&&x| !a.contains(&(x + 1)) && !a.contains(&(x * (x + 1))))
                .unwrap();
            a.remove(&r);
            a.insert(r + 1);
            a.insert(r * (r + 1));
        }
        None
    }

    #[test]
    fn minimum_seven_first_appears_at_forty_two() {
        let oracle = brute_first_min_index(7, 100).unwrap();
        assert_eq!(oracle, 42);
        let t = run(&set(&[2]), 100, 1000).unwrap();
        assert_eq!(t.first_index_with_min(&nat(7)), Some(oracle));
        assert_eq!(t.first_index_with_min(&nat(6)), Some(6));
    }

    #[test]
    fn doomed_elements_never_return() {
        let t = run(&set(&[2]), 300, 1000).unwrap();
        assert!(!t.doomed.is_empty());
        for (i, d) in &t.doomed {
            assert!(t.states[*i as usize..].iter().all(|s| !s.set.contains(d)));
            let here = &t.states[*i as usize - 1];
            let next = &t.states[*i as usize];
            assert!(next.min > here.min);
        }
        for w in t.states.windows(2) {
            assert!(w[1].min >= w[0].min);
            assert_eq!(w[1].min > w[0].min, w[0].doomed);
            assert_eq!(w[1].set.len(), w[0].set.len() + 1);
        }
    }

    #[test]
    fn cap_returns_partial_trace() {
        match run(&set(&[2]), 50, 10) {
            Err(Error::TraceCap { cap, partial }) => {
                assert_eq!(cap, 10);
                assert_eq!(partial.states.len(), 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disjoint_indices_from_two() {
        let d = disjoint_subsequence(&set(&[2]), 30).unwrap();
        assert_eq!(d.indices, vec![1, 2, 5]);
        assert_eq!(d.secure_bounds, vec![nat(2), nat(6), nat(42)]);
        assert_eq!(d.next_secure_bound(), &nat(42));
        assert_eq!(disjoint_subsequence(&set(&[2]), 1).unwrap().indices, vec![1]);
    }

    #[test]
    fn resume_from_record_continues_identically() {
        let all: Vec<SeqState> = SigmaSequence::new(set(&[2])).unwrap().take(40).collect();
        let rec = all[19].record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: SeqRecord = serde_json::from_str(&json).unwrap();
        let resumed: Vec<SeqState> = SigmaSequence::from_record(&back).unwrap().take(21).collect();
        assert_eq!(resumed, all[19..]);
    }
}
