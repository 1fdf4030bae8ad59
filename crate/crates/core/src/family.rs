//! Pairwise disjoint families of finite sets with a prescribed reciprocal sum.
//!
//! Every level W_k b sums to 1/b, so any collection of pairwise disjoint
//! levels is a disjoint family of sets summing to 1/b. Unions of `a`
//! consecutive members of such a family then sum to a/b.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{decimal_digits, nat, sigma, FinSet, Nat, PosRational};
use crate::error::{Error, Result};
use crate::words::{level_multiset, star, LevelCaps};

/// The target r = a/b, kept in the caller's representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTarget {
    a: u64,
    b: u64,
    value: PosRational,
}

impl RationalTarget {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a == 0 {
            return Err(Error::domain("numerator a must be at least 1"));
        }
        if b < 2 {
            return Err(Error::domain("denominator b must be at least 2"));
        }
        Ok(RationalTarget {
            a,
            b,
            value: PosRational::new(nat(a), nat(b))?,
        })
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// The reduced value of a/b.
    pub fn value(&self) -> &PosRational {
        &self.value
    }
}

/// How the disjoint level indices were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexStrategy {
    /// `k_1 = 0`, `k_{j+1} = 1 + ★^{k_j} b`: provably disjoint, grows
    /// doubly exponentially.
    Recursive,
    /// Smallest indices whose levels are verified disjoint by intersection.
    Greedy,
}

impl fmt::Display for IndexStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexStrategy::Recursive => "recursive",
            IndexStrategy::Greedy => "greedy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSequence {
    pub terms: Vec<Nat>,
    /// Set when the sequence stopped because the next term would exceed the
    /// digit cap (rather than reaching `max_terms`).
    pub truncated: bool,
}

/// `k_1 = 0`, `k_{j+1} = 1 + ★^{k_j} b`, stopping after `max_terms` terms or
/// as soon as the next term would have more than `digit_cap` digits.
pub fn recursive_index_sequence(b: u64, max_terms: usize, digit_cap: usize) -> Result<IndexSequence> {
    if b < 2 {
        return Err(Error::domain("base b must be at least 2"));
    }
    let mut terms = vec![Nat::zero()];
    while terms.len() < max_terms {
        let k = terms.last().expect("nonempty");
        match bounded_star_power(b, k, digit_cap) {
            Some(v) => terms.push(v + 1u32),
            None => return Ok(IndexSequence { terms, truncated: true }),
        }
    }
    terms.truncate(max_terms);
    Ok(IndexSequence {
        terms,
        truncated: false,
    })
}

/// `★^k b` if every iterate stays within `digit_cap` digits.
fn bounded_star_power(b: u64, k: &Nat, digit_cap: usize) -> Option<Nat> {
    let mut v = nat(b);
    let mut i = BigUint::zero();
    while &i < k {
        v = star(&v);
        if decimal_digits(&v) > digit_cap {
            return None;
        }
        i += 1u32;
    }
    Some(v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyLevels {
    pub indices: Vec<u32>,
    pub requested: usize,
    pub k_max: u32,
}

impl GreedyLevels {
    pub fn is_complete(&self) -> bool {
        self.indices.len() >= self.requested
    }
}

/// Scans `k = 0, 1, ..., k_max` and keeps each level that is disjoint from
/// every level kept so far, until `count` levels are kept.
pub fn greedy_disjoint_levels(b: u64, count: usize, k_max: u32, caps: &LevelCaps) -> Result<GreedyLevels> {
    Ok(greedy_levels_with_sets(b, count, k_max, caps)?.0)
}

fn greedy_levels_with_sets(b: u64, count: usize, k_max: u32, caps: &LevelCaps) -> Result<(GreedyLevels, Vec<FinSet>)> {
    if b < 2 {
        return Err(Error::domain("base b must be at least 2"));
    }
    let mut indices = Vec::new();
    let mut sets: Vec<FinSet> = Vec::new();
    let mut taken = FinSet::default();
    for k in 0..=k_max {
        if indices.len() >= count {
            break;
        }
        let level = match level_multiset(k, &nat(b), caps) {
            Ok(l) => l.to_finset()?,
            Err(Error::Resource { .. }) => break,
            Err(e) => return Err(e),
        };
        if level.is_disjoint(&taken) {
            taken = taken.union(&level);
            indices.push(k);
            sets.push(level);
        }
    }
    Ok((
        GreedyLevels {
            indices,
            requested: count,
            k_max,
        },
        sets,
    ))
}

/// One member of an a/b family: the union of `a` disjoint levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyBlock {
    pub block_id: usize,
    pub level_indices: Vec<String>,
    pub elements: FinSet,
    pub sigma: PosRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub target: RationalTarget,
    pub strategy: IndexStrategy,
    pub blocks: Vec<FamilyBlock>,
}

impl Family {
    /// Checks the two defining properties directly: each block sums to a/b
    /// and blocks are pairwise disjoint.
    pub fn verify(&self) -> bool {
        let sums = self.blocks.iter().all(|blk| {
            blk.sigma == *self.target.value() && sigma(&blk.elements).ok().as_ref() == Some(self.target.value())
        });
        let disjoint = self
            .blocks
            .iter()
            .enumerate()
            .all(|(i, x)| self.blocks[i + 1..].iter().all(|y| x.elements.is_disjoint(&y.elements)));
        sums && disjoint
    }

    /// Serialization records, one per block.
    pub fn records(&self) -> Vec<FamilyRecord> {
        self.blocks
            .iter()
            .map(|blk| FamilyRecord {
                a: self.target.a(),
                b: self.target.b(),
                strategy: self.strategy,
                block_id: blk.block_id,
                level_indices: blk.level_indices.clone(),
                elements: blk.elements.clone(),
                sigma: blk.sigma.clone(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyRecord {
    pub b: u64,
    pub a: u64,
    pub strategy: IndexStrategy,
    pub block_id: usize,
    pub level_indices: Vec<String>,
    pub elements: FinSet,
    pub sigma: PosRational,
}

/// Builds `count` pairwise disjoint sets, each the union of `a` consecutive
/// disjoint levels of base `b`, so that each sums to exactly a/b.
pub fn assemble_family(
    target: &RationalTarget,
    count: usize,
    k_max: u32,
    strategy: IndexStrategy,
    caps: &LevelCaps,
) -> Result<Family> {
    let need = count
        .checked_mul(target.a() as usize)
        .ok_or_else(|| Error::domain("requested family is too large"))?;
    let b = target.b();
    let (indices, levels): (Vec<Nat>, Vec<FinSet>) = match strategy {
        IndexStrategy::Greedy => {
            let (g, sets) = greedy_levels_with_sets(b, need, k_max, caps)?;
            (g.indices.into_iter().map(|k| nat(k as u64)).collect(), sets)
        }
        IndexStrategy::Recursive => {
            let seq = recursive_index_sequence(b, need, caps.digit_cap)?;
            let mut idx = Vec::new();
            let mut sets = Vec::new();
            for k in seq.terms {
                let Some(k32) = k.to_u32().filter(|&k| k <= k_max) else {
                    break;
                };
                match level_multiset(k32, &nat(b), caps) {
                    Ok(l) => {
                        sets.push(l.to_finset()?);
                        idx.push(k);
                    }
                    Err(Error::Resource { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            (idx, sets)
        }
    };
    let a = target.a() as usize;
    let achieved = levels.len() / a;
    if achieved < count {
        return Err(Error::resource("family block", count as u64, achieved as u64));
    }
    let blocks = levels
        .chunks(a)
        .zip(indices.chunks(a))
        .take(count)
        .enumerate()
        .map(|(i, (sets, ks))| {
            let elements = sets.iter().skip(1).fold(sets[0].clone(), |acc, s| acc.union(s));
            let sigma = sigma(&elements)?;
            Ok(FamilyBlock {
                block_id: i + 1,
                level_indices: ks.iter().map(ToString::to_string).collect(),
                elements,
                sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Family {
        target: target.clone(),
        strategy,
        blocks,
    })
}

/// Checks `b + k_{j+1} > ★^{k_j} b` for each consecutive pair of
/// representable terms: the smallest value of the next level exceeds the
/// largest of the previous one.
pub fn recursive_indices_separate(b: u64, seq: &IndexSequence, digit_cap: usize) -> bool {
    seq.terms
        .windows(2)
        .all(|w| match bounded_star_power(b, &w[0], digit_cap) {
            Some(top) => nat(b) + &w[1] > top,
            None => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn caps() -> LevelCaps {
        LevelCaps::default()
    }

    #[test]
    fn recursive_indices() {
        let s = recursive_index_sequence(2, 5, 5_000).unwrap();
        assert_eq!(s.terms[..3], [nat(0), nat(3), nat(1807)]);
        assert!(s.truncated);
        assert_eq!(s.terms.len(), 3);
        assert!(recursive_indices_separate(2, &s, 5_000));

        let s = recursive_index_sequence(3, 2, 100).unwrap();
        assert_eq!(s.terms, vec![nat(0), nat(4)]);
        assert!(!s.truncated);
        for b in 2..20 {
            assert_eq!(recursive_index_sequence(b, 1, 10).unwrap().terms, vec![nat(0)]);
        }
    }

    #[test]
    fn greedy_levels() {
        let g = greedy_disjoint_levels(2, 4, 12, &caps()).unwrap();
        assert_eq!(g.indices, vec![0, 1, 2, 3]);
        let g = greedy_disjoint_levels(2, 5, 12, &caps()).unwrap();
        assert_eq!(&g.indices[..4], &[0, 1, 2, 3]);
        assert!(g.indices[4] > 4);
        assert_eq!(greedy_disjoint_levels(7, 1, 0, &caps()).unwrap().indices, vec![0]);
        let g = greedy_disjoint_levels(2, 50, 6, &caps()).unwrap();
        assert!(!g.is_complete());
    }

    #[test]
    fn greedy_levels_are_disjoint() {
        for b in 2..6 {
            let (g, sets) = greedy_levels_with_sets(b, 6, 11, &caps()).unwrap();
            assert_eq!(g.indices.len(), sets.len());
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    assert!(sets[i].is_disjoint(&sets[j]));
                }
            }
        }
    }

    #[test]
    fn small_families() {
        let fam = |a, b, count| {
            assemble_family(
                &RationalTarget::new(a, b).unwrap(),
                count,
                10,
                IndexStrategy::Greedy,
                &caps(),
            )
            .unwrap()
        };
        let f = fam(1, 2, 2);
        let sets: Vec<String> = f.blocks.iter().map(|b| b.elements.to_string()).collect();
        assert_eq!(sets, ["{2}", "{3,6}"]);
        assert!(f.verify());

        let f = fam(2, 2, 1);
        assert_eq!(f.blocks[0].elements.to_string(), "{2,3,6}");
        assert_eq!(f.blocks[0].sigma.to_string(), "1/1");

        let f = fam(3, 2, 1);
        assert_eq!(f.blocks[0].elements.to_string(), "{2,3,4,6,7,12,42}");
        assert_eq!(f.blocks[0].sigma.to_string(), "3/2");
        assert!(f.verify());
    }

    #[test]
    fn recursive_family_runs_out_quickly() {
        let t = RationalTarget::new(1, 2).unwrap();
        let f = assemble_family(&t, 2, 10, IndexStrategy::Recursive, &caps()).unwrap();
        assert_eq!(f.blocks[1].level_indices, vec!["3"]);
        assert!(f.verify());
        let e = assemble_family(&t, 3, 10, IndexStrategy::Recursive, &caps()).unwrap_err();
        assert_eq!(e, Error::resource("family block", 3, 2));
    }

    #[test]
    fn unreachable_count_is_a_resource_error() {
        let t = RationalTarget::new(1, 2).unwrap();
        match assemble_family(&t, 1_000_000, 10, IndexStrategy::Greedy, &caps()) {
            Err(Error::Resource { achieved, .. }) => assert!(achieved >= 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn target_validation() {
        assert!(RationalTarget::new(1, 1).is_err());
        assert!(RationalTarget::new(0, 3).is_err());
        let t = RationalTarget::new(4, 6).unwrap();
        assert_eq!((t.a(), t.b()), (4, 6));
        assert_eq!(t.value().to_string(), "2/3");
    }
}
