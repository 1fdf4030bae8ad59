//! The σ-sequence from seed {2}: repeatedly split the least element whose two
//! children are both absent.
//!
//! cargo run --example sigma_sequence

use unitfrac::sequence::{disjoint_subsequence, run};
use unitfrac::{nat, FinSet};

fn main() -> unitfrac::Result<()> {
    let seed = FinSet::from_u64s([2])?;
    let trace = run(&seed, 12, 1000)?;
    for s in &trace.states {
        let mark = if s.doomed { " (doomed)" } else { "" };
        println!("A_{} = {}  replace {}{mark}", s.index, s.set, s.replaced);
    }

    let long = run(&seed, 200, 1000)?;
    for m in 2..=9u64 {
        if let Some(i) = long.first_index_with_min(&nat(m)) {
            println!("first term with minimum {m}: A_{i}");
        }
    }

    let d = disjoint_subsequence(&seed, 30)?;
    println!("pairwise disjoint terms up to A_30: {:?}", d.indices);
    Ok(())
}
