//! Pairwise disjoint sets each summing exactly to a/b, built from disjoint
//! levels W_k b.
//!
//! cargo run --example families

use unitfrac::family::{assemble_family, recursive_index_sequence, IndexStrategy, RationalTarget};
use unitfrac::words::LevelCaps;

fn main() -> unitfrac::Result<()> {
    let caps = LevelCaps::default();
    for (a, b, count) in [(1, 2, 3), (2, 2, 1), (3, 2, 2), (2, 5, 2)] {
        let target = RationalTarget::new(a, b)?;
        let family = assemble_family(&target, count, caps.max_k, IndexStrategy::Greedy, &caps)?;
        assert!(family.verify());
        for block in &family.blocks {
            let shown = if block.elements.len() <= 8 {
                block.elements.to_string()
            } else {
                format!("{} elements", block.elements.len())
            };
            println!(
                "{a}/{b} #{}: levels {:?}, {shown}, sigma = {}",
                block.block_id, block.level_indices, block.sigma
            );
        }
    }

    let seq = recursive_index_sequence(2, 3, 20_000)?;
    let terms: Vec<String> = seq.terms.iter().map(ToString::to_string).collect();
    println!("recursive level indices for b = 2: {}", terms.join(", "));
    Ok(())
}
