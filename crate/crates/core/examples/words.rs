//! Words over ◇ (n+1, written d) and ★ (n(n+1), written s), their levels, and
//! the words reaching a given value.
//!
//! cargo run --example words

use unitfrac::nat;
use unitfrac::words::{check_length_uniqueness, level_multiset, preimages, LevelCaps, Word};

fn main() -> unitfrac::Result<()> {
    let w: Word = "dssddd".parse()?;
    println!("{w} applied to 1 = {}", w.apply(&nat(1))?);

    let caps = LevelCaps::default();
    for k in 0..=3 {
        let level = level_multiset(k, &nat(2), &caps)?.to_finset()?;
        println!("W_{k}(2) = {level}, sigma = {}", unitfrac::sigma(&level)?);
    }

    for n in [6, 12, 43] {
        let words: Vec<String> = preimages(2, n)?.iter().map(|w| format!("{w}({})", w.len())).collect();
        println!("reaching {n} from 2: {}", words.join(" "));
    }

    let report = check_length_uniqueness(2, 300)?;
    println!("distinct lengths up to 300: {}", report.holds());
    Ok(())
}
