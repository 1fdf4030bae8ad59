//! Subsets of a pairwise coprime set, and collisions of the numerator ν.
//!
//! cargo run --example coprime

use unitfrac::coprime::{first_primes_nu, nu_collision_scan, verify_coprime_injectivity, CoprimeGround};
use unitfrac::factor::FactorBudget;
use unitfrac::FinSet;

fn main() -> unitfrac::Result<()> {
    let x = CoprimeGround::new(FinSet::from_u64s([2, 3, 5, 7, 11, 13])?)?;
    let r = verify_coprime_injectivity(&x, 1 << 20)?;
    println!(
        "{} subsets of {}: sigma and delta injective = {}",
        r.subsets,
        x.set(),
        r.holds()
    );

    // With 1 in the ground set, C and C ∪ {1} share a denominator.
    let with_one = CoprimeGround::new(FinSet::from_u64s([1, 2, 3])?)?;
    for pair in verify_coprime_injectivity(&with_one, 1 << 20)?.delta_collisions {
        println!("delta{} = delta{}", pair.first, pair.second);
    }

    let primes = FinSet::from_u64s([2, 3, 5, 7, 11, 13])?;
    for c in nu_collision_scan(&primes, 2, 1 << 20)?.collisions {
        println!("nu{} = nu{} = {}", c.set_a, c.set_b, c.nu);
    }

    for row in first_primes_nu(6, &FactorBudget::default())? {
        println!("first {} primes: nu = {}", row.k, row.nu);
    }
    Ok(())
}
