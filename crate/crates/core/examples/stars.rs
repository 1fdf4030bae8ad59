//! Prime exponents along b, ★b, ★²b, ...: once p^e exactly divides an
//! iterate, it exactly divides every later one.
//!
//! cargo run --example stars

use unitfrac::factor::FactorBudget;
use unitfrac::nat;
use unitfrac::stars::{exponent_profile, pb_membership};

fn main() -> unitfrac::Result<()> {
    let profile = exponent_profile(&nat(2), 5, &FactorBudget::default(), 20_000)?;
    profile.verify().expect("exponents stabilize");
    for r in profile.records() {
        println!("{}^{} from step {}", r.prime, r.exponent, r.first_index);
    }

    let pb = pb_membership(&nat(2), 6, 100);
    println!("primes <= 100 dividing some iterate of 2: {:?}", pb.observed);
    println!("primes <= 100 that never do: {:?}", pb.excluded);
    Ok(())
}
