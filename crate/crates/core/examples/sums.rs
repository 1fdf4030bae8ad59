//! Reciprocal sums of finite sets, and the splitting 1/z = 1/(z+1) + 1/(z(z+1)).
//!
//! cargo run --example sums

use unitfrac::{delta, mu, nat, nu, sigma, FinSet, PosRational};

fn main() -> unitfrac::Result<()> {
    for x in [
        FinSet::from_u64s([2, 3, 6])?,
        FinSet::from_u64s([2, 4, 8, 16])?,
        FinSet::interval(1, 10)?,
    ] {
        println!(
            "{x}: sigma = {}, nu = {}, delta = {}, mu = {}",
            sigma(&x)?,
            nu(&x)?,
            delta(&x)?,
            mu(&x)?
        );
    }

    let z = nat(7);
    let split = FinSet::new([&z + 1u32, &z * (&z + 1u32)])?;
    assert_eq!(sigma(&split)?, PosRational::unit(&z)?);
    println!("1/{z} = sigma {split}");

    let half: PosRational = "1/2".parse()?;
    let third: PosRational = "1/3".parse()?;
    println!("1/2 + 1/3 = {}", half + third);
    Ok(())
}
