//! Sylvester powers: prime powers exactly dividing the lcm of a set and
//! dividing only one of its elements. Each exactly divides the denominator
//! of the reciprocal sum.
//!
//! cargo run --example sylvester

use unitfrac::factor::FactorBudget;
use unitfrac::primes::Sieve;
use unitfrac::sylvester::{
    check_theisinger_kurschak, interval_sylvester_powers, quadruple_scan, verify_delta_divisibility, Interval,
};
use unitfrac::FinSet;

fn main() -> unitfrac::Result<()> {
    let x = FinSet::interval(1000, 1004)?;
    let report = verify_delta_divisibility(&x, &FactorBudget::default())?;
    println!("delta{x} = {}", report.delta);
    for c in &report.checks {
        println!("  {} divides delta with exponent {}", c.power, c.delta_valuation);
    }

    // The same powers by counting multiples, without factoring any element.
    let sieve = Sieve::new(1004);
    let via_interval: Vec<String> = interval_sylvester_powers(Interval::new(1000, 1004)?, &sieve)
        .iter()
        .map(ToString::to_string)
        .collect();
    println!("interval route: {}", via_interval.join(" "));

    let tk = check_theisinger_kurschak(300, 300);
    let integral: Vec<String> = tk.integral.iter().map(ToString::to_string).collect();
    println!("integral interval sums up to 300: {}", integral.join(" "));

    for q in quadruple_scan(100).quadruples {
        println!("same sylvester powers: {} and {}", q.first, q.second);
    }
    Ok(())
}
