//! The single material point: `p` stays at 1 while `|λt| ≤ 1` and runs away
//! to the edge of the search box once the load passes the threshold.
//!
//! ```text
//! cargo run --example toy_1d -- 2.0
//! ```

use plastiq::solver::{run_1d_toy, ToyConfig};
use plastiq::TimeGrid;

fn main() -> plastiq::Result<()> {
    let lambda: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2.0);
    let grid = TimeGrid::uniform(1.0, 20)?;
    let config = ToyConfig { p_max: 10.0, ..ToyConfig::default() };

    println!("lambda = {lambda}");
    println!("{:>6} {:>8} {:>12} {:>12} {:>8}", "t", "ell", "f", "p", "runaway");
    for k in run_1d_toy(lambda, &grid, &config)? {
        println!("{:>6.3} {:>8.3} {:>12.6} {:>12.6} {:>8}", k.t, k.ell, k.f, k.p, k.runaway);
    }
    Ok(())
}
