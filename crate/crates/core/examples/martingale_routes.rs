//! Stieltjes against projection for the fundamental martingale, under
//! grid doubling.

use std::time::Instant;

use fbfield::martingales::{exact_route_discrepancy, uniform_grid};
use fbfield::{Hurst, Parity};

fn main() -> fbfield::Result<()> {
    for (hv, parity) in [(0.25, Parity::Odd), (0.25, Parity::Even), (0.4, Parity::Odd), (0.4, Parity::Even)] {
        let h = Hurst::new(hv)?;
        let mut prev = None;
        for n in [64, 128, 256] {
            let start = Instant::now();
            let d = exact_route_discrepancy(h, parity, &uniform_grid(n, 1.0), n - 1)?;
            let ratio = prev.map(|p: f64| d / p);
            println!(
                "H={hv} {parity} n={n}: relative L2 {d:.4} ratio {} ({:.2?})",
                ratio.map_or("-".to_string(), |r| format!("{r:.3}")),
                start.elapsed()
            );
            prev = Some(d);
        }
    }
    Ok(())
}
