//! Analytic audit of the fundamental martingale built by projection.

use fbfield::martingales::{geometric_grid, martingale_audit, MartMethod, MartingaleSpec};
use fbfield::{Hurst, Parity};

fn main() -> fbfield::Result<()> {
    let grid = geometric_grid(64, 6);
    for hv in [0.25, 0.5, 0.75] {
        for parity in [Parity::Odd, Parity::Even] {
            let spec = MartingaleSpec::new(Hurst::new(hv)?, parity, grid.clone(), MartMethod::Projection)?;
            let r = martingale_audit(&spec)?;
            println!(
                "H={hv} {parity:<4} martingale defect {:.1e}, increment defect {:.1e}, variance slope {:.4} (2(1-H) = {:.2})",
                r.martingale_defect, r.increment_defect, r.slope, r.slope_target
            );
        }
    }
    Ok(())
}
