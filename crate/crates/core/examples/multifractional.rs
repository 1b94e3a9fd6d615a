//! Nonanticipating and well-balanced mBm along a linear profile, and the
//! dual-pair ratios that tell their laws apart.

use fbfield::mbm::{cohen_discrepancy, mbm_cov_x, mbm_cov_y, mbm_sample, HurstProfile, MbmKind};
use fbfield::mcoracle::estimate_cov;
use fbfield::Hurst;

fn main() -> fbfield::Result<()> {
    let p = HurstProfile::linear(0.2, 0.8, 1.0)?;
    let times = [0.25, 0.5, 1.0];
    for which in [MbmKind::X, MbmKind::Y] {
        let e = mbm_sample(&p, &times, which, 20_000, 7)?;
        for (i, &t) in times.iter().enumerate() {
            let s = 1.0;
            let exact = match which {
                MbmKind::X => mbm_cov_x(&p, t, s)?,
                MbmKind::Y => mbm_cov_y(&p, t, s)?,
            };
            println!("{which}: cov({t}, {s}) exact {exact:.4}, sampled {:.4}", estimate_cov(&e, i, 2)?.0);
        }
    }

    let r = cohen_discrepancy(Hurst::new(0.3)?, &[(2.0, 1.0), (3.0, 1.0), (5.0, 2.0)])?;
    for e in &r.entries {
        println!("(t, s) = ({}, {}): r_X = {:.6}, r_Y = {:.6}", e.t, e.s, e.r_x, e.r_y);
    }
    println!(
        "r_X spread {:.4}, r_Y spread {:.1e}, laws differ: {}",
        r.r_x_spread, r.r_y_spread, r.discrepancy
    );
    Ok(())
}
