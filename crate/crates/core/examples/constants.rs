//! Gamma function and the field constants, including the behaviour of the
//! cross constant as H + H' approaches 1.

use fbfield::specfun::{coef_a, coef_a_dual, coef_alpha, coef_c, coef_d, gamma_real};
use fbfield::Hurst;

fn main() -> fbfield::Result<()> {
    for x in [0.5, 1.5, 4.0, -0.5, -2.5, 30.0] {
        println!("gamma({x}) = {:.16e}", gamma_real(x)?);
    }
    for hv in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let h = Hurst::new(hv)?;
        println!(
            "H={hv}: c = {:.10}, d = {:.10}, alpha = {:.10}, a(H,H) = {:.15}",
            coef_c(h),
            coef_d(h),
            coef_alpha(h),
            coef_a(h, h)
        );
    }
    let h = Hurst::new(0.3)?;
    println!("dual value a(0.3, 0.7) = {:.12}", coef_a_dual(h));
    for d in [1e-2, 1e-4, 1e-6, 0.0] {
        let h2 = Hurst::new(0.7 + d)?;
        println!("  a(0.3, 0.7 + {d:e}) = {:.12}", coef_a(h, h2));
    }
    Ok(())
}
