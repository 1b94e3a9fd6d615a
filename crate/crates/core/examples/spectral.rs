//! Fourier transforms of the moving-average kernels and the covariances
//! recovered from them by Plancherel.

use fbfield::kernels::{dfbf_cov, ft_closed, plancherel_covariance, wb_field_cov, QuadSpec};
use fbfield::{Hurst, MaKind};

fn main() -> fbfield::Result<()> {
    let h = Hurst::new(0.3)?;
    for xi in [0.5, 1.0, 4.0] {
        let f = ft_closed(MaKind::WellBalanced, h, 1.0, xi)?;
        println!("f_1({xi}) = {:.6} {:+.6}i", f.re, f.im);
    }
    let spec = QuadSpec {
        abs_tol: 1e-9,
        rel_tol: 1e-10,
        split_point: 1.0,
        max_depth: 20_000,
    };
    let (a, b, t, s) = (Hurst::new(0.35)?, Hurst::new(0.6)?, 0.8, 1.7);
    let (wb, bound) = plancherel_covariance(MaKind::WellBalanced, a, b, t, s, 2000.0, &spec)?;
    println!("well-balanced: Plancherel {wb:.8} (tail <= {bound:.1e}), closed {:.8}", wb_field_cov(a, b, t, s));
    let (na, bound) = plancherel_covariance(MaKind::Nonanticipating, a, b, t, s, 2000.0, &spec)?;
    println!("nonanticipating: Plancherel {na:.8} (tail <= {bound:.1e}), closed {:.8}", dfbf_cov(a, b, t, s));
    Ok(())
}
