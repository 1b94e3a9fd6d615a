//! Every covariance kernel at a few points, and the dependent-field kernel
//! recomputed from its frequency integrals.

use fbfield::kernels::{dfbf_from_integrals, freq_quad_oracle, FreqIntegral, KernelId, QuadSpec};
use fbfield::{Hurst, Parity};

fn main() -> fbfield::Result<()> {
    let (h, h2) = (Hurst::new(0.3)?, Hurst::new(0.7)?);
    let kernels = [
        KernelId::Fbm,
        KernelId::FbmOdd,
        KernelId::FbmEven,
        KernelId::Dfbf,
        KernelId::FieldParity {
            i: Parity::Odd,
            j: Parity::Odd,
        },
        KernelId::Fbf,
        KernelId::WellBalanced,
    ];
    println!("{:<22} {:>12} {:>12}", "kernel", "(1, 2)", "(0.5, 1.5)");
    for k in kernels {
        // single-index kernels see the first index twice
        let second = if k.single_hurst() { h } else { h2 };
        println!(
            "{:<22} {:>12.8} {:>12.8}",
            k.to_string(),
            k.eval(h, 1.0, second, 2.0)?,
            k.eval(h, 0.5, second, 1.5)?
        );
    }

    let spec = QuadSpec::default();
    for (t, s) in [(1.0, 2.0), (-0.7, 1.3)] {
        let i1 = freq_quad_oracle(FreqIntegral::I1, h, h2, t, s, &spec)?;
        let i2 = freq_quad_oracle(FreqIntegral::I2, h, h2, t, s, &spec)?;
        let closed = KernelId::Dfbf.eval(h, t, h2, s)?;
        println!(
            "dfbf({t}, {s}): closed {closed:.12}, frequency {:.12}",
            dfbf_from_integrals(h, h2, i1, i2)
        );
    }
    Ok(())
}
