//! Closed-form Fourier transforms `f̂(ξ) = ∫ e^{iξx} f_t(x) dx` of the
//! moving-average kernels, and the covariance recovered from them by
//! Plancherel's identity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::specfun::{coef_k, gamma, Hurst};

use super::freq::QuadSpec;
use super::moving_average::{ma_norm, MaKind};

/// `|A|` with `|f̂_t(ξ)| = |A| |e^{itξ} - 1| / |ξ|^{H+1/2}`.
fn amplitude(kind: MaKind, h: Hurst) -> f64 {
    match kind {
        MaKind::Nonanticipating => gamma(h.value() + 0.5),
        MaKind::WellBalanced => coef_k(h).abs(),
        MaKind::Log => PI,
    }
}

/// Fourier transform of [`super::ma_kernel`] at frequency `xi ≠ 0`.
///
/// * nonanticipating: `Γ(H+1/2) (e^{itξ}-1)/(iξ) · (iξ)^{-(H-1/2)}`, with
///   `(iξ)^{-(H-1/2)} = |ξ|^{-(H-1/2)} e^{∓i(H-1/2)π/2}` for `ξ ≷ 0`;
/// * well-balanced: `k_H (e^{itξ}-1)/|ξ|^{H+1/2}`;
/// * log: `π (e^{itξ}-1)/|ξ|`.
pub fn ft_closed(kind: MaKind, h: Hurst, t: f64, xi: f64) -> Result<Complex64> {
    if xi == 0.0 || !xi.is_finite() {
        return Err(Error::Domain(format!("transform needs a finite xi ≠ 0, got {xi}")));
    }
    let kind = kind.resolve(h)?;
    let shift = Complex64::from_polar(1.0, t * xi) - 1.0;
    let hv = h.value();
    Ok(match kind {
        MaKind::Nonanticipating => {
            let branch = Complex64::from_polar(
                xi.abs().powf(0.5 - hv),
                -xi.signum() * (hv - 0.5) * PI / 2.0,
            );
            gamma(hv + 0.5) * shift / Complex64::new(0.0, xi) * branch
        }
        MaKind::WellBalanced => coef_k(h) * shift / xi.abs().powf(hv + 0.5),
        MaKind::Log => PI * shift / xi.abs(),
    })
}

/// `(1 / (2π n_H n_{H'})) ∫_{-X}^{X} f̂_t(ξ) conj(f̂_s(ξ)) dξ` where `n` is
/// the kernel normalization, together with a bound on the neglected
/// `|ξ| > X` part, `8 A_H A_{H'} X^{-S} / (2π S n_H n_{H'})`.
///
/// Kernels are real, so the integrand over `ξ < 0` is the conjugate of
/// that over `ξ > 0` and only the positive half-line is integrated.
pub fn plancherel_covariance(
    kind: MaKind,
    h: Hurst,
    h2: Hurst,
    t: f64,
    s: f64,
    cutoff: f64,
    spec: &QuadSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    if cutoff <= 0.0 {
        return Err(Error::Domain("cutoff must be positive".into()));
    }
    let ka = kind.resolve(h)?;
    let kb = kind.resolve(h2)?;
    let sum = h.value() + h2.value();
    let norm = ma_norm(ka, h) * ma_norm(kb, h2);
    // near the origin the product behaves like ξ^{1-S}
    let m = 1.0 / (2.0 - sum);
    let integrand = |u: f64| {
        let xi = u.powf(m);
        let fa = ft_closed(ka, h, t, xi).expect("xi > 0");
        let fb = ft_closed(kb, h2, s, xi).expect("xi > 0");
        m * (fa * fb.conj()).re * xi / u
    };
    let head_end = spec.split_point.min(cutoff);
    let head = integrate(
        integrand,
        0.0,
        head_end.powf(1.0 / m),
        spec.abs_tol,
        spec.rel_tol,
        spec.max_depth,
    )?;
    let body = integrate(
        |xi: f64| {
            let fa = ft_closed(ka, h, t, xi).expect("xi > 0");
            let fb = ft_closed(kb, h2, s, xi).expect("xi > 0");
            (fa * fb.conj()).re
        },
        head_end,
        cutoff,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_depth,
    )?;
    let value = (head.value + body.value) / (PI * norm);
    let bound = 8.0 * amplitude(ka, h) * amplitude(kb, h2) * cutoff.powf(-sum)
        / (2.0 * PI * sum * norm);
    Ok((value, bound))
}
