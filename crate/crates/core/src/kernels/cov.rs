//! Closed-form covariances of fractional Brownian motion, its odd and even
//! parts, the dependent field, the symmetrized field and the well-balanced
//! field.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{coef_a, coef_cc, gamma, is_dual, radical, Hurst};

use super::Parity;

#[inline]
fn apow(x: f64, p: f64) -> f64 {
    x.abs().powf(p)
}

/// `u log|u|` with `0 log 0 = 0`.
#[inline]
pub(crate) fn xlogx(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.abs().ln()
    }
}

/// `(|t|^p + |s|^p - |t-s|^p) / 2`.
#[inline]
pub(crate) fn brownian_form(p: f64, t: f64, s: f64) -> f64 {
    0.5 * (apow(t, p) + apow(s, p) - apow(t - s, p))
}

fn check_nonneg(t: f64, s: f64) -> Result<()> {
    if t < 0.0 || s < 0.0 {
        Err(Error::Domain(format!(
            "parity covariances need nonnegative times, got t = {t}, s = {s}"
        )))
    } else {
        Ok(())
    }
}

/// Standard fBm covariance `(|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2`.
pub fn fbm_cov(h: Hurst, t: f64, s: f64) -> f64 {
    brownian_form(2.0 * h.value(), t, s)
}

/// Covariance of the odd part `(B(t) - B(-t))/2` or the even part
/// `(B(t) + B(-t))/2` of a standard fBm, for `t, s >= 0`.
pub fn fbm_parity_cov(parity: Parity, h: Hurst, t: f64, s: f64) -> Result<f64> {
    check_nonneg(t, s)?;
    let p = 2.0 * h.value();
    Ok(match parity {
        Parity::Odd => 0.25 * (apow(s + t, p) - apow(s - t, p)),
        Parity::Even => {
            0.5 * (apow(s, p) + apow(t, p)) - 0.25 * (apow(s + t, p) + apow(s - t, p))
        }
    })
}

/// `E B_H(t) B_{H'}(s)` for the dependent field, where every index is
/// driven by one noise through the nonanticipating representation.
///
/// With `S = H + H'`, `D = H' - H`, `ε = S - 1` and
/// `R = sqrt(Γ(2H+1) sin πH) sqrt(Γ(2H'+1) sin πH')`:
///
/// `K = a_{H,H'} (|t|^S + |s|^S - |t-s|^S)/2
///      - R sin(Dπ/2) P / (2 Γ(1+S) sin(επ/2))`,
///
/// `P = t(|t|^ε - 1) - s(|s|^ε - 1) - (t-s)(|t-s|^ε - 1)`.
///
/// `P` is formed with `expm1` so the ratio `P / sin(επ/2)` stays accurate
/// as `ε -> 0`; its limit `(2/π)(t log|t| - s log|s| - (t-s) log|t-s|)`
/// is used on the dual line. Not symmetric in `(t, s)` alone:
/// `dfbf_cov(H, H', t, s) = dfbf_cov(H', H, s, t)`.
pub fn dfbf_cov(h: Hurst, h2: Hurst, t: f64, s: f64) -> f64 {
    let d = h2.value() - h.value();
    if is_dual(h, h2) {
        let c = coef_cc(h, h2);
        let q = xlogx(t) - xlogx(s) - xlogx(t - s);
        return c * ((d * PI / 2.0).cos() * (PI / 2.0) * (t.abs() + s.abs() - (t - s).abs())
            - (d * PI / 2.0).sin() * q);
    }
    let sum = h.value() + h2.value();
    let first = coef_a(h, h2) * brownian_form(sum, t, s);
    if d == 0.0 {
        return first;
    }
    let eps = sum - 1.0;
    let em = |u: f64| if u == 0.0 { 0.0 } else { u * (eps * u.abs().ln()).exp_m1() };
    let p = em(t) - em(s) - em(t - s);
    first
        - radical(h) * radical(h2) * (d * PI / 2.0).sin() * p
            / (2.0 * gamma(1.0 + sum) * (eps * PI / 2.0).sin())
}

/// Covariance between the `i`-part of `B_H` and the `j`-part of `B_{H'}`
/// in the dependent field, for `t, s >= 0`.
///
/// Same-parity pairs use `a_{H,H'}(|t+s|^S - |t-s|^S)/4` (odd) and
/// `a_{H,H'}((|t|^S + |s|^S)/2 - (|t+s|^S + |t-s|^S)/4)` (even); mixed
/// parities are assembled from [`dfbf_cov`] over the four sign quadrants.
pub fn field_parity_cov(i: Parity, j: Parity, h: Hurst, h2: Hurst, t: f64, s: f64) -> Result<f64> {
    check_nonneg(t, s)?;
    let sum = h.value() + h2.value();
    Ok(match (i, j) {
        (Parity::Odd, Parity::Odd) => 0.25 * coef_a(h, h2) * (apow(t + s, sum) - apow(t - s, sum)),
        (Parity::Even, Parity::Even) => {
            coef_a(h, h2)
                * (0.5 * (apow(t, sum) + apow(s, sum))
                    - 0.25 * (apow(t + s, sum) + apow(t - s, sum)))
        }
        _ => parity_quadrants(i, j, h, h2, t, s),
    })
}

/// `(1/4) Σ σ_i(a) σ_j(b) K(a t, b s)` over `a, b ∈ {1, -1}`, where
/// `σ_odd(-1) = -1` and `σ_even = 1`.
pub fn parity_quadrants(i: Parity, j: Parity, h: Hurst, h2: Hurst, t: f64, s: f64) -> f64 {
    let si = i.reflection_sign();
    let sj = j.reflection_sign();
    0.25 * (dfbf_cov(h, h2, t, s)
        + sj * dfbf_cov(h, h2, t, -s)
        + si * dfbf_cov(h, h2, -t, s)
        + si * sj * dfbf_cov(h, h2, -t, -s))
}

/// Symmetrized field covariance `a_{H,H'} (|t|^S + |s|^S - |t-s|^S)/2`.
pub fn fbf_cov(h: Hurst, h2: Hurst, t: f64, s: f64) -> f64 {
    coef_a(h, h2) * brownian_form(h.value() + h2.value(), t, s)
}

/// Coefficient of the well-balanced field covariance,
/// `(k_H k_{H'} / (d_H d_{H'})) (d_{H0}^2 / k_{H0}^2)` with `H0 = (H+H')/2`.
///
/// Uses `k_H^2 = d_H^2 Γ(2H+1) sin πH`, which holds on both sides of 1/2
/// and at 1/2 itself, so no ratio of vanishing constants is formed.
pub fn wb_coefficient(h: Hurst, h2: Hurst) -> f64 {
    let sign = |x: Hurst| if x.value() > 0.5 { -1.0 } else { 1.0 };
    let h0 = 0.5 * (h.value() + h2.value());
    sign(h) * sign(h2) * radical(h) * radical(h2) / (gamma(2.0 * h0 + 1.0) * (PI * h0).sin())
}

/// `E W_H(t) W_{H'}(s)` for the well-balanced field.
pub fn wb_field_cov(h: Hurst, h2: Hurst, t: f64, s: f64) -> f64 {
    wb_coefficient(h, h2) * brownian_form(h.value() + h2.value(), t, s)
}
