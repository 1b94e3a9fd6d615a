//! Real gamma function and the normalization constants of the moving-average
//! representations, the dependent/symmetrized field covariances and the
//! fundamental martingale kernels.
//!
//! Every function here is pure and reentrant.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sums `h + h'` within this distance of 1 are treated as exact dual pairs.
pub const DUAL_TOL: f64 = 4.0 * f64::EPSILON;

/// A Hurst index, strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hurst(f64);

impl Hurst {
    pub const HALF: Hurst = Hurst(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Hurst(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The dual index `1 - H`.
    pub fn dual(self) -> Hurst {
        Hurst(1.0 - self.0)
    }

    pub fn is_half(self) -> bool {
        self.0 == 0.5
    }
}

impl TryFrom<f64> for Hurst {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Hurst::new(v)
    }
}

impl From<Hurst> for f64 {
    fn from(h: Hurst) -> f64 {
        h.0
    }
}

impl std::fmt::Display for Hurst {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(H, 1 - H)`. The dual index is always derived, never stored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualPair {
    h: Hurst,
}

impl DualPair {
    pub fn new(h: Hurst) -> Self {
        DualPair { h }
    }

    pub fn h(&self) -> Hurst {
        self.h
    }

    pub fn h_dual(&self) -> Hurst {
        self.h.dual()
    }
}

/// True when `h + h2` is 1 up to [`DUAL_TOL`].
#[inline]
pub fn is_dual(h: Hurst, h2: Hurst) -> bool {
    (h.0 + h2.0 - 1.0).abs() <= DUAL_TOL
}

// Lanczos approximation, r = 10.900511 (Pugh 2004), as used by statrs.
const LANCZOS_R: f64 = 10.900511;
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];
#[allow(clippy::excessive_precision)]
const TWO_SQRT_E_OVER_PI: f64 = 1.8603827342052657173362492472666631120594218414085755;

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.floor() {
        return 0.0;
    }
    // reduce to [-1, 1]
    let r = x - 2.0 * (x / 2.0).round();
    if r.abs() == 0.5 {
        return r.signum();
    }
    (PI * r).sin()
}

/// Lanczos sum on the reduced range `[1, 2)`.
fn lanczos(x: f64) -> f64 {
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0));
    s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_R) / E).powf(x - 0.5)
}

/// Gamma for `x >= 0.5`: exact factorials at small integers, otherwise the
/// Lanczos sum on `[1, 2)` carried up or down by `Γ(x+1) = xΓ(x)`.
fn gamma_pos(x: f64) -> f64 {
    if x > 171.7 {
        return f64::INFINITY;
    }
    if x == x.floor() {
        return (2..x as u32).fold(1.0, |p, k| p * k as f64);
    }
    if x < 1.0 {
        return lanczos(x + 1.0) / x;
    }
    let mut y = x;
    let mut prod = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        prod *= y;
    }
    prod * lanczos(y)
}

/// Gamma function for real arguments.
///
/// Lanczos approximation (reduced to `[1, 2)`) for `x >= 0.5`, reflection
/// `Γ(x)Γ(1-x) = π / sin(πx)` below. Nonpositive integers are poles.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::GammaPole(x));
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * gamma_pos(1.0 - x)))
    } else {
        Ok(gamma_pos(x))
    }
}

/// Gamma at points known to be away from the poles (all internal callers).
#[inline]
pub(crate) fn gamma(x: f64) -> f64 {
    gamma_real(x).expect("gamma evaluated at a pole")
}

/// `sqrt(Γ(2H+1) sin(πH))`, the radical shared by several constants.
#[inline]
pub(crate) fn radical(h: Hurst) -> f64 {
    (gamma(2.0 * h.0 + 1.0) * (PI * h.0).sin()).sqrt()
}

/// Normalization of the nonanticipating representation,
/// `c_H = Γ(H + 1/2) / sqrt(Γ(2H+1) sin(πH))`.
pub fn coef_c(h: Hurst) -> f64 {
    gamma(h.0 + 0.5) / radical(h)
}

/// Normalization of the well-balanced representation. Equals `π` at
/// `H = 1/2`, where the logarithmic kernel takes over; the power-law
/// branch tends to zero there, so the constant is discontinuous by design.
pub fn coef_d(h: Hurst) -> f64 {
    if h.is_half() {
        return PI;
    }
    let s = (PI * h.0).sin();
    gamma(h.0 + 0.5) / gamma(2.0 * h.0 + 1.0).sqrt() * (2.0 * (1.0 - s) / s).sqrt()
}

/// Coefficient of the well-balanced kernel's Fourier transform,
/// `k_H = -2Γ(H+1/2) sin((H-1/2)π/2)`, and `k_{1/2} = π`.
pub fn coef_k(h: Hurst) -> f64 {
    if h.is_half() {
        return PI;
    }
    -2.0 * gamma(h.0 + 0.5) * ((h.0 - 0.5) * PI / 2.0).sin()
}

/// `c_{H,H'} = sqrt(Γ(2H+1) sin πH) sqrt(Γ(2H'+1) sin πH') / π`.
pub fn coef_cc(h: Hurst, h2: Hurst) -> f64 {
    radical(h) * radical(h2) / PI
}

/// Cross-covariance constant `a_{H,H'}` of the odd/even fields and of the
/// symmetrized field, normalized so that `a_{H,H} = 1`.
///
/// Off the dual line this is `-2 c_{H,H'} Γ(-(H+H')) cos((H'-H)π/2)
/// cos((H+H')π/2)`. The pole of `Γ(-S)` at `S = 1` cancels against the
/// cosine zero; rewriting `Γ(-S) cos(Sπ/2) = -π / (2 Γ(1+S) sin(Sπ/2))`
/// removes it, so the value is evaluated without cancellation for every
/// `S` in `(0, 2)`. Exactly on the dual line the closed form
/// `sqrt(Γ(2H+1) Γ(3-2H)) sin²(πH)` is used.
pub fn coef_a(h: Hurst, h2: Hurst) -> f64 {
    if is_dual(h, h2) {
        return coef_a_dual(h);
    }
    let sum = h.0 + h2.0;
    radical(h) * radical(h2) * ((h2.0 - h.0) * PI / 2.0).cos()
        / (gamma(1.0 + sum) * (sum * PI / 2.0).sin())
}

/// `a_{H,1-H} = sqrt(Γ(2H+1) Γ(3-2H)) sin²(πH)`.
pub fn coef_a_dual(h: Hurst) -> f64 {
    let s = (PI * h.0).sin();
    (gamma(2.0 * h.0 + 1.0) * gamma(3.0 - 2.0 * h.0)).sqrt() * s * s
}

/// Normalization of the fundamental martingale kernels,
/// `α_H = 2^{2H-1} sqrt(Γ(3-2H)) sin(πH) / (Γ(3/2-H) sqrt(Γ(2H+1)))`.
pub fn coef_alpha(h: Hurst) -> f64 {
    let x = h.0;
    2f64.powf(2.0 * x - 1.0) * gamma(3.0 - 2.0 * x).sqrt() * (PI * x).sin()
        / (gamma(1.5 - x) * gamma(2.0 * x + 1.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu(v: f64) -> Hurst {
        Hurst::new(v).unwrap()
    }

    /// Independent oracle: shift to z >= 20 and use Stirling's series.
    fn gamma_stirling(x: f64) -> f64 {
        let mut z = x;
        let mut prod = 1.0;
        while z < 20.0 {
            prod *= z;
            z += 1.0;
        }
        // Bernoulli terms B_{2k} / (2k (2k-1) z^{2k-1})
        let b = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
            7.0 / 6.0,
        ];
        let mut series = 0.0;
        let mut zp = z;
        for (k, bk) in b.iter().enumerate() {
            let k2 = 2.0 * (k as f64 + 1.0);
            series += bk / (k2 * (k2 - 1.0) * zp);
            zp *= z * z;
        }
        (2.0 * PI / z).sqrt() * (z / E).powf(z) * series.exp() / prod
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma_real(1.0).unwrap(), 1.0);
        assert!((gamma_real(0.5).unwrap() / 1.7724538509055160 - 1.0).abs() < 1e-14);
        let g = gamma_real(-0.5).unwrap();
        assert!((g + 3.5449077018110320).abs() < 1e-14 * 3.6);
        assert!((gamma_real(5.0).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_against_stirling_oracle() {
        let mut x: f64 = -29.73;
        while x <= 30.0 {
            if x.fract() != 0.0 {
                let g = gamma_real(x).unwrap();
                let o = gamma_stirling(x);
                assert!(
                    ((g - o) / o).abs() < 1e-13,
                    "x = {x}: {g} vs {o}, rel {}",
                    ((g - o) / o).abs()
                );
            }
            x += 0.173;
        }
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma_real(x), Err(Error::GammaPole(_))));
        }
    }

    #[test]
    fn gamma_recurrence_and_reflection() {
        let mut x: f64 = -9.95;
        while x < 10.0 {
            if (x - x.round()).abs() > 1e-3 && (x + 1.0 - (x + 1.0).round()).abs() > 1e-3 {
                let lhs = gamma_real(x + 1.0).unwrap();
                let rhs = x * gamma_real(x).unwrap();
                assert!(((lhs - rhs) / lhs).abs() < 1e-12, "recurrence at {x}");
            }
            x += 0.0731;
        }
        let mut x: f64 = -4.97;
        while x < 5.0 {
            if (x - x.round()).abs() > 1e-3 {
                let v = gamma_real(x).unwrap() * gamma_real(1.0 - x).unwrap() * sin_pi(x);
                assert!(((v - PI) / PI).abs() < 1e-12, "reflection at {x}: {v}");
            }
            x += 0.0613;
        }
    }

    #[test]
    fn hurst_rejects_boundary() {
        for v in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(Hurst::new(v).is_err());
        }
        assert_eq!(DualPair::new(hu(0.25)).h_dual().value(), 0.75);
    }

    #[test]
    fn c_constant() {
        assert!((coef_c(Hurst::HALF) - 1.0).abs() < 1e-15);
        for h in [0.1, 0.7] {
            let c = coef_c(hu(h));
            assert!(c > 0.0 && c.is_finite());
            let lhs = c * c * gamma(2.0 * h + 1.0) * (PI * h).sin();
            let rhs = gamma(h + 0.5).powi(2);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn d_constant() {
        assert_eq!(coef_d(Hurst::HALF), PI);
        assert!(coef_d(hu(0.25)) > 0.0);
        // the power-law branch vanishes as H -> 1/2
        assert!(coef_d(hu(0.5 - 1e-6)) < 1e-5);
        // consistency with k_H: d_H^2 Γ(2H+1) sin πH = k_H^2
        for h in [0.1, 0.3, 0.8] {
            let hh = hu(h);
            let lhs = coef_d(hh).powi(2) * gamma(2.0 * h + 1.0) * (PI * h).sin();
            assert!((lhs - coef_k(hh).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn k_constant_signs() {
        assert_eq!(coef_k(Hurst::HALF), PI);
        assert!(coef_k(hu(0.25)) > 0.0);
        assert!(coef_k(hu(0.75)) < 0.0);
    }

    #[test]
    fn cc_constant() {
        assert!((coef_cc(Hurst::HALF, Hurst::HALF) - 1.0 / PI).abs() < 1e-16);
        let (a, b) = (hu(0.3), hu(0.7));
        assert!(coef_cc(a, b) > 0.0);
        assert_eq!(coef_cc(a, b), coef_cc(b, a));
        assert!((coef_cc(a, b) * PI - radical(a) * radical(b)).abs() < 1e-12);
    }

    /// The printed constant, `-2 R Γ(-S) cos cos` without the 1/π.
    fn a_printed(h: f64, h2: f64) -> f64 {
        let s = h + h2;
        -2.0 * radical(hu(h))
            * radical(hu(h2))
            * gamma(-s)
            * ((h2 - h) * PI / 2.0).cos()
            * (s * PI / 2.0).cos()
    }

    #[test]
    fn a_constant_diagonal_is_one() {
        for i in 1..100 {
            let h = hu(i as f64 / 100.0);
            assert!((coef_a(h, h) - 1.0).abs() < 1e-12, "H = {h}");
        }
        assert!((coef_a(Hurst::HALF, Hurst::HALF) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn a_constant_is_printed_form_over_pi() {
        for (h, h2) in [(0.2, 0.3), (0.6, 0.9), (0.1, 0.45), (0.7, 0.75)] {
            let lhs = coef_a(hu(h), hu(h2));
            let rhs = a_printed(h, h2) / PI;
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0), "{h},{h2}");
        }
        // the printed constant itself gives π on the diagonal
        assert!((a_printed(0.3, 0.3) - PI).abs() < 1e-12);
    }

    #[test]
    fn a_constant_continuous_across_dual_line() {
        let on = coef_a(hu(0.3), hu(0.7));
        assert!((on - coef_a_dual(hu(0.3))).abs() < 1e-15);
        for d in [1e-6, -1e-6, 1e-9, -1e-12] {
            let near = coef_a(hu(0.3), hu(0.7 + d));
            assert!((near - on).abs() < 1e-4, "d = {d}");
        }
        assert!((coef_a_dual(Hurst::HALF) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn a_constant_symmetric() {
        for (h, h2) in [(0.2, 0.3), (0.6, 0.9), (0.25, 0.75), (0.05, 0.95)] {
            let (a, b) = (hu(h), hu(h2));
            assert!((coef_a(a, b) - coef_a(b, a)).abs() <= 1e-15);
        }
    }

    #[test]
    fn alpha_constant() {
        assert!((coef_alpha(Hurst::HALF) - 1.0).abs() < 1e-15);
        assert!(coef_alpha(hu(0.25)) > 0.0);
        assert!(coef_alpha(hu(0.75)) > 0.0);
    }
}
