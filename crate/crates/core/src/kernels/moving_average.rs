//! Time-domain kernels of the moving-average representations
//!
//! `B_H(t) = (1/norm) ∫ f_t(x) dW_x`
//!
//! with `f_t(x) = (t-x)_+^{H-1/2} - (-x)_+^{H-1/2}` (nonanticipating),
//! `|t-x|^{H-1/2} - |x|^{H-1/2}` (well-balanced) or `log(|x|/|t-x|)`
//! (logarithmic, the well-balanced kernel at `H = 1/2`).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{coef_c, coef_d, Hurst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaKind {
    Nonanticipating,
    WellBalanced,
    Log,
}

impl fmt::Display for MaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaKind::Nonanticipating => "nonanticipating",
            MaKind::WellBalanced => "well_balanced",
            MaKind::Log => "log",
        })
    }
}

impl FromStr for MaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nonanticipating" | "na" => Ok(MaKind::Nonanticipating),
            "well_balanced" | "wb" => Ok(MaKind::WellBalanced),
            "log" => Ok(MaKind::Log),
            _ => Err(Error::Parse(format!("unknown moving-average kind '{s}'"))),
        }
    }
}

impl MaKind {
    /// The kind actually used at `h`: the well-balanced power kernel
    /// vanishes identically at 1/2, where the log kernel replaces it.
    pub fn resolve(self, h: Hurst) -> Result<MaKind> {
        match self {
            MaKind::WellBalanced if h.is_half() => Ok(MaKind::Log),
            MaKind::Log if !h.is_half() => Err(Error::Domain(format!(
                "the log kernel is the H = 1/2 case, got H = {h}"
            ))),
            k => Ok(k),
        }
    }
}

/// Normalization turning the kernel integral into a standard process:
/// `c_H`, `d_H`, or `π` for the log kernel.
pub fn ma_norm(kind: MaKind, h: Hurst) -> f64 {
    match kind {
        MaKind::Nonanticipating => coef_c(h),
        MaKind::WellBalanced => coef_d(h),
        MaKind::Log => PI,
    }
}

/// `u_+^α` with `0^α = 0` for `α > 0` and `u^0 = 1` only for `u > 0`.
#[inline]
fn pos_pow(u: f64, alpha: f64) -> f64 {
    if u > 0.0 {
        u.powf(alpha)
    } else {
        0.0
    }
}

#[inline]
fn abs_pow(u: f64, alpha: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.abs().powf(alpha)
    }
}

/// Pointwise kernel value `f_t(x)` (unnormalized).
///
/// Singular kernels (`H < 1/2`, or the log kernel) reject `x ∈ {0, t}`;
/// for `H > 1/2` the truncated powers are continued by 0 there. `t = 0`
/// gives the zero kernel.
pub fn ma_kernel(kind: MaKind, h: Hurst, t: f64, x: f64) -> Result<f64> {
    let kind = kind.resolve(h)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let alpha = h.value() - 0.5;
    let singular = matches!(kind, MaKind::Log) || alpha < 0.0;
    if singular && (x == 0.0 || x == t) {
        return Err(Error::Singular { t, x });
    }
    Ok(match kind {
        MaKind::Nonanticipating => pos_pow(t - x, alpha) - pos_pow(-x, alpha),
        MaKind::WellBalanced => abs_pow(t - x, alpha) - abs_pow(x, alpha),
        MaKind::Log => (x.abs() / (t - x).abs()).ln(),
    })
}

/// Antiderivative of `|y|^α`: `sgn(y)|y|^{α+1}/(α+1)`.
#[inline]
fn abs_pow_anti(y: f64, alpha: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y.signum() * y.abs().powf(alpha + 1.0) / (alpha + 1.0)
    }
}

/// Antiderivative of `ln|y|`: `y ln|y| - y`.
#[inline]
fn log_anti(y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y * y.abs().ln() - y
    }
}

/// Exact `∫_a^b f_t(x) dx` (unnormalized), finite for every cell including
/// those touching the singular points.
pub fn ma_cell_integral(kind: MaKind, h: Hurst, t: f64, a: f64, b: f64) -> Result<f64> {
    let kind = kind.resolve(h)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let alpha = h.value() - 0.5;
    let ap1 = alpha + 1.0;
    Ok(match kind {
        MaKind::Nonanticipating => {
            let first = (pos_pow(t - a, ap1) - pos_pow(t - b, ap1)) / ap1;
            let second = (pos_pow(-a, ap1) - pos_pow(-b, ap1)) / ap1;
            first - second
        }
        MaKind::WellBalanced => {
            let first = abs_pow_anti(t - a, alpha) - abs_pow_anti(t - b, alpha);
            let second = abs_pow_anti(b, alpha) - abs_pow_anti(a, alpha);
            first - second
        }
        MaKind::Log => (log_anti(b) - log_anti(a)) - (log_anti(t - a) - log_anti(t - b)),
    })
}
