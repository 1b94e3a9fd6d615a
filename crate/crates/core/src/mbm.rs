//! Multifractional Brownian motion along a Hurst profile `H(t)`.
//!
//! `X` is the nonanticipating mBm, the diagonal `{B_{H(t)}(t)}` of the
//! dependent field; `Y` is the well-balanced one, the diagonal of the
//! well-balanced field. Both are standardized so that `E X_t² = E Y_t² =
//! |t|^{2H(t)}`, and both are sampled exactly from their covariances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussfield::{build_cov, sample, FieldPoint, PathEnsemble};
use crate::kernels::{dfbf_cov, wb_field_cov, KernelId};
use crate::specfun::Hurst;

/// Profile values must lie in `(PROFILE_EPS, 1 - PROFILE_EPS)`.
pub const PROFILE_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileShape {
    Constant { h: f64 },
    /// `h0` at `t = 0` to `h1` at `t = t_end`, flat afterwards.
    Linear { h0: f64, h1: f64, t_end: f64 },
    /// Piecewise-linear through the knots, flat outside them.
    Table { knots: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HurstProfile {
    shape: ProfileShape,
    /// Hölder exponent of `t ↦ H(t)`; carried along, not used in any
    /// computation.
    pub beta: f64,
}

fn check_range(h: f64) -> Result<()> {
    if h > PROFILE_EPS && h < 1.0 - PROFILE_EPS {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!(
            "value {h} outside ({PROFILE_EPS}, {})",
            1.0 - PROFILE_EPS
        )))
    }
}

impl HurstProfile {
    pub fn new(shape: ProfileShape) -> Result<Self> {
        match &shape {
            ProfileShape::Constant { h } => check_range(*h)?,
            ProfileShape::Linear { h0, h1, t_end } => {
                check_range(*h0)?;
                check_range(*h1)?;
                if !(*t_end > 0.0 && t_end.is_finite()) {
                    return Err(Error::InvalidProfile(format!("ramp end {t_end} must be positive")));
                }
            }
            ProfileShape::Table { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidProfile("empty knot table".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidProfile("knot times must be strictly increasing".into()));
                }
                if knots.iter().any(|k| !k.0.is_finite()) {
                    return Err(Error::InvalidProfile("knot times must be finite".into()));
                }
                // piecewise-linear: extremes sit at knots
                knots.iter().try_for_each(|k| check_range(k.1))?;
            }
        }
        Ok(HurstProfile { shape, beta: 1.0 })
    }

    pub fn constant(h: Hurst) -> Result<Self> {
        Self::new(ProfileShape::Constant { h: h.value() })
    }

    pub fn linear(h0: f64, h1: f64, t_end: f64) -> Result<Self> {
        Self::new(ProfileShape::Linear { h0, h1, t_end })
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ProfileShape::Table { knots })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::InvalidProfile(format!("Hölder exponent {beta} must be positive")));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    /// `H(t)` for `t >= 0`.
    pub fn eval(&self, t: f64) -> Result<Hurst> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("profile evaluated at negative time {t}")));
        }
        let v = match &self.shape {
            ProfileShape::Constant { h } => *h,
            ProfileShape::Linear { h0, h1, t_end } => h0 + (h1 - h0) * (t / t_end).min(1.0),
            ProfileShape::Table { knots } => {
                let i = knots.partition_point(|k| k.0 <= t);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[i - 1].1
                } else {
                    let (t0, h0) = knots[i - 1];
                    let (t1, h1) = knots[i];
                    h0 + (h1 - h0) * (t - t0) / (t1 - t0)
                }
            }
        };
        Hurst::new(v)
    }

    /// Diagonal field points `(t, H(t))`.
    pub fn points(&self, times: &[f64]) -> Result<Vec<FieldPoint>> {
        times
            .iter()
            .map(|&t| Ok(FieldPoint::new(t, self.eval(t)?)))
            .collect()
    }
}

impl FromStr for HurstProfile {
    type Err = Error;
    /// Two-column text, one `t H` pair per line, whitespace or comma
    /// separated. `#` starts a comment; a non-numeric first line is a header.
    fn from_str(text: &str) -> Result<Self> {
        let mut knots = Vec::new();
        let mut seen_data = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|c| !c.is_empty())
                .collect();
            let nums: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
            match nums {
                Ok(v) if v.len() == 2 => {
                    knots.push((v[0], v[1]));
                    seen_data = true;
                }
                Err(_) if !seen_data && knots.is_empty() && cols.len() == 2 => {
                    // header
                    seen_data = true;
                }
                _ => {
                    return Err(Error::InvalidProfile(format!(
                        "line {}: expected two numbers, got '{line}'",
                        lineno + 1
                    )))
                }
            }
        }
        HurstProfile::table(knots)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MbmKind {
    /// Nonanticipating mBm.
    X,
    /// Well-balanced mBm.
    Y,
}

impl MbmKind {
    pub fn kernel(self) -> KernelId {
        match self {
            MbmKind::X => KernelId::Dfbf,
            MbmKind::Y => KernelId::WellBalanced,
        }
    }
}

impl fmt::Display for MbmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MbmKind::X => "x",
            MbmKind::Y => "y",
        })
    }
}

impl FromStr for MbmKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "nonanticipating" => Ok(MbmKind::X),
            "y" | "well_balanced" | "well-balanced" | "wb" => Ok(MbmKind::Y),
            _ => Err(Error::Parse(format!("unknown mBm kind '{s}'"))),
        }
    }
}

/// `E X_t X_s = dfbf_cov(H(t), H(s), t, s)`.
pub fn mbm_cov_x(p: &HurstProfile, t: f64, s: f64) -> Result<f64> {
    Ok(dfbf_cov(p.eval(t)?, p.eval(s)?, t, s))
}

/// `E Y_t Y_s = wb_field_cov(H(t), H(s), t, s)`.
pub fn mbm_cov_y(p: &HurstProfile, t: f64, s: f64) -> Result<f64> {
    Ok(wb_field_cov(p.eval(t)?, p.eval(s)?, t, s))
}

pub fn mbm_cov(p: &HurstProfile, which: MbmKind, t: f64, s: f64) -> Result<f64> {
    match which {
        MbmKind::X => mbm_cov_x(p, t, s),
        MbmKind::Y => mbm_cov_y(p, t, s),
    }
}

/// Exact Gaussian sampling on the diagonal points `(t_i, H(t_i))`.
pub fn mbm_sample(p: &HurstProfile, times: &[f64], which: MbmKind, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    let m = build_cov(&p.points(times)?, which.kernel())?;
    sample(&m, n_paths, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohenEntry {
    pub t: f64,
    pub s: f64,
    /// `dfbf_cov(H, 1-H, t, s) / min(t, s)`.
    pub r_x: f64,
    /// `wb_field_cov(H, 1-H, t, s) / min(t, s)`.
    pub r_y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohenReport {
    pub h: Hurst,
    pub entries: Vec<CohenEntry>,
    /// `max r_x - min r_x` over the pairs.
    pub r_x_spread: f64,
    /// `max r_y - min r_y` over the pairs.
    pub r_y_spread: f64,
    /// `r_y` constant to `1e-12` (relative) while `r_x` moves by more than
    /// `1e-3`.
    pub discrepancy: bool,
    /// At `H = 1/2` both laws are Brownian and nothing is expected.
    pub no_discrepancy_expected: bool,
    /// All pairs share one ratio `t/s`. On the dual line both ratios are
    /// invariant under `(t, s) -> (λt, λs)`, so such pairs cannot separate
    /// the two laws.
    pub scale_equivalent: bool,
}

/// Tolerance on the spread of `r_y` relative to its size.
pub const R_Y_TOL: f64 = 1e-12;
/// Spread of `r_x` that counts as a discrepancy.
pub const R_X_GAP: f64 = 1e-3;

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = v.fold(f64::INFINITY, f64::min);
    max - min
}

/// Normalized cross-covariances of a dual pair at each `(t, s)`. Under a
/// law equal up to a unimodular factor, both ratios would be constant.
pub fn cohen_discrepancy(h: Hurst, pairs: &[(f64, f64)]) -> Result<CohenReport> {
    if pairs.is_empty() {
        return Err(Error::Domain("no (t, s) pairs given".into()));
    }
    let hd = h.dual();
    let entries = pairs
        .iter()
        .map(|&(t, s)| {
            if !(t > 0.0 && s > 0.0) {
                return Err(Error::Domain(format!("pair ({t}, {s}): times must be positive")));
            }
            let m = t.min(s);
            Ok(CohenEntry {
                t,
                s,
                r_x: dfbf_cov(h, hd, t, s) / m,
                r_y: wb_field_cov(h, hd, t, s) / m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let r_x_spread = spread(entries.iter().map(|e| e.r_x));
    let r_y_spread = spread(entries.iter().map(|e| e.r_y));
    let q0 = entries[0].t / entries[0].s;
    let scale_equivalent = entries.iter().all(|e| (e.t / e.s - q0).abs() <= 1e-12 * q0);
    let r_y_scale = entries.iter().map(|e| e.r_y.abs()).fold(0.0, f64::max).max(1.0);
    Ok(CohenReport {
        h,
        discrepancy: r_y_spread <= R_Y_TOL * r_y_scale && r_x_spread > R_X_GAP,
        no_discrepancy_expected: h.is_half(),
        scale_equivalent,
        r_x_spread,
        r_y_spread,
        entries,
    })
}
