//! Covariance kernels, frequency integrals, moving-average kernels and
//! their Fourier transforms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::Hurst;

pub mod cov;
pub mod fourier;
pub mod freq;
pub mod moving_average;

pub use cov::{
    dfbf_cov, fbf_cov, fbm_cov, fbm_parity_cov, field_parity_cov, parity_quadrants, wb_coefficient,
    wb_field_cov,
};
pub use fourier::{ft_closed, plancherel_covariance};
pub use freq::{dfbf_from_integrals, freq_quad_oracle, i1_closed, i2_closed, FreqIntegral, QuadSpec};
pub use moving_average::{ma_cell_integral, ma_kernel, ma_norm, MaKind};

/// Odd part `(X(t) - X(-t))/2` or even part `(X(t) + X(-t))/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    /// Sign picked up by the part under `t -> -t`.
    pub fn reflection_sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "odd" | "o" => Ok(Parity::Odd),
            "even" | "e" => Ok(Parity::Even),
            _ => Err(Error::Parse(format!("unknown parity '{s}'"))),
        }
    }
}

/// Selector over the covariance families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum KernelId {
    Fbm,
    FbmOdd,
    FbmEven,
    Dfbf,
    FieldParity { i: Parity, j: Parity },
    Fbf,
    WellBalanced,
}

impl KernelId {
    pub const ALL_TAGS: [&'static str; 7] = [
        "fbm",
        "fbm_odd",
        "fbm_even",
        "dfbf",
        "field_parity",
        "fbf",
        "well_balanced",
    ];

    /// Kernels defined for a single Hurst index.
    pub fn single_hurst(self) -> bool {
        matches!(self, KernelId::Fbm | KernelId::FbmOdd | KernelId::FbmEven)
    }

    /// Kernels defined only for nonnegative times.
    pub fn needs_nonnegative_time(self) -> bool {
        matches!(
            self,
            KernelId::FbmOdd | KernelId::FbmEven | KernelId::FieldParity { .. }
        )
    }

    /// Covariance of the values at `(t, h)` and `(s, h2)`.
    pub fn eval(self, h: Hurst, t: f64, h2: Hurst, s: f64) -> Result<f64> {
        if self.single_hurst() && h != h2 {
            return Err(Error::Domain(format!(
                "kernel {self} needs a common Hurst index, got {h} and {h2}"
            )));
        }
        match self {
            KernelId::Fbm => Ok(fbm_cov(h, t, s)),
            KernelId::FbmOdd => fbm_parity_cov(Parity::Odd, h, t, s),
            KernelId::FbmEven => fbm_parity_cov(Parity::Even, h, t, s),
            KernelId::Dfbf => Ok(dfbf_cov(h, h2, t, s)),
            KernelId::FieldParity { i, j } => field_parity_cov(i, j, h, h2, t, s),
            KernelId::Fbf => Ok(fbf_cov(h, h2, t, s)),
            KernelId::WellBalanced => Ok(wb_field_cov(h, h2, t, s)),
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelId::Fbm => f.write_str("fbm"),
            KernelId::FbmOdd => f.write_str("fbm_odd"),
            KernelId::FbmEven => f.write_str("fbm_even"),
            KernelId::Dfbf => f.write_str("dfbf"),
            KernelId::FieldParity { i, j } => write!(f, "field_parity:{i},{j}"),
            KernelId::Fbf => f.write_str("fbf"),
            KernelId::WellBalanced => f.write_str("well_balanced"),
        }
    }
}

impl FromStr for KernelId {
    type Err = Error;

    /// Accepts the tags above (`-` or `_`), with `field_parity:i,j` for
    /// the parity pair; `field_parity` alone means `odd,odd`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('-', "_");
        let (tag, rest) = match lower.split_once(':') {
            Some((a, b)) => (a.to_string(), Some(b.to_string())),
            None => (lower, None),
        };
        let id = match tag.as_str() {
            "fbm" => KernelId::Fbm,
            "fbm_odd" => KernelId::FbmOdd,
            "fbm_even" => KernelId::FbmEven,
            "dfbf" => KernelId::Dfbf,
            "fbf" => KernelId::Fbf,
            "well_balanced" | "wb" => KernelId::WellBalanced,
            "field_parity" => {
                let (i, j) = match rest.as_deref() {
                    None => (Parity::Odd, Parity::Odd),
                    Some(r) => {
                        let (a, b) = r
                            .split_once(',')
                            .ok_or_else(|| Error::Parse(format!("expected 'i,j' parities in '{s}'")))?;
                        (a.parse()?, b.parse()?)
                    }
                };
                return Ok(KernelId::FieldParity { i, j });
            }
            _ => return Err(Error::Parse(format!("unknown kernel '{s}'"))),
        };
        if rest.is_some() {
            return Err(Error::Parse(format!("kernel '{tag}' takes no parity pair")));
        }
        Ok(id)
    }
}
