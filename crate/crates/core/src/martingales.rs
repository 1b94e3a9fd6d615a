//! Fundamental martingales of a dual pair.
//!
//! For the odd or even part `B^i_H` of an fBm, `M(t) = E[B^i_{1-H}(t) | F_t]`
//! where `F_t` is generated by `B^i_H` up to `t`. Two routes:
//!
//! * projection: Gaussian conditioning on the grid observations up to `t`;
//! * stieltjes: left-point sums `Σ k(t, s_j) (B(s_{j+1}) - B(s_j))` with the
//!   closed-form kernels below.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussfield::{factorize, parity_gram, CholeskyFactor, CovMatrix, PathEnsemble, SampleMethod,
    DEFAULT_MAX_JITTER_REL};
use crate::kernels::Parity;
use crate::quad::integrate;
use crate::specfun::{coef_a_dual, coef_alpha, gamma, Hurst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MartMethod {
    Projection,
    Stieltjes,
}

impl fmt::Display for MartMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MartMethod::Projection => "projection",
            MartMethod::Stieltjes => "stieltjes",
        })
    }
}

impl FromStr for MartMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projection" => Ok(MartMethod::Projection),
            "stieltjes" => Ok(MartMethod::Stieltjes),
            _ => Err(Error::Parse(format!("unknown martingale method '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleSpec {
    pub h: Hurst,
    pub parity: Parity,
    pub grid: Vec<f64>,
    pub method: MartMethod,
}

impl MartingaleSpec {
    pub fn new(h: Hurst, parity: Parity, grid: Vec<f64>, method: MartMethod) -> Result<Self> {
        let spec = MartingaleSpec {
            h,
            parity,
            grid,
            method,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Domain("martingale grid is empty".into()));
        }
        if self.grid[0] <= 0.0 || self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain(
                "martingale grid must be strictly increasing and positive".into(),
            ));
        }
        if self.method == MartMethod::Stieltjes && self.parity == Parity::Even && self.h.value() > 0.5 {
            return Err(Error::Domain(
                "the even-part kernel is only available for H <= 1/2; use projection".into(),
            ));
        }
        Ok(())
    }

    /// The dual index `1 - H` of the conditioned process.
    pub fn h_dual(&self) -> Hurst {
        self.h.dual()
    }
}

/// `E[B^i_{1-H}(t) B^i_H(s)] = a_{H,1-H} min(t, s) / 2` for either parity.
pub fn dual_cross_cov(h: Hurst, t: f64, s: f64) -> f64 {
    0.5 * coef_a_dual(h) * t.min(s)
}

/// Odd-part kernel `(√π α_H / Γ(1-H)) (t² - s²)^{1/2-H}` for `0 <= s < t`
/// (`s = t` is allowed when `H <= 1/2`). Equals 1 at `H = 1/2`.
pub fn mart_kernel_odd(h: Hurst, t: f64, s: f64) -> Result<f64> {
    let hv = h.value();
    if !(t > 0.0 && s >= 0.0 && s <= t) || (s == t && hv > 0.5) {
        return Err(Error::Domain(format!("odd kernel needs 0 <= s < t, got s = {s}, t = {t}")));
    }
    if h.is_half() {
        return Ok(1.0);
    }
    let c = PI.sqrt() * coef_alpha(h) / gamma(1.0 - hv);
    Ok(c * (t * t - s * s).powf(0.5 - hv))
}

/// `ψ(s) = ∫_s^t (x² - s²)^{1/2-H} dx` for `0 <= s <= t` and `H <= 1/2`.
///
/// With `x = s + (t-s)v` the integrand is `(t-s)((t-s)v(2s + (t-s)v))^a`,
/// `a = 1/2 - H`; the further substitution `v = w^{1/(1+a)}` removes the
/// `v^a` behaviour at the lower end.
pub fn inner_integral(h: Hurst, t: f64, s: f64) -> Result<f64> {
    let a = 0.5 - h.value();
    if a < 0.0 {
        return Err(Error::Domain("inner integral needs H <= 1/2".into()));
    }
    let d = t - s;
    if d <= 0.0 {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(d);
    }
    let m = 1.0 / (1.0 + a);
    let scale = d.powf(1.0 + a) * m;
    let q = integrate(
        |w: f64| {
            let v = w.powf(m);
            (2.0 * s + d * v).powf(a)
        },
        0.0,
        1.0,
        1e-300,
        1e-13,
        400,
    )
    .or_else(|e| match e {
        // the last digits are rounding noise; accept the best estimate
        Error::ToleranceNotMet { estimate, error, .. } if error <= 1e-13 * estimate.abs() => {
            Ok(crate::quad::Quadrature {
                value: estimate,
                error,
                evaluations: 0,
            })
        }
        other => Err(other),
    })?;
    Ok(scale * q.value)
}

/// Default finite-difference step for [`mart_kernel_even`]: `1e-4 t`.
pub fn default_fd_step(t: f64) -> f64 {
    1e-4 * t
}

/// Even-part kernel `-(α_H / Γ(3/2-H)) ψ'(s)` for `0 <= s <= t`, `H <= 1/2`.
///
/// `ψ'` is a central difference with step `min(fd_step, s/2, (t-s)/2)`,
/// Richardson-extrapolated once. `ψ'(0) = 0` and `ψ'(t) = 0` for
/// `H < 1/2`.
pub fn mart_kernel_even(h: Hurst, t: f64, s: f64, fd_step: f64) -> Result<f64> {
    let hv = h.value();
    if hv > 0.5 {
        return Err(Error::Domain(
            "even kernel: the boundary term diverges for H > 1/2".into(),
        ));
    }
    if !(t > 0.0 && s >= 0.0 && s <= t) {
        return Err(Error::Domain(format!("even kernel needs 0 <= s <= t, got s = {s}, t = {t}")));
    }
    if !(fd_step > 0.0) {
        return Err(Error::Domain("fd_step must be positive".into()));
    }
    let c = -coef_alpha(h) / gamma(1.5 - hv);
    if h.is_half() {
        // ψ(s) = t - s
        return Ok(-c);
    }
    if s == 0.0 || s == t {
        return Ok(0.0);
    }
    let step = fd_step.min(0.5 * s).min(0.5 * (t - s));
    let central = |dh: f64| -> Result<f64> {
        Ok((inner_integral(h, t, s + dh)? - inner_integral(h, t, s - dh)?) / (2.0 * dh))
    };
    let d1 = central(step)?;
    let d2 = central(0.5 * step)?;
    Ok(c * (4.0 * d2 - d1) / 3.0)
}

/// `ψ'(s) = -(1-2H) s ∫_s^t (x² - s²)^{-1/2-H} dx` for `0 < s < t`,
/// `H < 1/2`: the derivative with the vanishing boundary term dropped.
/// Used as an independent check of the finite-difference route.
pub fn inner_derivative_direct(h: Hurst, t: f64, s: f64) -> Result<f64> {
    let b = 0.5 + h.value();
    // x = s + (t-s) w^{1/(1-b)} flattens (x-s)^{-b}
    let d = t - s;
    let m = 1.0 / (1.0 - b);
    let q = integrate(
        |w: f64| {
            let v = w.powf(m);
            (2.0 * s + d * v).powf(-b)
        },
        0.0,
        1.0,
        1e-300,
        1e-14,
        400,
    )?;
    Ok(-(1.0 - 2.0 * h.value()) * s * d.powf(1.0 - b) * m * q.value)
}

/// Projection weights: row `k` holds `w_k` with `Σ_j w_kj B(t_j) =
/// E[B^i_{1-H}(t_k) | B^i_H(t_0..t_k)]`, zero beyond column `k`.
pub fn projection_weights(spec: &MartingaleSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (_, factor) = factor_parity_gram(spec)?;
    let n = spec.grid.len();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        let c: Vec<f64> = spec.grid[..=k]
            .iter()
            .map(|&s| dual_cross_cov(spec.h, spec.grid[k], s))
            .collect();
        let wk = factor.solve_prefix(k + 1, &c)?;
        for (j, v) in wk.into_iter().enumerate() {
            w[(k, j)] = v;
        }
    }
    Ok(w)
}

fn factor_parity_gram(spec: &MartingaleSpec) -> Result<(CovMatrix, CholeskyFactor)> {
    let mut g = parity_gram(spec.h, spec.parity, &spec.grid)?;
    let max_jitter = DEFAULT_MAX_JITTER_REL * g.max_diagonal();
    let f = factorize(&mut g, max_jitter)?;
    Ok((g, f))
}

fn kernel_at(spec: &MartingaleSpec, t: f64, s: f64) -> Result<f64> {
    match spec.parity {
        Parity::Odd => mart_kernel_odd(spec.h, t, s),
        Parity::Even => mart_kernel_even(spec.h, t, s, default_fd_step(t)),
    }
}

/// Left-point Riemann–Stieltjes sums written as weights on the grid values:
/// `M(t_k) = Σ_{j<k} k(t_k, s_j)(B(s_{j+1}) - B(s_j))` with `s_0 = 0`,
/// `s_{j+1} = t_j`. For `H > 1/2` the last cell's kernel is taken at the
/// cell midpoint, where the odd kernel is finite.
pub fn stieltjes_weights(spec: &MartingaleSpec) -> Result<DMatrix<f64>> {
    let mut s2 = spec.clone();
    s2.method = MartMethod::Stieltjes;
    s2.validate()?;
    let n = spec.grid.len();
    let mut w = DMatrix::zeros(n, n);
    for k in 0..n {
        let t = spec.grid[k];
        // kernel at the left end of each cell (0, t_0), (t_0, t_1), ...
        let mut kv: Vec<f64> = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let left = if j == 0 { 0.0 } else { spec.grid[j - 1] };
            let s = if j == k && spec.h.value() > 0.5 {
                0.5 * (left + t)
            } else {
                left
            };
            kv.push(kernel_at(spec, t, s)?);
        }
        // Σ_j kv[j] (B(t_j) - B(t_{j-1})) as weights on B(t_j)
        for j in 0..=k {
            let next = if j < k { kv[j + 1] } else { 0.0 };
            w[(k, j)] = kv[j] - next;
        }
    }
    Ok(w)
}

/// Weights of either route.
pub fn route_weights(spec: &MartingaleSpec) -> Result<DMatrix<f64>> {
    match spec.method {
        MartMethod::Projection => projection_weights(spec),
        MartMethod::Stieltjes => stieltjes_weights(spec),
    }
}

/// Applies weights to an ensemble of `B^i_H` sampled on `spec.grid`.
pub fn apply_weights(spec: &MartingaleSpec, w: &DMatrix<f64>, paths: &PathEnsemble) -> Result<PathEnsemble> {
    let n = spec.grid.len();
    let matches = paths.n_points() == n
        && paths
            .grid
            .iter()
            .zip(&spec.grid)
            .all(|(p, &t)| p.t == t && p.h == spec.h);
    if !matches {
        return Err(Error::GridMismatch(
            "paths are not sampled on the martingale grid at index H".into(),
        ));
    }
    let mut values = vec![0.0; paths.n_paths * n];
    for (row, out) in paths.paths().zip(values.chunks_mut(n.max(1))) {
        for k in 0..n {
            out[k] = (0..=k).map(|j| w[(k, j)] * row[j]).sum();
        }
    }
    Ok(PathEnsemble {
        grid: paths.grid.clone(),
        kernel: None,
        n_paths: paths.n_paths,
        values,
        seed: paths.seed,
        method: match spec.method {
            MartMethod::Projection => SampleMethod::Projection,
            MartMethod::Stieltjes => SampleMethod::Stieltjes,
        },
        jitter: paths.jitter,
        truncation_sd: None,
    })
}

/// `M` on the grid from `B^i_H` paths, by the route in `spec.method`.
pub fn build_martingale(spec: &MartingaleSpec, paths: &PathEnsemble) -> Result<PathEnsemble> {
    let w = route_weights(spec)?;
    apply_weights(spec, &w, paths)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub h: Hurst,
    pub parity: Parity,
    pub n_points: usize,
    /// `max_{u<=t} |E M(t)M(u) - E M(u)²| / E M(u)²`.
    pub martingale_defect: f64,
    pub slope: f64,
    pub slope_target: f64,
    /// Number of points the slope was fitted on.
    pub slope_points: usize,
    /// `max_{r<=u<=t} |E[(M(t) - M(u)) B(r)]| / (a r / 2)`.
    pub increment_defect: f64,
    /// Largest weight placed on an observation after the target time.
    pub future_weight: f64,
    pub jitter: f64,
}

impl AuditReport {
    pub fn passes(&self, defect_tol: f64, slope_tol: f64) -> bool {
        self.martingale_defect <= defect_tol
            && self.increment_defect <= defect_tol
            && (self.slope - self.slope_target).abs() <= slope_tol
            && self.future_weight == 0.0
    }
}

fn is_dyadic(t: f64) -> bool {
    t > 0.0 && t <= 1.0 && {
        let l = t.log2();
        l == l.round()
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Analytic audit of the projection route, with no sampling: from the
/// weights `W` and the parity Gram `C`, `E M(t_k)M(t_l) = (W C Wᵀ)_{kl}` and
/// `E M(t_k) B(t_r) = (W C)_{kr}`.
///
/// The variance slope is fitted on the grid points in `[2^-6, 1]` that are
/// powers of two when there are at least two of them, else on all points.
pub fn martingale_audit(spec: &MartingaleSpec) -> Result<AuditReport> {
    let mut proj = spec.clone();
    proj.method = MartMethod::Projection;
    let w = projection_weights(&proj)?;
    let (g, factor) = factor_parity_gram(&proj)?;
    let wc = &w * &g.entries;
    let v = &wc * w.transpose();
    let n = spec.grid.len();
    let mut martingale_defect = 0.0f64;
    for k in 0..n {
        for l in 0..=k {
            let d = (v[(k, l)] - v[(l, l)]).abs() / v[(l, l)].abs().max(f64::MIN_POSITIVE);
            martingale_defect = martingale_defect.max(d);
        }
    }
    let a = coef_a_dual(spec.h);
    let mut increment_defect = 0.0f64;
    for k in 0..n {
        for l in 0..=k {
            for r in 0..=l {
                let scale = 0.5 * a * spec.grid[r];
                let d = (wc[(k, r)] - wc[(l, r)]).abs() / scale;
                increment_defect = increment_defect.max(d);
            }
        }
    }
    let mut future_weight = 0.0f64;
    for k in 0..n {
        for j in k + 1..n {
            future_weight = future_weight.max(w[(k, j)].abs());
        }
    }
    let dyadic: Vec<usize> = (0..n)
        .filter(|&k| is_dyadic(spec.grid[k]) && spec.grid[k] >= 2f64.powi(-6))
        .collect();
    let idx: Vec<usize> = if dyadic.len() >= 2 { dyadic } else { (0..n).collect() };
    let x: Vec<f64> = idx.iter().map(|&k| spec.grid[k].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&k| v[(k, k)].ln()).collect();
    let slope = if idx.len() >= 2 { ls_slope(&x, &y) } else { f64::NAN };
    Ok(AuditReport {
        h: spec.h,
        parity: spec.parity,
        n_points: n,
        martingale_defect,
        slope,
        slope_target: 2.0 * (1.0 - spec.h.value()),
        slope_points: idx.len(),
        increment_defect,
        future_weight,
        jitter: factor.jitter(),
    })
}

/// Exact relative L² distance between the two routes at grid index `k`:
/// `sqrt((v-w)ᵀ C (v-w) / wᵀ C w)` with `v` the Stieltjes and `w` the
/// projection weights.
pub fn exact_route_discrepancy(h: Hurst, parity: Parity, grid: &[f64], k: usize) -> Result<f64> {
    let spec = MartingaleSpec::new(h, parity, grid.to_vec(), MartMethod::Projection)?;
    let w = projection_weights(&spec)?;
    let v = stieltjes_weights(&spec)?;
    let g = parity_gram(h, parity, grid)?;
    let wk = w.row(k).transpose();
    let dk = v.row(k).transpose() - &wk;
    let num = (dk.transpose() * &g.entries * &dk)[(0, 0)];
    let den = (wk.transpose() * &g.entries * &wk)[(0, 0)];
    Ok((num / den).sqrt())
}

/// Empirical relative L² distance `sqrt(Σ (a - b)² / Σ b²)` at point `j`.
pub fn relative_l2(a: &PathEnsemble, b: &PathEnsemble, j: usize) -> Result<f64> {
    if a.n_paths != b.n_paths || a.n_points() != b.n_points() {
        return Err(Error::GridMismatch("ensembles differ in shape".into()));
    }
    let (num, den) = a
        .paths()
        .zip(b.paths())
        .fold((0.0, 0.0), |(n, d), (x, y)| {
            (n + (x[j] - y[j]).powi(2), d + y[j] * y[j])
        });
    Ok((num / den).sqrt())
}

/// `n` points `2^{-(n-1-k)/per_octave}`, increasing to 1.
pub fn geometric_grid(n: usize, per_octave: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 2f64.powf(-((n - 1 - k) as f64) / per_octave as f64))
        .collect()
}

/// `n` points `k/n · t_max`, `k = 1..=n`.
pub fn uniform_grid(n: usize, t_max: f64) -> Vec<f64> {
    (1..=n).map(|k| t_max * k as f64 / n as f64).collect()
}
