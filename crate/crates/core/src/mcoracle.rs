//! Monte Carlo oracle: the moving-average stochastic integrals discretized
//! against simulated white noise, and covariance estimates with standard
//! errors.
//!
//! Every requested `(t, H)` is driven by one noise realization per path, so
//! cross-time and cross-index dependence is that of the dependent field (or
//! of the well-balanced field for the symmetric kernels).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussfield::{FieldPoint, PathEnsemble, SampleMethod};
use crate::kernels::{ma_cell_integral, ma_kernel, ma_norm, KernelId, MaKind};
use crate::rng::substream;
use crate::specfun::Hurst;

use rand_distr::{Distribution, StandardNormal};

/// Discretization of a moving-average integral: cells of width `mesh`
/// aligned with 0, truncated `cutoff` beyond the grid on the side(s) where
/// the kernel has infinite support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaScheme {
    pub cutoff: f64,
    pub mesh: f64,
    pub kind: MaKind,
}

impl MaScheme {
    /// `cutoff = 100·max|t|`, `mesh = max|t|/512`.
    pub fn default_for(times: &[f64], kind: MaKind) -> MaScheme {
        let tmax = times.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(f64::MIN_POSITIVE);
        MaScheme {
            cutoff: 100.0 * tmax,
            mesh: tmax / 512.0,
            kind,
        }
    }

    /// Checks positivity, `mesh < cutoff`, and that every grid time is a
    /// whole number of cells from 0.
    pub fn validate(&self, grid: &[FieldPoint]) -> Result<()> {
        if !(self.cutoff > 0.0 && self.mesh > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::InvalidScheme(format!(
                "cutoff and mesh must be positive, got {} and {}",
                self.cutoff, self.mesh
            )));
        }
        if self.mesh >= self.cutoff {
            return Err(Error::InvalidScheme(format!(
                "mesh {} is not below the cutoff {}",
                self.mesh, self.cutoff
            )));
        }
        for p in grid {
            let r = p.t / self.mesh;
            if (r - r.round()).abs() > 1e-9 * r.abs().max(1.0) {
                return Err(Error::InvalidScheme(format!(
                    "time {} is not a multiple of the mesh {}",
                    p.t, self.mesh
                )));
            }
            self.kind.resolve(p.h)?;
        }
        Ok(())
    }

    /// Cell index range `[j0, j1)`; cell `j` is `[j·mesh, (j+1)·mesh]`.
    fn cells(&self, grid: &[FieldPoint]) -> (i64, i64) {
        let tmin = grid.iter().fold(0.0f64, |m, p| m.min(p.t));
        let tmax = grid.iter().fold(0.0f64, |m, p| m.max(p.t));
        let lo = tmin - self.cutoff;
        let hi = match self.kind {
            MaKind::Nonanticipating => tmax,
            _ => tmax + self.cutoff,
        };
        ((lo / self.mesh).floor() as i64, (hi / self.mesh).ceil() as i64)
    }

    fn time_index(&self, t: f64) -> i64 {
        (t / self.mesh).round() as i64
    }
}

/// Weights `w[j·m + p] = f_{t_p}(x_j) / norm_p` over the cells, `m` points.
/// Cells touching 0 or `t_p` use the exact cell average; the rest use the
/// midpoint value.
fn weights(grid: &[FieldPoint], scheme: &MaScheme) -> Result<(Vec<f64>, usize)> {
    let (j0, j1) = scheme.cells(grid);
    let n_cells = (j1 - j0) as usize;
    let m = grid.len();
    let h = scheme.mesh;
    let per_point: Vec<(MaKind, Hurst, f64, f64, i64)> = grid
        .iter()
        .map(|p| {
            let kind = scheme.kind.resolve(p.h)?;
            Ok((kind, p.h, p.t, ma_norm(kind, p.h), scheme.time_index(p.t)))
        })
        .collect::<Result<_>>()?;
    let mut w = vec![0.0; n_cells * m];
    for (c, row) in w.chunks_mut(m).enumerate() {
        let j = j0 + c as i64;
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        for (slot, &(kind, hu, t, norm, ti)) in row.iter_mut().zip(&per_point) {
            if t == 0.0 {
                continue;
            }
            let touches = j == -1 || j == 0 || j == ti - 1 || j == ti;
            let v = if touches {
                ma_cell_integral(kind, hu, t, a, b)? / h
            } else {
                ma_kernel(kind, hu, t, 0.5 * (a + b))?
            };
            *slot = v / norm;
        }
    }
    Ok((w, n_cells))
}

/// Variance of the part of the integral cut off by the window, bounded via
/// the mean-value theorem: `|f_t(x)| <= |α t| dist^{α-1}` (power kernels)
/// or `|t| / dist` (log kernel) beyond the window edge.
fn truncation_variance(kind: MaKind, h: Hurst, t: f64, left: f64, right: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let alpha = h.value() - 0.5;
    let power = |reach: f64| alpha * alpha * t * t * reach.powf(2.0 * alpha - 1.0) / (1.0 - 2.0 * alpha);
    let left_reach = left - (-t).max(0.0);
    let right_reach = right - t.max(0.0);
    match kind {
        MaKind::Nonanticipating => power(left_reach),
        MaKind::WellBalanced => power(left_reach) + power(right_reach),
        MaKind::Log => t * t / left_reach + t * t / right_reach,
    }
}

fn truncation_sd(grid: &[FieldPoint], scheme: &MaScheme) -> Result<Vec<f64>> {
    let (j0, j1) = scheme.cells(grid);
    let left = -(j0 as f64) * scheme.mesh;
    let right = j1 as f64 * scheme.mesh;
    grid.iter()
        .map(|p| {
            let kind = scheme.kind.resolve(p.h)?;
            Ok(truncation_variance(kind, p.h, p.t, left, right).sqrt() / ma_norm(kind, p.h))
        })
        .collect()
}

/// Simulated paths `Σ_j f_t(x_j) ΔW_j / norm` at every grid point from one
/// noise realization per path; `ΔW_j ~ N(0, mesh)`.
pub fn ma_sample(
    grid: &[FieldPoint],
    scheme: &MaScheme,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if grid.is_empty() {
        return Err(Error::InvalidScheme("empty grid".into()));
    }
    scheme.validate(grid)?;
    let (w, n_cells) = weights(grid, scheme)?;
    let m = grid.len();
    let sqrt_h = scheme.mesh.sqrt();
    let mut values = vec![0.0; n_paths * m];
    values.par_chunks_mut(m).enumerate().for_each(|(p, row)| {
        let mut rng = substream(seed, p as u64);
        for cell in w.chunks_exact(m).take(n_cells) {
            let z: f64 = StandardNormal.sample(&mut rng);
            let dw = z * sqrt_h;
            for (acc, &wk) in row.iter_mut().zip(cell) {
                *acc += wk * dw;
            }
        }
    });
    let kernel = match scheme.kind {
        MaKind::Nonanticipating => KernelId::Dfbf,
        MaKind::WellBalanced | MaKind::Log => KernelId::WellBalanced,
    };
    Ok(PathEnsemble {
        grid: grid.to_vec(),
        kernel: Some(kernel),
        n_paths,
        values,
        seed,
        method: SampleMethod::MovingAverage,
        jitter: 0.0,
        truncation_sd: Some(truncation_sd(grid, scheme)?),
    })
}

/// Single-index convenience: `times` all at index `h`.
pub fn ma_sample_times(
    times: &[f64],
    h: Hurst,
    scheme: &MaScheme,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    let grid: Vec<FieldPoint> = times.iter().map(|&t| FieldPoint::new(t, h)).collect();
    ma_sample(&grid, scheme, n_paths, seed)
}

/// Exact covariance of the discretized scheme, `Σ_j w_j(a) w_j(b) mesh`,
/// with no sampling involved.
pub fn scheme_cov(grid: &[FieldPoint], scheme: &MaScheme) -> Result<Vec<Vec<f64>>> {
    scheme.validate(grid)?;
    let (w, _) = weights(grid, scheme)?;
    let m = grid.len();
    let mut c = vec![vec![0.0; m]; m];
    for cell in w.chunks_exact(m) {
        for a in 0..m {
            for b in a..m {
                c[a][b] += cell[a] * cell[b];
            }
        }
    }
    for a in 0..m {
        for b in a..m {
            c[a][b] *= scheme.mesh;
            c[b][a] = c[a][b];
        }
    }
    Ok(c)
}

/// Sample covariance of points `i` and `j` and its standard error
/// `sqrt((m22 - ĉ²)/n)` from the fourth mixed moment
/// `m22 = mean((x - x̄)²(y - ȳ)²)`.
pub fn estimate_cov(e: &PathEnsemble, i: usize, j: usize) -> Result<(f64, f64)> {
    let n = e.n_paths;
    if n < 2 {
        return Err(Error::InsufficientPaths { required: 2, got: n });
    }
    if i >= e.n_points() || j >= e.n_points() {
        return Err(Error::GridMismatch(format!(
            "index ({i}, {j}) outside a {}-point grid",
            e.n_points()
        )));
    }
    let nf = n as f64;
    let (mx, my) = e
        .paths()
        .fold((0.0, 0.0), |(a, b), row| (a + row[i], b + row[j]));
    let (mx, my) = (mx / nf, my / nf);
    let (cxy, m22) = e.paths().fold((0.0, 0.0), |(c, q), row| {
        let d = (row[i] - mx) * (row[j] - my);
        (c + d, q + d * d)
    });
    let est = cxy / (nf - 1.0);
    let m22 = m22 / nf;
    let mean = cxy / nf;
    let se = ((m22 - mean * mean).max(0.0) / nf).sqrt();
    Ok((est, se))
}

/// Zero-mean estimate `mean(x_i x_j)` of a known-centered ensemble.
pub fn second_moment(e: &PathEnsemble, i: usize, j: usize) -> f64 {
    e.paths().map(|row| row[i] * row[j]).sum::<f64>() / e.n_paths as f64
}

/// Standard error of [`second_moment`] for a Gaussian pair with true
/// covariances `c_ii, c_jj, c_ij`: by Isserlis, `Var(x_i x_j) = c_ii c_jj +
/// c_ij²`.
pub fn isserlis_se(c_ii: f64, c_jj: f64, c_ij: f64, n_paths: usize) -> f64 {
    ((c_ii * c_jj + c_ij * c_ij) / n_paths as f64).sqrt()
}

/// One covariance entry checked against a closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub i: usize,
    pub j: usize,
    pub point_i: FieldPoint,
    pub point_j: FieldPoint,
    pub empirical: f64,
    pub standard_error: f64,
    pub closed_form: f64,
    /// Truncation bias bound `τ_i τ_j` (Cauchy–Schwarz on the cut-off parts).
    pub budget: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kernel: KernelId,
    pub tolerance_sigmas: f64,
    pub entries: Vec<VerifyEntry>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &VerifyEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Checks `|empirical - closed form| <= sigmas·SE + budget` for the listed
/// entries. Entries where the closed form is undefined fail.
pub fn verify_pairs(
    kernel: KernelId,
    e: &PathEnsemble,
    pairs: &[(usize, usize)],
    tolerance_sigmas: f64,
) -> Result<VerifyReport> {
    let entries = pairs
        .iter()
        .map(|&(i, j)| {
            let (empirical, standard_error) = estimate_cov(e, i, j)?;
            let (a, b) = (e.grid[i], e.grid[j]);
            let closed_form = kernel.eval(a.h, a.t, b.h, b.t).unwrap_or(f64::NAN);
            let budget = e
                .truncation_sd
                .as_ref()
                .map_or(0.0, |sd| sd[i] * sd[j]);
            let pass = (empirical - closed_form).abs() <= tolerance_sigmas * standard_error + budget;
            Ok(VerifyEntry {
                i,
                j,
                point_i: a,
                point_j: b,
                empirical,
                standard_error,
                closed_form,
                budget,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(VerifyReport {
        kernel,
        tolerance_sigmas,
        entries,
        all_pass,
    })
}

/// [`verify_pairs`] over every entry `i <= j` of the grid.
pub fn verify_against(kernel: KernelId, e: &PathEnsemble, tolerance_sigmas: f64) -> Result<VerifyReport> {
    let n = e.n_points();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    verify_pairs(kernel, e, &pairs, tolerance_sigmas)
}
