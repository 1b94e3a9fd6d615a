//! Covariance matrices over `(t, H)` grids, Cholesky factorization with a
//! jitter policy, exact sampling, Gaussian conditioning and assembly of the
//! symmetrized field from two independent dependent-field samples.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelId, Parity};
use crate::rng::{fill_normals, substream};
use crate::specfun::Hurst;

/// A coordinate of the field: time and Hurst index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub t: f64,
    pub h: Hurst,
}

impl FieldPoint {
    pub fn new(t: f64, h: Hurst) -> Self {
        FieldPoint { t, h }
    }

    /// The point at `-t` with the same index.
    pub fn mirror(self) -> Self {
        FieldPoint { t: -self.t, h: self.h }
    }
}

/// Every time in `times` paired with every index in `hs`, time-major.
pub fn product_grid(times: &[f64], hs: &[Hurst]) -> Vec<FieldPoint> {
    times
        .iter()
        .flat_map(|&t| hs.iter().map(move |&h| FieldPoint::new(t, h)))
        .collect()
}

/// Symmetric covariance matrix of a kernel over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    pub points: Vec<FieldPoint>,
    pub kernel: KernelId,
    pub entries: DMatrix<f64>,
    /// Diagonal shift used by the last successful factorization.
    pub jitter_applied: f64,
}

impl CovMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_diagonal(&self) -> f64 {
        self.entries.diagonal().iter().fold(0.0, |m, &v| m.max(v))
    }
}

fn check_grid(points: &[FieldPoint], kernel: KernelId) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Domain("covariance grid is empty".into()));
    }
    if let KernelId::FieldParity { i, j } = kernel {
        if i != j {
            return Err(Error::Domain(format!(
                "mixed parity {i},{j} is a cross-covariance, not the covariance of one field"
            )));
        }
    }
    if kernel.needs_nonnegative_time() {
        if let Some(p) = points.iter().find(|p| p.t < 0.0) {
            return Err(Error::Domain(format!(
                "kernel {kernel} needs nonnegative times, got t = {}",
                p.t
            )));
        }
    }
    if kernel.single_hurst() {
        let h0 = points[0].h;
        if let Some(p) = points.iter().find(|p| p.h != h0) {
            return Err(Error::Domain(format!(
                "kernel {kernel} needs a common Hurst index, got {h0} and {}",
                p.h
            )));
        }
    }
    Ok(())
}

/// Gram matrix of `kernel` over `points`; the upper triangle is evaluated
/// and mirrored, so the result is exactly symmetric.
pub fn build_cov(points: &[FieldPoint], kernel: KernelId) -> Result<CovMatrix> {
    check_grid(points, kernel)?;
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = points[i];
            (i..n)
                .map(|j| {
                    let b = points[j];
                    kernel.eval(a.h, a.t, b.h, b.t)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            entries[(i, i + k)] = v;
            entries[(i + k, i)] = v;
        }
    }
    Ok(CovMatrix {
        points: points.to_vec(),
        kernel,
        entries,
        jitter_applied: 0.0,
    })
}

/// Default upper limit on the jitter, relative to the largest diagonal entry.
pub const DEFAULT_MAX_JITTER_REL: f64 = 1e-6;

/// Squared pivots below this fraction of the largest variance are rounding
/// noise: the matrix is treated as singular and jitter is applied.
pub const MIN_PIVOT_REL: f64 = 64.0 * f64::EPSILON;

/// Lower-triangular factor `L` with `L Lᵀ = C + jitter·I` on the points of
/// nonzero variance. Points with an exactly zero row are degenerate (the
/// field vanishes there) and take no part in the factorization.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    active: Vec<usize>,
    l: DMatrix<f64>,
    jitter: f64,
    gram: DMatrix<f64>,
}

impl CholeskyFactor {
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of points with nonzero variance.
    pub fn rank_dim(&self) -> usize {
        self.active.len()
    }

    /// The factor embedded into the full `n × n` index set.
    pub fn lower(&self) -> DMatrix<f64> {
        let mut full = DMatrix::zeros(self.n, self.n);
        for (a, &i) in self.active.iter().enumerate() {
            for (b, &j) in self.active.iter().enumerate().take(a + 1) {
                full[(i, j)] = self.l[(a, b)];
            }
        }
        full
    }

    /// `x = L z` for `z` of length [`Self::rank_dim`], written into `out`.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let k = self.active.len();
        for a in 0..k {
            let mut acc = 0.0;
            for b in 0..=a {
                acc += self.l[(a, b)] * z[b];
            }
            out[self.active[a]] = acc;
        }
    }

    fn solve_lower_in_place(l: &DMatrix<f64>, k: usize, x: &mut [f64]) {
        for i in 0..k {
            let mut v = x[i];
            for j in 0..i {
                v -= l[(i, j)] * x[j];
            }
            x[i] = v / l[(i, i)];
        }
    }

    fn solve_upper_in_place(l: &DMatrix<f64>, k: usize, x: &mut [f64]) {
        for i in (0..k).rev() {
            let mut v = x[i];
            for j in i + 1..k {
                v -= l[(j, i)] * x[j];
            }
            x[i] = v / l[(i, i)];
        }
    }

    /// Solve `(C_k + jitter·I) w = b` for the leading `k × k` block, whose
    /// factor is the leading block of `L`. Requires every point to be
    /// nondegenerate.
    fn solve_block(&self, k: usize, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        Self::solve_lower_in_place(&self.l, k, &mut x);
        Self::solve_upper_in_place(&self.l, k, &mut x);
        x
    }

    /// Solve `C w = b` on the leading `k` points, starting from the
    /// factorized system and refining against `C` itself. Degenerate
    /// points get weight 0.
    pub fn solve_prefix(&self, k: usize, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != k || k > self.n {
            return Err(Error::GridMismatch(format!(
                "right-hand side of length {} for a {k}-point block of a {}-point factor",
                b.len(),
                self.n
            )));
        }
        // active indices inside the prefix form a prefix of `active`
        let m = self.active.iter().take_while(|&&i| i < k).count();
        let rhs: Vec<f64> = self.active[..m].iter().map(|&i| b[i]).collect();
        let mut w = self.solve_block(m, &rhs);
        if self.jitter > 0.0 {
            for _ in 0..3 {
                let r: Vec<f64> = (0..m)
                    .map(|a| {
                        let ia = self.active[a];
                        rhs[a]
                            - (0..m)
                                .map(|c| self.gram[(ia, self.active[c])] * w[c])
                                .sum::<f64>()
                    })
                    .collect();
                let dw = self.solve_block(m, &r);
                w.iter_mut().zip(dw).for_each(|(x, d)| *x += d);
            }
        }
        let mut full = vec![0.0; k];
        for (a, &i) in self.active[..m].iter().enumerate() {
            full[i] = w[a];
        }
        Ok(full)
    }

    /// Solve `C w = b` on all points.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_prefix(self.n, b)
    }
}

/// Cholesky factor of `m.entries + jitter·I`, trying no jitter first and
/// then `1e-12·max_diag` escalated by factors of 10 up to `max_jitter`.
/// Records the jitter used in `m.jitter_applied`.
pub fn factorize(m: &mut CovMatrix, max_jitter: f64) -> Result<CholeskyFactor> {
    let n = m.len();
    let mut active = Vec::with_capacity(n);
    for i in 0..n {
        if m.entries[(i, i)] == 0.0 {
            if (0..n).any(|j| m.entries[(i, j)] != 0.0) {
                return Err(Error::NotPositiveDefinite { max_jitter });
            }
        } else if m.entries[(i, i)] < 0.0 {
            return Err(Error::NotPositiveDefinite { max_jitter });
        } else {
            active.push(i);
        }
    }
    let k = active.len();
    let sub = DMatrix::from_fn(k, k, |a, b| m.entries[(active[a], active[b])]);
    let max_diag = m.max_diagonal();
    let mut jitter = 0.0;
    loop {
        let mut shifted = sub.clone();
        for a in 0..k {
            shifted[(a, a)] += jitter;
        }
        let accepted = Cholesky::new(shifted).filter(|ch| {
            let l = ch.l_dirty();
            (0..k).all(|a| l[(a, a)] * l[(a, a)] >= MIN_PIVOT_REL * max_diag)
        });
        if let Some(ch) = accepted {
            m.jitter_applied = jitter;
            return Ok(CholeskyFactor {
                n,
                active,
                l: ch.l(),
                jitter,
                gram: m.entries.clone(),
            });
        }
        jitter = if jitter == 0.0 { 1e-12 * max_diag } else { jitter * 10.0 };
        if jitter > max_jitter || jitter == 0.0 {
            return Err(Error::NotPositiveDefinite { max_jitter });
        }
    }
}

/// How an ensemble was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    Cholesky,
    MovingAverage,
    FbfAssembly,
    Projection,
    Stieltjes,
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleMethod::Cholesky => "cholesky",
            SampleMethod::MovingAverage => "moving_average",
            SampleMethod::FbfAssembly => "fbf_assembly",
            SampleMethod::Projection => "projection",
            SampleMethod::Stieltjes => "stieltjes",
        })
    }
}

impl FromStr for SampleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cholesky" => Ok(SampleMethod::Cholesky),
            "moving_average" | "ma" => Ok(SampleMethod::MovingAverage),
            "fbf_assembly" => Ok(SampleMethod::FbfAssembly),
            "projection" => Ok(SampleMethod::Projection),
            "stieltjes" => Ok(SampleMethod::Stieltjes),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

/// Sampled paths on a grid, row-major `n_paths × grid.len()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub grid: Vec<FieldPoint>,
    /// Covariance the paths are drawn from; `None` for derived processes.
    pub kernel: Option<KernelId>,
    pub n_paths: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub method: SampleMethod,
    pub jitter: f64,
    /// Per-point standard deviation of the neglected part of a truncated
    /// moving-average integral.
    pub truncation_sd: Option<Vec<f64>>,
}

impl PathEnsemble {
    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[p * n..(p + 1) * n]
    }

    pub fn value(&self, p: usize, j: usize) -> f64 {
        self.values[p * self.grid.len() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_paths).map(|p| self.value(p, j)).collect()
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        let n = self.grid.len().max(1);
        self.values.chunks(n).take(self.n_paths)
    }

    /// Ensemble restricted to the listed point indices.
    pub fn select(&self, idx: &[usize]) -> PathEnsemble {
        let values = self
            .paths()
            .flat_map(|row| idx.iter().map(move |&j| row[j]))
            .collect();
        let truncation_sd = self
            .truncation_sd
            .as_ref()
            .map(|sd| idx.iter().map(|&j| sd[j]).collect());
        PathEnsemble {
            grid: idx.iter().map(|&j| self.grid[j]).collect(),
            values,
            truncation_sd,
            ..self.clone()
        }
    }
}

/// `n_paths` independent draws of the centered Gaussian vector with
/// covariance `m`, one RNG stream per path.
pub fn sample(m: &CovMatrix, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    let mut m = m.clone();
    let max_jitter = DEFAULT_MAX_JITTER_REL * m.max_diagonal();
    let factor = factorize(&mut m, max_jitter)?;
    Ok(sample_factor(&m, &factor, n_paths, seed))
}

/// Sampling with a precomputed factor of `m`.
pub fn sample_factor(
    m: &CovMatrix,
    factor: &CholeskyFactor,
    n_paths: usize,
    seed: u64,
) -> PathEnsemble {
    let n = m.len();
    let k = factor.rank_dim();
    let mut values = vec![0.0; n_paths * n];
    if n > 0 {
        values
            .par_chunks_mut(n)
            .enumerate()
            .for_each_init(
                || vec![0.0; k],
                |z, (p, row)| {
                    let mut rng = substream(seed, p as u64);
                    fill_normals(&mut rng, z);
                    factor.transform(z, row);
                },
            );
    }
    PathEnsemble {
        grid: m.points.clone(),
        kernel: Some(m.kernel),
        n_paths,
        values,
        seed,
        method: SampleMethod::Cholesky,
        jitter: factor.jitter(),
        truncation_sd: None,
    }
}

/// Linear predictor of a target from observations.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub target: FieldPoint,
    pub weights: Vec<f64>,
    pub cross_cov: Vec<f64>,
    /// `‖C w - c‖ / ‖c‖`.
    pub residual: f64,
}

impl Projection {
    /// `E[target | observations]` for one observed vector.
    pub fn predict(&self, observed: &[f64]) -> f64 {
        self.weights.iter().zip(observed).map(|(w, x)| w * x).sum()
    }

    /// `Var(target) - wᵀc`.
    pub fn conditional_variance(&self, target_variance: f64) -> f64 {
        target_variance - self.predict(&self.cross_cov)
    }
}

/// Residual `‖C w - c‖ / ‖c‖` (0 when `c = 0`).
pub fn relative_residual(c: &DMatrix<f64>, w: &[f64], rhs: &[f64]) -> f64 {
    let k = rhs.len();
    let wv = DVector::from_column_slice(w);
    let r = c.view((0, 0), (k, k)) * wv - DVector::from_column_slice(rhs);
    let norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        r.norm() / norm
    }
}

/// Weights of the orthogonal projection of `target` onto the span of the
/// observations: `w` with `Gram · w = cross_cov`.
pub fn condition(
    obs_points: &[FieldPoint],
    gram: &CovMatrix,
    target: FieldPoint,
    cross_cov: &[f64],
) -> Result<Projection> {
    if obs_points != gram.points.as_slice() {
        return Err(Error::GridMismatch(
            "observation points differ from the Gram matrix grid".into(),
        ));
    }
    if cross_cov.len() != obs_points.len() {
        return Err(Error::GridMismatch(format!(
            "{} cross-covariances for {} observations",
            cross_cov.len(),
            obs_points.len()
        )));
    }
    let mut g = gram.clone();
    let max_jitter = DEFAULT_MAX_JITTER_REL * g.max_diagonal();
    let factor = factorize(&mut g, max_jitter)?;
    let weights = factor.solve(cross_cov)?;
    let residual = relative_residual(&g.entries, &weights, cross_cov);
    Ok(Projection {
        target,
        weights,
        cross_cov: cross_cov.to_vec(),
        residual,
    })
}

/// Symmetrized-field paths `Z(t) = (B(t) + B(-t) + W(t) - W(-t)) / 2` from
/// two independent dependent-field ensembles `B` and `W` on a grid closed
/// under `t -> -t`: the even part of `B` plus the odd part of `W`.
pub fn assemble_fbf(b: &PathEnsemble, w: &PathEnsemble) -> Result<PathEnsemble> {
    if b.grid != w.grid {
        return Err(Error::GridMismatch("the two ensembles use different grids".into()));
    }
    if b.n_paths != w.n_paths {
        return Err(Error::GridMismatch(format!(
            "path counts differ: {} and {}",
            b.n_paths, w.n_paths
        )));
    }
    if b.seed == w.seed {
        return Err(Error::GridMismatch(
            "the two ensembles share a seed and are not independent".into(),
        ));
    }
    for e in [b, w] {
        if e.kernel != Some(KernelId::Dfbf) {
            return Err(Error::GridMismatch(
                "both ensembles must sample the dependent field".into(),
            ));
        }
    }
    let mirror: Vec<usize> = b
        .grid
        .iter()
        .map(|p| {
            let q = p.mirror();
            b.grid
                .iter()
                .position(|&r| r == q)
                .ok_or_else(|| Error::GridMismatch(format!("grid lacks the mirror of t = {}", p.t)))
        })
        .collect::<Result<_>>()?;
    let n = b.n_points();
    let mut values = vec![0.0; b.n_paths * n];
    for (p, row) in values.chunks_mut(n.max(1)).enumerate().take(b.n_paths) {
        let (bp, wp) = (b.path(p), w.path(p));
        for (j, v) in row.iter_mut().enumerate() {
            let m = mirror[j];
            *v = 0.5 * (bp[j] + bp[m] + wp[j] - wp[m]);
        }
    }
    Ok(PathEnsemble {
        grid: b.grid.clone(),
        kernel: Some(KernelId::Fbf),
        n_paths: b.n_paths,
        values,
        seed: b.seed,
        method: SampleMethod::FbfAssembly,
        jitter: b.jitter.max(w.jitter),
        truncation_sd: None,
    })
}

/// Grid closed under reflection: `times ∪ -times` for each index.
pub fn mirrored_grid(times: &[f64], hs: &[Hurst]) -> Vec<FieldPoint> {
    let mut all: Vec<f64> = times.iter().flat_map(|&t| [t, -t]).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    product_grid(&all, hs)
}

/// Gram matrix of the `parity` part of a single fBm on positive times.
pub fn parity_gram(h: Hurst, parity: Parity, times: &[f64]) -> Result<CovMatrix> {
    let kernel = match parity {
        Parity::Odd => KernelId::FbmOdd,
        Parity::Even => KernelId::FbmEven,
    };
    build_cov(&product_grid(times, &[h]), kernel)
}
