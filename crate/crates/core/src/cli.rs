//! Command-line front end. [`run`] parses arguments, writes artifacts and
//! returns the process exit code: 0 on success, 1 when a check fails or a
//! computation breaks down, 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gaussfield::{
    assemble_fbf, build_cov, mirrored_grid, parity_gram, product_grid, sample, CovMatrix, FieldPoint,
    PathEnsemble, SampleMethod,
};
use crate::kernels::{dfbf_from_integrals, freq_quad_oracle, FreqIntegral, KernelId, MaKind, Parity, QuadSpec};
use crate::martingales::{
    build_martingale, exact_route_discrepancy, martingale_audit, relative_l2, MartMethod, MartingaleSpec,
};
use crate::mbm::{cohen_discrepancy, mbm_cov, mbm_sample, HurstProfile, MbmKind};
use crate::mcoracle::{ma_sample, verify_against, MaScheme};
use crate::specfun::Hurst;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "fbfield", version, about = "Fractional Brownian fields: covariances, sampling and checks")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Output {
    /// Output format; reports default to json, tables to csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate a covariance kernel at one pair of points.
    Kernel {
        #[arg(long)]
        id: KernelId,
        #[arg(long = "H")]
        h: f64,
        /// Index of the second point; defaults to --H.
        #[arg(long = "H2")]
        h2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        /// Evaluate the dependent-field kernel through its frequency integrals.
        #[arg(long)]
        freq: bool,
    },
    /// Gram matrix over the product of a time grid and a list of indices.
    Covmat {
        #[arg(long)]
        kernel: KernelId,
        /// `a:b:n` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Comma list of indices.
        #[arg(long = "H")]
        h: String,
        #[arg(long = "H2")]
        h2: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Draw an ensemble of paths.
    Sample {
        #[arg(long)]
        kernel: KernelId,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long = "H2")]
        h2: Option<f64>,
        #[arg(long = "n")]
        n_paths: usize,
        #[arg(long)]
        seed: u64,
        /// cholesky, moving-average or fbf-assembly.
        #[arg(long, default_value = "cholesky")]
        method: SampleMethod,
        /// Truncation length of the moving-average scheme.
        #[arg(long)]
        cutoff: Option<f64>,
        /// Cell width of the moving-average scheme.
        #[arg(long)]
        mesh: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Moving-average Monte Carlo against the closed-form covariance.
    McVerify {
        /// nonanticipating or well-balanced.
        #[arg(long, default_value = "nonanticipating")]
        kind: MaKind,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long = "H2")]
        h2: Option<f64>,
        #[arg(long = "n")]
        n_paths: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long)]
        mesh: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        sigmas: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Fundamental martingale of a dual pair: audit and optional sampling.
    Martingale {
        #[arg(long = "H")]
        h: f64,
        #[arg(long, default_value = "odd")]
        parity: Parity,
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "projection")]
        method: MartMethod,
        /// Also sample this many paths and compare the two routes on them.
        #[arg(long = "n")]
        n_paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-10)]
        defect_tol: f64,
        #[arg(long, default_value_t = 0.05)]
        slope_tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Multifractional Brownian motion: covariance, or paths with --n.
    Mbm {
        /// `constant:H`, `linear:H0,H1,T` or the path of a two-column table.
        #[arg(long)]
        profile: String,
        /// x (nonanticipating) or y (well-balanced).
        #[arg(long, default_value = "x")]
        which: MbmKind,
        #[arg(long)]
        grid: String,
        #[arg(long = "n")]
        n_paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Normalized dual-pair covariances of the two mBm constructions.
    CohenCheck {
        #[arg(long = "H")]
        h: f64,
        /// `t,s;t,s;...`
        #[arg(long, default_value = "2,1;3,1;5,2")]
        pairs: String,
        #[command(flatten)]
        output: Output,
    },
}

/// `a:b:n` gives `n` equispaced points on `[a, b]`; otherwise a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Parse(format!("grid '{spec}': {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|_| bad("bad start"))?;
            let b: f64 = b.trim().parse().map_err(|_| bad("bad end"))?;
            let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
            match n {
                0 => Err(bad("count must be positive")),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("bad value")))
            .collect(),
        _ => Err(bad("expected a:b:n or a comma list")),
    }
}

/// Comma list of indices plus an optional extra one, deduplicated in order.
fn parse_indices(list: &str, extra: Option<f64>) -> Result<Vec<Hurst>> {
    let mut out: Vec<Hurst> = Vec::new();
    let values = list
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad index '{v}'"))));
    for v in values.chain(extra.map(Ok)) {
        let h = Hurst::new(v?)?;
        if !out.contains(&h) {
            out.push(h);
        }
    }
    Ok(out)
}

/// `t,s;t,s;...`
pub fn parse_pairs(spec: &str) -> Result<Vec<(f64, f64)>> {
    spec.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<f64> = p
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad pair '{p}'")))?;
            match v.as_slice() {
                [t, s] => Ok((*t, *s)),
                _ => Err(Error::Parse(format!("pair '{p}' needs two values"))),
            }
        })
        .collect()
}

/// `constant:H`, `linear:H0,H1,T`, or a file path.
pub fn parse_profile(spec: &str) -> Result<HurstProfile> {
    if let Some(v) = spec.strip_prefix("constant:") {
        let h: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad profile '{spec}'")))?;
        return HurstProfile::constant(Hurst::new(h)?);
    }
    if let Some(v) = spec.strip_prefix("linear:") {
        let p = parse_grid(v)?;
        return match p.as_slice() {
            [h0, h1, t] => HurstProfile::linear(*h0, *h1, *t),
            _ => Err(Error::Parse(format!("profile '{spec}' needs H0,H1,T"))),
        };
    }
    let text = fs::read_to_string(spec).map_err(|e| Error::Parse(format!("profile file '{spec}': {e}")))?;
    text.parse()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cov_csv(m: &CovMatrix) -> String {
    let mut s = String::from("i,j,t_i,H_i,t_j,H_j,value\n");
    for (i, a) in m.points.iter().enumerate() {
        for (j, b) in m.points.iter().enumerate() {
            s += &format!(
                "{i},{j},{},{},{},{},{}\n",
                num(a.t),
                num(a.h.value()),
                num(b.t),
                num(b.h.value()),
                num(m.entries[(i, j)])
            );
        }
    }
    s
}

fn ensemble_csv(e: &PathEnsemble) -> String {
    let mut s = String::from("path_id,point_index,t,H,value\n");
    for (p, row) in e.paths().enumerate() {
        for (j, (pt, v)) in e.grid.iter().zip(row).enumerate() {
            s += &format!("{p},{j},{},{},{}\n", num(pt.t), num(pt.h.value()), num(*v));
        }
    }
    s
}

fn cov_json(m: &CovMatrix) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.len()).map(|i| m.entries.row(i).iter().copied().collect()).collect();
    json!({ "points": m.points, "kernel": m.kernel, "jitter_applied": m.jitter_applied, "matrix": rows })
}

/// What a subcommand produced: the artifact text and whether its checks
/// passed.
struct Artifact {
    text: String,
    pass: bool,
    failure: Option<String>,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Artifact {
            text,
            pass: true,
            failure: None,
        }
    }
}

fn with_config(config: &RunConfig, key: &str, value: serde_json::Value) -> String {
    let doc = json!({ "config": config, key: value });
    serde_json::to_string_pretty(&doc).expect("artifacts serialize") + "\n"
}

fn sample_ensemble(
    kernel: KernelId,
    times: &[f64],
    hs: &[Hurst],
    n_paths: usize,
    seed: u64,
    method: SampleMethod,
    cutoff: Option<f64>,
    mesh: Option<f64>,
) -> Result<PathEnsemble> {
    match method {
        SampleMethod::Cholesky => sample(&build_cov(&product_grid(times, hs), kernel)?, n_paths, seed),
        SampleMethod::MovingAverage => {
            let kind = match kernel {
                KernelId::Dfbf => MaKind::Nonanticipating,
                KernelId::WellBalanced => MaKind::WellBalanced,
                k => {
                    return Err(Error::InvalidScheme(format!(
                        "no moving-average scheme for kernel {k}"
                    )))
                }
            };
            let scheme = scheme_for(times, kind, cutoff, mesh);
            ma_sample(&product_grid(times, hs), &scheme, n_paths, seed)
        }
        SampleMethod::FbfAssembly => {
            if kernel != KernelId::Fbf {
                return Err(Error::InvalidScheme("fbf-assembly samples the fbf kernel only".into()));
            }
            let grid = mirrored_grid(times, hs);
            let m = build_cov(&grid, KernelId::Dfbf)?;
            let b = sample(&m, n_paths, seed)?;
            let w = sample(&m, n_paths, seed ^ 0x9e37_79b9_7f4a_7c15)?;
            assemble_fbf(&b, &w)
        }
        m => Err(Error::InvalidScheme(format!("method {m} does not sample a kernel"))),
    }
}

fn scheme_for(times: &[f64], kind: MaKind, cutoff: Option<f64>, mesh: Option<f64>) -> MaScheme {
    let d = MaScheme::default_for(times, kind);
    MaScheme {
        cutoff: cutoff.unwrap_or(d.cutoff),
        mesh: mesh.unwrap_or(d.mesh),
        kind,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn execute(config: &RunConfig) -> Result<(Artifact, Option<&Output>)> {
    match &config.command {
        Command::Kernel { id, h, h2, t, s, freq } => {
            let (h, h2) = (Hurst::new(*h)?, Hurst::new(h2.unwrap_or(*h))?);
            let v = if *freq {
                if *id != KernelId::Dfbf {
                    return Err(usage("--freq applies to the dfbf kernel only"));
                }
                let spec = QuadSpec::default();
                let i1 = freq_quad_oracle(FreqIntegral::I1, h, h2, *t, *s, &spec)?;
                let i2 = freq_quad_oracle(FreqIntegral::I2, h, h2, *t, *s, &spec)?;
                dfbf_from_integrals(h, h2, i1, i2)
            } else {
                id.eval(h, *t, h2, *s)?
            };
            Ok((Artifact::ok(format!("{v}\n")), None))
        }
        Command::Covmat { kernel, grid, h, h2, output } => {
            let m = build_cov(&product_grid(&parse_grid(grid)?, &parse_indices(h, *h2)?), *kernel)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => cov_csv(&m),
                Format::Json => with_config(config, "covariance", cov_json(&m)),
            };
            Ok((Artifact::ok(text), Some(output)))
        }
        Command::Sample { kernel, grid, h, h2, n_paths, seed, method, cutoff, mesh, output } => {
            let e = sample_ensemble(
                *kernel,
                &parse_grid(grid)?,
                &parse_indices(h, *h2)?,
                *n_paths,
                *seed,
                *method,
                *cutoff,
                *mesh,
            )?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => ensemble_csv(&e),
                Format::Json => with_config(config, "ensemble", serde_json::to_value(&e).expect("serializable")),
            };
            Ok((Artifact::ok(text), Some(output)))
        }
        Command::McVerify { kind, grid, h, h2, n_paths, seed, cutoff, mesh, sigmas, output } => {
            let times = parse_grid(grid)?;
            let points = product_grid(&times, &parse_indices(h, *h2)?);
            let kind = match kind {
                MaKind::Log => MaKind::WellBalanced,
                k => *k,
            };
            let scheme = scheme_for(&times, kind, *cutoff, *mesh);
            let e = ma_sample(&points, &scheme, *n_paths, *seed)?;
            let kernel = e.kernel.expect("moving-average ensembles carry their kernel");
            let report = verify_against(kernel, &e, *sigmas)?;
            let failure = report
                .failures()
                .next()
                .map(|f| format!("mc-verify: entry ({}, {}) off by {:.3e}", f.i, f.j, f.empirical - f.closed_form));
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut s = String::from("i,j,t_i,H_i,t_j,H_j,empirical,standard_error,closed_form,budget,pass\n");
                    for r in &report.entries {
                        s += &format!(
                            "{},{},{},{},{},{},{},{},{},{},{}\n",
                            r.i,
                            r.j,
                            num(r.point_i.t),
                            num(r.point_i.h.value()),
                            num(r.point_j.t),
                            num(r.point_j.h.value()),
                            num(r.empirical),
                            num(r.standard_error),
                            num(r.closed_form),
                            num(r.budget),
                            r.pass
                        );
                    }
                    s
                }
                Format::Json => with_config(
                    config,
                    "report",
                    json!({ "scheme": scheme, "verify": report }),
                ),
            };
            Ok((
                Artifact {
                    text,
                    pass: report.all_pass,
                    failure,
                },
                Some(output),
            ))
        }
        Command::Martingale { h, parity, grid, method, n_paths, seed, defect_tol, slope_tol, output } => {
            let h = Hurst::new(*h)?;
            let times = parse_grid(grid)?;
            let spec = MartingaleSpec::new(h, *parity, times.clone(), *method)?;
            let audit = martingale_audit(&spec)?;
            let last = times.len() - 1;
            let route_discrepancy = if *method == MartMethod::Stieltjes {
                Some(exact_route_discrepancy(h, *parity, &times, last)?)
            } else {
                None
            };
            let sampled = match (n_paths, seed) {
                (Some(_), None) => return Err(usage("--n needs --seed")),
                (Some(n), Some(seed)) => {
                    let paths = sample(&parity_gram(h, *parity, &times)?, *n, *seed)?;
                    let m = build_martingale(&spec, &paths)?;
                    let mut other = spec.clone();
                    other.method = match spec.method {
                        MartMethod::Projection if !(*parity == Parity::Even && h.value() > 0.5) => {
                            MartMethod::Stieltjes
                        }
                        _ => MartMethod::Projection,
                    };
                    let m2 = build_martingale(&other, &paths)?;
                    let l2 = relative_l2(&m2, &m, last)?;
                    let col = m.column(last);
                    Some(json!({
                        "n_paths": n,
                        "seed": seed,
                        "terminal_variance": variance(&col),
                        "terminal_excess_kurtosis": excess_kurtosis(&col),
                        "relative_l2_between_routes": l2,
                    }))
                }
                _ => None,
            };
            let pass = audit.passes(*defect_tol, *slope_tol);
            let failure = (!pass).then(|| {
                format!(
                    "martingale audit: defect {:.3e}, increment defect {:.3e}, slope {:.4} vs {:.4}",
                    audit.martingale_defect, audit.increment_defect, audit.slope, audit.slope_target
                )
            });
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => with_config(
                    config,
                    "report",
                    json!({ "audit": audit, "route_discrepancy": route_discrepancy, "sampled": sampled, "pass": pass }),
                ),
                Format::Csv => format!(
                    "H,parity,n_points,martingale_defect,increment_defect,slope,slope_target,pass\n{},{},{},{},{},{},{},{}\n",
                    num(h.value()),
                    parity,
                    audit.n_points,
                    num(audit.martingale_defect),
                    num(audit.increment_defect),
                    num(audit.slope),
                    num(audit.slope_target),
                    pass
                ),
            };
            Ok((Artifact { text, pass, failure }, Some(output)))
        }
        Command::Mbm { profile, which, grid, n_paths, seed, output } => {
            let p = parse_profile(profile)?;
            let times = parse_grid(grid)?;
            let format = output.format.unwrap_or(Format::Csv);
            let text = match (n_paths, seed) {
                (Some(_), None) => return Err(usage("--n needs --seed")),
                (Some(n), Some(seed)) => {
                    let e = mbm_sample(&p, &times, *which, *n, *seed)?;
                    match format {
                        Format::Csv => ensemble_csv(&e),
                        Format::Json => with_config(config, "ensemble", serde_json::to_value(&e).expect("serializable")),
                    }
                }
                _ => {
                    let pts: Vec<FieldPoint> = p.points(&times)?;
                    let mut rows = Vec::new();
                    for a in &pts {
                        for b in &pts {
                            rows.push((*a, *b, mbm_cov(&p, *which, a.t, b.t)?));
                        }
                    }
                    match format {
                        Format::Csv => {
                            let mut s = String::from("i,j,t_i,H_i,t_j,H_j,value\n");
                            let n = pts.len();
                            for (k, (a, b, v)) in rows.iter().enumerate() {
                                s += &format!(
                                    "{},{},{},{},{},{},{}\n",
                                    k / n,
                                    k % n,
                                    num(a.t),
                                    num(a.h.value()),
                                    num(b.t),
                                    num(b.h.value()),
                                    num(*v)
                                );
                            }
                            s
                        }
                        Format::Json => {
                            let n = pts.len();
                            let m: Vec<Vec<f64>> = rows.chunks(n).map(|r| r.iter().map(|x| x.2).collect()).collect();
                            with_config(config, "covariance", json!({ "points": pts, "matrix": m }))
                        }
                    }
                }
            };
            Ok((Artifact::ok(text), Some(output)))
        }
        Command::CohenCheck { h, pairs, output } => {
            let report = cohen_discrepancy(Hurst::new(*h)?, &parse_pairs(pairs)?)?;
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => with_config(config, "report", serde_json::to_value(&report).expect("serializable")),
                Format::Csv => {
                    let mut s = String::from("t,s,r_x,r_y\n");
                    for e in &report.entries {
                        s += &format!("{},{},{},{}\n", num(e.t), num(e.s), num(e.r_x), num(e.r_y));
                    }
                    s
                }
            };
            Ok((Artifact::ok(text), Some(output)))
        }
    }
}

fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Sample excess kurtosis `m4 / m2² - 3`.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidHurst(_)
        | Error::Domain(_)
        | Error::GridMismatch(_)
        | Error::InvalidScheme(_)
        | Error::InvalidProfile(_)
        | Error::Parse(_) => 2,
        Error::GammaPole(_)
        | Error::Singular { .. }
        | Error::ToleranceNotMet { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::InsufficientPaths { .. } => 1,
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    // first paragraph of clap's message, folded onto one line
                    let rendered = e.render().to_string();
                    let line: Vec<&str> = rendered
                        .lines()
                        .take_while(|l| !l.trim().is_empty())
                        .map(str::trim)
                        .collect();
                    let _ = writeln!(stderr, "{}", line.join(" "));
                    2
                }
            };
        }
    };
    let (artifact, output) = match execute(&config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    match output.and_then(|o| o.out.as_ref()) {
        Some(path) => {
            if let Err(e) = fs::write(path, &artifact.text) {
                let _ = writeln!(stderr, "error: writing {}: {e}", path.display());
                return 1;
            }
        }
        None => {
            let _ = stdout.write_all(artifact.text.as_bytes());
        }
    }
    if artifact.pass {
        0
    } else {
        let _ = writeln!(stderr, "{}", artifact.failure.unwrap_or_else(|| "check failed".into()));
        1
    }
}
