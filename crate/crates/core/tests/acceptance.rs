//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits non-zero if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are still run and still print FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fbfield::gaussfield::{build_cov, parity_gram, product_grid, sample, FieldPoint};
use fbfield::kernels::{
    dfbf_cov, dfbf_from_integrals, fbf_cov, freq_quad_oracle, wb_field_cov, FreqIntegral, KernelId, MaKind,
    QuadSpec,
};
use fbfield::martingales::{
    build_martingale, exact_route_discrepancy, geometric_grid, martingale_audit, relative_l2, uniform_grid,
    MartMethod, MartingaleSpec,
};
use fbfield::mcoracle::{isserlis_se, ma_sample, second_moment, verify_pairs, MaScheme};
use fbfield::specfun::{coef_a, gamma_real};
use fbfield::{Hurst, Parity, Result};

/// The two dual-line pairs (2,1) and (4,2) are related by scaling, and the
/// dual-line covariance is 1-homogeneous, so their ratios coincide.
const KNOWN_UNATTAINABLE: &[&str] = &["7"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn hu(v: f64) -> Hurst {
    Hurst::new(v).expect("valid index")
}

fn g(x: f64) -> f64 {
    gamma_real(x).expect("not a pole")
}

/// Corrected off-dual constant written out term by term: the printed
/// expression divided by π.
fn a_literal(h: f64, h2: f64) -> f64 {
    let s = h + h2;
    -2.0 * (g(2.0 * h + 1.0) * (PI * h).sin()).sqrt()
        * (g(2.0 * h2 + 1.0) * (PI * h2).sin()).sqrt()
        * g(-s)
        * ((h2 - h) * PI / 2.0).cos()
        * (s * PI / 2.0).cos()
        / PI
}

/// Dual-line constant as printed.
fn a_dual_literal(h: f64) -> f64 {
    (g(2.0 * h + 1.0) * g(3.0 - 2.0 * h)).sqrt() * (PI * h).sin().powi(2)
}

fn freq_dfbf(h: Hurst, h2: Hurst, t: f64, s: f64) -> Result<f64> {
    let spec = QuadSpec::default();
    let i1 = freq_quad_oracle(FreqIntegral::I1, h, h2, t, s, &spec)?;
    let i2 = freq_quad_oracle(FreqIntegral::I2, h, h2, t, s, &spec)?;
    Ok(dfbf_from_integrals(h, h2, i1, i2))
}

fn random_time(rng: &mut ChaCha8Rng) -> f64 {
    let m: f64 = rng.random_range(0.1..2.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut tuples = Vec::new();
    while tuples.len() < 50 {
        let h: f64 = rng.random_range(0.1..0.9);
        let h2: f64 = rng.random_range(0.1..0.9);
        if (h + h2 - 1.0).abs() >= 0.05 {
            tuples.push((h, h2, random_time(&mut rng), random_time(&mut rng)));
        }
    }
    for _ in 0..10 {
        let h: f64 = rng.random_range(0.1..0.9);
        tuples.push((h, 1.0 - h, random_time(&mut rng), random_time(&mut rng)));
    }
    for (h, h2, t, s) in tuples {
        let (h, h2) = (hu(h), hu(h2));
        let d = (dfbf_cov(h, h2, t, s) - freq_dfbf(h, h2, t, s)?).abs();
        worst = worst.max(d);
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: worst <= 1e-6 && elapsed < Duration::from_secs(30),
        detail: format!("60 tuples, max |closed - frequency| = {worst:.2e}, {elapsed:.2?}"),
    })
}

fn criterion_2() -> Result<Outcome> {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (hv, h2v, seed) in [(0.3, 0.6, 201), (0.3, 0.7, 202), (0.7, 0.8, 203)] {
        let (h, h2) = (hu(hv), hu(h2v));
        let times = [1.0, 2.0, 0.5];
        let grid = product_grid(&times, &[h, h2]);
        let scheme = MaScheme {
            cutoff: 100.0,
            mesh: 1.0 / 512.0,
            kind: MaKind::Nonanticipating,
        };
        let e = ma_sample(&grid, &scheme, 20_000, seed)?;
        let idx = |t: f64, hh: Hurst| grid.iter().position(|p| p.t == t && p.h == hh).expect("on grid");
        let pairs: Vec<(usize, usize)> = [(1.0, 1.0), (1.0, 2.0), (2.0, 0.5)]
            .iter()
            .map(|&(t, s)| (idx(t, h), idx(s, h2)))
            .collect();
        let report = verify_pairs(KernelId::Dfbf, &e, &pairs, 4.0)?;
        let worst = report
            .entries
            .iter()
            .map(|r| (r.empirical - r.closed_form).abs() / (4.0 * r.standard_error + r.budget))
            .fold(0.0, f64::max);
        pass &= report.all_pass;
        lines.push(format!("({hv},{h2v}) worst |err|/band {worst:.2}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    Ok(Outcome {
        pass,
        detail: format!("{}; {elapsed:.2?}", lines.join(", ")),
    })
}

/// `(K(t,s) ∓ K(t,-s) ∓ K(-t,s) + K(-t,-s)) / 4` from the dependent field.
fn quadrants(parity: Parity, h: Hurst, h2: Hurst, t: f64, s: f64) -> f64 {
    let sg = match parity {
        Parity::Odd => -1.0,
        Parity::Even => 1.0,
    };
    (dfbf_cov(h, h2, t, s) + sg * dfbf_cov(h, h2, t, -s) + sg * dfbf_cov(h, h2, -t, s) + dfbf_cov(h, h2, -t, -s))
        / 4.0
}

fn parity_closed(parity: Parity, a: f64, exp: f64, t: f64, s: f64) -> f64 {
    let p = |x: f64| x.abs().powf(exp);
    match parity {
        Parity::Odd => a * (p(t + s) - p(t - s)) / 4.0,
        Parity::Even => a * ((p(t) + p(s)) / 2.0 - (p(t - s) + p(t + s)) / 4.0),
    }
}

fn criterion_3() -> Result<Outcome> {
    let diag = (1..100)
        .map(|k| {
            let h = hu(k as f64 / 100.0);
            (coef_a(h, h) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let diag_literal = (1..100)
        .filter(|&k| k != 50)
        .map(|k| (a_literal(k as f64 / 100.0, k as f64 / 100.0) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut approach = 0.0f64;
    for k in 1..20 {
        let hv = k as f64 / 20.0;
        let dual = a_dual_literal(hv);
        for d in [1e-6, -1e-6, 3e-7, -1e-8] {
            let h2 = 1.0 - hv + d;
            approach = approach.max((coef_a(hu(hv), hu(h2)) - dual).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut recon = 0.0f64;
    for _ in 0..200 {
        let hv: f64 = rng.random_range(0.05..0.95);
        let h2v: f64 = if rng.random_bool(0.2) {
            1.0 - hv
        } else {
            rng.random_range(0.05..0.95)
        };
        let (t, s) = (rng.random_range(0.05..3.0), rng.random_range(0.05..3.0));
        let a = if (hv + h2v - 1.0).abs() < 1e-12 {
            a_dual_literal(hv)
        } else {
            a_literal(hv, h2v)
        };
        for parity in [Parity::Odd, Parity::Even] {
            let q = quadrants(parity, hu(hv), hu(h2v), t, s);
            let c = parity_closed(parity, a, hv + h2v, t, s);
            recon = recon.max((q - c).abs() / c.abs().max(1.0));
        }
    }
    Ok(Outcome {
        pass: diag <= 1e-12 && diag_literal <= 1e-12 && approach <= 1e-4 && recon <= 1e-10,
        detail: format!(
            "a_HH max dev {diag:.1e} (literal {diag_literal:.1e}), dual approach {approach:.1e}, parity reconstruction {recon:.1e}"
        ),
    })
}

fn criterion_4() -> Result<Outcome> {
    let mut same = 0.0f64;
    let mut opposite = 0.0f64;
    let ts = [0.3f64, 1.0, 1.7, 2.5];
    for hv in [0.2, 0.35, 0.5, 0.8] {
        let (h, h2) = (hu(hv), hu(1.0 - hv));
        let a = a_dual_literal(hv);
        for &t in &ts {
            for &s in &ts {
                for sign in [1.0, -1.0] {
                    let want = a * t.min(s);
                    let got = fbf_cov(h, h2, sign * t, sign * s);
                    same = same.max((got - want).abs() / want);
                    opposite = opposite.max(fbf_cov(h, h2, sign * t, -sign * s).abs());
                }
            }
        }
    }
    Ok(Outcome {
        pass: same <= 1e-12 && opposite <= 1e-12,
        detail: format!("same-sign rel {same:.1e}, opposite-sign abs {opposite:.1e}"),
    })
}

fn criterion_5() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for hv in [0.25, 0.5, 0.75] {
        for parity in [Parity::Odd, Parity::Even] {
            let spec = MartingaleSpec::new(hu(hv), parity, geometric_grid(64, 6), MartMethod::Projection)?;
            let r = martingale_audit(&spec)?;
            let ok = r.martingale_defect <= 1e-10 && (r.slope - r.slope_target).abs() <= 0.05;
            pass &= ok;
            parts.push(format!(
                "H={hv} {parity}: defect {:.1e} slope {:.4}/{:.2}",
                r.martingale_defect, r.slope, r.slope_target
            ));
        }
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn criterion_6() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let n_fine = 512;
    let fine = uniform_grid(n_fine, 1.0);
    let coarse_idx: Vec<usize> = (0..n_fine).filter(|k| k % 2 == 1).collect();
    let coarse: Vec<f64> = coarse_idx.iter().map(|&k| fine[k]).collect();
    for (hv, parity, seed) in [
        (0.25, Parity::Odd, 601),
        (0.25, Parity::Even, 602),
        (0.4, Parity::Odd, 603),
        (0.4, Parity::Even, 604),
    ] {
        let h = hu(hv);
        let paths = sample(&parity_gram(h, parity, &fine)?, 4000, seed)?;
        let coarse_paths = paths.select(&coarse_idx);
        let mut d = Vec::new();
        for (grid, p) in [(&coarse, &coarse_paths), (&fine, &paths)] {
            let proj = MartingaleSpec::new(h, parity, grid.clone(), MartMethod::Projection)?;
            let stj = MartingaleSpec::new(h, parity, grid.clone(), MartMethod::Stieltjes)?;
            let mp = build_martingale(&proj, p)?;
            let ms = build_martingale(&stj, p)?;
            d.push(relative_l2(&ms, &mp, grid.len() - 1)?);
        }
        let exact = exact_route_discrepancy(h, parity, &fine, n_fine - 1)?;
        let ratio = d[1] / d[0];
        let ok = d[1] <= 0.05 && ratio <= 0.8;
        pass &= ok;
        parts.push(format!(
            "H={hv} {parity}: L2 {:.4} (exact {exact:.4}), ratio {ratio:.3}",
            d[1]
        ));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn ratios(h: Hurst, pairs: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let h2 = h.dual();
    pairs
        .iter()
        .map(|&(t, s)| {
            let m = t.min(s);
            (dfbf_cov(h, h2, t, s) / m, wb_field_cov(h, h2, t, s) / m)
        })
        .collect()
}

fn criterion_7() -> Result<Outcome> {
    let start = Instant::now();
    let r = ratios(hu(0.3), &[(2.0, 1.0), (4.0, 2.0), (3.0, 1.0)]);
    let ry_spread = r.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max)
        - r.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let rx_gap = (r[0].0 - r[1].0).abs();
    let elapsed = start.elapsed();
    Ok(Outcome {
        pass: ry_spread <= 1e-12 && rx_gap > 1e-3 && elapsed < Duration::from_secs(1),
        detail: format!(
            "r_Y spread {ry_spread:.1e}; r_X(2,1) = {:.15}, r_X(4,2) = {:.15}, gap {rx_gap:.1e}",
            r[0].0, r[1].0
        ),
    })
}

fn criterion_7_pairs_not_related_by_scaling() -> Result<Outcome> {
    let r = ratios(hu(0.3), &[(2.0, 1.0), (3.0, 1.0)]);
    let rx_gap = (r[0].0 - r[1].0).abs();
    let ry_gap = (r[0].1 - r[1].1).abs();
    Ok(Outcome {
        pass: ry_gap <= 1e-12 && rx_gap > 1e-3,
        detail: format!("(2,1) vs (3,1): r_X gap {rx_gap:.4}, r_Y gap {ry_gap:.1e}"),
    })
}

fn criterion_8() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut scaling = 0.0f64;
    let mut stationarity = 0.0f64;
    let pw = |x: f64, e: f64| x.abs().powf(e);
    for k in 0..300 {
        let (h, h2) = (hu(rng.random_range(0.05..0.95)), hu(rng.random_range(0.05..0.95)));
        let e = h.value() + h2.value();
        let (t, s) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let a = match k % 4 {
            0 => 0.5,
            1 => 2.0,
            2 => 10.0,
            _ => rng.random_range(0.01..20.0),
        };
        // rounding is relative to the size of the terms, not of their sum
        let terms = |t: f64, s: f64| coef_a(h, h2).abs() * (pw(t, e) + pw(s, e) + pw(t - s, e));
        let lhs = fbf_cov(h, h2, a * t, a * s);
        let rhs = a.powf(e) * fbf_cov(h, h2, t, s);
        scaling = scaling.max((lhs - rhs).abs() / terms(a * t, a * s));
        let d: f64 = rng.random_range(-3.0..3.0);
        let four = fbf_cov(h, h2, t + d, s + d) - fbf_cov(h, h2, t + d, d) - fbf_cov(h, h2, d, s + d)
            + fbf_cov(h, h2, d, d);
        let scale = terms(t + d, s + d) + terms(t + d, d) + terms(d, s + d) + terms(d, d);
        stationarity = stationarity.max((four - fbf_cov(h, h2, t, s)).abs() / scale);
    }
    Ok(Outcome {
        pass: scaling <= 1e-12 && stationarity <= 1e-12,
        detail: format!("300 tuples, scaling {scaling:.1e}, increments {stationarity:.1e} (relative to term size)"),
    })
}

fn grid_for(kernel: KernelId) -> Vec<FieldPoint> {
    let pos: Vec<f64> = (1..=12).map(|k| k as f64 / 6.0).collect();
    let six_pos = [0.25, 0.5, 0.9, 1.3, 1.6, 2.0];
    let six_signed = [-1.5, -0.7, -0.2, 0.4, 1.0, 1.8];
    let pair = [hu(0.3), hu(0.7)];
    match kernel {
        KernelId::Fbm => product_grid(&six_signed.iter().chain(&six_pos).copied().collect::<Vec<_>>(), &[hu(0.3)]),
        KernelId::FbmOdd | KernelId::FbmEven => product_grid(&pos, &[hu(0.3)]),
        KernelId::FieldParity { .. } => product_grid(&six_pos, &pair),
        KernelId::Dfbf | KernelId::Fbf | KernelId::WellBalanced => product_grid(&six_signed, &pair),
    }
}

fn criterion_9() -> Result<Outcome> {
    let kernels = [
        KernelId::Fbm,
        KernelId::FbmOdd,
        KernelId::FbmEven,
        KernelId::Dfbf,
        KernelId::FieldParity {
            i: Parity::Even,
            j: Parity::Even,
        },
        KernelId::Fbf,
        KernelId::WellBalanced,
    ];
    let n = 20_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, kernel) in kernels.into_iter().enumerate() {
        let m = build_cov(&grid_for(kernel), kernel)?;
        let seed = 900 + k as u64;
        let e = sample(&m, n, seed)?;
        let again = sample(&m, n, seed)?;
        let identical = e.values.iter().zip(&again.values).all(|(a, b)| a.to_bits() == b.to_bits());
        let mut worst = 0.0f64;
        let mut failures = 0;
        for i in 0..m.len() {
            for j in i..m.len() {
                let c = &m.entries;
                let se = isserlis_se(c[(i, i)], c[(j, j)], c[(i, j)], n);
                let z = (second_moment(&e, i, j) - c[(i, j)]).abs() / se;
                worst = worst.max(z);
                failures += usize::from(z > 4.0);
            }
        }
        pass &= identical && failures == 0;
        parts.push(format!("{kernel}: max z {worst:.2}{}", if identical { "" } else { " NOT REPRODUCIBLE" }));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Result<Outcome>); 10] = [
        ("1", "dependent-field covariance vs frequency quadrature", criterion_1),
        ("2", "dependent-field covariance vs moving-average Monte Carlo", criterion_2),
        ("3", "corrected constant: a_HH = 1, dual-line continuity, parity reconstruction", criterion_3),
        ("4", "symmetrized field on the dual line is a·min for same-sign times, 0 otherwise", criterion_4),
        ("5", "martingale audit on 64-point grids", criterion_5),
        ("6", "Stieltjes route vs projection route, 512-point grids and doubling", criterion_6),
        ("7", "dual-pair mBm ratios: r_Y constant, r_X(2,1) != r_X(4,2)", criterion_7),
        ("7+", "dual-pair mBm ratios on pairs not related by scaling", criterion_7_pairs_not_related_by_scaling),
        ("8", "symmetrized field scaling and stationary increments", criterion_8),
        ("9", "Cholesky sampling fidelity and reproducibility, all kernels", criterion_9),
    ];
    let mut unexpected = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        let note = if !outcome.pass && KNOWN_UNATTAINABLE.contains(&id) {
            " [known unattainable]"
        } else {
            ""
        };
        println!(
            "{tag} criterion {id}: {name}{note} -- {} [{:.1?}]",
            outcome.detail,
            start.elapsed()
        );
        if !outcome.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed");
        ExitCode::FAILURE
    }
}
