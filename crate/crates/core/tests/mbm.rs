use std::io::Write;

use proptest::prelude::*;

use fbfield::gaussfield::build_cov;
use fbfield::kernels::{fbm_cov, KernelId};
use fbfield::mbm::{cohen_discrepancy, mbm_cov, mbm_cov_x, mbm_cov_y, mbm_sample, HurstProfile, MbmKind};
use fbfield::mcoracle::{isserlis_se, second_moment};
use fbfield::Hurst;

fn profiles() -> Vec<HurstProfile> {
    vec![
        HurstProfile::linear(0.2, 0.8, 2.0).unwrap(),
        HurstProfile::table(vec![(0.0, 0.7), (0.5, 0.25), (1.2, 0.6), (2.0, 0.4)]).unwrap(),
    ]
}

#[test]
fn sampled_ensembles_match_both_covariances() {
    let times: Vec<f64> = (1..=8).map(|k| k as f64 / 4.0).collect();
    let n = 20_000;
    for (k, p) in profiles().into_iter().enumerate() {
        for which in [MbmKind::X, MbmKind::Y] {
            let e = mbm_sample(&p, &times, which, n, 40 + k as u64).unwrap();
            for i in 0..8 {
                for j in i..8 {
                    let c = |a: usize, b: usize| mbm_cov(&p, which, times[a], times[b]).unwrap();
                    let se = isserlis_se(c(i, i), c(j, j), c(i, j), n);
                    let est = second_moment(&e, i, j);
                    assert!((est - c(i, j)).abs() <= 4.0 * se, "profile {k} {which} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn sampler_uses_the_diagonal_of_the_field() {
    let p = HurstProfile::linear(0.3, 0.6, 1.0).unwrap();
    let times = [0.2, 0.7, 1.5];
    let m = build_cov(&p.points(&times).unwrap(), KernelId::Dfbf).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(m.entries[(i, j)], mbm_cov_x(&p, times[i], times[j]).unwrap());
        }
    }
}

#[test]
fn profile_read_from_a_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# ramp\nt H\n0 0.3\n1 0.7").unwrap();
    let text = std::fs::read_to_string(f.path()).unwrap();
    let p: HurstProfile = text.parse().unwrap();
    assert!((p.eval(0.5).unwrap().value() - 0.5).abs() < 1e-15);
}

#[test]
fn ratios_separate_the_laws_on_general_pairs() {
    for hv in [0.2, 0.3, 0.4, 0.6, 0.8] {
        let r = cohen_discrepancy(Hurst::new(hv).unwrap(), &[(2.0, 1.0), (3.0, 1.0), (5.0, 2.0)]).unwrap();
        assert!(r.discrepancy, "H={hv}: r_x spread {}, r_y spread {}", r.r_x_spread, r.r_y_spread);
    }
}

proptest! {
    #[test]
    fn diagonals_coincide(h0 in 0.05f64..0.95, h1 in 0.05f64..0.95, t in 0.0f64..5.0) {
        let p = HurstProfile::linear(h0, h1, 3.0).unwrap();
        let want = t.powf(2.0 * p.eval(t).unwrap().value());
        let x = mbm_cov_x(&p, t, t).unwrap();
        let y = mbm_cov_y(&p, t, t).unwrap();
        prop_assert!((x - want).abs() <= 1e-12 * want.max(1.0));
        prop_assert!((y - want).abs() <= 1e-12 * want.max(1.0));
    }

    #[test]
    fn constant_profiles_are_fbm(h in 0.05f64..0.95, t in 0.0f64..4.0, s in 0.0f64..4.0) {
        let hh = Hurst::new(h).unwrap();
        let p = HurstProfile::constant(hh).unwrap();
        let want = fbm_cov(hh, t, s);
        prop_assert!((mbm_cov_x(&p, t, s).unwrap() - want).abs() <= 1e-12);
        prop_assert!((mbm_cov_y(&p, t, s).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn well_balanced_ratio_is_constant_on_the_dual_line(h in 0.05f64..0.95, t in 0.1f64..5.0, s in 0.1f64..5.0) {
        let r = cohen_discrepancy(Hurst::new(h).unwrap(), &[(t, s), (2.0, 1.0)]).unwrap();
        prop_assert!(r.r_y_spread <= 1e-12 * r.entries[0].r_y.abs().max(1.0));
    }
}
