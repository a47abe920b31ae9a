use std::f64::consts::{PI, SQRT_2};

use gpfp_core::dist::{
    check_prob_condition, constant_alpha, constant_c, fgig_coefficients, fgig_coefficients_exact,
    fgig_residuals_exact, gpfp_inverse, gpfp_pdf, make_beta_related, make_eta, make_fgig, make_fp,
    make_shifted_semicircle, make_sigma, make_truncated_stable, normalize, power_pdf, sample, MixtureKind,
};
use gpfp_core::scalar::ratio;
use gpfp_core::{Error, ExactScalar, GpfpSpec, PowerSpec};
use num_traits::Zero;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn free_poisson_density_by_hand() {
    let fp2 = make_fp(2.0).unwrap();
    let (a, b) = ((SQRT_2 - 1.0).powi(2), (SQRT_2 + 1.0).powi(2));
    assert!(close(fp2.a(), a, 1e-15) && close(fp2.b(), b, 1e-15));
    assert_eq!(fp2.l(), &[0.0]);
    assert!(close(fp2.alpha()[0], 1.0 / (2.0 * PI), 1e-15));
    assert_eq!(fp2.norm(), 1.0);
    let expect = ((b - 1.0) * (1.0 - a)).sqrt() / (2.0 * PI);
    assert!(close(gpfp_pdf(&fp2, 1.0).unwrap(), expect, 1e-15));
    assert_eq!(gpfp_pdf(&fp2, a).unwrap(), 0.0);
    assert_eq!(gpfp_pdf(&fp2, b).unwrap(), 0.0);
    assert_eq!(gpfp_pdf(&fp2, 10.0).unwrap(), 0.0);
    assert!(make_fp(1.0).is_err());
}

#[test]
fn eta_density_by_hand() {
    let eta = make_eta(0.7, 0.15).unwrap();
    let (a, b) = ((SQRT_2 - 1.0).powi(2), (SQRT_2 + 1.0).powi(2));
    let expect = ((b - 2.0) * (2.0 - a)).sqrt() / (2.0 * PI * 2.0) * (0.7 + 0.15 / 4.0);
    assert!(close(gpfp_pdf(&eta, 2.0).unwrap(), expect, 1e-14));
}

#[test]
fn fractional_exponent_rejects_nonpositive_x() {
    let spec = GpfpSpec::new(0.5, 2.0, vec![1.0], vec![0.5], 1.0).unwrap();
    assert!(gpfp_pdf(&spec, -1.0).is_err());
    assert!(gpfp_pdf(&spec, f64::NAN).is_err());
    assert_eq!(gpfp_pdf(&make_fp(2.0).unwrap(), -1.0).unwrap(), 0.0);
}

#[test]
fn normalization() {
    let raw = GpfpSpec::raw(
        (SQRT_2 - 1.0).powi(2),
        (SQRT_2 + 1.0).powi(2),
        vec![1.0 / (2.0 * PI)],
        vec![0.0],
    )
    .unwrap();
    assert!(close(normalize(&raw).unwrap().norm(), 1.0, 1e-10));
    let sigma = make_sigma(0.7, 0.15).unwrap();
    assert!(close(normalize(&sigma).unwrap().norm(), 1.0, 1e-10));
    let scaled = GpfpSpec::raw(1.0, 3.0, vec![7.0, 14.0], vec![-0.5, 0.25]).unwrap();
    let unscaled = GpfpSpec::raw(1.0, 3.0, vec![1.0, 2.0], vec![-0.5, 0.25]).unwrap();
    assert!(close(
        normalize(&scaled).unwrap().norm(),
        normalize(&unscaled).unwrap().norm() / 7.0,
        1e-12
    ));
    // a = 0 needs the last exponent below 1/2.
    assert!(GpfpSpec::raw(0.0, 1.0, vec![1.0], vec![0.75]).is_err());
    // With a = 0 the mass is a beta integral.
    for l in [0.25, 0.4, 0.0, -0.5] {
        let s = normalize(&GpfpSpec::raw(0.0, 1.0, vec![1.0], vec![l]).unwrap()).unwrap();
        let beta = (ln_gamma(0.5 - l) + ln_gamma(1.5) - ln_gamma(2.0 - l)).exp();
        assert!(close(s.norm(), 1.0 / beta, 1e-9), "l = {l}");
    }
}

#[test]
fn constructors_have_unit_mass() {
    let specs = vec![
        make_fp(2.0).unwrap(),
        make_fp(5.5).unwrap(),
        make_fgig(1.0, 4.0, 0.0).unwrap(),
        make_fgig(0.5, 3.0, 1.5).unwrap(),
        make_shifted_semicircle(3.0).unwrap(),
        make_truncated_stable(100, 4.0).unwrap(),
        make_beta_related(100, 0.0).unwrap(),
        make_beta_related(50, -1.0).unwrap(),
        make_sigma(0.7, 0.15).unwrap(),
        make_eta(0.7, 0.15).unwrap(),
    ];
    for s in specs {
        assert!(close(s.mass().unwrap(), 1.0, 1e-10), "{s:?}");
    }
}

#[test]
fn shifted_semicircle_parameters() {
    let s = make_shifted_semicircle(3.0).unwrap();
    assert_eq!((s.a(), s.b()), (1.0, 5.0));
    assert_eq!(s.l(), &[-1.0]);
    assert!(close(s.alpha()[0], 1.0 / (2.0 * PI), 1e-15));
    assert!(make_shifted_semicircle(2.0).is_err());
}

#[test]
fn inverse_of_sigma() {
    let sigma = make_sigma(0.7, 0.15).unwrap();
    let inv = gpfp_inverse(&sigma).unwrap();
    assert!(close(inv.a(), sigma.a(), 1e-14) && close(inv.b(), sigma.b(), 1e-14));
    assert_eq!(inv.l(), &[-1.0, 0.0]);
    assert!(close(inv.alpha()[0], 0.15 / (2.0 * PI), 1e-14));
    assert!(close(inv.alpha()[1], 0.7 / (2.0 * PI), 1e-14));
    assert!(close(inv.mass().unwrap(), 1.0, 1e-10));
    assert!(gpfp_inverse(&GpfpSpec::raw(0.0, 1.0, vec![1.0], vec![0.0]).unwrap()).is_err());
}

#[test]
fn truncated_stable_inverse_tends_to_free_poisson_one() {
    let fp1 = |x: f64| (x * (4.0 - x)).sqrt() / (2.0 * PI * x);
    let grid: Vec<f64> = (0..50).map(|j| 0.2 + 3.6 * j as f64 / 49.0).collect();
    let mut gaps = Vec::new();
    for n in [100u64, 1000, 10_000] {
        let inv = gpfp_inverse(&make_truncated_stable(n, 4.0).unwrap()).unwrap();
        let gap = grid
            .iter()
            .map(|&x| (gpfp_pdf(&inv, x).unwrap() - fp1(x)).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] < 1e-2, "{gaps:?}");
}

#[test]
fn normalizing_constants_approach_their_limits() {
    let c_err: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&n| (constant_c(n, 4.0).unwrap() * 4.0 / 4.0 - 1.0).abs())
        .collect();
    assert!(
        c_err[0] > c_err[1] && c_err[1] > c_err[2] && c_err[2] < 0.05,
        "{c_err:?}"
    );
    let a_err: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&n| (constant_alpha(n, 0.0).unwrap() - 1.0).abs())
        .collect();
    assert!(
        a_err[0] > a_err[1] && a_err[1] > a_err[2] && a_err[2] < 0.05,
        "{a_err:?}"
    );
    assert!(constant_c(3, 7.0).unwrap() > 0.0);
}

#[test]
fn power_pdf_special_cases() {
    let fp2 = make_fp(2.0).unwrap();
    let expect = 0.5 * 4f64.powf(-0.5) * gpfp_pdf(&fp2, 2.0).unwrap();
    assert!(close(power_pdf(&fp2, 2.0, 4.0).unwrap(), expect, 1e-14));
    let inv = gpfp_inverse(&fp2).unwrap();
    for x in [0.2, 0.5, 1.0, 3.0, 5.0] {
        assert!(close(
            power_pdf(&fp2, 1.0, x).unwrap(),
            gpfp_pdf(&fp2, x).unwrap(),
            1e-15
        ));
        assert!(close(
            power_pdf(&fp2, -1.0, x).unwrap(),
            gpfp_pdf(&inv, x).unwrap(),
            1e-12
        ));
    }
    assert!(matches!(power_pdf(&fp2, 0.5, 1.0), Err(Error::Domain(_))));
    assert!(PowerSpec::new(fp2, -0.9).is_err());
}

#[test]
fn power_law_has_unit_mass() {
    // The pushed-forward density must still integrate to 1.
    let fgig = make_fgig(1.0, 4.0, 0.0).unwrap();
    for r in [2.0, -1.0, 3.5, -2.0] {
        let law = PowerSpec::new(fgig.clone(), r).unwrap();
        let (lo, hi) = law.support();
        // Substitution y = lo + (hi - lo) (1 - cos t) / 2 removes the square
        // root at both ends.
        let n = 4000;
        let mut total = 0.0;
        for j in 0..n {
            let t = PI * (j as f64 + 0.5) / n as f64;
            let y = lo + 0.5 * (hi - lo) * (1.0 - t.cos());
            total += law.pdf(y) * 0.5 * (hi - lo) * t.sin() * PI / n as f64;
        }
        assert!(close(total, 1.0, 1e-6), "r = {r}: {total}");
    }
}

#[test]
fn fgig_known_solution() {
    let (a1, a2) = fgig_coefficients(1.0, 4.0, 0.0).unwrap();
    assert!(close(a1, 2.0, 1e-14) && close(a2, 8.0, 1e-14));
    let (e1, e2) = fgig_coefficients_exact(&ratio(1, 1), &ratio(4, 1), &ratio(0, 1)).unwrap();
    assert_eq!((e1, e2), (ratio(2, 1), ratio(8, 1)));
    assert!(matches!(
        fgig_coefficients_exact(&ratio(1, 1), &ratio(2, 1), &ratio(0, 1)),
        Err(Error::ExactUnavailable(_))
    ));
}

#[test]
fn mixture_conditions() {
    let (p, a1, a2) = (ratio(2, 1), ratio(7, 10), ratio(3, 20));
    assert!(check_prob_condition(MixtureKind::Sigma, &p, &a1, &a2));
    assert!(check_prob_condition(MixtureKind::Eta, &p, &a1, &a2));
    let one = ratio(1, 1);
    assert!(!check_prob_condition(MixtureKind::Sigma, &p, &one, &one));
    assert!(check_prob_condition(MixtureKind::Sigma, &2.0, &0.7, &0.15));
}

#[test]
fn sampling_is_deterministic() {
    let fp2 = make_fp(2.0).unwrap();
    assert!(sample(&fp2, 1, 0).unwrap().is_empty());
    let x = sample(&fp2, 42, 1000).unwrap();
    assert_eq!(x, sample(&fp2, 42, 1000).unwrap());
    assert_ne!(x, sample(&fp2, 43, 1000).unwrap());
    assert!(x.iter().all(|&v| v > fp2.a() && v < fp2.b()));
    let unnormalized = fp2.with_norm(2.0).unwrap();
    assert!(sample(&unnormalized, 1, 10).is_err());
}

#[test]
fn json_round_trip_and_normalization_on_load() {
    let fp2 = make_fp(2.0).unwrap();
    let back = GpfpSpec::from_json_str(&fp2.to_json_string()).unwrap();
    assert_eq!(back, fp2);
    let text = r#"{"a": 1.0, "b": 5.0, "alpha": [0.5], "l": [-1.0], "norm": null}"#;
    let s = GpfpSpec::from_json_str(text).unwrap();
    assert!(close(s.norm(), 1.0 / PI, 1e-10));
    assert!(matches!(
        GpfpSpec::from_json_str(r#"{"a": 1.0}"#),
        Err(Error::Malformed(_))
    ));
    assert!(GpfpSpec::from_json_str(r#"{"a": 2.0, "b": 1.0, "alpha": [1], "l": [0], "norm": 1}"#).is_err());
}

fn spec_strategy() -> impl Strategy<Value = GpfpSpec> {
    (0.05f64..2.0, 0.1f64..5.0, 1usize..=3)
        .prop_flat_map(|(a, w, n)| {
            (
                Just(a),
                Just(a + w),
                prop::collection::vec(0.1f64..3.0, n),
                prop::collection::vec(0.05f64..1.0, n),
                -1.5f64..1.5,
            )
        })
        .prop_map(|(a, b, alpha, steps, l0)| {
            let mut l = Vec::with_capacity(steps.len());
            let mut acc = l0;
            for s in steps {
                l.push(acc);
                acc += s;
            }
            normalize(&GpfpSpec::raw(a, b, alpha, l).unwrap()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn inverse_is_push_forward(spec in spec_strategy(), t in prop::collection::vec(0.01f64..0.99, 10)) {
        let inv = gpfp_inverse(&spec).unwrap();
        for u in t {
            let x = inv.a() + u * (inv.b() - inv.a());
            let lhs = gpfp_pdf(&inv, x).unwrap();
            let rhs = gpfp_pdf(&spec, 1.0 / x).unwrap() / (x * x);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }
        prop_assert!(inv.l().windows(2).all(|w| w[0] < w[1]));
        let back = gpfp_inverse(&inv).unwrap();
        prop_assert!((back.a() - spec.a()).abs() <= 1e-12 * spec.a());
        prop_assert!((back.b() - spec.b()).abs() <= 1e-12 * spec.b());
        for (x, y) in back.alpha().iter().zip(spec.alpha()) {
            prop_assert!((x - y).abs() <= 1e-12 * y);
        }
        for (x, y) in back.l().iter().zip(spec.l()) {
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn power_pdf_is_change_of_variables(
        spec in spec_strategy(),
        r in prop::sample::select(vec![1.0, 2.0, 3.5, -1.0, -2.0]),
        t in prop::collection::vec(0.01f64..0.99, 10),
    ) {
        let law = PowerSpec::new(spec.clone(), r).unwrap();
        let (lo, hi) = law.support();
        for u in t {
            let x = lo + u * (hi - lo);
            let inner = x.powf(1.0 / r);
            let expect = gpfp_pdf(&spec, inner).unwrap() * (1.0 / r).abs() * x.powf(1.0 / r - 1.0);
            let got = power_pdf(&spec, r, x).unwrap();
            prop_assert!((got - expect).abs() <= 1e-10 * expect.abs().max(1.0), "x = {} {} {}", x, got, expect);
        }
    }

    #[test]
    fn fgig_residuals_vanish_exactly(
        u in 1i64..8, v in 1i64..8, d in 1i64..5, lam_n in -20i64..20, lam_d in 1i64..6,
    ) {
        // a = (u/d)^2 and b = (u v / d)^2 keep ab a rational square.
        prop_assume!(v > 1);
        let a = ratio(u * u, d * d);
        let b = ratio(u * u * v * v, d * d);
        let lambda = ratio(lam_n, lam_d);
        match fgig_coefficients_exact(&a, &b, &lambda) {
            Ok((a1, a2)) => {
                let (e1, e2) = fgig_residuals_exact(&a, &b, &lambda, &a1, &a2).unwrap();
                prop_assert!(e1.is_zero() && e2.is_zero());
            }
            Err(e) => prop_assert_eq!(e, Error::NotInFgigFamily),
        }
    }
}

#[test]
fn exact_residual_check_rejects_wrong_coefficients() {
    let (e1, _) = fgig_residuals_exact(
        &ratio(1, 1),
        &ratio(4, 1),
        &ExactScalar::zero(),
        &ratio(2, 1),
        &ratio(9, 1),
    )
    .unwrap();
    assert!(!e1.is_zero());
}
