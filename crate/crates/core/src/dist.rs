//! The GPFP family, its named members, inversion and power laws.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{self, CdfTable, QuadratureRule};
use crate::scalar::{exact_sqrt, ExactScalar, Scalar};

/// Density `norm * sqrt((b - x)(x - a)) / x * sum_k alpha_k x^(-l_k)` on
/// `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GpfpSpec {
    a: f64,
    b: f64,
    alpha: Vec<f64>,
    l: Vec<f64>,
    norm: f64,
}

/// `x^(-l)`, using integer powers where possible.
#[inline]
pub(crate) fn pow_neg(x: f64, l: f64) -> f64 {
    if l == 0.0 {
        1.0
    } else if l.fract() == 0.0 && l.abs() <= 64.0 {
        x.powi(-(l as i32))
    } else {
        x.powf(-l)
    }
}

impl GpfpSpec {
    pub fn new(a: f64, b: f64, alpha: Vec<f64>, l: Vec<f64>, norm: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || a >= b {
            return Err(domain(format!("need 0 <= a < b, got a = {a}, b = {b}")));
        }
        if alpha.is_empty() || alpha.len() != l.len() {
            return Err(domain(format!(
                "alpha and l must be non-empty and of equal length ({} vs {})",
                alpha.len(),
                l.len()
            )));
        }
        if alpha.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(domain("alpha coefficients must be positive"));
        }
        if l.iter().any(|v| !v.is_finite()) || l.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("exponents l must be finite and strictly increasing"));
        }
        if !(norm.is_finite() && norm > 0.0) {
            return Err(domain(format!("norm must be positive, got {norm}")));
        }
        if a == 0.0 && *l.last().expect("non-empty") >= 0.5 {
            return Err(domain(
                "with a = 0 the density is only integrable when every l_k < 1/2",
            ));
        }
        Ok(Self { a, b, alpha, l, norm })
    }

    /// Unnormalized shape (`norm = 1`).
    pub fn raw(a: f64, b: f64, alpha: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        Self::new(a, b, alpha, l, 1.0)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn terms(&self) -> usize {
        self.alpha.len()
    }

    pub fn with_norm(&self, norm: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.alpha.clone(), self.l.clone(), norm)
    }

    /// Density at an interior point, given `root = sqrt((b - x)(x - a))`.
    #[inline]
    pub(crate) fn density_with_root(&self, x: f64, root: f64) -> f64 {
        let mut sum = 0.0;
        for (al, l) in self.alpha.iter().zip(&self.l) {
            sum += al * pow_neg(x, *l);
        }
        self.norm * root / x * sum
    }

    /// Density, zero off `(a, b)`. No domain checks.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        let root = ((self.b - x) * (x - self.a)).sqrt();
        self.density_with_root(x, root)
    }

    /// Total mass `int f`, which is 1 for normalized specs.
    pub fn mass(&self) -> Result<f64> {
        Ok(quad::integrate_density(self, &QuadratureRule::default(), |_| 1.0)?.value)
    }

    /// Parses the JSON spec format, normalizing when `norm` is null or absent.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let raw =
            GpfpSpec::raw(file.a, file.b, file.alpha, file.l).map_err(|e| Error::Malformed(e.to_string()))?;
        match file.norm {
            Some(norm) => raw.with_norm(norm).map_err(|e| Error::Malformed(e.to_string())),
            None => normalize(&raw),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from(self)).expect("spec serializes")
    }
}

/// On-disk representation of a spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub a: f64,
    pub b: f64,
    pub alpha: Vec<f64>,
    pub l: Vec<f64>,
    #[serde(default)]
    pub norm: Option<f64>,
}

impl From<&GpfpSpec> for SpecFile {
    fn from(s: &GpfpSpec) -> Self {
        Self {
            a: s.a,
            b: s.b,
            alpha: s.alpha.clone(),
            l: s.l.clone(),
            norm: Some(s.norm),
        }
    }
}

/// Density of a spec with domain checks: `x <= 0` is rejected when some
/// exponent is fractional, otherwise points off `(a, b)` give 0.
pub fn gpfp_pdf(spec: &GpfpSpec, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("x is NaN"));
    }
    if x <= 0.0 && spec.l.iter().any(|l| l.fract() != 0.0) {
        return Err(domain(format!("x = {x} <= 0 with a fractional exponent")));
    }
    Ok(spec.density(x))
}

/// Rescales `norm` so the spec integrates to 1. Any existing `norm` is ignored.
pub fn normalize(raw: &GpfpSpec) -> Result<GpfpSpec> {
    let shape = raw.with_norm(1.0)?;
    let mass = quad::integrate_density(&shape, &QuadratureRule::default(), |_| 1.0)?.value;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::ToleranceNotMet {
            what: "normalizing mass".into(),
            estimate: mass,
            target: 0.0,
        });
    }
    shape.with_norm(1.0 / mass)
}

/// Law of `1/X`. Requires `a > 0`; the mass is preserved exactly, so `norm`
/// carries over.
pub fn gpfp_inverse(spec: &GpfpSpec) -> Result<GpfpSpec> {
    if spec.a <= 0.0 {
        return Err(domain("inverse requires a > 0"));
    }
    let scale = (spec.a * spec.b).sqrt();
    let alpha = spec.alpha.iter().rev().map(|v| v * scale).collect();
    let l = spec.l.iter().rev().map(|v| 1.0 - v).collect();
    GpfpSpec::new(1.0 / spec.b, 1.0 / spec.a, alpha, l, spec.norm)
}

/// Free Poisson law with rate `p > 1` and unit jump size.
pub fn make_fp(p: f64) -> Result<GpfpSpec> {
    if !(p.is_finite() && p > 1.0) {
        return Err(domain(format!("free Poisson rate must exceed 1, got {p}")));
    }
    let sp = p.sqrt();
    GpfpSpec::new(
        (sp - 1.0) * (sp - 1.0),
        (sp + 1.0) * (sp + 1.0),
        vec![1.0 / (2.0 * PI)],
        vec![0.0],
        1.0,
    )
}

/// Coefficients `(alpha_1, alpha_2)` of the free GIG law on `(a, b)` with
/// parameter `lambda`, from the 2x2 system
///
/// ```text
///  sqrt(ab) alpha_1 - (a+b)/(2ab) alpha_2 = lambda - 1
/// -(a+b)/2  alpha_1 + alpha_2 / sqrt(ab)  = -1 - lambda
/// ```
pub fn fgig_coefficients(a: f64, b: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && a < b && b.is_finite() && lambda.is_finite()) {
        return Err(domain(format!("free GIG needs 0 < a < b, got a = {a}, b = {b}")));
    }
    let r = (a * b).sqrt();
    let (m11, m12) = (r, -(a + b) / (2.0 * a * b));
    let (m21, m22) = (-(a + b) / 2.0, 1.0 / r);
    let (y1, y2) = (lambda - 1.0, -1.0 - lambda);
    let det = m11 * m22 - m12 * m21;
    let alpha1 = (y1 * m22 - m12 * y2) / det;
    let alpha2 = (m11 * y2 - m21 * y1) / det;
    if !(alpha1 > 0.0 && alpha2 > 0.0) {
        return Err(Error::NotInFgigFamily);
    }
    Ok((alpha1, alpha2))
}

/// Exact twin of [`fgig_coefficients`]; needs `ab` to be the square of a
/// rational.
pub fn fgig_coefficients_exact(
    a: &ExactScalar,
    b: &ExactScalar,
    lambda: &ExactScalar,
) -> Result<(ExactScalar, ExactScalar)> {
    let zero = ExactScalar::from_i64(0);
    if !(*a > zero && a < b) {
        return Err(domain("free GIG needs 0 < a < b"));
    }
    let ab = a * b;
    let r = exact_sqrt(&ab)
        .ok_or_else(|| Error::ExactUnavailable("ab is not the square of a rational".into()))?;
    let one = ExactScalar::from_i64(1);
    let two = ExactScalar::from_i64(2);
    let sum = a + b;
    let (m11, m12) = (r.clone(), -(&sum / (&two * &ab)));
    let (m21, m22) = (-(&sum / &two), &one / &r);
    let (y1, y2) = (lambda - &one, -(&one + lambda));
    let det = &m11 * &m22 - &m12 * &m21;
    let alpha1 = (&y1 * &m22 - &m12 * &y2) / &det;
    let alpha2 = (&m11 * &y2 - &m21 * &y1) / &det;
    if !(alpha1 > zero && alpha2 > zero) {
        return Err(Error::NotInFgigFamily);
    }
    Ok((alpha1, alpha2))
}

/// Left-hand sides of the free GIG system minus the right-hand sides.
pub fn fgig_residuals_exact(
    a: &ExactScalar,
    b: &ExactScalar,
    lambda: &ExactScalar,
    alpha1: &ExactScalar,
    alpha2: &ExactScalar,
) -> Result<(ExactScalar, ExactScalar)> {
    let ab = a * b;
    let r = exact_sqrt(&ab)
        .ok_or_else(|| Error::ExactUnavailable("ab is not the square of a rational".into()))?;
    let one = ExactScalar::from_i64(1);
    let two = ExactScalar::from_i64(2);
    let sum = a + b;
    let e1 = &one - lambda + alpha1 * &r - alpha2 * &sum / (&two * &ab);
    let e2 = &one + lambda + alpha2 / &r - alpha1 * &sum / &two;
    Ok((e1, e2))
}

/// Free GIG law on `(a, b)` with parameter `lambda`, already normalized.
pub fn make_fgig(a: f64, b: f64, lambda: f64) -> Result<GpfpSpec> {
    let (alpha1, alpha2) = fgig_coefficients(a, b, lambda)?;
    GpfpSpec::new(
        a,
        b,
        vec![alpha1 / (2.0 * PI), alpha2 / (2.0 * PI * (a * b).sqrt())],
        vec![0.0, 1.0],
        1.0,
    )
}

/// Semicircle law of radius 2 centered at `u > 2`.
pub fn make_shifted_semicircle(u: f64) -> Result<GpfpSpec> {
    if !(u.is_finite() && u > 2.0) {
        return Err(domain(format!("shift must exceed 2, got {u}")));
    }
    GpfpSpec::new(u - 2.0, u + 2.0, vec![1.0 / (2.0 * PI)], vec![-1.0], 1.0)
}

fn beta_fn(p: f64, q: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp()
}

/// Normalizing constant of the truncated free stable law on `(1/b, n)`,
/// the reciprocal of `int_{1/n}^b sqrt((x - 1/n)(b - x)) / (2 pi x) dx`.
pub fn constant_c(n: u64, b: f64) -> Result<f64> {
    if n == 0 || !(b.is_finite() && b > 0.0) || 1.0 / n as f64 >= b {
        return Err(domain(format!("need 1/n < b, got n = {n}, b = {b}")));
    }
    let shape = GpfpSpec::raw(1.0 / n as f64, b, vec![1.0], vec![0.0])?;
    let mass = quad::integrate_density(&shape, &QuadratureRule::default(), |_| 1.0)?.value;
    Ok(2.0 * PI / mass)
}

/// Normalizing constant of the beta-related law on `(1/n, 1)`.
pub fn constant_alpha(n: u64, l: f64) -> Result<f64> {
    if n < 2 || !(l.is_finite() && l < 0.5) {
        return Err(domain(format!("need n >= 2 and l < 1/2, got n = {n}, l = {l}")));
    }
    let shape = GpfpSpec::raw(1.0 / n as f64, 1.0, vec![1.0], vec![l])?;
    let integral = quad::integrate_density(&shape, &QuadratureRule::default(), |_| 1.0)?.value;
    Ok(beta_fn(0.5 - l, 1.5) / integral)
}

/// Truncated free stable law on `(1/b, n)`.
pub fn make_truncated_stable(n: u64, b: f64) -> Result<GpfpSpec> {
    let c = constant_c(n, b)?;
    GpfpSpec::new(
        1.0 / b,
        n as f64,
        vec![c / (2.0 * PI) * (b / n as f64).sqrt()],
        vec![1.0],
        1.0,
    )
}

/// Beta-related law on `(1/n, 1)` with exponent `l < 1/2`.
pub fn make_beta_related(n: u64, l: f64) -> Result<GpfpSpec> {
    let alpha = constant_alpha(n, l)?;
    GpfpSpec::new(
        1.0 / n as f64,
        1.0,
        vec![alpha / beta_fn(0.5 - l, 1.5)],
        vec![l],
        1.0,
    )
}

/// Endpoints of the free Poisson law with rate 2, shared by the
/// sigma and eta measures.
fn fp2_endpoints() -> (f64, f64) {
    let s = std::f64::consts::SQRT_2;
    ((s - 1.0) * (s - 1.0), (s + 1.0) * (s + 1.0))
}

/// The sigma measure: density terms `x^-1` and `x^-2` on the fp(2) support.
/// A probability measure when `alpha_1 + 2 alpha_2 = 1`.
pub fn make_sigma(alpha1: f64, alpha2: f64) -> Result<GpfpSpec> {
    let (a, b) = fp2_endpoints();
    GpfpSpec::new(
        a,
        b,
        vec![alpha1 / (2.0 * PI), alpha2 / (2.0 * PI)],
        vec![1.0, 2.0],
        1.0,
    )
}

/// The eta measure: fp(2) mixed with its `x^-2`-tilted version. A
/// probability measure when `alpha_1 + 2 alpha_2 = 1`.
pub fn make_eta(alpha1: f64, alpha2: f64) -> Result<GpfpSpec> {
    let (a, b) = fp2_endpoints();
    GpfpSpec::new(
        a,
        b,
        vec![alpha1 / (2.0 * PI), alpha2 / (2.0 * PI)],
        vec![0.0, 2.0],
        1.0,
    )
}

/// Which probability condition [`check_prob_condition`] tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixtureKind {
    Sigma,
    Eta,
}

/// Whether `(alpha_1, alpha_2)` make the mixture built on fp(p) a
/// probability measure.
pub fn check_prob_condition<S: Scalar>(kind: MixtureKind, p: &S, alpha1: &S, alpha2: &S) -> bool {
    if !(*alpha1 > S::zero() && *alpha2 > S::zero() && *p > S::one()) {
        return false;
    }
    let pm1 = p.clone() - S::one();
    let total = match kind {
        // The inverse of sigma is (alpha_1 + alpha_2 x) fp(p) / (p - 1), whose
        // mass is (alpha_1 + alpha_2 m_1) / (p - 1) with m_1 = p.
        MixtureKind::Sigma => (alpha1.clone() + alpha2.clone() * p.clone()) / pm1,
        // m_0 = 1 and m_{-2}(fp p) = p / (p - 1)^3.
        MixtureKind::Eta => alpha1.clone() + alpha2.clone() * p.clone() / pm1.powi(3),
    };
    total.approx_eq(&S::one())
}

/// The law of `X^r` for `|r| >= 1`. Negative powers go through the inverse,
/// so every power law is handled as `Y^(1/s)` with `s = 1/|r|` and
/// `Y` following the effective spec.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpec {
    base: GpfpSpec,
    r: f64,
    effective: GpfpSpec,
    s: f64,
    lower: f64,
    upper: f64,
}

impl PowerSpec {
    pub fn new(base: GpfpSpec, r: f64) -> Result<Self> {
        if !(r.is_finite() && r.abs() >= 1.0) {
            return Err(domain(format!("power must satisfy |r| >= 1, got {r}")));
        }
        let effective = if r > 0.0 {
            base.clone()
        } else {
            gpfp_inverse(&base)?
        };
        let s = 1.0 / r.abs();
        let lower = effective.a.powf(r.abs());
        let upper = effective.b.powf(r.abs());
        Ok(Self {
            base,
            r,
            effective,
            s,
            lower,
            upper,
        })
    }

    pub fn identity(base: GpfpSpec) -> Self {
        Self::new(base, 1.0).expect("r = 1 is always valid")
    }

    pub fn base(&self) -> &GpfpSpec {
        &self.base
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Spec of `X` (for `r > 0`) or `1/X` (for `r < 0`).
    pub fn effective(&self) -> &GpfpSpec {
        &self.effective
    }

    /// `1/|r|`.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Support `(A, B)` of the power law.
    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// Density of `X^r`, zero off `(A, B)`.
    pub fn pdf(&self, y: f64) -> f64 {
        if y <= self.lower || y >= self.upper {
            return 0.0;
        }
        let e = &self.effective;
        let w = y.powf(self.s);
        let root = ((e.b - w) * (w - e.a)).sqrt();
        let mut sum = 0.0;
        for (al, l) in e.alpha.iter().zip(&e.l) {
            sum += al * y.powf(-self.s * l);
        }
        self.s * e.norm * root / y * sum
    }
}

/// Density of `X^r` for `|r| >= 1`.
pub fn power_pdf(spec: &GpfpSpec, r: f64, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(domain("x is NaN"));
    }
    Ok(PowerSpec::new(spec.clone(), r)?.pdf(x))
}

/// `count` independent draws by inverse-CDF sampling from a ChaCha8 stream.
pub fn sample(spec: &GpfpSpec, seed: u64, count: usize) -> Result<Vec<f64>> {
    let table = CdfTable::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Midpoints of the 2^53 dyadic cells, so the draw never hits 0 or 1.
    let uniforms: Vec<f64> = (0..count)
        .map(|_| ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64))
        .collect();
    uniforms.par_iter().map(|&q| table.quantile(q)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fp_endpoints() {
        let s = make_fp(2.0).unwrap();
        assert!((s.a() - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((s.b() - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(make_fp(1.0).is_err());
        assert!(make_fp(0.5).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(GpfpSpec::raw(2.0, 1.0, vec![1.0], vec![0.0]).is_err());
        assert!(GpfpSpec::raw(0.0, 1.0, vec![1.0], vec![0.5]).is_err());
        assert!(GpfpSpec::raw(0.0, 1.0, vec![1.0], vec![0.25]).is_ok());
        assert!(GpfpSpec::raw(1.0, 2.0, vec![1.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(GpfpSpec::raw(1.0, 2.0, vec![-1.0], vec![0.0]).is_err());
        assert!(GpfpSpec::raw(1.0, 2.0, vec![1.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn pdf_domain_rules() {
        let fp = make_fp(2.0).unwrap();
        assert_eq!(gpfp_pdf(&fp, -1.0).unwrap(), 0.0);
        assert_eq!(gpfp_pdf(&fp, fp.a()).unwrap(), 0.0);
        assert_eq!(gpfp_pdf(&fp, fp.b()).unwrap(), 0.0);
        let frac = GpfpSpec::new(1.0, 2.0, vec![1.0], vec![0.5], 1.0).unwrap();
        assert!(gpfp_pdf(&frac, -1.0).is_err());
        assert!(gpfp_pdf(&frac, 0.0).is_err());
        assert!(gpfp_pdf(&fp, f64::NAN).is_err());
    }

    #[test]
    fn inverse_is_an_involution() {
        let s = make_fgig(1.0, 4.0, 0.0).unwrap();
        let back = gpfp_inverse(&gpfp_inverse(&s).unwrap()).unwrap();
        assert!((back.a() - s.a()).abs() < 1e-15);
        assert!((back.b() - s.b()).abs() < 1e-15);
        for (x, y) in back.alpha().iter().zip(s.alpha()) {
            assert!((x - y).abs() <= 1e-15 * y.abs());
        }
        assert_eq!(back.l(), s.l());
        assert!(gpfp_inverse(&GpfpSpec::raw(0.0, 4.0, vec![1.0], vec![0.0]).unwrap()).is_err());
    }

    #[test]
    fn prob_condition_exact_and_float() {
        use crate::scalar::ratio;
        let two = ratio(2, 1);
        assert!(check_prob_condition(
            MixtureKind::Eta,
            &two,
            &ratio(7, 10),
            &ratio(3, 20)
        ));
        assert!(!check_prob_condition(
            MixtureKind::Eta,
            &two,
            &ratio(7, 10),
            &ratio(1, 5)
        ));
        assert!(check_prob_condition(
            MixtureKind::Sigma,
            &two,
            &ratio(7, 10),
            &ratio(3, 20)
        ));
        assert!(check_prob_condition(MixtureKind::Eta, &2.0, &0.7, &0.15));
        assert!(!check_prob_condition(MixtureKind::Eta, &2.0, &0.7, &0.0));
    }

    #[test]
    fn power_support() {
        let fp = make_fp(2.0).unwrap();
        let p = PowerSpec::new(fp.clone(), -2.0).unwrap();
        let (lo, hi) = p.support();
        assert!((lo - fp.b().powi(-2)).abs() < 1e-15);
        assert!((hi - fp.a().powi(-2)).abs() < 1e-12 * hi);
        assert!(PowerSpec::new(fp, 0.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = make_eta(0.7, 0.15).unwrap();
        let back = GpfpSpec::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
        assert!(matches!(
            GpfpSpec::from_json_str("{\"a\": 1}"),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            GpfpSpec::from_json_str("{\"a\": 2, \"b\": 1, \"alpha\": [1], \"l\": [0]}"),
            Err(Error::Malformed(_))
        ));
    }
}
