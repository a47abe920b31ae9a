//! Integration against GPFP densities, exact free Poisson moments and the
//! tabulated CDF used for sampling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::{make_fp, GpfpSpec};
use crate::error::{domain, Error, Result};
use crate::nc_lattice::{cumulants_to_moments, ENUMERATION_CAP};
use crate::scalar::{rationalize, ExactScalar, Scalar};

/// Largest node count the cosine rule doubles up to before falling back to
/// adaptive subdivision.
pub const MAX_NODES: usize = 1 << 16;

/// Largest denominator accepted when recovering exact parameters from floats.
const MAX_DENOMINATOR: u64 = 100_000;

/// Evaluation budget for adaptive subdivision.
const MAX_ADAPTIVE_EVALS: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// `x = c + h cos(phi)` followed by the trapezoid rule in `phi`, doubling
    /// the node count until two levels agree.
    CosineSubstitution,
    /// Adaptive Gauss-Kronrod (7/15) on `phi`.
    AdaptiveSubdivision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Starting node count for the cosine rule.
    pub nodes: usize,
    /// Error target, absolute for values below 1 and relative above.
    pub tol: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            kind: RuleKind::CosineSubstitution,
            nodes: 256,
            tol: 1e-10,
        }
    }
}

impl QuadratureRule {
    pub fn new(kind: RuleKind, nodes: usize, tol: f64) -> Result<Self> {
        if !(8..=MAX_NODES).contains(&nodes) {
            return Err(domain(format!(
                "starting node count must be in 8..={MAX_NODES}, got {nodes}"
            )));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(domain(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self { kind, nodes, tol })
    }

    fn target(&self, value: f64) -> f64 {
        self.tol * value.max(1.0)
    }
}

/// Quadrature result with a conservative error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub err_bound: f64,
    /// Integrand evaluations behind the final value.
    pub nodes: usize,
    pub kind: RuleKind,
}

/// Cosine-substitution trapezoid sums for `int_a^b f(x) dx`. The callback
/// receives `x` and `sqrt((b - x)(x - a))`, which is computed from the angle
/// rather than from `x` so it stays accurate near the endpoints.
pub fn integrate_sqrt_weighted<F>(a: f64, b: f64, rule: &QuadratureRule, f: F) -> Result<Estimate<Complex64>>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let h = 0.5 * (b - a);
    let integrand = |phi: f64| {
        let root = h * phi.sin();
        // Measure from the nearer endpoint so x stays off a zero endpoint.
        let x = if phi > FRAC_PI_2 {
            a + 2.0 * h * (0.5 * phi).cos().powi(2)
        } else {
            b - 2.0 * h * (0.5 * phi).sin().powi(2)
        };
        f(x, root) * root
    };
    match rule.kind {
        RuleKind::CosineSubstitution => match trapezoid(&integrand, rule) {
            Ok(e) => Ok(e),
            Err(Error::ToleranceNotMet { .. }) => adaptive(&integrand, 0.0, PI, rule.tol),
            Err(e) => Err(e),
        },
        RuleKind::AdaptiveSubdivision => adaptive(&integrand, 0.0, PI, rule.tol),
    }
}

// Trapezoid rule on (0, pi). Both endpoint terms vanish because the root
// factor is zero there, so only interior nodes are summed.
fn trapezoid<F: Fn(f64) -> Complex64>(f: &F, rule: &QuadratureRule) -> Result<Estimate<Complex64>> {
    let mut n = rule.nodes.max(8);
    let mut sum = Complex64::zero();
    let mut abs_sum = 0.0;
    for j in 1..n {
        let v = f(j as f64 * PI / n as f64);
        sum += v;
        abs_sum += v.norm();
    }
    let mut est = sum * (PI / n as f64);
    let mut last_diff = f64::INFINITY;
    while 2 * n <= MAX_NODES {
        let step = PI / (2 * n) as f64;
        for j in 0..n {
            let v = f((2 * j + 1) as f64 * step);
            sum += v;
            abs_sum += v.norm();
        }
        n *= 2;
        let next = sum * (PI / n as f64);
        let diff = (next - est).norm();
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::ToleranceNotMet {
                what: "cosine-substitution sum".into(),
                estimate: f64::INFINITY,
                target: rule.tol,
            });
        }
        let roundoff = 16.0 * f64::EPSILON * abs_sum * (PI / n as f64);
        if diff <= rule.target(next.norm()) {
            return Ok(Estimate {
                value: next,
                err_bound: diff.max(roundoff),
                nodes: n - 1,
                kind: RuleKind::CosineSubstitution,
            });
        }
        est = next;
        last_diff = diff;
    }
    Err(Error::ToleranceNotMet {
        what: "cosine-substitution sum".into(),
        estimate: last_diff,
        target: rule.tol,
    })
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> (Complex64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = fc * GK_WEIGHTS[7];
    let mut gauss = fc * GAUSS7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * GAUSS7_WEIGHTS[i / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod integration on `(lo, hi)`.
pub(crate) fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<Estimate<Complex64>> {
    let mut heap = BinaryHeap::new();
    let (value, err) = gk15(f, lo, hi);
    let mut total = value;
    let mut total_err = err;
    let mut evals = 15;
    heap.push(Panel { lo, hi, value, err });
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::ToleranceNotMet {
                what: "adaptive subdivision".into(),
                estimate: f64::INFINITY,
                target: tol,
            });
        }
        if total_err <= tol * total.norm().max(1.0) {
            return Ok(Estimate {
                value: total,
                err_bound: total_err,
                nodes: evals,
                kind: RuleKind::AdaptiveSubdivision,
            });
        }
        if evals >= MAX_ADAPTIVE_EVALS {
            return Err(Error::ToleranceNotMet {
                what: "adaptive subdivision".into(),
                estimate: total_err,
                target: tol,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::ToleranceNotMet {
                what: "adaptive subdivision (interval exhausted)".into(),
                estimate: total_err,
                target: tol,
            });
        }
        let (v1, e1) = gk15(f, worst.lo, mid);
        let (v2, e2) = gk15(f, mid, worst.hi);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            lo: worst.lo,
            hi: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            lo: mid,
            hi: worst.hi,
            value: v2,
            err: e2,
        });
    }
}

/// `int g(x) f(x) dx` for the density `f` of `spec`.
pub fn integrate_density<G>(spec: &GpfpSpec, rule: &QuadratureRule, g: G) -> Result<Estimate<f64>>
where
    G: Fn(f64) -> f64 + Sync,
{
    let integrand = |x: f64, root: f64| Complex64::new(g(x) * spec.density_with_root(x, root), 0.0);
    let e = if spec.a() == 0.0 {
        let top = *spec.l().last().expect("non-empty");
        integrate_from_zero(spec.b(), 0.5 - top, rule.tol, integrand)?
    } else {
        integrate_sqrt_weighted(spec.a(), spec.b(), rule, integrand)?
    };
    Ok(Estimate {
        value: e.value.re,
        err_bound: e.err_bound,
        nodes: e.nodes,
        kind: e.kind,
    })
}

/// `int_0^b f(x, sqrt(x (b - x))) sqrt(x (b - x)) dx` when the integrand
/// behaves like `x^(beta - 1)` at 0 with `beta > 0`. The angle variable is
/// graded towards the zero endpoint so the power singularity becomes smooth
/// enough for Gauss-Kronrod.
fn integrate_from_zero<F>(b: f64, beta: f64, tol: f64, f: F) -> Result<Estimate<Complex64>>
where
    F: Fn(f64, f64) -> Complex64,
{
    if beta.is_nan() || beta <= 0.0 {
        return Err(domain(format!(
            "integrand is not integrable at 0 (exponent {beta})"
        )));
    }
    let h = 0.5 * b;
    let upper = |phi: f64| {
        let root = h * phi.sin();
        f(b - b * (0.5 * phi).sin().powi(2), root) * root
    };
    // t = pi - phi = (pi/2) v^m turns t^(2 beta - 1) dt into a multiple
    // of v^(2 beta m - 1) dv.
    let m = (2.0 / beta).ceil().clamp(1.0, 64.0);
    let lower = |v: f64| {
        let t = FRAC_PI_2 * v.powf(m);
        let x = b * (0.5 * t).sin().powi(2);
        if x == 0.0 {
            return Complex64::zero();
        }
        let root = h * t.sin();
        f(x, root) * root * (FRAC_PI_2 * m * v.powf(m - 1.0))
    };
    let hi = adaptive(&upper, 0.0, FRAC_PI_2, tol)?;
    let lo = adaptive(&lower, 0.0, 1.0, tol)?;
    Ok(Estimate {
        value: hi.value + lo.value,
        err_bound: hi.err_bound + lo.err_bound,
        nodes: hi.nodes + lo.nodes,
        kind: RuleKind::AdaptiveSubdivision,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    Exact,
    CosineSubstitution,
    AdaptiveSubdivision,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentValue {
    pub order: Complex64,
    pub value: Complex64,
    /// Present when the exact rational path was used.
    pub exact: Option<ExactScalar>,
    pub err_bound: f64,
    pub method: MomentMethod,
}

/// `m_s = int x^s f(x) dx`, exact when `s` is an integer and the spec sits
/// on free Poisson endpoints with integer exponents and rational weights.
pub fn moment(spec: &GpfpSpec, s: Complex64) -> Result<MomentValue> {
    if s.im == 0.0 && s.re.fract() == 0.0 && s.re.abs() <= ENUMERATION_CAP as f64 {
        if let Ok(aligned) = AlignedSpec::from_spec(spec) {
            if let Ok(v) = aligned.moment(s.re as i64) {
                return Ok(MomentValue {
                    order: s,
                    value: Complex64::new(Scalar::to_f64(&v), 0.0),
                    exact: Some(v),
                    err_bound: 0.0,
                    method: MomentMethod::Exact,
                });
            }
        }
    }
    moment_quadrature(spec, s, &QuadratureRule::default())
}

/// `m_s` by quadrature only.
pub fn moment_quadrature(spec: &GpfpSpec, s: Complex64, rule: &QuadratureRule) -> Result<MomentValue> {
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(domain("moment order must be finite"));
    }
    if spec.a() == 0.0 {
        let top = *spec.l().last().expect("non-empty");
        if s.re <= top - 0.5 {
            return Err(domain(format!(
                "m_s diverges at 0 for Re(s) = {} <= {}",
                s.re,
                top - 0.5
            )));
        }
    }
    let real = s.im == 0.0;
    let integrand = |x: f64, root: f64| {
        let f = spec.density_with_root(x, root);
        if real {
            Complex64::new(x.powf(s.re) * f, 0.0)
        } else {
            (s * x.ln()).exp() * f
        }
    };
    let e = if spec.a() == 0.0 {
        let top = *spec.l().last().expect("non-empty");
        integrate_from_zero(spec.b(), 0.5 - top + s.re, rule.tol, integrand)?
    } else {
        integrate_sqrt_weighted(spec.a(), spec.b(), rule, integrand)?
    };
    Ok(MomentValue {
        order: s,
        value: e.value,
        exact: None,
        err_bound: e.err_bound,
        method: match e.kind {
            RuleKind::CosineSubstitution => MomentMethod::CosineSubstitution,
            RuleKind::AdaptiveSubdivision => MomentMethod::AdaptiveSubdivision,
        },
    })
}

/// Exact `m_n` of the free Poisson law with rate `p > 1`. Negative orders use
/// `m_{-k} = m_{k-1} (p - 1)^(1 - 2k)`.
pub fn fp_moment_exact(p: &ExactScalar, n: i64) -> Result<ExactScalar> {
    if *p <= ExactScalar::one() {
        return Err(domain("free Poisson rate must exceed 1"));
    }
    if n == 0 {
        return Ok(ExactScalar::one());
    }
    if n < 0 {
        let k = -n;
        let base = fp_moment_exact(p, k - 1)?;
        return Ok(base * Scalar::powi(&(p - ExactScalar::one()), 1 - 2 * k));
    }
    if n as usize > ENUMERATION_CAP {
        return Err(domain(format!(
            "exact free Poisson moments capped at order {ENUMERATION_CAP}, got {n}"
        )));
    }
    // All free cumulants of fp(p) equal p.
    let moments = cumulants_to_moments(&vec![p.clone(); n as usize])?;
    Ok(moments.last().expect("n >= 1").clone())
}

/// A GPFP law on free Poisson endpoints with integer exponents, in exact
/// form: `m_n = sum_k w_k m_{n - l_k}(fp(p))`, where `w_k = 2 pi norm alpha_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedSpec {
    p: ExactScalar,
    terms: Vec<(ExactScalar, i64)>,
}

impl AlignedSpec {
    pub fn new(p: ExactScalar, terms: Vec<(ExactScalar, i64)>) -> Result<Self> {
        if p <= ExactScalar::one() {
            return Err(domain("free Poisson rate must exceed 1"));
        }
        if terms.is_empty() || terms.iter().any(|(w, _)| *w <= ExactScalar::zero()) {
            return Err(domain("need at least one term, all weights positive"));
        }
        if terms.windows(2).any(|t| t[0].1 >= t[1].1) {
            return Err(domain("exponents must be strictly increasing"));
        }
        Ok(Self { p, terms })
    }

    /// Recovers the exact form of a float spec. Endpoints must be those of a
    /// free Poisson law and exponents integers; the rate and weights must be
    /// rationals with denominators up to `1e5`.
    pub fn from_spec(spec: &GpfpSpec) -> Result<Self> {
        let (ra, rb) = (spec.a().sqrt(), spec.b().sqrt());
        if ((rb - ra) - 2.0).abs() > 1e-9 {
            return Err(domain(
                "endpoints are not those of a free Poisson law with unit jump size",
            ));
        }
        let p_float = (0.5 * (ra + rb)).powi(2);
        let p = rationalize(p_float, MAX_DENOMINATOR)
            .ok_or_else(|| Error::ExactUnavailable(format!("rate {p_float} is not a simple rational")))?;
        let mut terms = Vec::with_capacity(spec.terms());
        for (al, l) in spec.alpha().iter().zip(spec.l()) {
            if (l - l.round()).abs() > 1e-12 {
                return Err(domain(format!("exponent {l} is not an integer")));
            }
            let w_float = 2.0 * PI * spec.norm() * al;
            let w = rationalize(w_float, MAX_DENOMINATOR).ok_or_else(|| {
                Error::ExactUnavailable(format!("weight {w_float} is not a simple rational"))
            })?;
            terms.push((w, l.round() as i64));
        }
        Self::new(p, terms)
    }

    pub fn p(&self) -> &ExactScalar {
        &self.p
    }

    pub fn terms(&self) -> &[(ExactScalar, i64)] {
        &self.terms
    }

    pub fn moment(&self, n: i64) -> Result<ExactScalar> {
        let mut acc = ExactScalar::zero();
        for (w, l) in &self.terms {
            acc += w * fp_moment_exact(&self.p, n - l)?;
        }
        Ok(acc)
    }

    /// `m_1..m_count`.
    pub fn moments(&self, count: usize) -> Result<Vec<ExactScalar>> {
        (1..=count as i64).map(|n| self.moment(n)).collect()
    }

    pub fn to_spec(&self) -> Result<GpfpSpec> {
        let p = Scalar::to_f64(&self.p);
        let fp = make_fp(p)?;
        let alpha = self
            .terms
            .iter()
            .map(|(w, _)| Scalar::to_f64(w) / (2.0 * PI))
            .collect();
        let l = self.terms.iter().map(|(_, l)| *l as f64).collect();
        GpfpSpec::new(fp.a(), fp.b(), alpha, l, 1.0)
    }
}

/// Exact `m_n` of an aligned spec.
pub fn gpfp_moment_exact(spec: &GpfpSpec, n: i64) -> Result<ExactScalar> {
    AlignedSpec::from_spec(spec)?.moment(n)
}

/// `|m_s - m_{-s-1} (p - 1)^(1 + 2s)|` for fp(p), both moments by quadrature.
pub fn reflection_residual(p: f64, s: Complex64) -> Result<f64> {
    let fp = make_fp(p)?;
    let rule = QuadratureRule {
        tol: 1e-14,
        ..QuadratureRule::default()
    };
    let lhs = moment_quadrature(&fp, s, &rule)?.value;
    let mirrored = moment_quadrature(&fp, -s - 1.0, &rule)?.value;
    let factor = ((1.0 + 2.0 * s) * (p - 1.0).ln()).exp();
    Ok((lhs - mirrored * factor).norm())
}

/// Gauss-Legendre nodes and weights on `(-1, 1)`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Tabulated CDF in the angle variable: panel `i` covers
/// `phi in [i step, (i + 1) step]` and `x` decreases as `phi` grows.
pub struct CdfTable {
    spec: GpfpSpec,
    c: f64,
    h: f64,
    step: f64,
    /// `tail[i] = int_{phi_i}^{pi} F`, i.e. the CDF at `x(phi_i)`.
    tail: Vec<f64>,
    total: f64,
}

const CDF_PANELS: usize = 512;

impl CdfTable {
    /// Requires `a > 0` and a normalized spec.
    pub fn new(spec: &GpfpSpec) -> Result<Self> {
        if spec.a() <= 0.0 {
            return Err(domain("CDF tabulation requires a > 0"));
        }
        let c = 0.5 * (spec.a() + spec.b());
        let h = 0.5 * (spec.b() - spec.a());
        let step = PI / CDF_PANELS as f64;
        let mut table = Self {
            spec: spec.clone(),
            c,
            h,
            step,
            tail: vec![0.0; CDF_PANELS + 1],
            total: 0.0,
        };
        for i in (0..CDF_PANELS).rev() {
            let lo = i as f64 * step;
            table.tail[i] = table.tail[i + 1] + table.panel_integral(lo, lo + step);
        }
        table.total = table.tail[0];
        if (table.total - 1.0).abs() > 1e-8 {
            return Err(domain(format!("spec is not normalized (mass {})", table.total)));
        }
        Ok(table)
    }

    fn weight(&self, phi: f64) -> f64 {
        let (sin, cos) = phi.sin_cos();
        let root = self.h * sin;
        self.spec.density_with_root(self.c + self.h * cos, root) * root
    }

    fn panel_integral(&self, lo: f64, hi: f64) -> f64 {
        let (nodes, weights) = gl16();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        nodes
            .iter()
            .zip(weights)
            .map(|(t, w)| w * self.weight(mid + half * t))
            .sum::<f64>()
            * half
    }

    fn angle(&self, x: f64) -> f64 {
        ((x - self.c) / self.h).clamp(-1.0, 1.0).acos()
    }

    fn cdf_at_angle(&self, phi: f64) -> f64 {
        let i = ((phi / self.step) as usize).min(CDF_PANELS - 1);
        let right = (i + 1) as f64 * self.step;
        self.tail[i + 1] + self.panel_integral(phi, right)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.spec.a() {
            return 0.0;
        }
        if x >= self.spec.b() {
            return 1.0;
        }
        (self.cdf_at_angle(self.angle(x)) / self.total).clamp(0.0, 1.0)
    }

    /// Inverse CDF by safeguarded Newton iteration inside the bracketing
    /// panel.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(domain(format!("quantile level must lie in [0, 1], got {q}")));
        }
        if q == 0.0 {
            return Ok(self.spec.a());
        }
        if q == 1.0 {
            return Ok(self.spec.b());
        }
        let target = q * self.total;
        // tail is decreasing in the panel index.
        let i = self
            .tail
            .partition_point(|&t| t > target)
            .saturating_sub(1)
            .min(CDF_PANELS - 1);
        let (mut lo, mut hi) = (i as f64 * self.step, (i + 1) as f64 * self.step);
        let (t_lo, t_hi) = (self.tail[i], self.tail[i + 1]);
        let mut phi = if t_lo > t_hi {
            lo + (t_lo - target) / (t_lo - t_hi) * self.step
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let g = self.cdf_at_angle(phi) - target;
            if g.abs() <= 1e-15 * self.total {
                break;
            }
            if g > 0.0 {
                lo = phi;
            } else {
                hi = phi;
            }
            let slope = self.weight(phi);
            let newton = phi + g / slope;
            phi = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(self.c + self.h * phi.cos())
    }
}

/// CDF of a normalized spec with `a > 0`.
pub fn cdf(spec: &GpfpSpec, x: f64) -> Result<f64> {
    Ok(CdfTable::new(spec)?.cdf(x))
}

/// Quantile of a normalized spec with `a > 0`.
pub fn quantile(spec: &GpfpSpec, q: f64) -> Result<f64> {
    CdfTable::new(spec)?.quantile(q)
}
