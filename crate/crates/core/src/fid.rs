//! Hankel-determinant certificates against free infinite divisibility.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::GpfpSpec;
use crate::error::{domain, Error, Result};
use crate::nc_lattice::{moments_to_cumulants, CumulantSeq, Provenance};
use crate::quad::{moment_quadrature, AlignedSpec, QuadratureRule};
use crate::scalar::{ratio, ExactScalar, Scalar};

/// Polynomial with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(Vec<ExactScalar>);

impl Poly {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self(coeffs.iter().map(|&c| ExactScalar::from_i64(c)).collect()).trimmed()
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.0
    }

    fn trimmed(mut self) -> Self {
        while self.0.len() > 1 && self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        self.0
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + S::from_exact(c))
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let zero = ExactScalar::zero();
        Poly(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&zero) + other.0.get(i).unwrap_or(&zero))
                .collect(),
        )
        .trimmed()
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![ExactScalar::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }
}

/// Which two-parameter family a closed-form computation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// The inverse of the sigma measure (exponents 1, 2 on fp(2) endpoints).
    SigmaInverse,
    /// The eta measure (exponents 0, 2 on fp(2) endpoints).
    Eta,
}

impl Family {
    /// `kappa_2, kappa_3, kappa_4` as polynomials in `alpha_2`, with
    /// `alpha_1 = 1 - 2 alpha_2`.
    pub fn cumulant_polys(self) -> [Poly; 3] {
        match self {
            Family::SigmaInverse => {
                let k2 = Poly::from_ints(&[2, 2, -4]);
                let k3 = Poly::from_ints(&[2, -2, -12, 16]);
                let k4 = Poly::from_ints(&[-2, 4])
                    .mul(&Poly::from_ints(&[1, -3, -10, 20]))
                    .neg();
                [k2, k3, k4]
            }
            Family::Eta => [
                Poly::from_ints(&[2, 1, -9]),
                Poly::from_ints(&[2, 6, 9, -54]),
                Poly::from_ints(&[2, 10, 34, 90, -405]),
            ],
        }
    }

    /// `kappa_2 kappa_4 - kappa_3^2` as a polynomial in `alpha_2`.
    pub fn hankel_poly(self) -> Poly {
        let [k2, k3, k4] = self.cumulant_polys();
        k2.mul(&k4).add(&k3.mul(&k3).neg())
    }

    /// Exact form of the measure at `alpha_2`, `alpha_1 = 1 - 2 alpha_2`.
    pub fn aligned(self, alpha2: &ExactScalar) -> Result<AlignedSpec> {
        check_alpha2(alpha2)?;
        let alpha1 = ExactScalar::one() - ratio(2, 1) * alpha2;
        let terms = match self {
            Family::SigmaInverse => vec![(alpha2.clone(), -1), (alpha1, 0)],
            Family::Eta => vec![(alpha1, 0), (alpha2.clone(), 2)],
        };
        AlignedSpec::new(ratio(2, 1), terms)
    }
}

fn check_alpha2<S: Scalar>(alpha2: &S) -> Result<()> {
    let half = S::one() / S::from_i64(2);
    if *alpha2 > S::zero() && *alpha2 < half {
        Ok(())
    } else {
        Err(domain(format!("alpha_2 must lie in (0, 1/2), got {alpha2}")))
    }
}

fn closed_form<S: Scalar>(family: Family, alpha2: &S) -> Result<CumulantSeq<S>> {
    check_alpha2(alpha2)?;
    let values = family.cumulant_polys().iter().map(|p| p.eval(alpha2)).collect();
    CumulantSeq::new(2, values, Provenance::ClosedForm)
}

/// `(kappa_2, kappa_3, kappa_4)` of the inverse of `sigma_{1 - 2 alpha_2, alpha_2}`.
pub fn cumulants_sigma_inverse<S: Scalar>(alpha2: &S) -> Result<CumulantSeq<S>> {
    closed_form(Family::SigmaInverse, alpha2)
}

/// `(kappa_2, kappa_3, kappa_4)` of `eta_{1 - 2 alpha_2, alpha_2}`.
pub fn cumulants_eta<S: Scalar>(alpha2: &S) -> Result<CumulantSeq<S>> {
    closed_form(Family::Eta, alpha2)
}

/// `kappa_1..kappa_n` from exact moments.
pub fn cumulants_exact(spec: &AlignedSpec, n: usize) -> Result<CumulantSeq<ExactScalar>> {
    Ok(moments_to_cumulants(&spec.moments(n)?)?.with_provenance(Provenance::ExactMoments))
}

/// `kappa_1..kappa_n` from quadrature moments.
pub fn cumulants_by_quadrature(spec: &GpfpSpec, n: usize, rule: &QuadratureRule) -> Result<CumulantSeq<f64>> {
    let moments = (1..=n)
        .map(|k| Ok(moment_quadrature(spec, (k as f64).into(), rule)?.value.re))
        .collect::<Result<Vec<f64>>>()?;
    Ok(moments_to_cumulants(&moments)?.with_provenance(Provenance::Quadrature))
}

/// Determinant of the Hankel matrix `[kappa_{i+j+2}]` for `i, j < order`.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelWitness<S> {
    pub order: usize,
    pub matrix: Vec<Vec<S>>,
    pub det: S,
    /// `det < 0`, exactly for rationals and beyond `1e-12` of the entry scale
    /// for floats.
    pub negative: bool,
}

fn determinant<S: Scalar>(matrix: &[Vec<S>]) -> S {
    let n = matrix.len();
    let mut m: Vec<Vec<S>> = matrix.to_vec();
    let mut det = S::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs_val()
                    .partial_cmp(&m[j][col].abs_val())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if m[pivot][col].is_zero() {
            return S::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let factor = row[col].clone() / p.clone();
            if factor.is_zero() {
                continue;
            }
            for (dst, src) in row.iter_mut().zip(pivot_row).skip(col) {
                *dst = dst.clone() - src.clone() * factor.clone();
            }
        }
    }
    det
}

/// Hankel determinant of order `k`, which needs `kappa_2..kappa_{2k}`.
pub fn hankel_witness<S: Scalar>(kappa: &CumulantSeq<S>, order: usize) -> Result<HankelWitness<S>> {
    if order == 0 {
        return Err(domain("Hankel order must be at least 1"));
    }
    let get = |n: usize| {
        kappa.kappa(n).cloned().ok_or_else(|| {
            domain(format!(
                "order {order} needs kappa_2..kappa_{}, sequence holds kappa_{}..kappa_{}",
                2 * order,
                kappa.start(),
                kappa.end()
            ))
        })
    };
    let matrix = (0..order)
        .map(|i| (0..order).map(|j| get(i + j + 2)).collect::<Result<Vec<S>>>())
        .collect::<Result<Vec<Vec<S>>>>()?;
    let det = determinant(&matrix);
    let negative = if S::EXACT {
        det < S::zero()
    } else {
        let scale: f64 = matrix
            .iter()
            .map(|row| row.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max))
            .product();
        det.to_f64() < -1e-12 * scale
    };
    Ok(HankelWitness {
        order,
        matrix,
        det,
        negative,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FidVerdict<S> {
    /// A negative Hankel determinant: the law is not freely infinitely
    /// divisible.
    Fail(HankelWitness<S>),
    /// No negative determinant up to the checked order. This is not a proof
    /// of infinite divisibility.
    Inconclusive { checked: usize },
}

/// Checks Hankel orders `1..=depth`, stopping at the first negative one.
pub fn fid_necessary<S: Scalar>(kappa: &CumulantSeq<S>, depth: usize) -> Result<FidVerdict<S>> {
    if depth == 0 {
        return Err(domain("depth must be at least 1"));
    }
    for k in 1..=depth {
        let w = hankel_witness(kappa, k)?;
        if w.negative {
            return Ok(FidVerdict::Fail(w));
        }
    }
    Ok(FidVerdict::Inconclusive { checked: depth })
}

/// Serializable summary of one Hankel check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidReport {
    pub measure: String,
    pub alpha2: Option<f64>,
    pub order: usize,
    pub det: f64,
    /// Exact determinant as `p/q` when the exact path was used.
    pub det_exact: Option<String>,
    pub verdict: String,
}

impl FidReport {
    pub fn from_witness<S: Scalar>(measure: &str, alpha2: Option<f64>, w: &HankelWitness<S>) -> Self {
        Self {
            measure: measure.into(),
            alpha2,
            order: w.order,
            det: w.det.to_f64(),
            det_exact: S::EXACT.then(|| w.det.to_string()),
            verdict: if w.negative { "fail" } else { "inconclusive" }.into(),
        }
    }
}

/// Bracketed root of the eta Hankel determinant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub root: f64,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

/// Largest `alpha_2` below which the order-2 Hankel determinant of eta is
/// negative. Bisection in exact arithmetic after certifying the sign change
/// on `[0.1, 0.3]`.
pub fn eta_threshold() -> Result<Threshold> {
    let poly = Family::Eta.hankel_poly();
    let mut lo = ratio(1, 10);
    let mut hi = ratio(3, 10);
    let zero = ExactScalar::zero();
    if !(poly.eval(&lo) < zero && poly.eval(&hi) > zero) {
        return Err(Error::IllConditioned(
            "no sign change of the eta Hankel determinant on [0.1, 0.3]".into(),
        ));
    }
    let width = ratio(1, 10_000_000_000);
    let half = ratio(1, 2);
    while &hi - &lo > width {
        let mid = (&lo + &hi) * &half;
        if poly.eval(&mid) < zero {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (l, h) = (Scalar::to_f64(&lo), Scalar::to_f64(&hi));
    Ok(Threshold {
        root: 0.5 * (l + h),
        bracket: (l, h),
        tolerance: h - l,
    })
}

/// The same threshold, with every determinant computed from quadrature
/// moments of the float spec.
pub fn eta_threshold_quadrature(rule: &QuadratureRule) -> Result<Threshold> {
    let det = |alpha2: f64| -> Result<f64> {
        let spec = crate::dist::make_eta(1.0 - 2.0 * alpha2, alpha2)?;
        let kappa = cumulants_by_quadrature(&spec, 4, rule)?;
        Ok(hankel_witness(&kappa, 2)?.det)
    };
    let (mut lo, mut hi) = (0.1, 0.3);
    if !(det(lo)? < 0.0 && det(hi)? > 0.0) {
        return Err(Error::IllConditioned(
            "no sign change of the eta Hankel determinant on [0.1, 0.3]".into(),
        ));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if det(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        root: 0.5 * (lo + hi),
        bracket: (lo, hi),
        tolerance: hi - lo,
    })
}

/// Grid used by the figure sweeps: midpoints of 200 equal cells of
/// `(0, 1/2)`.
pub fn sweep_grid() -> Vec<f64> {
    (0..200).map(|j| (j as f64 + 0.5) / 400.0).collect()
}

/// `(alpha_2, kappa_2 kappa_4 - kappa_3^2)` over [`sweep_grid`].
pub fn hankel_sweep(family: Family) -> Vec<(f64, f64)> {
    let poly = family.hankel_poly();
    sweep_grid().into_iter().map(|a| (a, poly.eval(&a))).collect()
}
