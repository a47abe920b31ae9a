//! Analytic continuation of a power-law density into the lower sector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dist::{pow_neg, PowerSpec};
use crate::error::{domain, Result};
use crate::holomorphic::sector::Sector;

/// `(b - w)(w - a)` with `w = z^s`, for `z = rho e^(i phi)` and the effective
/// endpoints `a, b`.
pub(crate) fn radicand(law: &PowerSpec, rho: f64, phi: f64) -> Complex64 {
    let e = law.effective();
    let s = law.s();
    let w = Complex64::from_polar(rho.powf(s), s * phi);
    (e.b() - w) * (w - e.a())
}

/// `s norm root / z * sum_k alpha_k z^(-s l_k)` for `z = rho e^(i phi)` and a
/// given square root of the radicand.
pub(crate) fn density_from_root(law: &PowerSpec, rho: f64, phi: f64, root: Complex64) -> Complex64 {
    let e = law.effective();
    let s = law.s();
    let mut sum = Complex64::new(0.0, 0.0);
    for (al, l) in e.alpha().iter().zip(e.l()) {
        let q = 1.0 + s * l;
        sum += Complex64::from_polar(al * pow_neg(rho, q), -phi * q);
    }
    root * sum * (s * e.norm())
}

/// Continued density at `rho e^(i phi)` on the principal branch of the
/// square root, which is the correct one throughout the open sector.
pub fn density_at_polar(law: &PowerSpec, rho: f64, phi: f64) -> Complex64 {
    density_from_root(law, rho, phi, radicand(law, rho, phi).sqrt())
}

/// The continued density at `z`. On the positive real axis this is the
/// density itself inside `(A, B)` and the limit from below outside it.
pub fn continued_density(law: &PowerSpec, sector: &Sector, z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z == Complex64::new(0.0, 0.0) {
        return Err(domain("continued density needs a finite z != 0"));
    }
    if z.im == 0.0 && z.re > 0.0 {
        let (lo, hi) = law.support();
        return if z.re > lo && z.re < hi {
            Ok(Complex64::new(law.pdf(z.re), 0.0))
        } else if z.re == lo || z.re == hi {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            boundary_density_below(law, z.re)
        };
    }
    let phi = z.arg();
    if !(phi < 0.0 && phi >= -sector.theta) {
        return Err(domain(format!(
            "arg z = {phi} lies outside the sector [-{}, 0)",
            sector.theta
        )));
    }
    Ok(density_at_polar(law, z.norm(), phi))
}

/// `h(x - i0)` for `0 < x < A` or `x > B`. The result is purely imaginary by
/// construction: the radicand is negative there and its root is `-i sqrt(-P)`
/// left of the support and `+i sqrt(-P)` right of it.
pub fn boundary_density_below(law: &PowerSpec, x: f64) -> Result<Complex64> {
    let (lo, hi) = law.support();
    if !(x > 0.0 && (x < lo || x > hi)) {
        return Err(domain(format!("x = {x} must lie in (0, {lo}) or ({hi}, inf)")));
    }
    let e = law.effective();
    let s = law.s();
    let w = x.powf(s);
    let magnitude = (-(e.b() - w) * (w - e.a())).sqrt();
    let sign = if x < lo { -1.0 } else { 1.0 };
    let mut sum = 0.0;
    for (al, l) in e.alpha().iter().zip(e.l()) {
        sum += al * pow_neg(x, 1.0 + s * l);
    }
    Ok(Complex64::new(0.0, sign * magnitude * sum * s * e.norm()))
}

/// Follows `arg P` continuously along a path, so the square root stays on
/// one branch even where the principal argument would jump.
#[derive(Clone, Copy, Debug)]
pub struct BranchTracker {
    arg: f64,
}

impl BranchTracker {
    pub fn new(arg: f64) -> Self {
        Self { arg }
    }

    /// Starts inside the support, where the radicand is positive, and walks
    /// toward `x_target - i offset` along the line `Im z = -offset`.
    pub fn seeded(law: &PowerSpec, x_target: f64, offset: f64) -> Self {
        let (lo, hi) = law.support();
        let mid = 0.5 * (lo + hi);
        let mut tracker = Self::new(0.0);
        let mut gap = x_target - mid;
        let end = offset / 16.0;
        while gap.abs() > end {
            let z = Complex64::new(x_target - gap, -offset);
            tracker.radicand_root(law, z.norm(), z.arg());
            gap *= 0.5;
        }
        let z = Complex64::new(x_target, -offset);
        tracker.radicand_root(law, z.norm(), z.arg());
        tracker
    }

    pub fn arg(&self) -> f64 {
        self.arg
    }

    fn radicand_root(&mut self, law: &PowerSpec, rho: f64, phi: f64) -> Complex64 {
        let p = radicand(law, rho, phi);
        let principal = p.arg();
        let turns = ((self.arg - principal) / (2.0 * PI)).round();
        self.arg = principal + turns * 2.0 * PI;
        Complex64::from_polar(p.norm().sqrt(), 0.5 * self.arg)
    }

    /// Density at `rho e^(i phi)` on the tracked branch.
    pub fn density(&mut self, law: &PowerSpec, rho: f64, phi: f64) -> Complex64 {
        let root = self.radicand_root(law, rho, phi);
        density_from_root(law, rho, phi, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_fgig, make_fp};
    use crate::holomorphic::sector::choose_sector;

    #[test]
    fn real_axis_matches_pdf() {
        let law = PowerSpec::new(make_fgig(1.0, 4.0, 0.0).unwrap(), 2.0).unwrap();
        let sector = choose_sector(&law).unwrap();
        for &x in &[1.5, 4.0, 9.0, 15.0] {
            let v = continued_density(&law, &sector, Complex64::new(x, 0.0)).unwrap();
            assert_eq!(v, Complex64::new(law.pdf(x), 0.0));
            let near = density_at_polar(&law, x, -1e-12);
            assert!((near - v).norm() < 1e-9 * v.norm().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn boundary_values_are_limits_from_below() {
        let law = PowerSpec::identity(make_fp(2.0).unwrap());
        let (lo, hi) = law.support();
        for &x in &[0.3 * lo, 0.9 * lo, 1.1 * hi, 5.0 * hi] {
            let exact = boundary_density_below(&law, x).unwrap();
            assert_eq!(exact.re, 0.0);
            let z = Complex64::new(x, -1e-10);
            let limit = density_at_polar(&law, z.norm(), z.arg());
            assert!((limit - exact).norm() < 1e-7 * exact.norm(), "x = {x}");
        }
        assert!(boundary_density_below(&law, 1.0).is_err());
    }

    #[test]
    fn outside_sector_is_rejected() {
        let law = PowerSpec::new(make_fgig(1.0, 4.0, 0.0).unwrap(), 2.0).unwrap();
        let sector = choose_sector(&law).unwrap();
        assert!(continued_density(&law, &sector, Complex64::new(0.0, 0.0)).is_err());
        assert!(continued_density(&law, &sector, Complex64::new(1.0, 1.0)).is_err());
        let z = Complex64::from_polar(1.0, -sector.theta - 0.1);
        assert!(continued_density(&law, &sector, z).is_err());
    }

    #[test]
    fn tracked_branch_agrees_with_principal_inside_sector() {
        let law = PowerSpec::new(make_fgig(1.0, 4.0, 0.0).unwrap(), -1.0).unwrap();
        let (lo, _) = law.support();
        let mut tracker = BranchTracker::seeded(&law, lo, 1e-7);
        for k in 0..=200 {
            let phi = -PI * k as f64 / 200.0 * 0.999;
            let rho = 0.5 * lo;
            let a = tracker.density(&law, rho, phi);
            let b = density_at_polar(&law, rho, phi);
            assert!((a - b).norm() <= 1e-12 * b.norm(), "phi = {phi}");
        }
    }
}
