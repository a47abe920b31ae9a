//! Choice of the opening angle of the sector the density is continued into.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::PowerSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorRule {
    /// Exponents of the effective spec fit in `[m, m + 1]` for an integer
    /// `m >= 0`, giving `theta = pi / (s m + 1)`.
    IntegerShift,
    /// Negative power of a spec with exponents in `[0, 1]`: `theta = pi`.
    InversePower,
    /// Exponents fit in a unit window but not one with an integer left end;
    /// the shift is rounded down and the sector conditions are only checked
    /// numerically.
    RoundedShift,
    /// Outside the proven regime, chosen on request.
    Forced,
}

/// Sector `{arg z in (-theta, 0)}` together with the local behaviour of the
/// continued density at 0 and at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub theta: f64,
    pub shift: u32,
    pub rule: SectorRule,
    /// `h(z) ~ -i zero_coeff / z^(1 + zero_exponent)` as `z -> 0`.
    pub zero_coeff: f64,
    pub zero_exponent: f64,
    /// `zero_exponent < (2 pi - theta) / theta` holds strictly.
    pub strict_decay: bool,
    /// `h(z) = O(|z|^-far_exponent)` at infinity.
    pub far_exponent: f64,
    /// Limit of the continued Cauchy transform at infinity inside the
    /// sector: 0 unless the density tends to a constant there.
    pub far_limit: f64,
}

impl Sector {
    fn build(law: &PowerSpec, shift: u32, theta: f64, rule: SectorRule) -> Self {
        let e = law.effective();
        let s = law.s();
        let l_first = e.l()[0];
        let l_last = *e.l().last().expect("non-empty");
        let alpha_last = *e.alpha().last().expect("non-empty");
        let zero_exponent = s * l_last;
        let far_exponent = 1.0 + s * (l_first - 1.0);
        let far_limit = if far_exponent.abs() < 1e-12 {
            2.0 * PI * e.norm() * s * e.alpha()[0]
        } else {
            0.0
        };
        Self {
            theta,
            shift,
            rule,
            zero_coeff: s * e.norm() * alpha_last * (e.a() * e.b()).sqrt(),
            zero_exponent,
            strict_decay: zero_exponent < decay_bound(theta),
            far_exponent,
            far_limit,
        }
    }
}

fn decay_bound(theta: f64) -> f64 {
    (2.0 * PI - theta) / theta
}

fn shifted_theta(s: f64, m: u32) -> f64 {
    PI / (s * m as f64 + 1.0)
}

/// Sector for a law inside the proven regime.
pub fn choose_sector(law: &PowerSpec) -> Result<Sector> {
    let base_l = law.base().l();
    if law.r() < 0.0 && base_l.iter().all(|&l| (0.0..=1.0).contains(&l)) {
        return Ok(Sector::build(law, 0, PI, SectorRule::InversePower));
    }
    let e = law.effective();
    let s = law.s();
    let l_first = e.l()[0];
    let l_last = *e.l().last().expect("non-empty");
    if l_first < 0.0 {
        return Err(Error::OutsideRegime(format!(
            "smallest exponent {l_first} of the effective spec is negative"
        )));
    }
    if l_last - l_first > 1.0 {
        return Err(Error::OutsideRegime(format!(
            "exponents of the effective spec span {} > 1",
            l_last - l_first
        )));
    }
    let lo = (l_last - 1.0).ceil().max(0.0) as u32;
    let hi = l_first.floor() as u32;
    let candidates: Vec<u32> = (lo..=hi).collect();
    let pick = candidates
        .iter()
        .copied()
        .find(|&m| s * l_last < decay_bound(shifted_theta(s, m)))
        .or_else(|| {
            candidates
                .iter()
                .copied()
                .find(|&m| s * l_last <= decay_bound(shifted_theta(s, m)))
        });
    match pick {
        Some(m) => Ok(Sector::build(
            law,
            m,
            shifted_theta(s, m),
            SectorRule::IntegerShift,
        )),
        None if candidates.is_empty() => {
            let m = (l_last - 1.0).max(0.0).floor() as u32;
            let theta = shifted_theta(s, m);
            if s * l_last > decay_bound(theta) {
                return Err(Error::OutsideRegime(
                    "decay exponent at 0 too large for the sector".into(),
                ));
            }
            Ok(Sector::build(law, m, theta, SectorRule::RoundedShift))
        }
        None => Err(Error::OutsideRegime(
            "decay exponent at 0 too large for every admissible sector".into(),
        )),
    }
}

/// Sector used when the regime check is overridden.
pub fn forced_sector(law: &PowerSpec) -> Sector {
    let l_last = *law.effective().l().last().expect("non-empty");
    let m = (l_last - 1.0).max(0.0).floor() as u32;
    Sector::build(law, m, shifted_theta(law.s(), m), SectorRule::Forced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{make_fgig, make_fp, make_shifted_semicircle, GpfpSpec};

    #[test]
    fn free_poisson_uses_half_plane() {
        let s = choose_sector(&PowerSpec::identity(make_fp(2.0).unwrap())).unwrap();
        assert_eq!(s.theta, PI);
        assert_eq!(s.rule, SectorRule::IntegerShift);
        assert!((s.far_limit - 1.0).abs() < 1e-15);
        assert!((s.zero_coeff - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn inverse_power_gets_pi() {
        let fgig = make_fgig(1.0, 4.0, 0.0).unwrap();
        let s = choose_sector(&PowerSpec::new(fgig, -1.0).unwrap()).unwrap();
        assert_eq!(s.rule, SectorRule::InversePower);
        assert_eq!(s.theta, PI);
        // The inverse has alpha_1 = 8/(2 pi) with l_1 = 0, so h -> i 8 / (2 pi).
        assert!((s.far_limit - 8.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_negative_power_shifts() {
        let semi = make_shifted_semicircle(3.0).unwrap();
        let s = choose_sector(&PowerSpec::new(semi.clone(), -2.0).unwrap()).unwrap();
        assert_eq!(s.shift, 1);
        assert!((s.theta - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(s.strict_decay);
        assert!(choose_sector(&PowerSpec::identity(semi)).is_err());
    }

    #[test]
    fn wide_exponents_are_rejected() {
        let spec = GpfpSpec::new(1.0, 2.0, vec![1.0, 1.0], vec![0.0, 2.0], 1.0).unwrap();
        assert!(matches!(
            choose_sector(&PowerSpec::identity(spec.clone())),
            Err(Error::OutsideRegime(_))
        ));
        assert_eq!(forced_sector(&PowerSpec::identity(spec)).rule, SectorRule::Forced);
    }

    #[test]
    fn fractional_window_rounds_down() {
        let spec = GpfpSpec::new(1.0, 2.0, vec![1.0, 1.0], vec![0.5, 1.3], 1.0).unwrap();
        let s = choose_sector(&PowerSpec::new(spec, 2.0).unwrap()).unwrap();
        assert_eq!(s.rule, SectorRule::RoundedShift);
        assert_eq!(s.shift, 0);
    }
}
