//! Numerical univalence check: the image of the contour must wind exactly
//! once around every probe point in the annulus `eps < |w| < 1/eps` of the
//! lower half-plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::PowerSpec;
use crate::error::{domain, Error, Result};
use crate::holomorphic::cauchy::CauchyTransform;
use crate::holomorphic::continuation::{boundary_density_below, BranchTracker};
use crate::holomorphic::contour::{build_contour, Contour, ContourImage, Evaluator, Sample};
use crate::holomorphic::sector::{choose_sector, forced_sector, Sector, SectorRule};
use crate::holomorphic::winding::winding_number;

/// Grid sizes for the pointwise checks.
const BOUNDARY_POINTS: usize = 50;
const RAY_POINTS: usize = 100;
const RAY_SUBSTEPS: usize = 4;
const BRANCH_JUMP_RATIO: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UiOptions {
    pub epsilon: f64,
    /// Run outside the proven regime with a heuristic sector.
    pub force: bool,
}

impl Default for UiOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            force: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub a: f64,
    pub b: f64,
    pub alpha: Vec<f64>,
    pub l: Vec<f64>,
    pub norm: f64,
    pub r: f64,
}

impl From<&PowerSpec> for LawSummary {
    fn from(law: &PowerSpec) -> Self {
        let base = law.base();
        Self {
            a: base.a(),
            b: base.b(),
            alpha: base.alpha().to_vec(),
            l: base.l().to_vec(),
            norm: base.norm(),
            r: law.r(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub w: [f64; 2],
    pub winding: Option<i64>,
    pub clearance: Option<f64>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AssumptionCheck {
    fn at_most(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual <= threshold,
            residual,
            threshold,
            note: None,
        }
    }

    fn below(name: &str, residual: f64, threshold: f64) -> Self {
        Self {
            passed: residual < threshold,
            ..Self::at_most(name, residual, threshold)
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UiVerdict {
    /// Every evaluated probe winds once and every check passed. Evidence,
    /// not a proof.
    ConsistentWithUi,
    /// A probe with winding other than 1.
    ViolationWitness { w: [f64; 2], winding: i64 },
    /// Some probe or check could not be settled.
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UiReport {
    pub law: LawSummary,
    pub epsilon: f64,
    pub theta: f64,
    pub sector_rule: SectorRule,
    pub shift: u32,
    pub delta: f64,
    pub eta: f64,
    pub far_limit: f64,
    pub offset: f64,
    pub samples: usize,
    pub probes: Vec<ProbeResult>,
    pub assumptions: Vec<AssumptionCheck>,
    pub verdict: UiVerdict,
}

impl UiReport {
    pub fn is_consistent(&self) -> bool {
        self.verdict == UiVerdict::ConsistentWithUi
    }

    /// Windings of the probes that were evaluated.
    pub fn windings(&self) -> Vec<i64> {
        self.probes.iter().filter_map(|p| p.winding).collect()
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.assumptions.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `count` probes on a log-polar grid: ten angles `-pi (k + 1/2) / 10` per
/// radius, radii geometric between `2 eps` and `1 / (2 eps)`.
pub fn log_polar_probes(epsilon: f64, count: usize) -> Result<Vec<Complex64>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(domain(format!("epsilon = {epsilon} must lie in (0, 1/2)")));
    }
    if count == 0 {
        return Err(domain("probe count must be positive"));
    }
    const ANGLES: usize = 10;
    let rings = count.div_ceil(ANGLES);
    let (lo, hi) = (2.0 * epsilon, 0.5 / epsilon);
    let mut probes = Vec::with_capacity(rings * ANGLES);
    for i in 0..rings {
        let radius = if rings == 1 {
            (lo * hi).sqrt()
        } else {
            lo * (hi / lo).powf(i as f64 / (rings - 1) as f64)
        };
        for k in 0..ANGLES {
            let phi = -PI * (k as f64 + 0.5) / ANGLES as f64;
            probes.push(Complex64::from_polar(radius, phi));
        }
    }
    probes.truncate(count);
    Ok(probes)
}

/// Runs the check with default options.
pub fn ui_verify(law: &PowerSpec, epsilon: f64, probes: &[Complex64]) -> Result<UiReport> {
    let opts = UiOptions {
        epsilon,
        force: false,
    };
    ui_verify_full(law, &opts, probes).map(|(report, _)| report)
}

/// Runs the check and also returns the sampled contour image.
pub fn ui_verify_full(
    law: &PowerSpec,
    opts: &UiOptions,
    probes: &[Complex64],
) -> Result<(UiReport, ContourImage)> {
    let eps = opts.epsilon;
    for w in probes {
        if !(w.im < 0.0 && w.norm() > eps && w.norm() < 1.0 / eps) {
            return Err(domain(format!(
                "probe {w} is outside the annulus {eps} < |w| < {} of the lower half-plane",
                1.0 / eps
            )));
        }
    }
    let sector = match choose_sector(law) {
        Ok(s) => s,
        Err(Error::OutsideRegime(_)) if opts.force => forced_sector(law),
        Err(e) => return Err(e),
    };
    let transform = CauchyTransform::new(law);
    let contour = build_contour(law, &sector, &transform, eps)?;
    let image = ContourImage::new(law, &transform, contour, eps)?;
    let ev = Evaluator {
        law,
        transform: &transform,
        segments: &image.contour.segments,
    };

    let results: Vec<ProbeResult> = probes
        .par_iter()
        .map(|&w| probe(&ev, &image.samples, &sector, eps, w))
        .collect();

    let mut assumptions = vec![
        AssumptionCheck::at_most(
            "closure",
            image.contour.closure_gap(),
            1e-12 * image.contour.eta.max(1.0),
        ),
        branch_continuity(&image.samples),
        boundary_real_part(law, image.contour.eta)?,
        small_arc(&image.contour, &sector, eps),
        ray_sign(law, &sector, &image)?,
        far_arcs(&image.samples, &sector, eps),
    ];
    let evaluated: Vec<Complex64> = results
        .iter()
        .filter(|p| p.winding.is_some())
        .map(|p| Complex64::new(p.w[0], p.w[1]))
        .collect();
    assumptions.push(offset_stability(
        law,
        &transform,
        &image.contour,
        &sector,
        &evaluated,
    )?);

    let verdict = decide(&results, &assumptions);
    let report = UiReport {
        law: law.into(),
        epsilon: eps,
        theta: sector.theta,
        sector_rule: sector.rule,
        shift: sector.shift,
        delta: image.contour.delta,
        eta: image.contour.eta,
        far_limit: sector.far_limit,
        offset: image.contour.offset,
        samples: image.samples.len(),
        probes: results,
        assumptions,
        verdict,
    };
    Ok((report, image))
}

fn probe(ev: &Evaluator, base: &[Sample], sector: &Sector, eps: f64, w: Complex64) -> ProbeResult {
    let mut result = ProbeResult {
        w: [w.re, w.im],
        winding: None,
        clearance: None,
        samples: base.len(),
        note: None,
    };
    if sector.far_limit != 0.0 && (w - sector.far_limit).norm() <= eps {
        result.note = Some("excluded: within epsilon of the limit of G at infinity".into());
        return result;
    }
    let refined = ev.refine(base.to_vec(), |a, b| {
        (b.g - a.g).norm() > 0.25 * (a.g - w).norm().min((b.g - w).norm())
    });
    let samples = match refined {
        Ok(s) => s,
        Err(e) => {
            result.note = Some(format!("refinement failed: {e}"));
            return result;
        }
    };
    result.samples = samples.len();
    let values: Vec<Complex64> = samples.iter().map(|s| s.g).collect();
    match winding_number(&values, w) {
        Ok(wn) => {
            result.winding = Some(wn.winding);
            result.clearance = Some(wn.clearance);
        }
        Err(Error::ProbeTooClose { distance, .. }) => {
            result.clearance = Some(distance);
            result.note = Some(format!("excluded: contour image passes within {distance:e}"));
        }
        Err(e) => result.note = Some(format!("winding failed: {e}")),
    }
    result
}

fn decide(probes: &[ProbeResult], checks: &[AssumptionCheck]) -> UiVerdict {
    if let Some(p) = probes.iter().find(|p| p.winding.is_some_and(|k| k != 1)) {
        return UiVerdict::ViolationWitness {
            w: p.w,
            winding: p.winding.unwrap_or_default(),
        };
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return UiVerdict::Inconclusive {
            reason: format!("checks failed: {}", failed.join(", ")),
        };
    }
    let unsettled = probes
        .iter()
        .filter(|p| p.winding.is_none() && !is_excluded(p))
        .count();
    if unsettled > 0 {
        return UiVerdict::Inconclusive {
            reason: format!("{unsettled} probes could not be evaluated"),
        };
    }
    if probes.iter().all(|p| p.winding.is_none()) {
        return UiVerdict::Inconclusive {
            reason: "no probe was evaluated".into(),
        };
    }
    UiVerdict::ConsistentWithUi
}

fn is_excluded(p: &ProbeResult) -> bool {
    p.note.as_deref().is_some_and(|n| n.starts_with("excluded"))
}

/// Finite-difference slope of the continued density must not spike between
/// neighbours, which is what a branch jump looks like.
fn branch_continuity(samples: &[Sample]) -> AssumptionCheck {
    let slope = |a: &Sample, b: &Sample| (b.density - a.density).norm() / (b.z - a.z).norm();
    let mut worst: f64 = 0.0;
    for k in 1..samples.len().saturating_sub(2) {
        let (p, a, b, n) = (&samples[k - 1], &samples[k], &samples[k + 1], &samples[k + 2]);
        let same = [p, b, n].iter().all(|s| s.segment == a.segment);
        if !same || a.branch.is_none() {
            continue;
        }
        let jump = (b.density - a.density).norm();
        if jump <= 1e-12 * a.density.norm().max(b.density.norm()) {
            continue;
        }
        let local = slope(p, a).max(slope(b, n));
        if local > 0.0 {
            worst = worst.max(slope(a, b) / local);
        }
    }
    AssumptionCheck::at_most("branch-continuity", worst, BRANCH_JUMP_RATIO)
}

/// `Re h(x - i0)` on both sides of the support.
fn boundary_real_part(law: &PowerSpec, eta: f64) -> Result<AssumptionCheck> {
    let (lo, hi) = law.support();
    let mut worst: f64 = 0.0;
    for j in 0..BOUNDARY_POINTS {
        let t = (j as f64 + 0.5) / BOUNDARY_POINTS as f64;
        for x in [lo * t, hi + (eta - hi) * t] {
            worst = worst.max(boundary_density_below(law, x)?.re.abs());
        }
    }
    Ok(AssumptionCheck::at_most("boundary-real-part", worst, 1e-12))
}

fn small_arc(contour: &Contour, sector: &Sector, eps: f64) -> AssumptionCheck {
    let q = 1.0 + sector.zero_exponent;
    let margin = contour.delta.powf(q) / (PI * sector.zero_coeff * eps);
    AssumptionCheck::below("small-arc", contour.small_arc_ratio, 0.5).with_note(format!(
        "delta^(1+k) / (pi c eps) = {margin:.3e}; decay exponent {} strict: {}",
        sector.zero_exponent, sector.strict_decay
    ))
}

/// `Re h <= 0` along the edge ray of the sector.
fn ray_sign(law: &PowerSpec, sector: &Sector, image: &ContourImage) -> Result<AssumptionCheck> {
    let start = image
        .samples
        .iter()
        .find(|s| s.segment == 3)
        .and_then(|s| s.branch)
        .ok_or_else(|| domain("contour has no samples on the edge ray"))?;
    let (delta, eta) = (image.contour.delta, image.contour.eta);
    let mut tracker = BranchTracker::new(start);
    let steps = (RAY_POINTS - 1) * RAY_SUBSTEPS;
    let mut worst = f64::NEG_INFINITY;
    for j in 0..=steps {
        let u = delta * (eta / delta).powf(j as f64 / steps as f64);
        let h = tracker.density(law, u, -sector.theta);
        if j % RAY_SUBSTEPS == 0 {
            worst = worst.max(h.re);
        }
    }
    Ok(AssumptionCheck::at_most("ray-sign", worst, 1e-10))
}

fn far_arcs(samples: &[Sample], sector: &Sector, eps: f64) -> AssumptionCheck {
    let mut worst: f64 = 0.0;
    for s in samples {
        match s.segment {
            4 => worst = worst.max((s.g - sector.far_limit).norm()),
            7 => worst = worst.max(s.g.norm()),
            _ => {}
        }
    }
    AssumptionCheck::below("far-arc", worst, eps)
}

/// Change of `G` on the `+-i0` pieces when the offset is halved, relative to
/// the distance from `G` to each evaluated probe. Below 1/2 the two curves
/// are homotopic in the plane minus the probe.
fn offset_stability(
    law: &PowerSpec,
    transform: &CauchyTransform,
    contour: &Contour,
    sector: &Sector,
    probes: &[Complex64],
) -> Result<AssumptionCheck> {
    let (lo, hi) = law.support();
    let half = contour.offset * 0.5;
    let halved = Contour::assemble(lo, hi, sector.theta, contour.delta, contour.eta, half);
    let run = |segments, offset| -> Result<Vec<Sample>> {
        Evaluator {
            law,
            transform,
            segments,
        }
        .sample(
            contour.samples_per_segment,
            BranchTracker::seeded(law, lo, offset),
        )
    };
    let full = run(&contour.segments, contour.offset)?;
    let half = run(&halved, half)?;
    let moved: Vec<(Complex64, f64)> = full
        .iter()
        .zip(&half)
        .filter(|(s, _)| matches!(s.segment, 0 | 1 | 5 | 6))
        .map(|(a, b)| (a.g, (a.g - b.g).norm()))
        .collect();
    let largest = moved.iter().map(|&(_, d)| d).fold(0.0, f64::max);
    let worst = probes
        .par_iter()
        .map(|&w| moved.iter().map(|&(g, d)| d / (g - w).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    Ok(AssumptionCheck::below("offset-stability", worst, 0.5)
        .with_note(format!("largest change {largest:.3e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_grid_shape() {
        let p = log_polar_probes(1e-2, 100).unwrap();
        assert_eq!(p.len(), 100);
        for w in &p {
            assert!(w.im < 0.0);
            assert!(w.norm() >= 2e-2 * (1.0 - 1e-12) && w.norm() <= 50.0 * (1.0 + 1e-12));
        }
        assert!((p[0].norm() - 2e-2).abs() < 1e-15);
        assert!((p[99].norm() - 50.0).abs() < 1e-12);
        assert_eq!(log_polar_probes(1e-2, 7).unwrap().len(), 7);
        assert!(log_polar_probes(0.6, 10).is_err());
    }

    #[test]
    fn probes_outside_annulus_are_rejected() {
        let law = PowerSpec::identity(crate::dist::make_fp(2.0).unwrap());
        let bad = [Complex64::new(0.5, 0.5)];
        assert!(ui_verify(&law, 1e-2, &bad).is_err());
        let far = [Complex64::new(0.0, -200.0)];
        assert!(ui_verify(&law, 1e-2, &far).is_err());
    }
}
