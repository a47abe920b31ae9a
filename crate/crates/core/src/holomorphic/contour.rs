//! The closed contour around the region where the Cauchy transform is
//! inverted, and its sampled image under the (continued) transform.
//!
//! Eight pieces, positively oriented:
//! upper side of `(-eta, A)`, lower side of `(delta, A)` back to `delta`, the
//! small arc down to the ray at `-theta`, the ray out to `eta`, the large arc
//! back to the real axis, the lower side of `(B, eta)`, the upper side of
//! `(B, eta)` and the upper half circle of radius `eta`. Pieces on the lower
//! side live on the continued sheet; the rest use the plain transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::PowerSpec;
use crate::error::{domain, Error, Result};
use crate::holomorphic::cauchy::CauchyTransform;
use crate::holomorphic::continuation::{density_at_polar, radicand, BranchTracker};
use crate::holomorphic::sector::Sector;

/// Samples per segment before refinement.
pub const BASE_SAMPLES: usize = 128;
/// Total sample budget for one contour image.
pub const MAX_SAMPLES: usize = 400_000;
/// Offset of the `+-i0` pieces relative to the smaller of the support width
/// and its distance from 0.
pub const RELATIVE_OFFSET: f64 = 1e-7;

const MAX_HALVINGS: usize = 60;
const MAX_DOUBLINGS: usize = 40;
const SMALL_ARC_MARGIN: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sheet {
    Upper,
    Continued,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    /// `x + i im` with `x` running from `from` to `to`; samples cluster at the
    /// end given by `cluster_at_end`.
    Line {
        from: f64,
        to: f64,
        im: f64,
        cluster_at_end: bool,
    },
    /// Circle arc with the angle linear in the parameter.
    Arc { radius: f64, from: f64, to: f64 },
    /// Ray at a fixed angle, radius geometric in the parameter.
    Ray { angle: f64, from: f64, to: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub shape: Shape,
    pub sheet: Sheet,
}

impl Segment {
    /// Point at parameter `tau` in `[0, 1]` as `(rho, phi)`.
    pub fn polar(&self, tau: f64) -> (f64, f64) {
        match self.shape {
            Shape::Line {
                from,
                to,
                im,
                cluster_at_end,
            } => {
                let x = line_x(from, to, cluster_at_end, tau);
                (x.hypot(im), im.atan2(x))
            }
            Shape::Arc { radius, from, to } => (radius, from + (to - from) * tau),
            Shape::Ray { angle, from, to } => (from * (to / from).powf(tau), angle),
        }
    }

    pub fn point(&self, tau: f64) -> Complex64 {
        let (rho, phi) = self.polar(tau);
        match self.shape {
            // Keep the offset exact rather than going through polar form.
            Shape::Line {
                from,
                to,
                im,
                cluster_at_end,
            } => Complex64::new(line_x(from, to, cluster_at_end, tau), im),
            _ => Complex64::from_polar(rho, phi),
        }
    }
}

fn line_x(from: f64, to: f64, cluster_at_end: bool, tau: f64) -> f64 {
    let t = if cluster_at_end {
        1.0 - (1.0 - tau) * (1.0 - tau)
    } else {
        tau * tau
    };
    from + (to - from) * t
}

/// Geometry of the contour. Sampling and evaluation live in [`ContourImage`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
    pub delta: f64,
    pub eta: f64,
    pub offset: f64,
    pub samples_per_segment: usize,
    /// `max |G + 2 pi c z^-(1+k)| / (pi c delta^-(1+k))` on the small arc.
    pub small_arc_ratio: f64,
    /// Largest miss of `|G - L|` on the large lower arc and `|G|` on the
    /// upper half circle, after the radius search.
    pub far_residual: f64,
}

impl Contour {
    pub(crate) fn assemble(lo: f64, hi: f64, theta: f64, delta: f64, eta: f64, offset: f64) -> Vec<Segment> {
        let up = |shape| Segment {
            shape,
            sheet: Sheet::Upper,
        };
        let cont = |shape| Segment {
            shape,
            sheet: Sheet::Continued,
        };
        let small_start = (-offset).atan2(delta);
        let large_end = (-offset).atan2(eta);
        let top = offset.atan2(eta);
        vec![
            up(Shape::Line {
                from: -eta,
                to: lo,
                im: offset,
                cluster_at_end: true,
            }),
            cont(Shape::Line {
                from: lo,
                to: delta,
                im: -offset,
                cluster_at_end: false,
            }),
            cont(Shape::Arc {
                radius: delta.hypot(offset),
                from: small_start,
                to: -theta,
            }),
            cont(Shape::Ray {
                angle: -theta,
                from: delta.hypot(offset),
                to: eta.hypot(offset),
            }),
            cont(Shape::Arc {
                radius: eta.hypot(offset),
                from: -theta,
                to: large_end,
            }),
            cont(Shape::Line {
                from: eta,
                to: hi,
                im: -offset,
                cluster_at_end: true,
            }),
            up(Shape::Line {
                from: hi,
                to: eta,
                im: offset,
                cluster_at_end: false,
            }),
            up(Shape::Arc {
                radius: eta.hypot(offset),
                from: top,
                to: PI - top,
            }),
        ]
    }

    /// Largest gap between the end of one segment and the start of the next,
    /// not counting the deliberate `2 i offset` steps at `A` and `B`.
    pub fn closure_gap(&self) -> f64 {
        let n = self.segments.len();
        (0..n)
            .map(|k| {
                let end = self.segments[k].point(1.0);
                let start = self.segments[(k + 1) % n].point(0.0);
                let mut gap = end - start;
                if self.segments[k].sheet != self.segments[(k + 1) % n].sheet
                    && matches!(self.segments[k].shape, Shape::Line { .. })
                    && matches!(self.segments[(k + 1) % n].shape, Shape::Line { .. })
                {
                    gap.im = gap.im.abs() - 2.0 * self.offset;
                }
                gap.norm()
            })
            .fold(0.0, f64::max)
    }
}

/// One evaluated point of the contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub segment: usize,
    pub tau: f64,
    pub z: Complex64,
    pub g: Complex64,
    /// Continued density, zero on the upper sheet.
    pub density: Complex64,
    /// Tracked argument of the radicand on the continued sheet.
    pub branch: Option<f64>,
}

/// Evaluates the transform on contour pieces.
pub(crate) struct Evaluator<'a> {
    pub law: &'a PowerSpec,
    pub transform: &'a CauchyTransform,
    pub segments: &'a [Segment],
}

/// Where to insert a point: after sample `at`, on `segment` at `tau`,
/// tracking the branch from `branch`.
#[derive(Clone, Copy)]
struct Insert {
    at: usize,
    segment: usize,
    tau: f64,
    branch: Option<f64>,
}

struct Located {
    segment: usize,
    tau: f64,
    z: Complex64,
    density: Complex64,
    branch: Option<f64>,
}

impl Evaluator<'_> {
    fn locate(&self, segment: usize, tau: f64, tracker: Option<&mut BranchTracker>) -> Located {
        let seg = &self.segments[segment];
        let z = seg.point(tau);
        match (seg.sheet, tracker) {
            (Sheet::Continued, Some(t)) => {
                let (rho, phi) = seg.polar(tau);
                let density = t.density(self.law, rho, phi);
                Located {
                    segment,
                    tau,
                    z,
                    density,
                    branch: Some(t.arg()),
                }
            }
            (Sheet::Continued, None) => {
                let (rho, phi) = seg.polar(tau);
                let arg = radicand(self.law, rho, phi).arg();
                Located {
                    segment,
                    tau,
                    z,
                    density: density_at_polar(self.law, rho, phi),
                    branch: Some(arg),
                }
            }
            (Sheet::Upper, _) => Located {
                segment,
                tau,
                z,
                density: Complex64::new(0.0, 0.0),
                branch: None,
            },
        }
    }

    fn finish(&self, p: Located) -> Result<Sample> {
        let tilde = self.transform.tilde(p.z)?;
        Ok(Sample {
            segment: p.segment,
            tau: p.tau,
            z: p.z,
            g: tilde - Complex64::new(0.0, 2.0 * PI) * p.density,
            density: p.density,
            branch: p.branch,
        })
    }

    fn finish_all(&self, located: Vec<Located>) -> Result<Vec<Sample>> {
        located.into_par_iter().map(|p| self.finish(p)).collect()
    }

    /// Samples the whole contour, tracking the branch along the continued
    /// pieces starting from `seed`.
    pub fn sample(&self, per_segment: usize, seed: BranchTracker) -> Result<Vec<Sample>> {
        let mut tracker = seed;
        let mut located = Vec::with_capacity(per_segment * self.segments.len());
        for segment in 0..self.segments.len() {
            for j in 0..per_segment {
                let tau = j as f64 / per_segment as f64;
                located.push(self.locate(segment, tau, Some(&mut tracker)));
            }
        }
        self.finish_all(located)
    }

    /// Samples one piece on its own, at interior points, using the principal
    /// branch on the continued sheet.
    pub fn sample_interior(&self, segment: usize, count: usize) -> Result<Vec<Sample>> {
        let located = (0..count)
            .map(|j| self.locate(segment, (j as f64 + 0.5) / count as f64, None))
            .collect();
        self.finish_all(located)
    }

    fn midpoint(&self, samples: &[Sample], k: usize) -> Option<Insert> {
        let left = &samples[k];
        let next = (k + 1) % samples.len();
        let right_tau = if next != 0 && samples[next].segment == left.segment {
            samples[next].tau
        } else {
            1.0
        };
        if right_tau - left.tau < 1e-13 {
            return None;
        }
        Some(Insert {
            at: k,
            segment: left.segment,
            tau: 0.5 * (left.tau + right_tau),
            branch: left.branch,
        })
    }

    /// Inserts midpoints wherever `split(left, right)` asks for one, until no
    /// step is flagged or the sample budget runs out.
    pub fn refine<F>(&self, mut samples: Vec<Sample>, split: F) -> Result<Vec<Sample>>
    where
        F: Fn(&Sample, &Sample) -> bool + Sync,
    {
        loop {
            let n = samples.len();
            let wanted: Vec<Insert> = (0..n)
                .into_par_iter()
                .filter(|&k| split(&samples[k], &samples[(k + 1) % n]))
                .filter_map(|k| self.midpoint(&samples, k))
                .collect();
            if wanted.is_empty() {
                return Ok(samples);
            }
            if n + wanted.len() > MAX_SAMPLES {
                let k = wanted[0].at;
                return Err(Error::UnderResolved {
                    index: k,
                    jump: (samples[(k + 1) % n].g - samples[k].g).norm(),
                });
            }
            let located: Vec<Located> = wanted
                .par_iter()
                .map(|ins| {
                    let mut tracker = ins.branch.map(BranchTracker::new);
                    self.locate(ins.segment, ins.tau, tracker.as_mut())
                })
                .collect();
            let fresh = self.finish_all(located)?;
            let mut merged = Vec::with_capacity(n + fresh.len());
            let mut inserts = wanted.iter().map(|ins| ins.at).zip(fresh).peekable();
            for (k, s) in samples.into_iter().enumerate() {
                merged.push(s);
                if let Some((_, mid)) = inserts.next_if(|(at, _)| *at == k) {
                    merged.push(mid);
                }
            }
            samples = merged;
        }
    }
}

/// `-2 pi c z^-(1+k)`, the leading behaviour of the continued transform at 0.
pub(crate) fn zero_asymptote(sector: &Sector, z: Complex64) -> Complex64 {
    let q = 1.0 + sector.zero_exponent;
    -2.0 * PI * sector.zero_coeff * Complex64::from_polar(z.norm().powf(-q), -q * z.arg())
}

fn small_arc_ratio(ev: &Evaluator, sector: &Sector, delta: f64) -> Result<f64> {
    let bound = PI * sector.zero_coeff * delta.powf(-(1.0 + sector.zero_exponent));
    let samples = ev.sample_interior(2, BASE_SAMPLES)?;
    Ok(samples
        .iter()
        .map(|s| (s.g - zero_asymptote(sector, s.z)).norm() / bound)
        .fold(0.0, f64::max))
}

fn far_residual(ev: &Evaluator, sector: &Sector) -> Result<f64> {
    let lower = ev.sample_interior(4, BASE_SAMPLES)?;
    let upper = ev.sample_interior(7, BASE_SAMPLES)?;
    let lower_miss = lower
        .iter()
        .map(|s| (s.g - sector.far_limit).norm())
        .fold(0.0, f64::max);
    let upper_miss = upper.iter().map(|s| s.g.norm()).fold(0.0, f64::max);
    Ok(lower_miss.max(upper_miss))
}

/// Chooses the small and large radii and lays out the eight pieces.
pub fn build_contour(
    law: &PowerSpec,
    sector: &Sector,
    transform: &CauchyTransform,
    epsilon: f64,
) -> Result<Contour> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let (lo, hi) = law.support();
    if lo.is_nan() || lo <= 0.0 {
        return Err(domain("the contour needs a support bounded away from 0"));
    }
    let offset = RELATIVE_OFFSET * (hi - lo).min(lo);
    let q = 1.0 + sector.zero_exponent;
    let mut delta = (0.5 * (PI * sector.zero_coeff * epsilon).powf(1.0 / q)).min(0.5 * lo);
    let mut eta = 4.0 * hi;

    let mut segments = Contour::assemble(lo, hi, sector.theta, delta, eta, offset);
    let mut ratio = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        let ev = Evaluator {
            law,
            transform,
            segments: &segments,
        };
        ratio = small_arc_ratio(&ev, sector, delta)?;
        if ratio < SMALL_ARC_MARGIN {
            break;
        }
        delta *= 0.5;
        segments = Contour::assemble(lo, hi, sector.theta, delta, eta, offset);
    }

    let mut far = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        let ev = Evaluator {
            law,
            transform,
            segments: &segments,
        };
        far = far_residual(&ev, sector)?;
        if far < epsilon {
            break;
        }
        eta *= 2.0;
        segments = Contour::assemble(lo, hi, sector.theta, delta, eta, offset);
    }
    if far.is_nan() || far >= epsilon {
        return Err(Error::DecayNotCertified(format!(
            "transform still {far:e} away from its limit at radius {eta:e}"
        )));
    }

    Ok(Contour {
        segments,
        delta,
        eta,
        offset,
        samples_per_segment: BASE_SAMPLES,
        small_arc_ratio: ratio,
        far_residual: far,
    })
}

/// The contour with its sampled image, refined so consecutive values never
/// move by more than a tenth of their size (or of `epsilon`, near 0).
#[derive(Clone, Debug)]
pub struct ContourImage {
    pub contour: Contour,
    pub samples: Vec<Sample>,
}

impl ContourImage {
    pub fn new(law: &PowerSpec, transform: &CauchyTransform, contour: Contour, epsilon: f64) -> Result<Self> {
        let (lo, _) = law.support();
        let ev = Evaluator {
            law,
            transform,
            segments: &contour.segments,
        };
        let seed = BranchTracker::seeded(law, lo, contour.offset);
        let samples = ev.sample(contour.samples_per_segment, seed)?;
        let samples = ev.refine(samples, |a, b| {
            (b.g - a.g).norm() > 0.1 * a.g.norm().min(b.g.norm()).max(epsilon)
        })?;
        Ok(Self { contour, samples })
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s.g).collect()
    }

    /// Rows `(z_re, z_im, G_re, G_im)`.
    pub fn trace_rows(&self) -> Vec<[f64; 4]> {
        self.samples
            .iter()
            .map(|s| [s.z.re, s.z.im, s.g.re, s.g.im])
            .collect()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("z_re,z_im,G_re,G_im\n");
        for [a, b, c, d] in self.trace_rows() {
            out.push_str(&format!("{a:e},{b:e},{c:e},{d:e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_fp;
    use crate::holomorphic::sector::choose_sector;

    #[test]
    fn fp2_contour_radii() {
        let law = PowerSpec::identity(make_fp(2.0).unwrap());
        let sector = choose_sector(&law).unwrap();
        let transform = CauchyTransform::new(&law);
        let c = build_contour(&law, &sector, &transform, 1e-2).unwrap();
        let q = 1.0 + sector.zero_exponent;
        assert!(c.delta.powf(q) / (PI * sector.zero_coeff * 1e-2) < 1.0);
        assert!(c.small_arc_ratio < SMALL_ARC_MARGIN);
        assert!(c.far_residual < 1e-2);
        assert!(c.closure_gap() <= 1e-12, "gap {}", c.closure_gap());
        assert_eq!(c.segments.len(), 8);
    }

    #[test]
    fn zero_support_is_rejected() {
        let spec = crate::dist::GpfpSpec::new(0.0, 1.0, vec![1.0], vec![0.25], 1.0).unwrap();
        let law = PowerSpec::identity(spec);
        let sector = crate::holomorphic::sector::forced_sector(&law);
        let transform = CauchyTransform::new(&law);
        assert!(build_contour(&law, &sector, &transform, 1e-2).is_err());
    }
}
