//! Cauchy transforms of power laws: the integral on both half-planes and the
//! continuation through the support into the lower sector.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dist::PowerSpec;
use crate::error::{domain, Error, Result};
use crate::holomorphic::continuation::density_at_polar;
use crate::holomorphic::sector::{choose_sector, Sector};
use crate::quad::{adaptive, MAX_NODES};

const START_NODES: usize = 256;

/// Quadrature node in the cosine variable: the density times `dx / dphi`,
/// and the distances of `y = x^|r|` from both ends of the support, computed
/// without cancellation so points close to an endpoint stay accurate.
#[derive(Clone, Copy, Debug)]
struct Node {
    weight: f64,
    from_lo: f64,
    from_hi: f64,
}

fn node(law: &PowerSpec, phi: f64) -> Node {
    let e = law.effective();
    let (a, b) = (e.a(), e.b());
    let h = 0.5 * (b - a);
    let (sh, ch) = (0.5 * phi).sin_cos();
    let (above_a, below_b) = (2.0 * h * ch * ch, 2.0 * h * sh * sh);
    let x = if above_a < below_b {
        a + above_a
    } else {
        b - below_b
    };
    let root = 2.0 * h * sh * ch;
    let p = law.r().abs();
    let (lo, hi) = law.support();
    let from_lo = if a > 0.0 {
        lo * (p * (above_a / a).ln_1p()).exp_m1()
    } else {
        x.powf(p)
    };
    let from_hi = hi * (p * (-below_b / b).ln_1p()).exp_m1();
    Node {
        weight: e.density_with_root(x, root) * root,
        from_lo,
        from_hi,
    }
}

/// `z - y` measured from whichever end of the support is closer to `z`.
#[derive(Clone, Copy)]
struct Anchor {
    offset: Complex64,
    at_lo: bool,
}

impl Anchor {
    fn new(law: &PowerSpec, z: Complex64) -> Self {
        let (lo, hi) = law.support();
        let (zl, zh) = (z - lo, z - hi);
        if zl.norm() <= zh.norm() {
            Self {
                offset: zl,
                at_lo: true,
            }
        } else {
            Self {
                offset: zh,
                at_lo: false,
            }
        }
    }

    fn term(&self, n: &Node) -> Complex64 {
        let d = if self.at_lo { n.from_lo } else { n.from_hi };
        n.weight / (self.offset - d)
    }
}

/// `G~(z) = int f(y) / (z - y) dy` for a power law, evaluated with the cosine
/// substitution in the effective variable. Node values are computed once at
/// the finest level and reused by every coarser level.
#[derive(Clone, Debug)]
pub struct CauchyTransform {
    law: PowerSpec,
    /// Nodes at `phi_j = j pi / MAX_NODES`, `j = 1..MAX_NODES - 1`.
    nodes: Vec<Node>,
    tol: f64,
}

impl CauchyTransform {
    pub fn new(law: &PowerSpec) -> Self {
        Self::with_tolerance(law, 1e-12)
    }

    pub fn with_tolerance(law: &PowerSpec, tol: f64) -> Self {
        let nodes = (1..MAX_NODES)
            .map(|j| node(law, j as f64 * PI / MAX_NODES as f64))
            .collect();
        Self {
            law: law.clone(),
            nodes,
            tol,
        }
    }

    pub fn law(&self) -> &PowerSpec {
        &self.law
    }

    fn level_sum(&self, anchor: &Anchor, stride: usize, offset: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut j = offset;
        while j < MAX_NODES {
            acc += anchor.term(&self.nodes[j - 1]);
            j += stride;
        }
        acc
    }

    /// `G~(z)` for any `z` off the support.
    pub fn tilde(&self, z: Complex64) -> Result<Complex64> {
        let (lo, hi) = self.law.support();
        if z.im == 0.0 && z.re >= lo && z.re <= hi {
            return Err(domain(format!("z = {z} lies on the support")));
        }
        let anchor = Anchor::new(&self.law, z);
        let mut n = START_NODES;
        let mut stride = MAX_NODES / n;
        let mut sum = self.level_sum(&anchor, stride, stride);
        let mut est = sum * (PI / n as f64);
        while n < MAX_NODES {
            sum += self.level_sum(&anchor, stride, stride / 2);
            stride /= 2;
            n *= 2;
            let next = sum * (PI / n as f64);
            if (next - est).norm() <= self.tol * next.norm().max(1.0) {
                return Ok(next);
            }
            est = next;
        }
        self.tilde_adaptive(&anchor)
    }

    fn tilde_adaptive(&self, anchor: &Anchor) -> Result<Complex64> {
        let f = |phi: f64| anchor.term(&node(&self.law, phi));
        Ok(adaptive(&f, 0.0, PI, self.tol)?.value)
    }

    /// `G(z)` for `Im z >= 0`, at least `1e-8` away from the support.
    pub fn upper(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(domain("upper-half-plane transform needs Im z >= 0"));
        }
        let (lo, hi) = self.law.support();
        let dist = (z - Complex64::new(z.re.clamp(lo, hi), 0.0)).norm();
        if dist < 1e-8 {
            return Err(Error::IllConditioned(format!(
                "z = {z} is within {dist:e} of the support"
            )));
        }
        self.tilde(z)
    }

    /// `G(z) = G~(z) - 2 pi i h(z)` inside the sector.
    pub fn continued(&self, sector: &Sector, z: Complex64) -> Result<Complex64> {
        let phi = z.arg();
        if !(z.norm() > 0.0 && phi < 0.0 && phi > -sector.theta) {
            return Err(domain(format!(
                "arg z = {phi} lies outside the open sector (-{}, 0)",
                sector.theta
            )));
        }
        self.continued_polar(z.norm(), phi, None)
    }

    /// Continued transform at `rho e^(i phi)`, with an explicit density value
    /// when the caller tracks the branch itself.
    pub(crate) fn continued_polar(
        &self,
        rho: f64,
        phi: f64,
        density: Option<Complex64>,
    ) -> Result<Complex64> {
        let z = Complex64::from_polar(rho, phi);
        let h = density.unwrap_or_else(|| density_at_polar(&self.law, rho, phi));
        Ok(self.tilde(z)? - Complex64::new(0.0, 2.0 * PI) * h)
    }
}

/// `G(z)` of a power law for `Im z >= 0`.
pub fn cauchy_upper(law: &PowerSpec, z: Complex64) -> Result<Complex64> {
    CauchyTransform::new(law).upper(z)
}

/// Continued `G(z)` inside the sector chosen for the law.
pub fn cauchy_continued(law: &PowerSpec, z: Complex64) -> Result<Complex64> {
    let sector = choose_sector(law)?;
    CauchyTransform::new(law).continued(&sector, z)
}
