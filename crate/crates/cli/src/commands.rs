use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use gpfp_core::dist::sample as draw;
use gpfp_core::fid::{
    cumulants_by_quadrature, cumulants_eta, cumulants_exact, cumulants_sigma_inverse, eta_threshold,
    eta_threshold_quadrature, fid_necessary, hankel_sweep, hankel_witness, Family, FidReport,
};
use gpfp_core::holomorphic::{log_polar_probes, ui_verify_full, UiOptions};
use gpfp_core::nc_lattice::moments_to_cumulants;
use gpfp_core::quad::{moment_quadrature, AlignedSpec};
use gpfp_core::scalar::rationalize;
use gpfp_core::{
    CumulantSeq, Error, ExactScalar, FidVerdict, GpfpSpec, PowerSpec, QuadratureRule, RuleKind, Scalar,
    UiVerdict,
};

use crate::config::{OutputFormat, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// A completed run whose verdict maps to a nonzero exit code. The
    /// report still goes to stdout.
    #[error("{reason}")]
    Verdict {
        output: String,
        code: u8,
        kind: &'static str,
        reason: String,
    },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Verdict { code, .. } => *code,
            CliError::Core(e) => match e {
                Error::Domain(_) | Error::Malformed(_) | Error::NotInFgigFamily => 2,
                Error::ToleranceNotMet { .. }
                | Error::IllConditioned(_)
                | Error::ProbeTooClose { .. }
                | Error::UnderResolved { .. }
                | Error::DecayNotCertified(_) => 3,
                Error::ExactUnavailable(_) | Error::OutsideRegime(_) => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Verdict { kind, .. } => kind,
            CliError::Core(e) => match e {
                Error::Domain(_) => "domain",
                Error::Malformed(_) => "malformed",
                Error::ToleranceNotMet { .. } => "tolerance_not_met",
                Error::NotInFgigFamily => "not_in_fgig_family",
                Error::IllConditioned(_) => "ill_conditioned",
                Error::ProbeTooClose { .. } => "probe_too_close",
                Error::UnderResolved { .. } => "under_resolved",
                Error::DecayNotCertified(_) => "decay_not_certified",
                Error::ExactUnavailable(_) => "exact_unavailable",
                Error::OutsideRegime(_) => "outside_regime",
            },
        }
    }
}

type CliResult = Result<String, CliError>;

/// `lo:hi:n` with `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("grid must look like lo:hi:n, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("grid needs finite lo <= hi, got {lo}:{hi}"));
        }
        Ok(Grid { lo, hi, n })
    }
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i == self.n - 1 {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }
}

fn load_spec(path: &Path) -> Result<GpfpSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(GpfpSpec::from_json_str(&text)?)
}

fn rule(cfg: &RunConfig) -> Result<QuadratureRule, CliError> {
    QuadratureRule::new(RuleKind::CosineSubstitution, cfg.quad_nodes, cfg.tol)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct PdfRow {
    x: f64,
    pdf: f64,
}

pub fn pdf(cfg: &RunConfig, spec: &Path, grid: &Grid) -> CliResult {
    let spec = load_spec(spec)?;
    let rows = grid
        .points()
        .into_iter()
        .map(|x| {
            Ok(PdfRow {
                x,
                pdf: gpfp_core::dist::gpfp_pdf(&spec, x)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(match cfg.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => csv("x,pdf", rows.iter().map(|r| format!("{},{}", r.x, r.pdf))),
        OutputFormat::Json => json(&rows),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSource {
    /// Exact when the spec allows it, quadrature otherwise.
    Auto,
    Exact,
    Quadrature,
}

impl MomentSource {
    pub fn from_flags(exact: bool, quad: bool) -> Self {
        match (exact, quad) {
            (true, _) => MomentSource::Exact,
            (_, true) => MomentSource::Quadrature,
            _ => MomentSource::Auto,
        }
    }
}

#[derive(Serialize)]
struct CumulantOutput {
    n: usize,
    method: &'static str,
    moments: Vec<f64>,
    cumulants: Vec<f64>,
    /// `p/q` strings, present on the exact path.
    moments_exact: Option<Vec<String>>,
    cumulants_exact: Option<Vec<String>>,
}

pub fn cumulants(cfg: &RunConfig, spec: &Path, n: usize, source: MomentSource) -> CliResult {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let spec = load_spec(spec)?;
    let aligned = match source {
        MomentSource::Quadrature => None,
        MomentSource::Auto => AlignedSpec::from_spec(&spec).ok(),
        MomentSource::Exact => Some(AlignedSpec::from_spec(&spec).map_err(|e| match e {
            Error::ExactUnavailable(_) => e,
            other => Error::ExactUnavailable(other.to_string()),
        })?),
    };
    let out = match aligned {
        Some(aligned) => {
            let m = aligned.moments(n)?;
            let k = moments_to_cumulants(&m)?;
            CumulantOutput {
                n,
                method: "exact",
                moments: m.iter().map(Scalar::to_f64).collect(),
                cumulants: k.values().iter().map(Scalar::to_f64).collect(),
                moments_exact: Some(m.iter().map(|v| v.to_string()).collect()),
                cumulants_exact: Some(k.values().iter().map(|v| v.to_string()).collect()),
            }
        }
        None => {
            let rule = rule(cfg)?;
            let m = (1..=n)
                .map(|j| {
                    Ok(moment_quadrature(&spec, Complex64::new(j as f64, 0.0), &rule)?
                        .value
                        .re)
                })
                .collect::<Result<Vec<f64>, Error>>()?;
            let k = moments_to_cumulants(&m)?;
            CumulantOutput {
                n,
                method: "quadrature",
                moments: m,
                cumulants: k.values().to_vec(),
                moments_exact: None,
                cumulants_exact: None,
            }
        }
    };
    Ok(match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json(&out),
        OutputFormat::Csv => csv(
            "n,moment,cumulant",
            (0..n).map(|j| format!("{},{},{}", j + 1, out.moments[j], out.cumulants[j])),
        ),
    })
}

pub enum HankelSource {
    Spec(PathBuf),
    Eta(String),
    SigmaInverse(String),
}

fn parse_alpha2(text: &str) -> Result<f64, CliError> {
    let a: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("alpha_2 must be a number, got {text:?}")))?;
    if !(a > 0.0 && a < 0.5) {
        return Err(Error::Domain(format!("alpha_2 must lie in (0, 1/2), got {a}")).into());
    }
    Ok(a)
}

/// Witness of the first negative order, or the top order if none is.
fn verdict_witness<S: Scalar>(
    measure: &str,
    alpha2: Option<f64>,
    kappa: &CumulantSeq<S>,
    order: usize,
) -> Result<FidReport, CliError> {
    let w = match fid_necessary(kappa, order)? {
        FidVerdict::Fail(w) => w,
        FidVerdict::Inconclusive { .. } => hankel_witness(kappa, order)?,
    };
    Ok(FidReport::from_witness(measure, alpha2, &w))
}

fn family_report(cfg: &RunConfig, family: Family, text: &str, order: usize) -> Result<FidReport, CliError> {
    let a = parse_alpha2(text)?;
    let name = match family {
        Family::SigmaInverse => "sigma-inverse",
        Family::Eta => "eta",
    };
    let closed = |a: &ExactScalar| match family {
        Family::SigmaInverse => cumulants_sigma_inverse(a),
        Family::Eta => cumulants_eta(a),
    };
    match rationalize(a, 100_000) {
        Some(q) if order <= 2 => verdict_witness(name, Some(a), &closed(&q)?, order),
        Some(q) => verdict_witness(
            name,
            Some(a),
            &cumulants_exact(&family.aligned(&q)?, 2 * order)?,
            order,
        ),
        None if order <= 2 => {
            let k = match family {
                Family::SigmaInverse => cumulants_sigma_inverse(&a)?,
                Family::Eta => cumulants_eta(&a)?,
            };
            verdict_witness(name, Some(a), &k, order)
        }
        None => {
            let spec = match family {
                Family::SigmaInverse => {
                    gpfp_core::dist::gpfp_inverse(&gpfp_core::dist::make_sigma(1.0 - 2.0 * a, a)?)?
                }
                Family::Eta => gpfp_core::dist::make_eta(1.0 - 2.0 * a, a)?,
            };
            let k = cumulants_by_quadrature(&spec, 2 * order, &rule(cfg)?)?;
            verdict_witness(name, Some(a), &k, order)
        }
    }
}

pub fn hankel(cfg: &RunConfig, source: &HankelSource, order: usize) -> CliResult {
    if order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let report = match source {
        HankelSource::Eta(a) => family_report(cfg, Family::Eta, a, order)?,
        HankelSource::SigmaInverse(a) => family_report(cfg, Family::SigmaInverse, a, order)?,
        HankelSource::Spec(path) => {
            let spec = load_spec(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "spec".into());
            match AlignedSpec::from_spec(&spec) {
                Ok(aligned) => verdict_witness(&name, None, &cumulants_exact(&aligned, 2 * order)?, order)?,
                Err(_) => {
                    let k = cumulants_by_quadrature(&spec, 2 * order, &rule(cfg)?)?;
                    verdict_witness(&name, None, &k, order)?
                }
            }
        }
    };
    Ok(match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json(&report),
        OutputFormat::Csv => csv(
            "measure,alpha2,order,det,verdict",
            [format!(
                "{},{},{},{},{}",
                report.measure,
                report.alpha2.map(|a| a.to_string()).unwrap_or_default(),
                report.order,
                report.det,
                report.verdict
            )],
        ),
    })
}

#[derive(Serialize)]
struct ThresholdOutput {
    method: &'static str,
    root: f64,
    bracket: (f64, f64),
    tolerance: f64,
}

pub fn threshold(cfg: &RunConfig, quad: bool) -> CliResult {
    let (method, t) = if quad {
        ("quadrature", eta_threshold_quadrature(&rule(cfg)?)?)
    } else {
        ("exact-polynomial", eta_threshold()?)
    };
    let out = ThresholdOutput {
        method,
        root: t.root,
        bracket: t.bracket,
        tolerance: t.tolerance,
    };
    Ok(match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json(&out),
        OutputFormat::Csv => csv(
            "method,root,lo,hi,tolerance",
            [format!(
                "{},{},{},{},{}",
                out.method, out.root, out.bracket.0, out.bracket.1, out.tolerance
            )],
        ),
    })
}

pub fn ui_verify(cfg: &RunConfig, spec: &Path, power: f64, trace: Option<&Path>, force: bool) -> CliResult {
    let law = PowerSpec::new(load_spec(spec)?, power)?;
    let probes = log_polar_probes(cfg.epsilon, cfg.probes)?;
    let opts = UiOptions {
        epsilon: cfg.epsilon,
        force,
    };
    let (report, image) = ui_verify_full(&law, &opts, &probes)?;
    if let Some(path) = trace {
        std::fs::write(path, image.trace_csv())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let output = match cfg.output.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        OutputFormat::Csv => csv(
            "w_re,w_im,winding,clearance,note",
            report.probes.iter().map(|p| {
                let mut row = format!("{},{},", p.w[0], p.w[1]);
                if let Some(k) = p.winding {
                    let _ = write!(row, "{k}");
                }
                row.push(',');
                if let Some(c) = p.clearance {
                    let _ = write!(row, "{c}");
                }
                row.push(',');
                row.push_str(&p.note.as_deref().unwrap_or("").replace(',', ";"));
                row
            }),
        ),
    };
    match &report.verdict {
        UiVerdict::ConsistentWithUi => Ok(output),
        UiVerdict::ViolationWitness { w, winding } => Err(CliError::Verdict {
            output,
            code: 5,
            kind: "violation_witness",
            reason: format!("winding {winding} at w = {} {:+}i", w[0], w[1]),
        }),
        UiVerdict::Inconclusive { reason } => Err(CliError::Verdict {
            output,
            code: 3,
            kind: "inconclusive",
            reason: reason.clone(),
        }),
    }
}

#[derive(Serialize)]
struct SweepRow {
    alpha2: f64,
    det: f64,
}

pub fn repro(cfg: &RunConfig, family: Family) -> CliResult {
    let rows: Vec<SweepRow> = hankel_sweep(family)
        .into_iter()
        .map(|(alpha2, det)| SweepRow { alpha2, det })
        .collect();
    Ok(match cfg.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => csv(
            "alpha2,det",
            rows.iter().map(|r| format!("{},{}", r.alpha2, r.det)),
        ),
        OutputFormat::Json => json(&rows),
    })
}

pub fn sample(cfg: &RunConfig, spec: &Path, count: usize) -> CliResult {
    let spec = load_spec(spec)?;
    let xs = draw(&spec, cfg.seed, count)?;
    Ok(match cfg.output.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => csv("x", xs.iter().map(|x| x.to_string())),
        OutputFormat::Json => json(&xs),
    })
}
