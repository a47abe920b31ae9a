//! Generalized power distributions with a free Poisson term: densities,
//! moments, free cumulants, Hankel certificates and numerical univalence
//! checks for the Cauchy transform of their powers.

pub mod dist;
pub mod error;
pub mod fid;
pub mod holomorphic;
pub mod nc_lattice;
pub mod quad;
pub mod scalar;

pub use dist::{GpfpSpec, PowerSpec};
pub use error::{Error, Result};
pub use fid::{FidReport, FidVerdict, HankelWitness, Threshold};
pub use holomorphic::{UiReport, UiVerdict};
pub use nc_lattice::{CumulantSeq, NCPartition, Provenance};
pub use quad::{AlignedSpec, MomentValue, QuadratureRule, RuleKind};
pub use scalar::{ExactScalar, Scalar};
