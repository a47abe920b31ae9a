//! Shared inputs for the criterion benchmarks.

use gpfp_core::dist::{make_fgig, make_fp, make_shifted_semicircle};
use gpfp_core::{GpfpSpec, PowerSpec};

pub fn fp2() -> GpfpSpec {
    make_fp(2.0).expect("fp(2) is valid")
}

/// Power laws exercised by the univalence benchmark.
pub fn power_laws() -> Vec<(&'static str, PowerSpec)> {
    vec![
        ("fp2_r1", PowerSpec::identity(fp2())),
        (
            "fgig_r2",
            PowerSpec::new(make_fgig(1.0, 4.0, 0.0).expect("valid fGIG"), 2.0).expect("r = 2"),
        ),
        (
            "semicircle_rm1",
            PowerSpec::new(make_shifted_semicircle(3.0).expect("u > 2"), -1.0).expect("r = -1"),
        ),
    ]
}
