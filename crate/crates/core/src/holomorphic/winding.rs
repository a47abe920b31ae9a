//! Winding numbers of sampled closed curves.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest argument change accepted between consecutive samples.
pub const MAX_ARG_STEP: f64 = PI / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub winding: i64,
    /// Accumulated argument divided by `2 pi`, before rounding.
    pub turns: f64,
    /// Smallest distance from the samples to the probe.
    pub clearance: f64,
}

/// Winding number about `w` of the closed polygon through `values` (the last
/// sample connects back to the first).
pub fn winding_number(values: &[Complex64], w: Complex64) -> Result<Winding> {
    if values.len() < 3 {
        return Err(Error::UnderResolved {
            index: 0,
            jump: f64::INFINITY,
        });
    }
    let clearance = values
        .iter()
        .map(|v| (v - w).norm())
        .fold(f64::INFINITY, f64::min);
    if clearance.is_nan() || clearance <= 1e-12 * w.norm().max(1.0) {
        return Err(Error::ProbeTooClose {
            probe: format!("{w}"),
            distance: clearance,
        });
    }
    let mut total = 0.0;
    for i in 0..values.len() {
        let a = values[i] - w;
        let b = values[(i + 1) % values.len()] - w;
        let step = (b / a).arg();
        if step.abs() > MAX_ARG_STEP {
            return Err(Error::UnderResolved { index: i, jump: step });
        }
        total += step;
    }
    let turns = total / (2.0 * PI);
    let winding = turns.round();
    if (turns - winding).abs() > 1e-6 {
        return Err(Error::UnderResolved {
            index: values.len(),
            jump: turns - winding,
        });
    }
    Ok(Winding {
        winding: winding as i64,
        turns,
        clearance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(center: Complex64, radius: f64, n: usize, times: i64) -> Vec<Complex64> {
        (0..n)
            .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * times as f64 * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn unit_circle() {
        let c = circle(Complex64::new(0.0, 0.0), 1.0, 64, 1);
        assert_eq!(winding_number(&c, Complex64::new(0.0, 0.0)).unwrap().winding, 1);
        assert_eq!(winding_number(&c, Complex64::new(2.0, 0.0)).unwrap().winding, 0);
        let rev: Vec<_> = c.iter().rev().copied().collect();
        assert_eq!(
            winding_number(&rev, Complex64::new(0.1, 0.2)).unwrap().winding,
            -1
        );
    }

    #[test]
    fn double_loop() {
        let c = circle(Complex64::new(1.0, -1.0), 0.5, 200, 2);
        assert_eq!(winding_number(&c, Complex64::new(1.0, -1.0)).unwrap().winding, 2);
    }

    #[test]
    fn errors() {
        let c = circle(Complex64::new(0.0, 0.0), 1.0, 64, 1);
        assert!(matches!(
            winding_number(&c, c[3]),
            Err(Error::ProbeTooClose { .. })
        ));
        let coarse = circle(Complex64::new(0.0, 0.0), 1.0, 3, 1);
        assert!(matches!(
            winding_number(&coarse, Complex64::new(0.0, 0.0)),
            Err(Error::UnderResolved { .. })
        ));
    }
}
