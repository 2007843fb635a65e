//! Closed-form fidelities, probabilities and states for the damped and
//! purified swap. These never touch the simulator and serve as the reference
//! it is checked against.

use num_complex::Complex64;

use crate::channels::{DampingParams, WeakMeasurementParams};
use crate::error::Result;
use crate::qlinalg::DensityMatrix;
use crate::states::w_state;

/// Analytic values at one `(r, q)` point. Each entry is the bare formula,
/// also where the simulated branch it describes has zero weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleReport {
    pub r: f64,
    pub q: f64,
    /// `1/(1+r)`: fidelity of a kept branch after damping.
    pub fid_ad: f64,
    /// `1/(1 + r(1−q))`: fidelity after purification.
    pub fid_wm: f64,
    /// `(1−r²)/4`: probability of each individual `eta` outcome.
    pub g_eta: f64,
    /// `(1−q)²(1 + r − qr)/(1+r)`: weak-measurement success probability on
    /// one kept branch.
    pub p_wm: f64,
    /// `2·g_eta·p_wm = (1−q)²(1−r)(1 + r − qr)/2`: swap and purification
    /// both succeed, summed over the two kept outcomes.
    pub p_total_composed: f64,
    /// `(1−q²)(1−r)(1 + r − qr)/2`, the alternative closed form quoted for
    /// the same quantity. It differs from the composed product whenever
    /// `0 < q < 1` and `r < 1`, and is kept only for comparison.
    pub p_total_printed: f64,
}

pub fn oracle(r: f64, q: f64) -> Result<OracleReport> {
    DampingParams::new(r)?;
    WeakMeasurementParams::new(q)?;
    let keep = 1.0 - q;
    let g_eta = (1.0 - r * r) / 4.0;
    let p_wm = keep * keep * (1.0 + r * keep) / (1.0 + r);
    Ok(OracleReport {
        r,
        q,
        fid_ad: 1.0 / (1.0 + r),
        fid_wm: 1.0 / (1.0 + r * keep),
        g_eta,
        p_wm,
        p_total_composed: keep * keep * (1.0 - r) * (1.0 + r * keep) / 2.0,
        p_total_printed: (1.0 - q * q) * (1.0 - r) * (1.0 + r * keep) / 2.0,
    })
}

fn mix_with_vacuum(vacuum_weight: f64) -> Result<DensityMatrix> {
    let w = DensityMatrix::from_pure(&w_state());
    let mut m = w.matrix().clone();
    m[(0, 0)] += Complex64::new(vacuum_weight, 0.0);
    let norm = 1.0 / (1.0 + vacuum_weight);
    DensityMatrix::new(3, m.scale(Complex64::new(norm, 0.0)))
}

/// Corrected state of a kept branch after damping:
/// `(|W⟩⟨W| + r|000⟩⟨000|)/(1+r)`.
pub fn damped_shared_state(r: f64) -> Result<DensityMatrix> {
    DampingParams::new(r)?;
    mix_with_vacuum(r)
}

/// Kept branch after damping and successful purification:
/// `(|W⟩⟨W| + r(1−q)|000⟩⟨000|)/(1 + r(1−q))`.
pub fn purified_shared_state(r: f64, q: f64) -> Result<DensityMatrix> {
    DampingParams::new(r)?;
    WeakMeasurementParams::new(q)?;
    mix_with_vacuum(r * (1.0 - q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_point() {
        let rep = oracle(0.5, 0.5).unwrap();
        assert_abs_diff_eq!(rep.p_total_composed, 0.078125, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.p_total_printed, 0.234375, epsilon = 1e-15);
        assert_abs_diff_eq!(rep.p_total_printed - rep.p_total_composed, 0.15625, epsilon = 1e-15);
    }

    #[test]
    fn composed_is_product() {
        for &(r, q) in &[(0.1, 0.2), (0.7, 0.9), (0.0, 0.5), (0.3, 0.0)] {
            let rep = oracle(r, q).unwrap();
            assert_abs_diff_eq!(rep.p_total_composed, 2.0 * rep.g_eta * rep.p_wm, epsilon = 1e-15);
        }
    }

    #[test]
    fn forms_agree_only_at_edges() {
        for &(r, q) in &[(0.2, 0.0), (0.4, 1.0), (1.0, 0.3)] {
            let rep = oracle(r, q).unwrap();
            assert_abs_diff_eq!(rep.p_total_composed, rep.p_total_printed, epsilon = 1e-15);
        }
    }

    #[test]
    fn noiseless_corner() {
        let rep = oracle(0.0, 0.0).unwrap();
        assert_eq!((rep.fid_ad, rep.fid_wm, rep.g_eta, rep.p_wm), (1.0, 1.0, 0.25, 1.0));
        assert_eq!(rep.p_total_composed, 0.5);
    }

    #[test]
    fn range_checks() {
        assert!(oracle(1.2, 0.0).is_err());
        assert!(oracle(0.2, -0.1).is_err());
    }

    #[test]
    fn purified_populations() {
        let rho = purified_shared_state(0.3, 0.64).unwrap();
        let p = rho.probabilities();
        let denom = 1.0 + 0.3 * 0.36;
        assert_abs_diff_eq!(p[0b000], 0.108 / denom, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0b001], 0.5 / denom, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0b010], 0.25 / denom, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0b100], 0.25 / denom, epsilon = 1e-15);
    }

    #[test]
    fn formula_state_at_full_decay() {
        let rho = damped_shared_state(1.0).unwrap();
        let fid = crate::qlinalg::pure_fidelity(&w_state(), &rho).unwrap();
        assert_abs_diff_eq!(fid, 0.5, epsilon = 1e-15);
    }
}
