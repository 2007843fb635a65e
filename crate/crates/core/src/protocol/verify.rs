//! Simulation against the closed forms on an `(r, q)` grid.

use super::{full_pipeline, oracle, OracleReport};
use crate::error::{invalid, Result};
use crate::states::NamedOutcome;

/// Quantities read off the simulator at one grid point. `None` marks values
/// that are undefined because the relevant branch is empty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulatedValues {
    pub fid_ad: Option<f64>,
    pub fid_wm: Option<f64>,
    pub g_eta: f64,
    pub p_wm: Option<f64>,
    pub p_total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleComparison {
    pub r: f64,
    pub q: f64,
    pub simulated: SimulatedValues,
    pub oracle: OracleReport,
    /// Largest absolute difference over the quantities defined at this point.
    pub max_abs_error: f64,
    /// How many of the five quantities were undefined and skipped.
    pub skipped: usize,
}

pub fn compare_with_oracle(r: f64, q: f64) -> Result<OracleComparison> {
    let rep = oracle(r, q)?;
    let run = full_pipeline(r, q)?;
    let eta = run
        .kept
        .iter()
        .find(|b| b.outcome.label == super::OutcomeLabel::Named(NamedOutcome::EtaPlus))
        .expect("eta+ is always kept");
    let simulated = SimulatedValues {
        fid_ad: eta.fidelity_before,
        fid_wm: eta.fidelity_after,
        g_eta: eta.swap_probability,
        p_wm: (eta.swap_probability > 0.0).then_some(eta.purification_probability),
        p_total: run.total_probability,
    };
    let pairs = [
        (simulated.fid_ad, rep.fid_ad),
        (simulated.fid_wm, rep.fid_wm),
        (Some(simulated.g_eta), rep.g_eta),
        (simulated.p_wm, rep.p_wm),
        (Some(simulated.p_total), rep.p_total_composed),
    ];
    let mut max_abs_error: f64 = 0.0;
    let mut skipped = 0;
    for (sim, exact) in pairs {
        match sim {
            Some(s) => max_abs_error = max_abs_error.max((s - exact).abs()),
            _ => skipped += 1,
        }
    }
    Ok(OracleComparison {
        r,
        q,
        simulated,
        oracle: rep,
        max_abs_error,
        skipped,
    })
}

/// `0, step, 2·step, …` up to and including 1. Points are rounded to 12
/// decimals so that `0.1·3` lands on `0.3`.
pub fn unit_grid(step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return invalid(format!("grid step {step} must lie in (0, 1]"));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    let mut points: Vec<f64> = (0..=count).map(|k| ((k as f64 * step) * 1e12).round() / 1e12).collect();
    if *points.last().expect("non-empty") < 1.0 {
        points.push(1.0);
    }
    Ok(points)
}

#[derive(Clone, Debug)]
pub struct GridVerification {
    pub rows: Vec<OracleComparison>,
    pub max_abs_error: f64,
    pub skipped: usize,
}

/// Compares simulation with the closed forms on the full `(r, q)` grid.
pub fn verify_grid(step: f64) -> Result<GridVerification> {
    let axis = unit_grid(step)?;
    let rows = axis
        .iter()
        .flat_map(|&r| axis.iter().map(move |&q| compare_with_oracle(r, q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridVerification {
        max_abs_error: rows.iter().map(|c| c.max_abs_error).fold(0.0, f64::max),
        skipped: rows.iter().map(|c| c.skipped).sum(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points() {
        assert_eq!(unit_grid(0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        let g = unit_grid(0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(unit_grid(0.3).unwrap(), vec![0.0, 0.3, 0.6, 0.9, 1.0]);
        assert!(unit_grid(0.0).is_err());
        assert!(unit_grid(1.5).is_err());
    }

    #[test]
    fn edges_are_skipped_not_failed() {
        let c = compare_with_oracle(1.0, 0.5).unwrap();
        assert_eq!(c.skipped, 3);
        assert!(c.max_abs_error < 1e-12);
        let c = compare_with_oracle(0.4, 1.0).unwrap();
        assert_eq!(c.skipped, 1);
        assert!(c.max_abs_error < 1e-12);
    }

    #[test]
    fn coarse_grid_matches() {
        let v = verify_grid(0.25).unwrap();
        assert_eq!(v.rows.len(), 25);
        assert!(v.max_abs_error < 1e-10, "{}", v.max_abs_error);
    }
}
