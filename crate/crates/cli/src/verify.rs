use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use wswap::protocol::{compare_with_oracle, unit_grid, OracleComparison};

use crate::table::{col, Column, Table};
use crate::{emit, usage, Status, VerifyArgs};

/// Largest simulation-vs-closed-form gap accepted.
pub const TOLERANCE: f64 = 1e-9;

const COLUMNS: [Column; 16] = [
    col("r", "amplitude damping decay rate"),
    col("q", "weak-measurement strength"),
    col("fid_ad_sim", "simulated eta+ fidelity after damping"),
    col("fid_ad_closed", "1/(1+r)"),
    col("fid_wm_sim", "simulated eta+ fidelity after purification"),
    col("fid_wm_closed", "1/(1+r(1-q))"),
    col("g_eta_sim", "simulated probability of eta+"),
    col("g_eta_closed", "(1-r^2)/4"),
    col("p_wm_sim", "simulated conditional purification success"),
    col("p_wm_closed", "(1-q)^2(1+r-qr)/(1+r)"),
    col("p_total_sim", "simulated joint success over both eta outcomes"),
    col("p_total_composed", "(1-q)^2(1-r)(1+r-qr)/2"),
    col("p_total_printed", "(1-q^2)(1-r)(1+r-qr)/2"),
    col("printed_minus_composed", "p_total_printed - p_total_composed"),
    col(
        "max_abs_error",
        "largest |simulated - closed form| over the defined values at this point",
    ),
    col("skipped", "values undefined at this point because the branch is empty"),
];

fn row(c: &OracleComparison) -> Vec<crate::table::Cell> {
    let (s, o) = (&c.simulated, &c.oracle);
    vec![
        c.r.into(),
        c.q.into(),
        s.fid_ad.into(),
        o.fid_ad.into(),
        s.fid_wm.into(),
        o.fid_wm.into(),
        s.g_eta.into(),
        o.g_eta.into(),
        s.p_wm.into(),
        o.p_wm.into(),
        s.p_total.into(),
        o.p_total_composed.into(),
        o.p_total_printed.into(),
        (o.p_total_printed - o.p_total_composed).into(),
        c.max_abs_error.into(),
        c.skipped.into(),
    ]
}

pub(crate) fn run(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<Status> {
    let step = args.grid_step;
    if !(step > 0.0 && step <= 0.5) {
        return usage(format!("--grid-step must lie in (0, 0.5], got {step}"));
    }
    let grid = unit_grid(step)?;
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&r| grid.iter().map(move |&q| (r, q))).collect();
    let rows = points
        .par_iter()
        .map(|&(r, q)| compare_with_oracle(r, q))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("wswap verify", &COLUMNS);
    table.meta("grid_step", step).meta("tolerance", TOLERANCE);
    let mut summary = String::new();
    writeln!(summary, "{} grid points, step {step}", rows.len())?;
    writeln!(summary, "\nr      q      p_total_composed  p_total_printed  difference")?;
    let mut max_err: f64 = 0.0;
    let mut skipped = 0;
    let mut worst_gap = (0.0, 0.0, 0.0);
    let mut offenders = Vec::new();
    for c in &rows {
        table.push(row(c));
        let (pc, pp) = (c.oracle.p_total_composed, c.oracle.p_total_printed);
        writeln!(summary, "{:<6} {:<6} {pc:<17.9} {pp:<16.9} {:.9}", c.r, c.q, pp - pc)?;
        if (pp - pc).abs() > worst_gap.2 {
            worst_gap = (c.r, c.q, (pp - pc).abs());
        }
        max_err = max_err.max(c.max_abs_error);
        skipped += c.skipped;
        if c.max_abs_error >= TOLERANCE {
            offenders.push(c);
        }
    }
    writeln!(
        summary,
        "\nlargest printed-vs-composed gap {:.9} at r={}, q={}",
        worst_gap.2, worst_gap.0, worst_gap.1
    )?;
    writeln!(
        summary,
        "max_abs_error {max_err:.3e} (tolerance {TOLERANCE:e}); {skipped} undefined values skipped"
    )?;
    let status = if offenders.is_empty() {
        writeln!(summary, "verify: pass")?;
        Status::Pass
    } else {
        for c in &offenders {
            writeln!(
                stderr,
                "tolerance breach at r={}, q={}: error {:e}",
                c.r, c.q, c.max_abs_error
            )?;
        }
        writeln!(summary, "verify: FAIL ({} points over tolerance)", offenders.len())?;
        Status::Fail
    };
    table.meta("max_abs_error", max_err);
    emit(&table, &summary, &args.output, stdout)?;
    Ok(status)
}
