use std::io::Write;

use rayon::prelude::*;
use wswap::channels::GateNoiseParams;
use wswap::circuit::{gate_noise_fidelity, sample_shots, swap_circuit_with, SwapCircuitConfig, SHOT_RNG};
use wswap::protocol::{full_pipeline, oracle, unit_grid};

use crate::table::{col, Cell, Column, Table};
use crate::{render, unit_value, usage, write_file, Format, Mode, Status, SweepArgs};

const PURIFY_COLUMNS: [Column; 12] = [
    col("r", "amplitude damping decay rate on each transmitted qubit"),
    col("q", "weak-measurement strength (0 = no purification)"),
    col(
        "fidelity_no_purification",
        "simulated fidelity of the eta+ branch before purification; closed form 1/(1+r)",
    ),
    col(
        "fidelity_purified",
        "simulated fidelity of the kept eta branches after purification; closed form 1/(1+r(1-q))",
    ),
    col(
        "g_eta",
        "simulated probability of outcome eta+ alone; closed form (1-r^2)/4",
    ),
    col(
        "g_eta_both",
        "simulated probability of eta+ or eta-; closed form (1-r^2)/2",
    ),
    col(
        "p_wm",
        "simulated conditional success of the three weak measurements; closed form (1-q)^2(1+r-qr)/(1+r)",
    ),
    col(
        "p_total_per_outcome",
        "simulated joint success through eta+ alone: g_eta * p_wm",
    ),
    col("p_total", "simulated joint success summed over eta+ and eta-"),
    col(
        "p_total_composed",
        "closed form 2 * g_eta * p_wm = (1-q)^2(1-r)(1+r-qr)/2",
    ),
    col(
        "p_total_printed",
        "alternative closed form (1-q^2)(1-r)(1+r-qr)/2, kept for comparison with p_total",
    ),
    col(
        "sampled_p_total",
        "fraction of shots ending in eta+/eta- with every ancilla at 0 (empty without --shots)",
    ),
];

const GATE_COLUMNS: [Column; 6] = [
    col(
        "y2",
        "probability that a CNOT acts ideally (otherwise its qubits are depolarized)",
    ),
    col("eta", "probability that a readout reports the true bit"),
    col(
        "fidelity",
        "fidelity of the corrected shared state, averaged over records with a named outcome",
    ),
    col("kept_probability", "probability that Charlie reports a named outcome"),
    col(
        "cnot_count",
        "noisy CNOTs in the circuit (W states initialized, basis change decomposed)",
    ),
    col(
        "sampled_kept",
        "fraction of shots reporting a named outcome (empty without --shots)",
    ),
];

const GATE_DEFAULT: [f64; 6] = [1.0, 0.98, 0.96, 0.94, 0.92, 0.9];

fn axis(name: &str, given: &[f64], step: Option<f64>, default: &[f64]) -> anyhow::Result<Vec<f64>> {
    if !given.is_empty() {
        return given.iter().map(|&x| unit_value(name, x)).collect();
    }
    match step {
        Some(s) if s > 0.0 && s <= 1.0 => Ok(unit_grid(s)?),
        Some(s) => usage(format!("--grid-step must lie in (0, 1], got {s}")),
        None => Ok(default.to_vec()),
    }
}

fn forbid(mode: &str, flags: &[(&str, &[f64])]) -> anyhow::Result<()> {
    match flags.iter().find(|(_, v)| !v.is_empty()) {
        Some((name, _)) => usage(format!("--{name} does not apply to --mode {mode}")),
        None => Ok(()),
    }
}

fn purify_row(r: f64, q: f64, purify: bool, shots: usize, seed: u64) -> anyhow::Result<Vec<Cell>> {
    let run = full_pipeline(r, q)?;
    let rep = oracle(r, q)?;
    let eta = &run.kept[0];
    let both: f64 = run.kept.iter().map(|b| b.swap_probability).sum();
    let sampled = if shots > 0 {
        let cfg = SwapCircuitConfig {
            damping: Some(r),
            purification: purify.then_some(q),
            ..SwapCircuitConfig::default()
        };
        let res = sample_shots(&swap_circuit_with(&cfg)?, shots, seed)?;
        let hits: usize = res
            .counts
            .iter()
            .filter(|(b, _)| b.starts_with("00") && (!purify || &b[3..6] == "000"))
            .map(|(_, n)| n)
            .sum();
        Some(hits as f64 / shots as f64)
    } else {
        None
    };
    Ok(vec![
        r.into(),
        q.into(),
        eta.fidelity_before.into(),
        run.fidelity.into(),
        eta.swap_probability.into(),
        both.into(),
        (eta.swap_probability > 0.0)
            .then_some(eta.purification_probability)
            .into(),
        eta.joint_probability().into(),
        run.total_probability.into(),
        rep.p_total_composed.into(),
        rep.p_total_printed.into(),
        sampled.into(),
    ])
}

fn gate_row(y2: f64, eta: f64, shots: usize, seed: u64) -> anyhow::Result<Vec<Cell>> {
    let noise = GateNoiseParams::new(y2, eta)?;
    let rep = gate_noise_fidelity(noise)?;
    let sampled = if shots > 0 {
        let circuit = swap_circuit_with(&SwapCircuitConfig::gate_noise(noise))?;
        let res = sample_shots(&circuit, shots, seed)?;
        let hits: usize = res
            .counts
            .iter()
            .filter(|(b, _)| b.starts_with('0'))
            .map(|(_, n)| n)
            .sum();
        Some(hits as f64 / shots as f64)
    } else {
        None
    };
    Ok(vec![
        y2.into(),
        eta.into(),
        rep.fidelity.into(),
        rep.kept_probability.into(),
        rep.cnot_count.into(),
        sampled.into(),
    ])
}

pub(crate) fn run(args: &SweepArgs, stdout: &mut dyn Write) -> anyhow::Result<Status> {
    let (shots, seed) = (args.shots.shots, args.shots.seed);
    let step = args.grid_step;
    let fine = unit_grid(0.05)?;
    // row i is sampled with seed + i
    let row_seed = |i: usize| seed.wrapping_add(i as u64);
    let (mut table, rows) = match args.mode {
        Mode::Damping | Mode::Purify => {
            let purify = args.mode == Mode::Purify;
            let name = if purify { "purify" } else { "damping" };
            forbid(name, &[("y2", &args.y2), ("eta", &args.eta)])?;
            let rs = axis("r", &args.r, step, &fine)?;
            let qs = if purify {
                axis("q", &args.q, step, &fine)?
            } else {
                forbid(name, &[("q", &args.q)])?;
                vec![0.0]
            };
            let points: Vec<(f64, f64)> = rs.iter().flat_map(|&r| qs.iter().map(move |&q| (r, q))).collect();
            let rows = points
                .par_iter()
                .enumerate()
                .map(|(i, &(r, q))| purify_row(r, q, purify, shots, row_seed(i)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (Table::new(format!("wswap sweep --mode {name}"), &PURIFY_COLUMNS), rows)
        }
        Mode::GateNoise => {
            forbid("gate-noise", &[("r", &args.r), ("q", &args.q)])?;
            let ys = axis("y2", &args.y2, step, &GATE_DEFAULT)?;
            let es = axis("eta", &args.eta, step, &GATE_DEFAULT)?;
            let points: Vec<(f64, f64)> = ys.iter().flat_map(|&y| es.iter().map(move |&e| (y, e))).collect();
            let rows = points
                .par_iter()
                .enumerate()
                .map(|(i, &(y, e))| gate_row(y, e, shots, row_seed(i)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (Table::new("wswap sweep --mode gate-noise", &GATE_COLUMNS), rows)
        }
    };
    for row in rows {
        table.push(row);
    }
    if shots > 0 {
        table.meta("shots", shots).meta("seed", seed).meta("rng", SHOT_RNG);
        table.meta("row_seed", "seed + row index");
    }
    let text = render(&table, args.output.format.unwrap_or(Format::Csv));
    match &args.output.out {
        Some(path) => write_file(path, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(Status::Pass)
}
