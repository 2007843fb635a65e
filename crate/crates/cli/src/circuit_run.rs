use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;

use anyhow::Context;
use wswap::channels::GateNoiseParams;
use wswap::circuit::{
    parse_circuit, run_density, sample_shots, swap_branches, swap_circuit_with, write_circuit, Circuit,
    SwapCircuitConfig, SHOT_RNG,
};
use wswap::qlinalg::pure_fidelity;
use wswap::states::w_state;

use crate::table::{col, Cell, Table};
use crate::{emit, unit_value, write_file, CircuitRunArgs, Status};

type Counts = BTreeMap<String, usize>;

fn noise_from(args: &CircuitRunArgs) -> anyhow::Result<Option<GateNoiseParams>> {
    if args.y2.is_none() && args.eta.is_none() {
        return Ok(None);
    }
    let y2 = unit_value("y2", args.y2.unwrap_or(1.0))?;
    let eta = unit_value("eta", args.eta.unwrap_or(1.0))?;
    Ok(Some(GateNoiseParams::new(y2, eta)?))
}

fn counts_for(circuit: &Circuit, args: &CircuitRunArgs, table: &mut Table) -> anyhow::Result<Option<Counts>> {
    if args.shots.shots == 0 {
        return Ok(None);
    }
    let res = sample_shots(circuit, args.shots.shots, args.shots.seed)?;
    table
        .meta("shots", res.shots)
        .meta("seed", res.seed)
        .meta("rng", SHOT_RNG);
    Ok(Some(res.counts))
}

fn count_cell(counts: &Option<Counts>, bits: &str) -> Cell {
    match counts {
        Some(c) => Cell::Int(*c.get(bits).unwrap_or(&0) as u64),
        None => Cell::Real(None),
    }
}

pub(crate) fn run(args: &CircuitRunArgs, stdout: &mut dyn Write) -> anyhow::Result<Status> {
    let noise = noise_from(args)?;
    match &args.circuit {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let circuit = parse_circuit(&text).with_context(|| format!("parsing {}", path.display()))?;
            run_file(&circuit, noise, args, stdout)
        }
        None => run_swap(noise, args, stdout),
    }
}

fn describe(c: &Circuit, summary: &mut String) -> anyhow::Result<()> {
    writeln!(
        summary,
        "{} qubits, {} classical bits, {} ops, {} CNOTs",
        c.num_qubits(),
        c.num_classical(),
        c.ops().len(),
        c.cnot_count()
    )?;
    Ok(())
}

fn run_file(
    circuit: &Circuit,
    noise: Option<GateNoiseParams>,
    args: &CircuitRunArgs,
    stdout: &mut dyn Write,
) -> anyhow::Result<Status> {
    let mut circuit = circuit.clone();
    if noise.is_some() {
        circuit.set_noise(noise);
    }
    if let Some(path) = &args.dump_circuit {
        write_file(path, &write_circuit(&circuit))?;
    }
    let mut table = Table::new(
        "wswap circuit-run",
        &[
            col("bits", "classical record, bit 0 first"),
            col("probability", "exact probability of the record"),
            col("count", "sampled shots with this record (empty without --shots)"),
        ],
    );
    let counts = counts_for(&circuit, args, &mut table)?;
    let mut summary = String::new();
    describe(&circuit, &mut summary)?;
    for b in run_density(&circuit, None)? {
        let bits = b.bits.to_string();
        let p = b.branch.probability();
        writeln!(summary, "{:<10} {p:.6}", if bits.is_empty() { "-" } else { &bits })?;
        table.push(vec![bits.clone().into(), p.into(), count_cell(&counts, &bits)]);
    }
    emit(&table, &summary, &args.output, stdout)?;
    Ok(Status::Pass)
}

fn run_swap(noise: Option<GateNoiseParams>, args: &CircuitRunArgs, stdout: &mut dyn Write) -> anyhow::Result<Status> {
    let mut cfg = match noise {
        Some(n) => SwapCircuitConfig::gate_noise(n),
        None => SwapCircuitConfig::default(),
    };
    cfg.damping = args.r.map(|r| unit_value("r", r)).transpose()?;
    cfg.purification = args.q.map(|q| unit_value("q", q)).transpose()?;
    cfg.final_readout = args.final_readout;
    let circuit = swap_circuit_with(&cfg)?;
    if let Some(path) = &args.dump_circuit {
        write_file(path, &write_circuit(&circuit))?;
    }
    let mut table = Table::new(
        "wswap circuit-run",
        &[
            col("bits", "classical record, bit 0 first (bits 0-2 are Charlie's outcome)"),
            col("outcome", "Charlie's reported outcome"),
            col("ancillas_ok", "every weak-measurement ancilla read 0"),
            col("kept", "record passes post-selection"),
            col("probability", "exact probability of the record"),
            col(
                "fidelity",
                "<W|rho|W> of qubits 0, 1, 5 (empty if measured or undefined)",
            ),
            col("count", "sampled shots with this record (empty without --shots)"),
        ],
    );
    table.meta("cnot_count", circuit.cnot_count());
    let counts = counts_for(&circuit, args, &mut table)?;
    let mut summary = String::new();
    describe(&circuit, &mut summary)?;
    writeln!(summary, "bits       outcome  kept   probability  fidelity")?;
    let w = w_state();
    let (mut kept_p, mut weighted, mut scored) = (0.0, 0.0, 0.0);
    let records = run_density(&circuit, None)?;
    for (raw, b) in records.iter().zip(swap_branches(&records, &cfg)) {
        let kept =
            b.outcome.correction().is_some() && (cfg.purification.is_none() || (b.outcome.is_eta() && b.ancillas_ok));
        let fid = b.state.as_ref().map(|s| pure_fidelity(&w, s)).transpose()?;
        if kept {
            kept_p += b.probability;
            if let Some(f) = fid {
                weighted += f * b.probability;
                scored += b.probability;
            }
        }
        let bits = raw.bits.to_string();
        let fid_text = fid.map_or_else(|| "-".to_owned(), |f| format!("{f:.6}"));
        writeln!(
            summary,
            "{bits:<10} {:<8} {:<6} {:<12.6} {fid_text}",
            b.outcome.to_string(),
            kept,
            b.probability
        )?;
        table.push(vec![
            bits.clone().into(),
            b.outcome.to_string().into(),
            b.ancillas_ok.into(),
            kept.into(),
            b.probability.into(),
            fid.into(),
            count_cell(&counts, &bits),
        ]);
    }
    write!(summary, "kept probability {kept_p:.6}")?;
    if scored > 0.0 {
        write!(summary, ", post-selected fidelity {:.6}", weighted / scored)?;
    }
    summary.push('\n');
    emit(&table, &summary, &args.output, stdout)?;
    Ok(Status::Pass)
}
