use std::fmt::Write as _;
use std::io::Write;

use wswap::circuit::{sample_shots, swap_circuit_with, write_circuit, SwapCircuitConfig};
use wswap::protocol::ideal_swap;

use crate::table::{col, fixed17, Table};
use crate::{emit, write_file, IdealArgs, Status};

const TOL: f64 = 1e-10;

// |100>, |010>, |001> on the shared qubits 0, 1, 5
const POPULATED: [(&str, usize); 3] = [("100", 4), ("010", 2), ("001", 1)];

pub(crate) fn run(args: &IdealArgs, stdout: &mut dyn Write) -> anyhow::Result<Status> {
    let res = ideal_swap();
    let mut table = Table::new(
        "wswap ideal",
        &[
            col("outcome", "Charlie's measurement outcome"),
            col("bits", "classical bits sent to Bob"),
            col("correction", "Pauli applied by Bob"),
            col("probability", "probability of the outcome"),
            col("fidelity", "<W|rho|W> of the shared qubits after correction"),
        ],
    );
    let mut summary = String::from("outcome  bits  correction  probability  fidelity\n");
    let mut ok = true;
    for b in res.named() {
        let p = b.branch.probability();
        let f = b.fidelity.unwrap_or(0.0);
        ok &= (p - 0.25).abs() < TOL && (f - 1.0).abs() < TOL;
        let bits = format!("{:02b}", b.outcome.classical_bits());
        let corr = b.outcome.correction().expect("named outcome").to_string();
        writeln!(
            summary,
            "{:<8} {bits:<5} {corr:<11} {p:<12.6} {f:.6}",
            b.outcome.to_string()
        )?;
        table.push(vec![
            b.outcome.to_string().into(),
            bits.into(),
            corr.into(),
            p.into(),
            f.into(),
        ]);
    }
    let pops = res.average_named_state()?.probabilities();
    summary.push_str("shared-state populations (qubits 0, 1, 5):");
    for ((label, idx), want) in POPULATED.into_iter().zip([0.25, 0.25, 0.5]) {
        ok &= (pops[idx] - want).abs() < TOL;
        write!(summary, "  |{label}> {:.6}", pops[idx])?;
        table.meta(&format!("population_{label}"), fixed17(pops[idx]));
    }
    summary.push('\n');

    let cfg = SwapCircuitConfig {
        final_readout: true,
        ..SwapCircuitConfig::default()
    };
    let circuit = swap_circuit_with(&cfg)?;
    if let Some(path) = &args.dump_circuit {
        write_file(path, &write_circuit(&circuit))?;
    }
    if args.shots.shots > 0 {
        let shots = sample_shots(&circuit, args.shots.shots, args.shots.seed)?;
        let bits = cfg.final_cbits().expect("final readout");
        // named outcomes have cbit 0 clear
        let counts = shots.marginal(&bits, |b| b.starts_with('0'));
        let kept: usize = counts.values().sum();
        write!(
            summary,
            "shots {} (seed {}, {}): {kept} kept;",
            shots.shots, shots.seed, shots.rng
        )?;
        table
            .meta("shots", shots.shots)
            .meta("seed", shots.seed)
            .meta("rng", shots.rng);
        for (label, _) in POPULATED {
            let freq = *counts.get(label).unwrap_or(&0) as f64 / kept.max(1) as f64;
            write!(summary, "  |{label}> {freq:.4}")?;
            table.meta(&format!("frequency_{label}"), fixed17(freq));
        }
        let sigma = (0.25 / kept.max(1) as f64).sqrt();
        writeln!(summary, "  (3 sigma at 0.5: {:.4})", 3.0 * sigma)?;
    }
    writeln!(summary, "determinism check: {}", if ok { "pass" } else { "FAIL" })?;
    emit(&table, &summary, &args.output, stdout)?;
    Ok(if ok { Status::Pass } else { Status::Fail })
}
