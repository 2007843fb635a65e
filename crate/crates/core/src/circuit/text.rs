//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits 3
//! clbits 1
//! noise 0.95 1
//! RY 0 1.0471975511965976
//! CNOT 0 1
//! CU 0 1 1.8545904360032244 0 0 0
//! UNITARY 0 1 <re im pairs, row-major>
//! MEASURE 2 -> 0
//! IF c0 X 1
//! AD 2 0.3
//! BARRIER
//! ```
//!
//! The header gives the register sizes and optional gate noise
//! (`y2 eta`). Each op line is `NAME qubits... params...`, with `-> cbit`
//! for measurements and an `IF c<k>` prefix for classically controlled ops.
//! `CU` lists control then target. Numbers use Rust's shortest round-trip
//! formatting, so writing and parsing gives back the same circuit.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{Circuit, GateOp};
use crate::channels::GateNoiseParams;
use crate::error::{Error, Result};
use crate::qlinalg::{ComplexMatrix, MAX_QUBITS};

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", c.num_qubits()).expect("string write");
    writeln!(out, "clbits {}", c.num_classical()).expect("string write");
    if let Some(n) = c.noise() {
        writeln!(out, "noise {} {}", n.y2(), n.eta_m()).expect("string write");
    }
    for op in c.ops() {
        writeln!(out, "{op}").expect("string write");
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn int(tok: &str, line: usize) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected an index, found `{tok}`")))
}

fn real(tok: &str, line: usize) -> Result<f64> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a number, found `{tok}`")))
}

fn parse_op(tokens: &[&str], line: usize) -> Result<GateOp> {
    let (&name, rest) = tokens.split_first().ok_or_else(|| parse_err(line, "empty op"))?;
    let arity = |q: usize, p: usize| -> Result<(Vec<usize>, Vec<f64>)> {
        if rest.len() != q + p {
            return Err(parse_err(
                line,
                format!("{name} takes {q} qubit(s) and {p} parameter(s)"),
            ));
        }
        let qs = rest[..q].iter().map(|t| int(t, line)).collect::<Result<_>>()?;
        let ps = rest[q..].iter().map(|t| real(t, line)).collect::<Result<_>>()?;
        Ok((qs, ps))
    };
    Ok(match name {
        "X" => GateOp::X(arity(1, 0)?.0[0]),
        "Z" => GateOp::Z(arity(1, 0)?.0[0]),
        "H" => GateOp::H(arity(1, 0)?.0[0]),
        "RX" | "RY" | "AD" => {
            let (q, p) = arity(1, 1)?;
            match name {
                "RX" => GateOp::Rx {
                    qubit: q[0],
                    theta: p[0],
                },
                "RY" => GateOp::Ry {
                    qubit: q[0],
                    theta: p[0],
                },
                _ => GateOp::AmplitudeDamping { qubit: q[0], r: p[0] },
            }
        }
        "CNOT" => {
            let (q, _) = arity(2, 0)?;
            GateOp::Cnot {
                control: q[0],
                target: q[1],
            }
        }
        "CU" => {
            let (q, p) = arity(2, 4)?;
            GateOp::Cu {
                control: q[0],
                target: q[1],
                theta: p[0],
                phi: p[1],
                lambda: p[2],
                gamma: p[3],
            }
        }
        "UNITARY" => {
            // k target qubits are followed by 2·4^k numbers
            let k = (1..=MAX_QUBITS)
                .find(|&k| k + 2 * (1 << (2 * k)) == rest.len())
                .ok_or_else(|| parse_err(line, "UNITARY needs k qubits followed by 2·4^k numbers"))?;
            let (q, p) = arity(k, rest.len() - k)?;
            let data = p.chunks(2).map(|z| Complex64::new(z[0], z[1])).collect();
            let dim = 1 << k;
            GateOp::Unitary {
                matrix: ComplexMatrix::from_vec(dim, dim, data).map_err(|e| parse_err(line, e.to_string()))?,
                targets: q,
            }
        }
        "MEASURE" => match rest {
            [q, "->", b] => GateOp::Measure {
                qubit: int(q, line)?,
                cbit: int(b, line)?,
            },
            _ => return Err(parse_err(line, "expected `MEASURE q -> cbit`")),
        },
        "BARRIER" => GateOp::Barrier(rest.iter().map(|t| int(t, line)).collect::<Result<_>>()?),
        "IF" => {
            let (cond, inner) = rest
                .split_first()
                .ok_or_else(|| parse_err(line, "IF needs a condition"))?;
            let cbit = cond
                .strip_prefix('c')
                .ok_or_else(|| parse_err(line, format!("expected `c<bit>`, found `{cond}`")))?;
            GateOp::Conditional {
                cbit: int(cbit, line)?,
                op: Box::new(parse_op(inner, line)?),
            }
        }
        other => return Err(parse_err(line, format!("unknown op `{other}`"))),
    })
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut qubits = None;
    let mut clbits = None;
    let mut noise = None;
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            ["qubits", n] if circuit.is_none() => qubits = Some(int(n, line)?),
            ["clbits", n] if circuit.is_none() => clbits = Some(int(n, line)?),
            ["noise", y2, eta] if circuit.is_none() => {
                noise = Some(
                    GateNoiseParams::new(real(y2, line)?, real(eta, line)?)
                        .map_err(|e| parse_err(line, e.to_string()))?,
                )
            }
            _ => {
                if circuit.is_none() {
                    let n = qubits.ok_or_else(|| parse_err(line, "missing `qubits` header"))?;
                    let mut c = Circuit::new(n, clbits.unwrap_or(0)).map_err(|e| parse_err(line, e.to_string()))?;
                    c.set_noise(noise);
                    circuit = Some(c);
                }
                let op = parse_op(&tokens, line)?;
                circuit
                    .as_mut()
                    .expect("created above")
                    .push(op)
                    .map_err(|e| parse_err(line, e.to_string()))?;
            }
        }
    }
    match circuit {
        Some(c) => Ok(c),
        None => {
            let n = qubits.ok_or_else(|| parse_err(0, "missing `qubits` header"))?;
            let mut c = Circuit::new(n, clbits.unwrap_or(0))?;
            c.set_noise(noise);
            Ok(c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{swap_circuit_with, SwapCircuitConfig};

    #[test]
    fn round_trip_swap_circuits() {
        let configs = [
            SwapCircuitConfig::default(),
            SwapCircuitConfig {
                damping: Some(0.3),
                purification: Some(0.64),
                final_readout: true,
                ..SwapCircuitConfig::default()
            },
            SwapCircuitConfig::gate_noise(GateNoiseParams::new(0.95, 0.9).unwrap()),
        ];
        for cfg in configs {
            let c = swap_circuit_with(&cfg).unwrap();
            let text = write_circuit(&c);
            let back = parse_circuit(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(write_circuit(&back), text);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_circuit("qubits 2\nX 0\nFOO 1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "unknown op `FOO`".into()
            }
        );
        assert!(matches!(parse_circuit("X 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_circuit("qubits 1\nX 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 1\nRY 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 2\nclbits 1\nMEASURE 0 0\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn comments_and_header_only() {
        let c = parse_circuit("# nothing\nqubits 2\nclbits 1\n\n").unwrap();
        assert_eq!((c.num_qubits(), c.num_classical(), c.ops().len()), (2, 1, 0));
    }
}
