//! The protocol's circuits: W preparation, Charlie's basis change, the full
//! swap and the weak-measurement gadget.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

use num_complex::Complex64;

use super::{circuit_unitary, run_density, Circuit, DensityBranch, GateOp};
use crate::channels::{DampingParams, GateNoiseParams, WeakMeasurementParams};
use crate::error::Result;
use crate::protocol::{SwapOutcome, CHARLIE_QUBITS, SHARED_QUBITS};
use crate::qlinalg::{pure_fidelity, ComplexMatrix, DensityMatrix};
use crate::states::{charlie_basis, w_state, WFamilyParams};

/// Three-qubit circuit taking `|000⟩` to the W state
/// `½|100⟩ + ½|010⟩ + (√2/2)|001⟩`.
///
/// `RY(π/3)` puts weight ½ on qubit 0 being 1; a controlled `RY(β)` with
/// `tan(β/2) = 1/√2`, active when qubit 0 is 0, splits the rest between
/// qubit 1 being 1 and 0; qubit 2 is then set to `NOT(q0 XOR q1)`. The
/// controlled rotation uses two CNOTs, four in total.
pub fn w_prep_circuit() -> Circuit {
    let beta = 2.0 * (1.0 / 2f64.sqrt()).atan();
    let mut c = Circuit::new(3, 0).expect("3 qubits");
    c.ry(0, FRAC_PI_3)
        .and_then(|c| c.x(0))
        .and_then(|c| c.ry(1, beta / 2.0))
        .and_then(|c| c.cnot(0, 1))
        .and_then(|c| c.ry(1, -beta / 2.0))
        .and_then(|c| c.cnot(0, 1))
        .and_then(|c| c.x(0))
        .and_then(|c| c.cnot(0, 2))
        .and_then(|c| c.cnot(1, 2))
        .and_then(|c| c.x(2))
        .expect("valid ops");
    c
}

/// 8×8 unitary of [`w_prep_circuit`]; its first column is `|W⟩`.
pub fn w_prep_unitary() -> ComplexMatrix {
    circuit_unitary(&w_prep_circuit()).expect("unitary circuit")
}

/// Unitary whose row `k` is the conjugate of Charlie's basis vector `k`, so
/// it sends `eta+, eta-, xi+, xi-` to `|000⟩, |001⟩, |010⟩, |011⟩` and the
/// completion vectors to `|100⟩ … |111⟩`.
pub fn basis_change_unitary() -> ComplexMatrix {
    let basis = charlie_basis(WFamilyParams::standard()).expect("standard basis");
    let mut u = ComplexMatrix::zeros(8, 8);
    for (k, v) in basis.vectors().enumerate() {
        for (j, a) in v.amplitudes().iter().enumerate() {
            u[(k, j)] = a.conj();
        }
    }
    u
}

/// How Charlie's basis change is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisChange {
    /// One 3-qubit `UNITARY` op ([`basis_change_unitary`]).
    Unitary,
    /// Three CNOTs and single-qubit gates, giving noisy-gate experiments
    /// something to act on.
    Decomposed,
}

impl BasisChange {
    /// Local qubit whose readout goes to classical bit 0, 1 and 2. With this
    /// order, the bits read `k` in binary for measurement index `k` in both
    /// variants.
    pub fn readout(self) -> [usize; 3] {
        match self {
            Self::Unitary => [0, 1, 2],
            Self::Decomposed => [1, 2, 0],
        }
    }
}

/// Charlie's basis change on three local qubits `(a, b, c)`.
///
/// The decomposed form: `CNOT(b→c)`, a controlled Hadamard from `c` onto
/// `b` written as `RY(π/4)·CNOT(c→b)·RY(−π/4)`, `CNOT(a→c)`, `H(a)`, `X(c)`.
/// It maps the named outcomes onto the same readout values as the unitary
/// form once qubits are read in [`BasisChange::readout`] order; the
/// completion vectors land on different, but still complementary, values.
pub fn basis_change_circuit(kind: BasisChange) -> Circuit {
    let mut c = Circuit::new(3, 0).expect("3 qubits");
    match kind {
        BasisChange::Unitary => {
            c.unitary(basis_change_unitary(), &[0, 1, 2]).expect("unitary");
        }
        BasisChange::Decomposed => {
            c.cnot(1, 2)
                .and_then(|c| c.ry(1, FRAC_PI_4))
                .and_then(|c| c.cnot(2, 1))
                .and_then(|c| c.ry(1, -FRAC_PI_4))
                .and_then(|c| c.cnot(0, 2))
                .and_then(|c| c.h(0))
                .and_then(|c| c.x(2))
                .expect("valid ops");
        }
    }
    c
}

/// How the two W states are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prep {
    /// [`w_prep_circuit`] on each triple (its CNOTs are subject to gate noise).
    Gates,
    /// One noise-free `UNITARY` per triple, modeling states handed over
    /// already initialized.
    Initialize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapCircuitConfig {
    pub prep: Prep,
    pub basis: BasisChange,
    /// Amplitude damping on the three transmitted qubits.
    pub damping: Option<f64>,
    /// Weak-measurement strength; adds one ancilla per shared qubit and
    /// keeps only the `Z` correction.
    pub purification: Option<f64>,
    pub noise: Option<GateNoiseParams>,
    /// Measure the shared qubits at the end.
    pub final_readout: bool,
}

impl Default for SwapCircuitConfig {
    fn default() -> Self {
        Self {
            prep: Prep::Gates,
            basis: BasisChange::Unitary,
            damping: None,
            purification: None,
            noise: None,
            final_readout: false,
        }
    }
}

impl SwapCircuitConfig {
    /// Configuration for imperfect-gate experiments: initialized W states,
    /// decomposed basis change, noise on its CNOTs and on every measurement.
    pub fn gate_noise(noise: GateNoiseParams) -> Self {
        Self {
            prep: Prep::Initialize,
            basis: BasisChange::Decomposed,
            noise: Some(noise),
            ..Self::default()
        }
    }

    pub fn num_qubits(&self) -> usize {
        if self.purification.is_some() {
            9
        } else {
            6
        }
    }

    /// Classical bits written by the ancilla readouts.
    pub fn ancilla_cbits(&self) -> Option<[usize; 3]> {
        self.purification.map(|_| [3, 4, 5])
    }

    /// Classical bits written by the final readout of qubits 0, 1, 5.
    pub fn final_cbits(&self) -> Option<[usize; 3]> {
        let start = if self.purification.is_some() { 6 } else { 3 };
        self.final_readout.then_some([start, start + 1, start + 2])
    }

    pub fn num_classical(&self) -> usize {
        3 + 3 * usize::from(self.purification.is_some()) + 3 * usize::from(self.final_readout)
    }
}

/// Full swap circuit: W preparation on qubits 0–2 and 3–5, optional
/// amplitude damping on 2, 3, 4, basis change and readout of 2, 3, 4 into
/// classical bits 0–2, then Bob's correction on qubit 5 (`Z` if bit 2 is
/// set, then `X` if bit 1 is set).
pub fn swap_circuit(noise: Option<GateNoiseParams>, damping: Option<f64>) -> Result<Circuit> {
    swap_circuit_with(&SwapCircuitConfig {
        noise,
        damping,
        ..SwapCircuitConfig::default()
    })
}

pub fn swap_circuit_with(cfg: &SwapCircuitConfig) -> Result<Circuit> {
    let mut c = Circuit::new(cfg.num_qubits(), cfg.num_classical())?;
    c.set_noise(cfg.noise);
    for triple in [[0, 1, 2], [3, 4, 5]] {
        match cfg.prep {
            Prep::Gates => c.compose(&w_prep_circuit(), &triple, &[])?,
            Prep::Initialize => c.unitary(w_prep_unitary(), &triple)?,
        };
    }
    c.barrier()?;
    if let Some(r) = cfg.damping {
        DampingParams::new(r)?;
        for q in CHARLIE_QUBITS {
            c.amplitude_damping(q, r)?;
        }
        c.barrier()?;
    }
    c.compose(&basis_change_circuit(cfg.basis), &CHARLIE_QUBITS, &[])?;
    c.barrier()?;
    for (cbit, local) in cfg.basis.readout().into_iter().enumerate() {
        c.measure(CHARLIE_QUBITS[local], cbit)?;
    }
    c.barrier()?;
    let bob = SHARED_QUBITS[2];
    c.conditional(2, GateOp::Z(bob))?;
    if cfg.purification.is_none() {
        c.conditional(1, GateOp::X(bob))?;
    }
    if let (Some(q), Some(anc_bits)) = (cfg.purification, cfg.ancilla_cbits()) {
        c.barrier()?;
        let gadget = weak_measurement_gadget(q)?;
        for (k, &data) in SHARED_QUBITS.iter().enumerate() {
            c.compose(&gadget, &[data, 6 + k], &[anc_bits[k]])?;
        }
    }
    if let Some(bits) = cfg.final_cbits() {
        c.barrier()?;
        for (q, b) in SHARED_QUBITS.into_iter().zip(bits) {
            c.measure(q, b)?;
        }
    }
    Ok(c)
}

/// Rotation angle `2·arctan(√q/√(1−q))` of the gadget's controlled
/// rotation; `π` at `q = 1`.
pub fn gadget_angle(q: f64) -> Result<f64> {
    WeakMeasurementParams::new(q)?;
    Ok(if q == 1.0 {
        PI
    } else {
        2.0 * (q.sqrt() / (1.0 - q).sqrt()).atan()
    })
}

/// Weak measurement of strength `q` on qubit 0 via ancilla qubit 1:
/// `RX(π)` on the data, controlled rotation onto the ancilla, `RX(π)` again,
/// then the ancilla is read into classical bit 0. Reading 0 applies
/// `diag(√(1−q), 1)` to the data qubit.
pub fn weak_measurement_gadget(q: f64) -> Result<Circuit> {
    let theta = gadget_angle(q)?;
    let mut c = Circuit::new(2, 1)?;
    c.rx(0, PI)?.cu(0, 1, theta, 0.0, 0.0, 0.0)?.rx(0, PI)?.measure(1, 0)?;
    Ok(c)
}

/// Kraus operators `[K0, K1]` the gadget applies to the data qubit for
/// ancilla readings 0 and 1, with the global phase fixed so that the
/// `|1⟩⟨1|` entry of `K0` is real and positive.
pub fn gadget_effective_operators(q: f64) -> Result<[ComplexMatrix; 2]> {
    let gadget = weak_measurement_gadget(q)?;
    let mut unitary_part = Circuit::new(2, 0)?;
    for op in gadget.ops().iter().filter(|op| op.is_unitary_kind()) {
        unitary_part.push(op.clone())?;
    }
    let u = circuit_unitary(&unitary_part)?;
    // data qubit is the high bit: |d a⟩ has index 2d + a
    let kraus = |a: usize| {
        let mut k = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                k[(i, j)] = u[(2 * i + a, 2 * j)];
            }
        }
        k
    };
    let (k0, k1) = (kraus(0), kraus(1));
    let phase: Complex64 = k0[(1, 1)].conj() / k0[(1, 1)].norm();
    Ok([k0.scale(phase), k1.scale(phase)])
}

/// Swap-level view of one circuit branch.
#[derive(Clone, Debug)]
pub struct CircuitSwapBranch {
    pub outcome: SwapOutcome,
    /// All weak-measurement ancillas read 0 (true without purification).
    pub ancillas_ok: bool,
    /// Joint probability of this classical record.
    pub probability: f64,
    /// State of qubits 0, 1, 5 when they are still unmeasured.
    pub state: Option<DensityMatrix>,
}

/// Reads Charlie's outcome and the ancilla bits off density-executor branches.
pub fn swap_branches(branches: &[DensityBranch], cfg: &SwapCircuitConfig) -> Vec<CircuitSwapBranch> {
    branches
        .iter()
        .map(|b| {
            let k = b.bits.value_of(&[0, 1, 2]);
            let outcome = match crate::states::NamedOutcome::ALL.get(k) {
                Some(&n) => SwapOutcome::named(n),
                None => SwapOutcome::complement(k - 4),
            };
            let ancillas_ok = cfg
                .ancilla_cbits()
                .is_none_or(|bits| bits.iter().all(|&i| !b.bits.get(i)));
            CircuitSwapBranch {
                outcome,
                ancillas_ok,
                probability: b.branch.probability(),
                state: b.reduced(&SHARED_QUBITS).ok(),
            }
        })
        .collect()
}

/// Result of one imperfect-gate run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateNoiseReport {
    /// Fidelity with `|W⟩` of the shared state averaged over records that
    /// report a named outcome; `None` if no such record occurs.
    pub fidelity: Option<f64>,
    /// Probability that Charlie reports a named outcome.
    pub kept_probability: f64,
    pub cnot_count: usize,
}

/// Runs [`SwapCircuitConfig::gate_noise`] and scores the corrected state.
/// Records reporting a complement outcome have no defined correction and
/// are discarded.
pub fn gate_noise_fidelity(noise: GateNoiseParams) -> Result<GateNoiseReport> {
    let cfg = SwapCircuitConfig::gate_noise(noise);
    let circuit = swap_circuit_with(&cfg)?;
    let w = w_state();
    let mut kept = 0.0;
    let mut weighted = 0.0;
    for b in swap_branches(&run_density(&circuit, None)?, &cfg) {
        if let (true, Some(state)) = (b.outcome.correction().is_some(), &b.state) {
            kept += b.probability;
            weighted += b.probability * pure_fidelity(&w, state)?;
        }
    }
    Ok(GateNoiseReport {
        fidelity: (kept > 0.0).then(|| weighted / kept),
        kept_probability: kept,
        cnot_count: circuit.cnot_count(),
    })
}
