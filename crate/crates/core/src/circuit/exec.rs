use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Circuit, ClassicalBits, GateOp};
use crate::channels::{amplitude_damping, noisy_cnot_raw, readout_raw, DampingParams, GateNoiseParams};
use crate::error::{invalid, Error, Result};
use crate::qlinalg::{conjugate, partial_trace_raw, Branch, ComplexMatrix, DensityMatrix, StateVector, PROB_FLOOR};

/// One measurement history of a noise-free run.
#[derive(Clone, Debug)]
pub struct PureBranch {
    pub bits: ClassicalBits,
    pub probability: f64,
    /// Normalized post-measurement state of the whole register.
    pub state: StateVector,
}

#[derive(Clone, Debug)]
pub struct PureRun {
    /// State right before the first measurement (the final state if the
    /// circuit never measures).
    pub pre_measurement: StateVector,
    /// Every measurement history with nonzero probability, sorted by bits.
    pub branches: Vec<PureBranch>,
}

impl PureRun {
    /// The final state when the run never branched.
    pub fn final_state(&self) -> Option<&StateVector> {
        match self.branches.as_slice() {
            [only] => Some(&only.state),
            _ => None,
        }
    }
}

fn refuse_noise(c: &Circuit) -> Result<()> {
    if c.has_channels() {
        return Err(Error::UnsupportedMode(
            "amplitude damping needs the density-matrix executor".into(),
        ));
    }
    if c.noise().is_some_and(|n| !n.is_ideal()) {
        return Err(Error::UnsupportedMode(
            "gate noise needs the density-matrix executor".into(),
        ));
    }
    Ok(())
}

/// Exact noise-free execution, branching at every measurement instead of
/// sampling.
pub fn run_statevector(c: &Circuit) -> Result<PureRun> {
    refuse_noise(c)?;
    let n = c.num_qubits();
    let mut branches = vec![(ClassicalBits::zeros(c.num_classical()), StateVector::zero(n)?)];
    let mut pre_measurement = None;
    for op in c.ops() {
        match op {
            GateOp::Barrier(_) => {}
            GateOp::Measure { qubit, cbit } => {
                pre_measurement.get_or_insert_with(|| branches[0].1.clone());
                let mask = 1usize << (n - 1 - qubit);
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (bits, psi) in branches {
                    for outcome in [false, true] {
                        let amps: Vec<Complex64> = psi
                            .amplitudes()
                            .iter()
                            .enumerate()
                            .map(|(i, &a)| {
                                if (i & mask != 0) == outcome {
                                    a
                                } else {
                                    Complex64::new(0.0, 0.0)
                                }
                            })
                            .collect();
                        let kept = StateVector::new(n, amps)?;
                        if kept.norm_sqr() >= PROB_FLOOR {
                            let mut bits = bits.clone();
                            bits.set(*cbit, outcome);
                            next.push((bits, kept));
                        }
                    }
                }
                branches = next;
            }
            GateOp::Conditional { cbit, op } => {
                let (m, targets) = op.unitary().expect("validated on push");
                for (bits, psi) in &mut branches {
                    if bits.get(*cbit) {
                        *psi = psi.apply(&m, &targets)?;
                    }
                }
            }
            _ => {
                let (m, targets) = op.unitary().expect("non-unitary kinds handled above");
                for (_, psi) in &mut branches {
                    *psi = psi.apply(&m, &targets)?;
                }
            }
        }
    }
    let pre_measurement = pre_measurement.unwrap_or_else(|| branches[0].1.clone());
    let mut branches = branches
        .into_iter()
        .map(|(bits, psi)| {
            Ok(PureBranch {
                bits,
                probability: psi.norm_sqr(),
                state: psi.normalized()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    branches.sort_by(|a, b| a.bits.cmp(&b.bits));
    Ok(PureRun {
        pre_measurement,
        branches,
    })
}

/// Total unitary of a circuit made only of unitary ops and barriers.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    if c.ops().iter().any(|op| !op.is_unitary_kind()) {
        return invalid("circuit contains non-unitary ops");
    }
    let n = c.num_qubits();
    let dim = 1usize << n;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = StateVector::basis(n, col)?;
        for op in c.ops() {
            if let Some((m, targets)) = op.unitary() {
                psi = psi.apply(&m, &targets)?;
            }
        }
        for (row, a) in psi.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// One classical record of a density-matrix run.
#[derive(Clone, Debug)]
pub struct DensityBranch {
    pub bits: ClassicalBits,
    /// Circuit qubits the state lives on, ascending.
    pub qubits: Vec<usize>,
    pub branch: Branch,
}

impl DensityBranch {
    /// Reduced state on the listed circuit qubits, in the listed order.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let state = self.branch.require_state()?;
        let local = keep
            .iter()
            .map(|q| {
                self.qubits
                    .iter()
                    .position(|x| x == q)
                    .ok_or_else(|| Error::InvalidArgument(format!("qubit {q} is not part of the branch state")))
            })
            .collect::<Result<Vec<_>>>()?;
        state.partial_trace(&local)
    }
}

// First and last op index touching each qubit. Barriers do not count.
fn usage(c: &Circuit) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut first = vec![None; c.num_qubits()];
    let mut last = vec![None; c.num_qubits()];
    for (i, op) in c.ops().iter().enumerate() {
        if matches!(op, GateOp::Barrier(_)) {
            continue;
        }
        for q in op.qubits() {
            first[q].get_or_insert(i);
            last[q] = Some(i);
        }
    }
    (first, last)
}

fn ket0_projector() -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(2, 2);
    p[(0, 0)] = Complex64::new(1.0, 0.0);
    p
}

/// Exact density-matrix execution over all classical outcomes.
///
/// `noise` overrides the circuit's own gate noise; with neither set, the run
/// is noise free. Under noise every CNOT (conditional or not) is the noisy
/// CNOT and every measurement is a noisy readout.
///
/// Qubits enter the simulated register at their first use, and a qubit that
/// is measured and never touched again is traced out right after its
/// measurement. Each returned state therefore lives on the qubits that were
/// used and not retired this way, listed in [`DensityBranch::qubits`];
/// qubits the circuit never touches stay in `|0⟩` and are omitted.
pub fn run_density(c: &Circuit, noise: Option<GateNoiseParams>) -> Result<Vec<DensityBranch>> {
    let noise = noise.or(c.noise()).unwrap_or_else(GateNoiseParams::ideal);
    let (first, last) = usage(c);
    let mut active: Vec<usize> = Vec::new();
    let mut branches: BTreeMap<ClassicalBits, ComplexMatrix> = BTreeMap::new();
    branches.insert(ClassicalBits::zeros(c.num_classical()), ComplexMatrix::identity(1));
    let ket0 = ket0_projector();

    for (i, op) in c.ops().iter().enumerate() {
        for q in op.qubits() {
            if first[q] == Some(i) && !active.contains(&q) && !matches!(op, GateOp::Barrier(_)) {
                active.push(q);
                for m in branches.values_mut() {
                    *m = m.kron(&ket0)?;
                }
            }
        }
        let n = active.len();
        let local = |q: usize| active.iter().position(|&x| x == q).expect("born before use");
        match op {
            GateOp::Barrier(_) => {}
            GateOp::Measure { qubit, cbit } => {
                let lq = local(*qubit);
                let mut next: BTreeMap<ClassicalBits, ComplexMatrix> = BTreeMap::new();
                for (bits, m) in &branches {
                    for (outcome, part) in readout_raw(m, lq, n, noise.eta_m()).into_iter().enumerate() {
                        if part.trace().re < PROB_FLOOR {
                            continue;
                        }
                        let mut bits = bits.clone();
                        bits.set(*cbit, outcome == 1);
                        match next.get_mut(&bits) {
                            Some(acc) => acc.add_scaled_in_place(&part, 1.0),
                            None => {
                                next.insert(bits, part);
                            }
                        }
                    }
                }
                branches = next;
            }
            GateOp::AmplitudeDamping { qubit, r } => {
                let ch = amplitude_damping(DampingParams::new(*r)?);
                let lq = local(*qubit);
                for m in branches.values_mut() {
                    *m = ch.apply_raw(m, &[lq], n);
                }
            }
            GateOp::Conditional { cbit, op } => {
                for (bits, m) in branches.iter_mut() {
                    if bits.get(*cbit) {
                        *m = apply_gate(m, op, &local, n, noise);
                    }
                }
            }
            _ => {
                for m in branches.values_mut() {
                    *m = apply_gate(m, op, &local, n, noise);
                }
            }
        }
        if let GateOp::Measure { qubit, .. } = op {
            if last[*qubit] == Some(i) {
                let lq = local(*qubit);
                let keep: Vec<usize> = (0..n).filter(|&k| k != lq).collect();
                for m in branches.values_mut() {
                    *m = partial_trace_raw(m, &keep, n);
                }
                active.remove(lq);
            }
        }
    }

    let mut sorted = active.clone();
    sorted.sort_unstable();
    let perm: Vec<usize> = active
        .iter()
        .map(|q| sorted.iter().position(|x| x == q).expect("same set"))
        .collect();
    let n = active.len();
    branches
        .into_iter()
        .map(|(bits, m)| {
            let branch = Branch::from_unnormalized(n, &m, 1.0).map_state(|s| s.permute_qubits(&perm))?;
            Ok(DensityBranch {
                bits,
                qubits: sorted.clone(),
                branch,
            })
        })
        .collect()
}

fn apply_gate(
    m: &ComplexMatrix,
    op: &GateOp,
    local: &impl Fn(usize) -> usize,
    n: usize,
    noise: GateNoiseParams,
) -> ComplexMatrix {
    if let GateOp::Cnot { control, target } = op {
        return noisy_cnot_raw(m, local(*control), local(*target), n, noise.y2());
    }
    let (u, targets) = op.unitary().expect("validated on push");
    let targets: Vec<usize> = targets.into_iter().map(local).collect();
    conjugate(m, &u, &targets, n)
}

/// Name of the generator behind [`sample_shots`].
pub const SHOT_RNG: &str = "ChaCha8Rng";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotResult {
    /// Classical bitstring (bit 0 first) → number of shots.
    pub counts: BTreeMap<String, usize>,
    pub shots: usize,
    pub seed: u64,
    pub rng: &'static str,
}

impl ShotResult {
    /// Counts restricted to shots whose bitstring passes `select`, keyed by
    /// the characters at `positions`.
    pub fn marginal(&self, positions: &[usize], select: impl Fn(&str) -> bool) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for (bits, &count) in self.counts.iter().filter(|(b, _)| select(b)) {
            let key: String = positions.iter().map(|&p| &bits[p..p + 1]).collect();
            *out.entry(key).or_insert(0) += count;
        }
        out
    }
}

/// Draws `shots` classical records from the exact distribution of
/// [`run_density`] (with the circuit's own noise).
pub fn sample_shots(c: &Circuit, shots: usize, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return invalid("shots must be at least 1");
    }
    let branches = run_density(c, None)?;
    let weights: Vec<f64> = branches.iter().map(|b| b.branch.probability()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = vec![0usize; branches.len()];
    for _ in 0..shots {
        tally[dist.sample(&mut rng)] += 1;
    }
    let counts = branches
        .iter()
        .zip(tally)
        .filter(|(_, n)| *n > 0)
        .map(|(b, n)| (b.bits.to_string(), n))
        .collect();
    Ok(ShotResult {
        counts,
        shots,
        seed,
        rng: SHOT_RNG,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_measured() -> Circuit {
        let mut c = Circuit::new(2, 2).unwrap();
        c.h(0)
            .unwrap()
            .cnot(0, 1)
            .unwrap()
            .measure(0, 0)
            .unwrap()
            .measure(1, 1)
            .unwrap();
        c
    }

    #[test]
    fn empty_circuit_is_zero_state() {
        let c = Circuit::new(1, 0).unwrap();
        let run = run_statevector(&c).unwrap();
        assert_eq!(run.final_state().unwrap(), &StateVector::zero(1).unwrap());
    }

    #[test]
    fn double_x_is_identity() {
        let mut c = Circuit::new(1, 0).unwrap();
        c.x(0).unwrap().x(0).unwrap();
        let run = run_statevector(&c).unwrap();
        assert_eq!(run.final_state().unwrap(), &StateVector::zero(1).unwrap());
    }

    #[test]
    fn bell_branches() {
        let run = run_statevector(&bell_measured()).unwrap();
        let bits: Vec<String> = run.branches.iter().map(|b| b.bits.to_string()).collect();
        assert_eq!(bits, ["00", "11"]);
        for b in &run.branches {
            assert!((b.probability - 0.5).abs() < 1e-15);
        }
        assert!((run.pre_measurement.amplitude(3).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let dens = run_density(&bell_measured(), None).unwrap();
        assert_eq!(dens.len(), 2);
        assert!(dens.iter().all(|b| b.qubits.is_empty()));
    }

    #[test]
    fn conditional_flip_teleports_bit() {
        let mut c = Circuit::new(2, 1).unwrap();
        c.h(0)
            .unwrap()
            .measure(0, 0)
            .unwrap()
            .conditional(0, GateOp::X(1))
            .unwrap();
        for b in run_density(&c, None).unwrap() {
            let rho = b.reduced(&[1]).unwrap();
            let bit = usize::from(b.bits.get(0));
            assert!((rho.matrix()[(bit, bit)].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn noise_refused_by_statevector() {
        let mut c = Circuit::new(1, 0).unwrap();
        c.amplitude_damping(0, 0.2).unwrap();
        assert!(matches!(run_statevector(&c), Err(Error::UnsupportedMode(_))));
        let mut c = bell_measured();
        c.set_noise(Some(GateNoiseParams::new(0.9, 1.0).unwrap()));
        assert!(matches!(run_statevector(&c), Err(Error::UnsupportedMode(_))));
        assert!(run_density(&c, None).is_ok());
    }

    #[test]
    fn readout_noise_mixes_records() {
        let mut c = Circuit::new(1, 1).unwrap();
        c.x(0).unwrap().measure(0, 0).unwrap();
        let out = run_density(&c, Some(GateNoiseParams::new(1.0, 0.9).unwrap())).unwrap();
        let p: Vec<f64> = out.iter().map(|b| b.branch.probability()).collect();
        assert!((p[0] - 0.1).abs() < 1e-15 && (p[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn untouched_qubits_are_omitted_and_order_is_ascending() {
        let mut c = Circuit::new(4, 0).unwrap();
        c.x(3).unwrap().x(1).unwrap();
        let out = run_density(&c, None).unwrap();
        assert_eq!(out[0].qubits, vec![1, 3]);
        let rho = out[0].branch.state().unwrap();
        assert!((rho.matrix()[(3, 3)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shots_are_reproducible() {
        let a = sample_shots(&bell_measured(), 1000, 7).unwrap();
        let b = sample_shots(&bell_measured(), 1000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<usize>(), 1000);
        assert!(a.counts.keys().all(|k| k == "00" || k == "11"));
        let one = sample_shots(&bell_measured(), 1, 3).unwrap();
        assert_eq!(one.counts.values().sum::<usize>(), 1);
        assert!(sample_shots(&bell_measured(), 0, 3).is_err());
        assert_eq!(a.marginal(&[1], |_| true).values().sum::<usize>(), 1000);
    }
}
