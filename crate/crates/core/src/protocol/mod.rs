//! Matrix-level swapping pipeline: ideal, amplitude-damped and purified.
//!
//! Qubit labels follow the protocol's physical layout. Alice holds qubits
//! 0, 1, 2 and Bob holds 3, 4, 5 (one W state each). Qubits 2, 3, 4 travel to
//! Charlie, who measures them; the shared state ends up on 0, 1 and 5, with
//! Bob's qubit 5 receiving the correction.

pub mod oracle;
mod verify;

pub use oracle::{damped_shared_state, oracle, purified_shared_state, OracleReport};
pub use verify::{compare_with_oracle, unit_grid, verify_grid, GridVerification, OracleComparison, SimulatedValues};

use std::fmt;

use crate::channels::{
    amplitude_damping, apply_channel, apply_selective, weak_measurement_ops, DampingParams, WeakMeasurementParams,
};
use crate::error::{Error, Result};
use crate::qlinalg::{contract_pure, pure_fidelity, Branch, ComplexMatrix, DensityMatrix, StateVector};
use crate::states::{charlie_basis, w_family, w_state, CharlieBasis, NamedOutcome, Pauli, WFamilyParams};

/// Qubits Charlie measures.
pub const CHARLIE_QUBITS: [usize; 3] = [2, 3, 4];
/// Qubits that end up holding the shared state; the last one is Bob's.
pub const SHARED_QUBITS: [usize; 3] = [0, 1, 5];

/// Which of Charlie's eight basis vectors was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    Named(NamedOutcome),
    /// Index 0..4 into [`CharlieBasis::completion`].
    Complement(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwapOutcome {
    pub label: OutcomeLabel,
}

impl SwapOutcome {
    pub fn named(which: NamedOutcome) -> Self {
        Self {
            label: OutcomeLabel::Named(which),
        }
    }

    pub fn complement(index: usize) -> Self {
        Self {
            label: OutcomeLabel::Complement(index),
        }
    }

    /// All eight outcomes in measurement-index order.
    pub fn all() -> impl Iterator<Item = SwapOutcome> {
        NamedOutcome::ALL
            .into_iter()
            .map(Self::named)
            .chain((0..4).map(Self::complement))
    }

    /// Position in the eight-vector basis: named outcomes 0..4, complement 4..8.
    /// Also the 3-bit value Charlie reads after the basis change.
    pub fn measurement_index(&self) -> usize {
        match self.label {
            OutcomeLabel::Named(n) => n.index(),
            OutcomeLabel::Complement(i) => 4 + i,
        }
    }

    /// Two-bit message sent to Bob (`eta+ = 00, eta- = 01, xi+ = 10,
    /// xi- = 11`). Complement outcomes carry their measurement index.
    pub fn classical_bits(&self) -> u8 {
        self.measurement_index() as u8
    }

    /// Bob's correction, `None` for complement outcomes.
    pub fn correction(&self) -> Option<Pauli> {
        match self.label {
            OutcomeLabel::Named(NamedOutcome::EtaPlus) => Some(Pauli::I),
            OutcomeLabel::Named(NamedOutcome::EtaMinus) => Some(Pauli::Z),
            OutcomeLabel::Named(NamedOutcome::XiPlus) => Some(Pauli::X),
            OutcomeLabel::Named(NamedOutcome::XiMinus) => Some(Pauli::XZ),
            OutcomeLabel::Complement(_) => None,
        }
    }

    pub fn is_eta(&self) -> bool {
        matches!(
            self.label,
            OutcomeLabel::Named(NamedOutcome::EtaPlus | NamedOutcome::EtaMinus)
        )
    }
}

impl fmt::Display for SwapOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            OutcomeLabel::Named(n) => write!(f, "{n}"),
            OutcomeLabel::Complement(i) => write!(f, "c{i}"),
        }
    }
}

/// One measurement outcome after Bob's correction.
#[derive(Clone, Debug)]
pub struct SwapBranch {
    pub outcome: SwapOutcome,
    /// Corrected state on the shared qubits (uncorrected for complement
    /// outcomes).
    pub branch: Branch,
    /// Fidelity of the corrected state with the target W state.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SwapResult {
    pub branches: Vec<SwapBranch>,
}

impl SwapResult {
    pub fn branch(&self, which: NamedOutcome) -> &SwapBranch {
        &self.branches[which.index()]
    }

    pub fn named(&self) -> impl Iterator<Item = &SwapBranch> {
        self.branches.iter().take(4)
    }

    pub fn complement(&self) -> impl Iterator<Item = &SwapBranch> {
        self.branches.iter().skip(4)
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.branch.probability()).sum()
    }

    /// Probability-weighted mixture of the corrected named-outcome states.
    pub fn average_named_state(&self) -> Result<DensityMatrix> {
        let mut acc = ComplexMatrix::zeros(8, 8);
        let mut total = 0.0;
        for b in self.named() {
            if let Some(state) = b.branch.state() {
                acc.add_scaled_in_place(state.matrix(), b.branch.probability());
                total += b.branch.probability();
            }
        }
        if total <= 0.0 {
            return Err(Error::EmptyBranch);
        }
        DensityMatrix::normalize_unchecked(3, &acc).1.ok_or(Error::EmptyBranch)
    }
}

/// `|W⟩ ⊗ |W⟩` on qubits 0..6.
pub fn combined_state() -> StateVector {
    let w = w_state();
    w.kron(&w).expect("6 qubits")
}

/// Both W states after Alice's qubit 2 and Bob's qubits 3, 4 pass through
/// amplitude damping with decay probability `r`.
pub fn damped_combined_state(r: f64) -> Result<DensityMatrix> {
    let ch = amplitude_damping(DampingParams::new(r)?);
    let w = DensityMatrix::from_pure(&w_state());
    let alice = apply_channel(&w, &ch, &[2])?;
    let bob = apply_channel(&apply_channel(&w, &ch, &[0])?, &ch, &[1])?;
    alice.kron(&bob)
}

/// Projects Charlie's qubits onto each of the eight basis vectors and traces
/// them out. Branch `k` corresponds to measurement index `k`.
pub fn charlie_measure(rho: &DensityMatrix, basis: &CharlieBasis) -> Result<Vec<(SwapOutcome, Branch)>> {
    if rho.num_qubits() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: rho.num_qubits(),
        });
    }
    let vectors: Vec<&StateVector> = basis.vectors().collect();
    Ok(SwapOutcome::all()
        .map(|outcome| {
            let v = vectors[outcome.measurement_index()].amplitudes();
            // SHARED_QUBITS is exactly the ascending complement of CHARLIE_QUBITS
            let reduced = contract_pure(rho.matrix(), v, &CHARLIE_QUBITS, 6);
            (outcome, Branch::from_unnormalized(3, &reduced, 1.0))
        })
        .collect())
}

/// Bob's correction on the last shared qubit; probability is unchanged.
pub fn apply_correction(branch: &Branch, outcome: SwapOutcome) -> Result<Branch> {
    let pauli = outcome
        .correction()
        .ok_or_else(|| Error::NoCorrection(outcome.to_string()))?;
    if let Some(state) = branch.state() {
        if state.num_qubits() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: state.num_qubits(),
            });
        }
    }
    branch.clone().map_state(|s| s.apply_unitary(&pauli.matrix(), &[2]))
}

fn swap_from(rho: &DensityMatrix, p: WFamilyParams) -> Result<SwapResult> {
    let basis = charlie_basis(p)?;
    let target = w_family(p)?;
    let branches = charlie_measure(rho, &basis)?
        .into_iter()
        .map(|(outcome, branch)| {
            let branch = if outcome.correction().is_some() {
                apply_correction(&branch, outcome)?
            } else {
                branch
            };
            let fidelity = branch.state().map(|s| pure_fidelity(&target, s)).transpose()?;
            Ok(SwapBranch {
                outcome,
                branch,
                fidelity,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SwapResult { branches })
}

/// Noise-free swap of the standard W state.
pub fn ideal_swap() -> SwapResult {
    swap_from(&DensityMatrix::from_pure(&combined_state()), WFamilyParams::standard())
        .expect("standard swap is well formed")
}

/// Noise-free swap of two copies of a W-family member, measured in the
/// matching basis. Fidelities are with respect to that member.
pub fn ideal_swap_family(p: WFamilyParams) -> Result<SwapResult> {
    let w = w_family(p)?;
    swap_from(&DensityMatrix::from_pure(&w.kron(&w)?), p)
}

/// Swap after amplitude damping on the three transmitted qubits.
pub fn damped_swap(r: f64) -> Result<SwapResult> {
    swap_from(&damped_combined_state(r)?, WFamilyParams::standard())
}

/// Weak measurement `M(q)` on each of the three shared qubits, keeping the
/// all-`M` outcome. The returned probability is the conditional success
/// probability of that post-selection, not multiplied by the input branch
/// weight.
pub fn purify(branch: &Branch, q: f64) -> Result<Branch> {
    let ops = weak_measurement_ops(WeakMeasurementParams::new(q)?);
    let state = branch.require_state()?;
    if state.num_qubits() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: state.num_qubits(),
        });
    }
    apply_selective(state, ops.keep(), &[0, 1, 2])
}

/// Per-outcome record of the damped and purified pipeline.
#[derive(Clone, Debug)]
pub struct PipelineBranch {
    pub outcome: SwapOutcome,
    pub swap_probability: f64,
    /// Conditional success of the weak measurements (0 if the swap branch is
    /// empty).
    pub purification_probability: f64,
    pub fidelity_before: Option<f64>,
    pub fidelity_after: Option<f64>,
    pub purified: Branch,
}

impl PipelineBranch {
    pub fn joint_probability(&self) -> f64 {
        self.swap_probability * self.purification_probability
    }
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    /// Post-purification fidelity of the kept (`eta±`) branches, weighted by
    /// their joint success probability. `None` if nothing survives.
    pub fidelity: Option<f64>,
    /// Swap and purification both succeed, summed over both `eta` outcomes.
    pub total_probability: f64,
    pub kept: Vec<PipelineBranch>,
    /// `xi±` branches, purified anyway for reporting.
    pub discarded: Vec<PipelineBranch>,
}

/// Damping `r`, swap, keep `eta±`, purify with strength `q`.
pub fn full_pipeline(r: f64, q: f64) -> Result<PipelineResult> {
    WeakMeasurementParams::new(q)?;
    let swap = damped_swap(r)?;
    let target = w_state();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for sb in swap.named() {
        let purified = if sb.branch.is_empty() {
            Branch::empty()
        } else {
            purify(&sb.branch, q)?
        };
        let record = PipelineBranch {
            outcome: sb.outcome,
            swap_probability: sb.branch.probability(),
            purification_probability: purified.probability(),
            fidelity_before: sb.fidelity,
            fidelity_after: purified.state().map(|s| pure_fidelity(&target, s)).transpose()?,
            purified,
        };
        if sb.outcome.is_eta() {
            kept.push(record);
        } else {
            discarded.push(record);
        }
    }
    let total_probability: f64 = kept.iter().map(PipelineBranch::joint_probability).sum();
    let fidelity = (total_probability > 0.0).then(|| {
        kept.iter()
            .filter_map(|b| b.fidelity_after.map(|f| f * b.joint_probability()))
            .sum::<f64>()
            / total_probability
    });
    Ok(PipelineResult {
        fidelity,
        total_probability,
        kept,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn combined_amplitudes() {
        let psi = combined_state();
        assert_abs_diff_eq!(psi.amplitude(0b100_100).re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitude(0b001_001).re, 0.5, epsilon = 1e-15);
        assert!(psi.is_normalized());
    }

    #[test]
    fn outcome_table() {
        let table: Vec<_> = NamedOutcome::ALL
            .into_iter()
            .map(|n| {
                let o = SwapOutcome::named(n);
                (o.classical_bits(), o.correction().unwrap())
            })
            .collect();
        assert_eq!(
            table,
            vec![(0b00, Pauli::I), (0b01, Pauli::Z), (0b10, Pauli::X), (0b11, Pauli::XZ)]
        );
        assert_eq!(SwapOutcome::complement(2).classical_bits(), 6);
        assert_eq!(SwapOutcome::complement(0).correction(), None);
    }

    #[test]
    fn correction_on_complement_fails() {
        let branch = ideal_swap().branches[4].branch.clone();
        let err = apply_correction(&branch, SwapOutcome::complement(0)).unwrap_err();
        assert!(matches!(err, Error::NoCorrection(_)));
    }

    #[test]
    fn eta_minus_before_correction_is_orthogonal() {
        let basis = charlie_basis(WFamilyParams::standard()).unwrap();
        let branches = charlie_measure(&DensityMatrix::from_pure(&combined_state()), &basis).unwrap();
        let (_, raw) = &branches[NamedOutcome::EtaMinus.index()];
        let before = pure_fidelity(&w_state(), raw.state().unwrap()).unwrap();
        assert_abs_diff_eq!(before, 0.0, epsilon = 1e-14);
        let after = apply_correction(raw, SwapOutcome::named(NamedOutcome::EtaMinus)).unwrap();
        let f = pure_fidelity(&w_state(), after.state().unwrap()).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eta_plus_needs_no_correction() {
        let basis = charlie_basis(WFamilyParams::standard()).unwrap();
        let branches = charlie_measure(&DensityMatrix::from_pure(&combined_state()), &basis).unwrap();
        let (_, raw) = &branches[0];
        let corrected = apply_correction(raw, SwapOutcome::named(NamedOutcome::EtaPlus)).unwrap();
        assert_eq!(&corrected, raw);
    }

    #[test]
    fn damped_zero_is_ideal() {
        let ideal = ideal_swap();
        let damped = damped_swap(0.0).unwrap();
        for (a, b) in ideal.branches.iter().zip(&damped.branches) {
            assert_eq!(a.branch.is_empty(), b.branch.is_empty());
            assert_abs_diff_eq!(a.branch.probability(), b.branch.probability(), epsilon = 1e-15);
        }
    }

    #[test]
    fn damped_fig_point() {
        let result = damped_swap(0.3).unwrap();
        for which in [NamedOutcome::EtaPlus, NamedOutcome::EtaMinus] {
            let b = result.branch(which);
            assert_abs_diff_eq!(b.branch.probability(), 0.2275, epsilon = 1e-12);
            assert_abs_diff_eq!(b.fidelity.unwrap(), 1.0 / 1.3, epsilon = 1e-12);
        }
        assert!(damped_swap(1.2).is_err());
    }

    #[test]
    fn purify_identity_at_zero_strength() {
        let b = damped_swap(0.3).unwrap().branch(NamedOutcome::EtaPlus).branch.clone();
        let p = purify(&b, 0.0).unwrap();
        assert_abs_diff_eq!(p.probability(), 1.0, epsilon = 1e-14);
        assert!(p.state().unwrap().matrix().max_abs_diff(b.state().unwrap().matrix()) < 1e-14);
        assert_eq!(purify(&Branch::empty(), 0.5).unwrap_err(), Error::EmptyBranch);
    }

    #[test]
    fn ideal_average_populations() {
        let avg = ideal_swap().average_named_state().unwrap();
        let p = avg.probabilities();
        assert_abs_diff_eq!(p[0b100], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0b010], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0b001], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn damped_eta_branches_coincide_and_complement_vanishes() {
        for r in [0.0, 0.2, 0.55, 0.9, 1.0] {
            let res = damped_swap(r).unwrap();
            assert_abs_diff_eq!(res.total_probability(), 1.0, epsilon = 1e-10);
            for c in res.complement() {
                assert!(c.branch.probability() < 1e-12);
            }
            let plus = res.branch(NamedOutcome::EtaPlus).branch.state();
            let minus = res.branch(NamedOutcome::EtaMinus).branch.state();
            match (plus, minus) {
                (Some(a), Some(b)) => assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-10),
                (None, None) => assert_eq!(r, 1.0),
                _ => panic!("eta branches disagree on emptiness at r={r}"),
            }
        }
    }

    #[test]
    fn pipeline_noise_free() {
        let res = full_pipeline(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(res.fidelity.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.total_probability, 0.5, epsilon = 1e-12);
        assert_eq!(res.kept.len(), 2);
        assert_eq!(res.discarded.len(), 2);
    }

    #[test]
    fn pipeline_without_purification() {
        for r in [0.1, 0.45, 0.8] {
            let res = full_pipeline(r, 0.0).unwrap();
            assert_abs_diff_eq!(res.fidelity.unwrap(), 1.0 / (1.0 + r), epsilon = 1e-12);
            assert_abs_diff_eq!(res.total_probability, (1.0 - r * r) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pipeline_full_decay_has_no_survivor() {
        let res = full_pipeline(1.0, 0.3).unwrap();
        assert_eq!(res.fidelity, None);
        assert_eq!(res.total_probability, 0.0);
    }
}
