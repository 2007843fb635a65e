//! Noise channels and measurement operator sets.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::qlinalg::{check_targets, conjugate, depolarize, shift, Branch, ComplexMatrix, DensityMatrix};

/// Completeness tolerance for Kraus sets.
pub const COMPLETENESS_TOL: f64 = 1e-12;

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return invalid(format!("{name} must lie in [0, 1], got {value}"));
    }
    Ok(())
}

/// A completely positive trace-preserving map in Kraus form,
/// `ρ ↦ Σ K_i ρ K_i†` with `Σ K_i†K_i = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    arity: usize,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("Kraus set is empty".into()))?;
        let arity = first
            .qubit_count()
            .ok_or_else(|| Error::InvalidArgument("Kraus operators must be 2^m x 2^m".into()))?;
        if operators
            .iter()
            .any(|k| k.rows() != first.rows() || k.cols() != first.cols())
        {
            return invalid("Kraus operators differ in shape");
        }
        let ch = Self { operators, arity };
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return invalid(format!("Kraus set is not complete (defect {defect:e})"));
        }
        Ok(ch)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `max |Σ K†K − I|` entrywise.
    pub fn completeness_defect(&self) -> f64 {
        let dim = 1 << self.arity;
        let sum = self.operators.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, k| {
            acc.add(&k.adjoint().matmul(k).expect("square")).expect("same shape")
        });
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    pub(crate) fn apply_raw(&self, m: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
        for k in &self.operators {
            out.add_scaled_in_place(&conjugate(m, k, targets, n), 1.0);
        }
        out
    }
}

/// Decay probability of the excited state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingParams {
    r: f64,
}

impl DampingParams {
    pub fn new(r: f64) -> Result<Self> {
        check_unit_interval("decay probability r", r)?;
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Strength of the weak measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakMeasurementParams {
    q: f64,
}

impl WeakMeasurementParams {
    pub fn new(q: f64) -> Result<Self> {
        check_unit_interval("weak measurement strength q", q)?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Imperfect-operation model: each CNOT succeeds with probability `y2`
/// (otherwise its two qubits are fully depolarized) and each readout reports
/// the true outcome with probability `eta_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateNoiseParams {
    y2: f64,
    eta_m: f64,
}

impl GateNoiseParams {
    pub fn new(y2: f64, eta_m: f64) -> Result<Self> {
        check_unit_interval("CNOT success probability y2", y2)?;
        check_unit_interval("readout accuracy eta", eta_m)?;
        Ok(Self { y2, eta_m })
    }

    pub fn ideal() -> Self {
        Self { y2: 1.0, eta_m: 1.0 }
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    pub fn eta_m(&self) -> f64 {
        self.eta_m
    }

    pub fn is_ideal(&self) -> bool {
        self.y2 == 1.0 && self.eta_m == 1.0
    }
}

/// Amplitude damping: `e0 = diag(1, √(1−r))`, `e1 = √r |0⟩⟨1|`.
pub fn amplitude_damping(p: DampingParams) -> KrausChannel {
    let r = p.r();
    let e0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - r).sqrt()]]);
    let e1 = ComplexMatrix::from_real_rows(&[&[0.0, r.sqrt()], &[0.0, 0.0]]);
    KrausChannel {
        operators: vec![e0, e1],
        arity: 1,
    }
}

/// `r = 1 − exp(−Γt)`.
pub fn r_from_rate(gamma: f64, t: f64) -> Result<f64> {
    if !(gamma >= 0.0 && t >= 0.0) || !gamma.is_finite() || !t.is_finite() {
        return invalid("relaxation rate and time must be finite and non-negative");
    }
    Ok(-(-gamma * t).exp_m1())
}

/// `Σ_i K_i ρ K_i†` with the channel acting on `targets`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, targets: &[usize]) -> Result<DensityMatrix> {
    if ch.arity() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: ch.arity(),
            found: targets.len(),
        });
    }
    let n = rho.num_qubits();
    check_targets(targets, n)?;
    DensityMatrix::new(n, ch.apply_raw(rho.matrix(), targets, n))
}

pub(crate) fn cnot_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

pub(crate) fn noisy_cnot_raw(m: &ComplexMatrix, control: usize, target: usize, n: usize, y2: f64) -> ComplexMatrix {
    let mut out = conjugate(m, &cnot_matrix(), &[control, target], n);
    if y2 < 1.0 {
        out = out.scale(Complex64::new(y2, 0.0));
        out.add_scaled_in_place(&depolarize(m, &[control, target], n), 1.0 - y2);
    }
    out
}

/// `y2·CNOT ρ CNOT† + (1−y2)·Tr_{c,t}(ρ) ⊗ I/4`, the mixed factor sitting on
/// the control and target qubits.
pub fn noisy_cnot_apply(rho: &DensityMatrix, control: usize, target: usize, y2: f64) -> Result<DensityMatrix> {
    if control == target {
        return invalid("CNOT control and target must differ");
    }
    check_unit_interval("CNOT success probability y2", y2)?;
    let n = rho.num_qubits();
    check_targets(&[control, target], n)?;
    DensityMatrix::new(n, noisy_cnot_raw(rho.matrix(), control, target, n, y2))
}

/// `P_b ρ P_b` for the projector onto `|b⟩` of one qubit.
pub(crate) fn project_raw(m: &ComplexMatrix, qubit: usize, n: usize, bit: usize) -> ComplexMatrix {
    let s = shift(qubit, n);
    let dim = m.rows();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in (0..dim).filter(|i| (i >> s) & 1 == bit) {
        for j in (0..dim).filter(|j| (j >> s) & 1 == bit) {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Unnormalized reported-outcome operators `[reported 0, reported 1]`.
pub(crate) fn readout_raw(m: &ComplexMatrix, qubit: usize, n: usize, eta_m: f64) -> [ComplexMatrix; 2] {
    let p0 = project_raw(m, qubit, n, 0);
    let p1 = project_raw(m, qubit, n, 1);
    if eta_m == 1.0 {
        return [p0, p1];
    }
    let mut r0 = p0.scale(Complex64::new(eta_m, 0.0));
    r0.add_scaled_in_place(&p1, 1.0 - eta_m);
    let mut r1 = p1.scale(Complex64::new(eta_m, 0.0));
    r1.add_scaled_in_place(&p0, 1.0 - eta_m);
    [r0, r1]
}

/// Computational-basis readout of one qubit that reports the wrong bit with
/// probability `1 − eta_m`.
///
/// Index `b` of the result is the branch in which `b` was *reported*. The
/// state in that branch is `η P_b ρ P_b + (1−η) P_{1−b} ρ P_{1−b}`
/// (normalized): the qubit is projected onto its true value and only the
/// classical record is wrong.
pub fn noisy_readout(rho: &DensityMatrix, qubit: usize, eta_m: f64) -> Result<[Branch; 2]> {
    check_unit_interval("readout accuracy eta", eta_m)?;
    let n = rho.num_qubits();
    check_targets(&[qubit], n)?;
    let [r0, r1] = readout_raw(rho.matrix(), qubit, n, eta_m);
    Ok([
        Branch::from_unnormalized(n, &r0, 1.0),
        Branch::from_unnormalized(n, &r1, 1.0),
    ])
}

/// Two-outcome weak measurement `{M, M̄}` with `M = diag(√(1−q), 1)` and
/// `M̄ = diag(√q, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    keep: ComplexMatrix,
    reject: ComplexMatrix,
}

impl MeasurementSet {
    /// `M`, the outcome the purification protocol post-selects.
    pub fn keep(&self) -> &ComplexMatrix {
        &self.keep
    }

    /// `M̄`, the discarded outcome.
    pub fn reject(&self) -> &ComplexMatrix {
        &self.reject
    }

    pub fn as_channel(&self) -> KrausChannel {
        KrausChannel {
            operators: vec![self.keep.clone(), self.reject.clone()],
            arity: 1,
        }
    }
}

pub fn weak_measurement_ops(p: WeakMeasurementParams) -> MeasurementSet {
    let q = p.q();
    MeasurementSet {
        keep: ComplexMatrix::from_real_rows(&[&[(1.0 - q).sqrt(), 0.0], &[0.0, 1.0]]),
        reject: ComplexMatrix::from_real_rows(&[&[q.sqrt(), 0.0], &[0.0, 0.0]]),
    }
}

/// Applies the single-qubit operator `op` to every listed qubit and keeps
/// that branch: probability `Tr(Oρ O†)`, state renormalized.
pub fn apply_selective(rho: &DensityMatrix, op: &ComplexMatrix, targets: &[usize]) -> Result<Branch> {
    if op.rows() != 2 || op.cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.rows(),
        });
    }
    let n = rho.num_qubits();
    check_targets(targets, n)?;
    let mut m = rho.matrix().clone();
    for &t in targets {
        m = conjugate(&m, op, &[t], n);
    }
    Ok(Branch::from_unnormalized(n, &m, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::StateVector;
    use crate::states::w_state;
    use approx::assert_abs_diff_eq;

    fn basis_rho(n: usize, idx: usize) -> DensityMatrix {
        DensityMatrix::from_pure(&StateVector::basis(n, idx).unwrap())
    }

    fn diag_rho(entries: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diag(&entries.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn damping_limits() {
        let id = amplitude_damping(DampingParams::new(0.0).unwrap());
        assert_eq!(id.operators()[0], ComplexMatrix::identity(2));
        assert_eq!(id.operators()[1], ComplexMatrix::zeros(2, 2));

        let full = amplitude_damping(DampingParams::new(1.0).unwrap());
        let plus = StateVector::from_real(1, &[0.6, 0.8]).unwrap();
        let out = apply_channel(&DensityMatrix::from_pure(&plus), &full, &[0]).unwrap();
        assert!(out.matrix().max_abs_diff(basis_rho(1, 0).matrix()) < 1e-15);
    }

    #[test]
    fn damping_excited_state() {
        let ch = amplitude_damping(DampingParams::new(0.3).unwrap());
        let out = apply_channel(&basis_rho(1, 1), &ch, &[0]).unwrap();
        assert!(out.matrix().max_abs_diff(&diag_rho(&[0.3, 0.7])) < 1e-15);
    }

    #[test]
    fn damping_range() {
        assert!(DampingParams::new(-0.1).is_err());
        assert!(DampingParams::new(1.1).is_err());
        assert!(DampingParams::new(f64::NAN).is_err());
    }

    #[test]
    fn arity_mismatch() {
        let ch = amplitude_damping(DampingParams::new(0.3).unwrap());
        assert!(apply_channel(&basis_rho(2, 0), &ch, &[0, 1]).is_err());
    }

    #[test]
    fn rate_conversion() {
        assert_eq!(r_from_rate(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(r_from_rate(3.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(r_from_rate(2f64.ln(), 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(r_from_rate(-1.0, 1.0).is_err());
        assert!(r_from_rate(1.0, -1.0).is_err());
    }

    #[test]
    fn damped_w_on_third_qubit() {
        let r = 0.3;
        let ch = amplitude_damping(DampingParams::new(r).unwrap());
        let out = apply_channel(&DensityMatrix::from_pure(&w_state()), &ch, &[2]).unwrap();
        let w_ad =
            StateVector::from_real(3, &[0.0, (2.0 * (1.0 - r)).sqrt() / 2.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let mut expected = DensityMatrix::from_pure(&w_ad).into_matrix();
        expected[(0, 0)] += Complex64::new(r / 2.0, 0.0);
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn noisy_cnot_cases() {
        let ideal = noisy_cnot_apply(&basis_rho(2, 0b10), 0, 1, 1.0).unwrap();
        assert_eq!(ideal, basis_rho(2, 0b11));

        let mixed = noisy_cnot_apply(&basis_rho(2, 0b00), 0, 1, 0.0).unwrap();
        assert!(mixed.matrix().max_abs_diff(&diag_rho(&[0.25; 4])) < 1e-15);

        let partial = noisy_cnot_apply(&basis_rho(2, 0b10), 0, 1, 0.9).unwrap();
        assert!(partial.matrix().max_abs_diff(&diag_rho(&[0.025, 0.025, 0.025, 0.925])) < 1e-15);

        assert!(noisy_cnot_apply(&basis_rho(2, 0), 1, 1, 0.9).is_err());
    }

    #[test]
    fn readout_cases() {
        let [zero, one] = noisy_readout(&basis_rho(1, 0), 0, 1.0).unwrap();
        assert_eq!(zero.probability(), 1.0);
        assert!(one.is_empty());

        let [zero, one] = noisy_readout(&basis_rho(1, 0), 0, 0.9).unwrap();
        assert_abs_diff_eq!(zero.probability(), 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(one.probability(), 0.1, epsilon = 1e-15);
        // the flipped report still leaves the qubit in its true state
        assert_eq!(one.state().unwrap(), &basis_rho(1, 0));

        let plus = StateVector::from_real(1, &[0.6, 0.8]).unwrap();
        let [a, b] = noisy_readout(&DensityMatrix::from_pure(&plus), 0, 0.5).unwrap();
        assert_abs_diff_eq!(a.probability(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b.probability(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn weak_measurement_shapes() {
        let none = weak_measurement_ops(WeakMeasurementParams::new(0.0).unwrap());
        assert_eq!(none.keep(), &ComplexMatrix::identity(2));
        let proj = weak_measurement_ops(WeakMeasurementParams::new(1.0).unwrap());
        assert_eq!(proj.keep(), &diag_rho(&[0.0, 1.0]));
        let fig = weak_measurement_ops(WeakMeasurementParams::new(0.64).unwrap());
        assert!(fig.keep().max_abs_diff(&diag_rho(&[0.6, 1.0])) < 1e-15);
        assert!(fig.as_channel().completeness_defect() < COMPLETENESS_TOL);
        assert!(WeakMeasurementParams::new(1.5).is_err());
    }

    #[test]
    fn selective_cases() {
        let ops = weak_measurement_ops(WeakMeasurementParams::new(0.0).unwrap());
        let w = DensityMatrix::from_pure(&w_state());
        let b = apply_selective(&w, ops.keep(), &[0, 1, 2]).unwrap();
        assert_abs_diff_eq!(b.probability(), 1.0, epsilon = 1e-15);
        assert!(b.state().unwrap().matrix().max_abs_diff(w.matrix()) < 1e-15);

        let ops = weak_measurement_ops(WeakMeasurementParams::new(0.4).unwrap());
        let b = apply_selective(&basis_rho(1, 1), ops.reject(), &[0]).unwrap();
        assert!(b.is_empty());
        assert!(apply_selective(&w, &ComplexMatrix::identity(4), &[0]).is_err());
    }

    #[test]
    fn kraus_rejects_incomplete() {
        let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(KrausChannel::new(vec![half]).is_err());
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(KrausChannel::new(vec![ComplexMatrix::identity(2)]).is_ok());
    }
}
