use num_complex::Complex64;

use super::{
    check_permutation, check_register, check_targets, conjugate, hermitian_eigenvalues, partial_trace_raw,
    permuted_index, ComplexMatrix, StateVector, PROB_FLOOR, STATE_TOL,
};
use crate::error::{invalid, Error, Result};

/// Density operator on `num_qubits` qubits: Hermitian with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (both within `1e-10`). Positivity
    /// is not checked here; see [`DensityMatrix::min_eigenvalue`].
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.rows(),
            });
        }
        if !matrix.is_finite() {
            return invalid("density matrix has non-finite entries");
        }
        if !matrix.is_hermitian(STATE_TOL) {
            return invalid("density matrix is not Hermitian");
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return invalid(format!("density matrix trace is {tr}, expected 1"));
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self {
            num_qubits: psi.num_qubits(),
            matrix: ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
        }
    }

    /// Maximally mixed state `I/2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1usize << num_qubits;
        Ok(Self {
            num_qubits,
            matrix: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Normalizes an operator that is only known to be positive: the result
    /// is Hermitian-symmetrized and divided by its trace. Returns `None` when
    /// the trace is below the probability floor.
    pub(crate) fn normalize_unchecked(num_qubits: usize, matrix: &ComplexMatrix) -> (f64, Option<Self>) {
        let tr = matrix.trace().re;
        if tr < PROB_FLOOR {
            return (0.0, None);
        }
        let sym = matrix.add(&matrix.adjoint()).expect("square");
        let state = Self {
            num_qubits,
            matrix: sym.scale(Complex64::new(0.5 / tr, 0.0)),
        };
        (tr, Some(state))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).expect("square").trace().re
    }

    /// Diagonal entries: computational-basis populations.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            num_qubits: self.num_qubits + other.num_qubits,
            matrix: self.matrix.kron(&other.matrix)?,
        })
    }

    /// `U ρ U†` with `U` acting on `targets`.
    pub fn apply_unitary(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        check_targets(targets, self.num_qubits)?;
        let dim = 1usize << targets.len();
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.rows(),
            });
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            matrix: conjugate(&self.matrix, op, targets, self.num_qubits),
        })
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return invalid("partial trace must keep at least one qubit");
        }
        check_targets(keep, self.num_qubits)?;
        Ok(Self {
            num_qubits: keep.len(),
            matrix: partial_trace_raw(&self.matrix, keep, self.num_qubits),
        })
    }

    /// Relabels qubits: old qubit `o` moves to position `perm[o]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.num_qubits)?;
        let dim = self.dim();
        let map: Vec<usize> = (0..dim).map(|i| permuted_index(i, perm)).collect();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            matrix: out,
        })
    }

    /// Smallest eigenvalue; a valid state has this `≥ -PSD_TOL`.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).expect("square")[0]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix).expect("square")
    }
}

/// Outcome of a selective operation: a normalized state and the probability
/// of having landed in it.
///
/// A branch whose probability fell below [`PROB_FLOOR`] carries no state;
/// callers must handle that case instead of dividing by zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    probability: f64,
    state: Option<DensityMatrix>,
}

impl Branch {
    pub fn new(state: DensityMatrix, probability: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1e-12).contains(&probability) {
            return invalid(format!("branch probability {probability} outside [0, 1]"));
        }
        if probability < PROB_FLOOR {
            return Ok(Self::empty());
        }
        Ok(Self {
            probability,
            state: Some(state),
        })
    }

    pub fn empty() -> Self {
        Self {
            probability: 0.0,
            state: None,
        }
    }

    /// Builds a branch from an unnormalized post-measurement operator whose
    /// trace is the branch weight (relative to `scale`).
    pub(crate) fn from_unnormalized(num_qubits: usize, matrix: &ComplexMatrix, scale: f64) -> Self {
        match DensityMatrix::normalize_unchecked(num_qubits, matrix) {
            (tr, Some(state)) if tr * scale >= PROB_FLOOR => Self {
                probability: (tr * scale).min(1.0),
                state: Some(state),
            },
            _ => Self::empty(),
        }
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_none()
    }

    pub fn state(&self) -> Option<&DensityMatrix> {
        self.state.as_ref()
    }

    /// The state, or [`Error::EmptyBranch`].
    pub fn require_state(&self) -> Result<&DensityMatrix> {
        self.state.as_ref().ok_or(Error::EmptyBranch)
    }

    pub fn into_state(self) -> Option<DensityMatrix> {
        self.state
    }

    pub(crate) fn map_state(self, f: impl FnOnce(DensityMatrix) -> Result<DensityMatrix>) -> Result<Self> {
        Ok(match self.state {
            Some(state) => Self {
                probability: self.probability,
                state: Some(f(state)?),
            },
            None => self,
        })
    }
}
