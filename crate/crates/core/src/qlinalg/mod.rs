//! Dense complex linear algebra on small qubit registers.
//!
//! Basis convention: in a `k`-qubit register, qubit 0 is the **most
//! significant** bit of the basis index. The ket `|b0 b1 … b(k-1)⟩` therefore
//! has index `b0·2^(k-1) + … + b(k-1)`, so `|100⟩` is index 4 and `|001⟩` is
//! index 1. Every module in the crate uses this ordering.
//!
//! Operators on subsets of qubits are applied in place by index arithmetic
//! (see [`embed`] for the explicit matrix); nothing builds permutation
//! matrices.

mod density;
mod matrix;
mod state;

pub use density::{Branch, DensityMatrix};
pub use matrix::ComplexMatrix;
pub use state::StateVector;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Largest register any operation will build.
pub const MAX_QUBITS: usize = 10;

/// Tolerance for normalization and Hermiticity checks.
pub const STATE_TOL: f64 = 1e-10;

/// Slack allowed below zero for density-matrix eigenvalues.
pub const PSD_TOL: f64 = 1e-9;

/// Branch probabilities below this are treated as exactly zero.
pub const PROB_FLOOR: f64 = 1e-12;

#[inline]
pub(crate) fn shift(qubit: usize, n: usize) -> usize {
    n - 1 - qubit
}

pub(crate) fn check_register(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(())
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    if targets.is_empty() {
        return invalid("target list is empty");
    }
    for (k, &t) in targets.iter().enumerate() {
        if t >= n {
            return invalid(format!("qubit {t} out of range for {n}-qubit register"));
        }
        if targets[..k].contains(&t) {
            return invalid(format!("qubit {t} listed twice"));
        }
    }
    Ok(())
}

/// Index offsets of a target subset inside an `n`-qubit register.
///
/// `offsets[s]` is the register index contribution of sub-index `s` (with
/// `targets[0]` as the most significant bit of `s`), and `bases` enumerates
/// every register index whose target bits are all zero.
pub(crate) struct Layout {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

impl Layout {
    pub fn new(targets: &[usize], n: usize) -> Self {
        let m = targets.len();
        let offsets = (0..1usize << m)
            .map(|s| {
                targets
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &t)| acc | (((s >> (m - 1 - k)) & 1) << shift(t, n)))
            })
            .collect();
        let mask: usize = targets.iter().map(|&t| 1 << shift(t, n)).sum();
        let bases = (0..1usize << n).filter(|i| i & mask == 0).collect();
        Self { offsets, bases }
    }
}

fn check_local_op(op: &ComplexMatrix, targets: &[usize], n: usize) -> Result<()> {
    check_targets(targets, n)?;
    let dim = 1usize << targets.len();
    if op.rows() != dim || op.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.rows(),
        });
    }
    Ok(())
}

/// `(op on targets) · m` for a matrix whose rows index an `n`-qubit register.
pub(crate) fn apply_left(m: &ComplexMatrix, op: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let layout = Layout::new(targets, n);
    let dim = layout.offsets.len();
    let cols = m.cols();
    let mut out = ComplexMatrix::zeros(m.rows(), cols);
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
    for &base in &layout.bases {
        for col in 0..cols {
            for (s, g) in gathered.iter_mut().enumerate() {
                *g = src[(base + layout.offsets[s]) * cols + col];
            }
            for (sp, &off) in layout.offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, g) in gathered.iter().enumerate() {
                    acc += op[(sp, s)] * g;
                }
                dst[(base + off) * cols + col] = acc;
            }
        }
    }
    out
}

/// `m · (op on targets)†` for a matrix whose columns index an `n`-qubit register.
pub(crate) fn apply_right_adjoint(m: &ComplexMatrix, op: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let layout = Layout::new(targets, n);
    let dim = layout.offsets.len();
    let cols = m.cols();
    let mut out = ComplexMatrix::zeros(m.rows(), cols);
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
    for row in 0..m.rows() {
        for &base in &layout.bases {
            for (s, g) in gathered.iter_mut().enumerate() {
                *g = src[row * cols + base + layout.offsets[s]];
            }
            for (sp, &off) in layout.offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (s, g) in gathered.iter().enumerate() {
                    acc += g * op[(sp, s)].conj();
                }
                dst[row * cols + base + off] = acc;
            }
        }
    }
    out
}

/// `op ρ op†` with `op` acting on `targets`.
pub(crate) fn conjugate(m: &ComplexMatrix, op: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    apply_right_adjoint(&apply_left(m, op, targets, n), op, targets, n)
}

/// `Tr_targets(ρ) ⊗ I/2^m`, with the maximally mixed factor left in place on
/// the target qubits.
pub(crate) fn depolarize(m: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let layout = Layout::new(targets, n);
    let dim = 1usize << n;
    let weight = 1.0 / layout.offsets.len() as f64;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for &bi in &layout.bases {
        for &bj in &layout.bases {
            let sum: Complex64 = layout.offsets.iter().map(|&off| m[(bi + off, bj + off)]).sum();
            for &off in &layout.offsets {
                out[(bi + off, bj + off)] = sum * weight;
            }
        }
    }
    out
}

/// Reduced operator on `keep` (in the given order) of an `n`-qubit operator.
pub(crate) fn partial_trace_raw(m: &ComplexMatrix, keep: &[usize], n: usize) -> ComplexMatrix {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept = Layout::new(keep, n).offsets;
    let gone = if traced.is_empty() {
        vec![0]
    } else {
        Layout::new(&traced, n).offsets
    };
    let dim = kept.len();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (a, &ka) in kept.iter().enumerate() {
        for (b, &kb) in kept.iter().enumerate() {
            out[(a, b)] = gone.iter().map(|&t| m[(ka + t, kb + t)]).sum();
        }
    }
    out
}

/// `⟨v|ρ|v⟩` with `v` on `targets`: the unnormalized post-projection operator
/// on the remaining qubits, in ascending order.
pub(crate) fn contract_pure(m: &ComplexMatrix, v: &[Complex64], targets: &[usize], n: usize) -> ComplexMatrix {
    let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
    let t_off = Layout::new(targets, n).offsets;
    let r_off = Layout::new(&rest, n).offsets;
    let dim = r_off.len();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (a, &ra) in r_off.iter().enumerate() {
        for (b, &rb) in r_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &ts) in t_off.iter().enumerate() {
                let mut inner = Complex64::new(0.0, 0.0);
                for (sp, &tsp) in t_off.iter().enumerate() {
                    inner += m[(ra + ts, rb + tsp)] * v[sp];
                }
                acc += v[s].conj() * inner;
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Register index after moving old qubit `o` to position `perm[o]`.
pub(crate) fn permuted_index(i: usize, perm: &[usize]) -> usize {
    let n = perm.len();
    perm.iter().enumerate().fold(0, |acc, (old, &new)| {
        acc | (((i >> shift(old, n)) & 1) << shift(new, n))
    })
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return invalid("qubit permutation is not a bijection");
        }
        seen[p] = true;
    }
    Ok(())
}

/// Full `2^total`-dimensional operator acting as `op` on `targets` (in that
/// order, `targets[0]` most significant for `op`) and as identity elsewhere.
pub fn embed(op: &ComplexMatrix, targets: &[usize], total: usize) -> Result<ComplexMatrix> {
    check_register(total)?;
    check_local_op(op, targets, total)?;
    Ok(apply_left(&ComplexMatrix::identity(1 << total), op, targets, total))
}

/// Kronecker product of two matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.kron(b)
}

/// Partial trace keeping the listed qubits, in the listed order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn pure_fidelity(target: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if target.num_qubits() != rho.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: target.num_qubits(),
            found: rho.num_qubits(),
        });
    }
    let psi = target.amplitudes();
    let rho_psi = rho.matrix().mul_vec(psi)?;
    let value: Complex64 = psi.iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum();
    Ok(value.re)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return invalid("eigenvalues need a square matrix");
    }
    let n = m.rows();
    let dm = nalgebra::DMatrix::from_row_slice(n, n, m.as_slice());
    let mut values: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: a.num_qubits(),
            found: b.num_qubits(),
        });
    }
    let diff = a.matrix().sub(b.matrix())?;
    Ok(0.5 * hermitian_eigenvalues(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}
