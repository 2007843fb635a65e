use num_complex::Complex64;

use super::{check_permutation, check_register, check_targets, permuted_index, ComplexMatrix, Layout, STATE_TOL};
use crate::error::{invalid, Error, Result};

/// Pure state of a qubit register (qubit 0 is the most significant index bit).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes. The vector is not renormalized; see
    /// [`StateVector::normalized`].
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("amplitudes must be finite");
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn from_real(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(num_qubits, amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis state with the given register index.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_register(num_qubits)?;
        if index >= 1 << num_qubits {
            return invalid(format!("basis index {index} out of range"));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= STATE_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return invalid("cannot normalize the zero vector");
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Computational-basis probabilities `|a_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        check_register(n)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Applies `op` to the listed qubits.
    pub fn apply(&self, op: &ComplexMatrix, targets: &[usize]) -> Result<Self> {
        check_targets(targets, self.num_qubits)?;
        let dim = 1usize << targets.len();
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.rows(),
            });
        }
        let layout = Layout::new(targets, self.num_qubits);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
        for &base in &layout.bases {
            for (s, g) in gathered.iter_mut().enumerate() {
                *g = self.amplitudes[base + layout.offsets[s]];
            }
            for (sp, &off) in layout.offsets.iter().enumerate() {
                out[base + off] = gathered.iter().enumerate().map(|(s, g)| op[(sp, s)] * g).sum();
            }
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amplitudes: out,
        })
    }

    /// Relabels qubits: old qubit `o` moves to position `perm[o]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            amplitudes[permuted_index(i, perm)] = a;
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amplitudes,
        })
    }

    /// Largest amplitude difference after removing the global phase that
    /// best aligns `other` to `self`.
    pub fn distance_up_to_phase(&self, other: &Self) -> Result<f64> {
        let ip = other.inner(self)?;
        let phase = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_swaps_ends() {
        let psi = StateVector::basis(3, 0b100).unwrap();
        let out = psi.permute_qubits(&[2, 1, 0]).unwrap();
        assert_eq!(out, StateVector::basis(3, 0b001).unwrap());
    }

    #[test]
    fn identity_permutation() {
        let psi = StateVector::from_real(2, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(psi.permute_qubits(&[0, 1]).unwrap(), psi);
    }

    #[test]
    fn apply_cnot_non_adjacent() {
        let cnot = ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        let psi = StateVector::basis(3, 0b100).unwrap();
        let out = psi.apply(&cnot, &[0, 2]).unwrap();
        assert_eq!(out, StateVector::basis(3, 0b101).unwrap());
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(StateVector::from_real(2, &[1.0, 0.0]).is_err());
        assert!(StateVector::basis(2, 4).is_err());
        assert!(StateVector::zero(11).is_err());
    }

    #[test]
    fn phase_distance() {
        let psi = StateVector::from_real(1, &[0.6, 0.8]).unwrap();
        let rotated = psi.scaled(Complex64::new(0.0, 1.0));
        assert!(psi.distance_up_to_phase(&rotated).unwrap() < 1e-15);
    }
}
