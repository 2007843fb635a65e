//! Gate-level circuits: builder, protocol circuits, executors and a text
//! format.
//!
//! A [`Circuit`] is an ordered list of [`GateOp`]s over `num_qubits` qubits
//! (all starting in `|0⟩`) and `num_classical` classical bits (all starting at
//! 0). Three executors run it:
//!
//! * [`run_statevector`] for noise-free circuits, enumerating every
//!   measurement branch exactly;
//! * [`run_density`] for everything, including amplitude damping, noisy CNOTs
//!   and readout errors;
//! * [`sample_shots`], which draws seeded samples from the exact density-level
//!   outcome distribution.

mod exec;
mod library;
mod text;

pub use exec::{
    circuit_unitary, run_density, run_statevector, sample_shots, DensityBranch, PureBranch, PureRun, ShotResult,
    SHOT_RNG,
};
pub use library::{
    basis_change_circuit, basis_change_unitary, gadget_angle, gadget_effective_operators, gate_noise_fidelity,
    swap_branches, swap_circuit, swap_circuit_with, w_prep_circuit, w_prep_unitary, weak_measurement_gadget,
    BasisChange, CircuitSwapBranch, GateNoiseReport, Prep, SwapCircuitConfig,
};
pub use text::{parse_circuit, write_circuit};

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::channels::{cnot_matrix, DampingParams, GateNoiseParams};
use crate::error::{invalid, Error, Result};
use crate::qlinalg::{ComplexMatrix, MAX_QUBITS};

/// Tolerance for `U†U = I` when a unitary op is added to a circuit.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    X(usize),
    Z(usize),
    H(usize),
    Rx {
        qubit: usize,
        theta: f64,
    },
    Ry {
        qubit: usize,
        theta: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// Controlled single-qubit rotation. `gamma` is carried along but does
    /// not enter the matrix; see [`cu_matrix`].
    Cu {
        control: usize,
        target: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
        gamma: f64,
    },
    /// Arbitrary unitary; `targets[0]` is the most significant bit of the
    /// matrix index.
    Unitary {
        matrix: ComplexMatrix,
        targets: Vec<usize>,
    },
    Measure {
        qubit: usize,
        cbit: usize,
    },
    /// No-op separator between phases. An empty list spans every qubit.
    Barrier(Vec<usize>),
    /// Applies `op` when classical bit `cbit` is 1.
    Conditional {
        cbit: usize,
        op: Box<GateOp>,
    },
    /// Amplitude-damping channel with decay probability `r`. Only the
    /// density-matrix executor accepts it.
    AmplitudeDamping {
        qubit: usize,
        r: f64,
    },
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rx_matrix(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_vec(2, 2, vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]).expect("2x2")
}

pub fn ry_matrix(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[&[co, -s], &[s, co]])
}

pub fn hadamard() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]])
}

/// Controlled rotation as a 4×4 matrix indexed by `(target, control)`, the
/// target being the more significant bit. The rotation acts on the target
/// when the control is 1:
///
/// ```text
/// [1  0                      0  0                     ]
/// [0  e^{-i(φ+λ)/2} cos θ/2  0  -e^{-i(φ-λ)/2} sin θ/2]
/// [0  0                      1  0                     ]
/// [0  e^{i(φ-λ)/2} sin θ/2   0  e^{i(φ+λ)/2} cos θ/2  ]
/// ```
pub fn cu_matrix(theta: f64, phi: f64, lambda: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let sum = (phi + lambda) / 2.0;
    let diff = (phi - lambda) / 2.0;
    let mut m = ComplexMatrix::identity(4);
    m[(1, 1)] = Complex64::from_polar(co, -sum);
    m[(1, 3)] = -Complex64::from_polar(s, -diff);
    m[(3, 1)] = Complex64::from_polar(s, diff);
    m[(3, 3)] = Complex64::from_polar(co, sum);
    m
}

impl GateOp {
    /// Short upper-case name used by the text format.
    pub fn name(&self) -> &'static str {
        match self {
            Self::X(_) => "X",
            Self::Z(_) => "Z",
            Self::H(_) => "H",
            Self::Rx { .. } => "RX",
            Self::Ry { .. } => "RY",
            Self::Cnot { .. } => "CNOT",
            Self::Cu { .. } => "CU",
            Self::Unitary { .. } => "UNITARY",
            Self::Measure { .. } => "MEASURE",
            Self::Barrier(_) => "BARRIER",
            Self::Conditional { .. } => "IF",
            Self::AmplitudeDamping { .. } => "AD",
        }
    }

    /// Qubits the op touches (the inner op's qubits for a conditional).
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Self::X(q) | Self::Z(q) | Self::H(q) => vec![*q],
            Self::Rx { qubit, .. } | Self::Ry { qubit, .. } | Self::AmplitudeDamping { qubit, .. } => vec![*qubit],
            Self::Measure { qubit, .. } => vec![*qubit],
            Self::Cnot { control, target } | Self::Cu { control, target, .. } => vec![*control, *target],
            Self::Unitary { targets, .. } => targets.clone(),
            Self::Barrier(qs) => qs.clone(),
            Self::Conditional { op, .. } => op.qubits(),
        }
    }

    /// Matrix and the qubits it acts on, for the unitary kinds.
    pub fn unitary(&self) -> Option<(ComplexMatrix, Vec<usize>)> {
        let pauli_x = || ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let pauli_z = || ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        Some(match self {
            Self::X(q) => (pauli_x(), vec![*q]),
            Self::Z(q) => (pauli_z(), vec![*q]),
            Self::H(q) => (hadamard(), vec![*q]),
            Self::Rx { qubit, theta } => (rx_matrix(*theta), vec![*qubit]),
            Self::Ry { qubit, theta } => (ry_matrix(*theta), vec![*qubit]),
            Self::Cnot { control, target } => (cnot_matrix(), vec![*control, *target]),
            Self::Cu {
                control,
                target,
                theta,
                phi,
                lambda,
                ..
            } => (cu_matrix(*theta, *phi, *lambda), vec![*target, *control]),
            Self::Unitary { matrix, targets } => (matrix.clone(), targets.clone()),
            _ => return None,
        })
    }

    pub fn is_unitary_kind(&self) -> bool {
        !matches!(
            self,
            Self::Measure { .. } | Self::Barrier(_) | Self::Conditional { .. } | Self::AmplitudeDamping { .. }
        )
    }

    fn cnots(&self) -> usize {
        match self {
            Self::Cnot { .. } => 1,
            Self::Conditional { op, .. } => op.cnots(),
            _ => 0,
        }
    }

    fn params(&self) -> Vec<f64> {
        match self {
            Self::Rx { theta, .. } | Self::Ry { theta, .. } => vec![*theta],
            Self::Cu {
                theta,
                phi,
                lambda,
                gamma,
                ..
            } => vec![*theta, *phi, *lambda, *gamma],
            Self::AmplitudeDamping { r, .. } => vec![*r],
            _ => Vec::new(),
        }
    }

    fn remap(&self, qubits: &[usize], cbits: &[usize]) -> Self {
        let q = |i: &usize| qubits[*i];
        match self {
            Self::X(i) => Self::X(q(i)),
            Self::Z(i) => Self::Z(q(i)),
            Self::H(i) => Self::H(q(i)),
            Self::Rx { qubit, theta } => Self::Rx {
                qubit: q(qubit),
                theta: *theta,
            },
            Self::Ry { qubit, theta } => Self::Ry {
                qubit: q(qubit),
                theta: *theta,
            },
            Self::Cnot { control, target } => Self::Cnot {
                control: q(control),
                target: q(target),
            },
            Self::Cu {
                control,
                target,
                theta,
                phi,
                lambda,
                gamma,
            } => Self::Cu {
                control: q(control),
                target: q(target),
                theta: *theta,
                phi: *phi,
                lambda: *lambda,
                gamma: *gamma,
            },
            Self::Unitary { matrix, targets } => Self::Unitary {
                matrix: matrix.clone(),
                targets: targets.iter().map(q).collect(),
            },
            Self::Measure { qubit, cbit } => Self::Measure {
                qubit: q(qubit),
                cbit: cbits[*cbit],
            },
            Self::Barrier(qs) => Self::Barrier(qs.iter().map(q).collect()),
            Self::Conditional { cbit, op } => Self::Conditional {
                cbit: cbits[*cbit],
                op: Box::new(op.remap(qubits, cbits)),
            },
            Self::AmplitudeDamping { qubit, r } => Self::AmplitudeDamping { qubit: q(qubit), r: *r },
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Self::Conditional { cbit, op } = self {
            return write!(f, "IF c{cbit} {op}");
        }
        f.write_str(self.name())?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        match self {
            Self::Unitary { matrix, .. } => {
                for z in matrix.as_slice() {
                    write!(f, " {} {}", z.re, z.im)?;
                }
            }
            Self::Measure { cbit, .. } => write!(f, " -> {cbit}")?,
            _ => {
                for p in self.params() {
                    write!(f, " {p}")?;
                }
            }
        }
        Ok(())
    }
}

/// Classical register contents; bit 0 is printed first and is the most
/// significant bit of [`ClassicalBits::value`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalBits(Vec<bool>);

impl ClassicalBits {
    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, cbit: usize) -> bool {
        self.0[cbit]
    }

    pub fn set(&mut self, cbit: usize, value: bool) {
        self.0[cbit] = value;
    }

    /// Integer value of the listed bits, first listed bit most significant.
    pub fn value_of(&self, cbits: &[usize]) -> usize {
        cbits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(self.0[b]))
    }

    pub fn value(&self) -> usize {
        self.value_of(&(0..self.len()).collect::<Vec<_>>())
    }
}

impl fmt::Display for ClassicalBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    num_classical: usize,
    ops: Vec<GateOp>,
    noise: Option<GateNoiseParams>,
    written: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_classical: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(num_qubits));
        }
        Ok(Self {
            num_qubits,
            num_classical,
            ops: Vec::new(),
            noise: None,
            written: vec![false; num_classical],
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_classical(&self) -> usize {
        self.num_classical
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    /// Gate noise the density executor applies when none is passed in.
    pub fn noise(&self) -> Option<GateNoiseParams> {
        self.noise
    }

    pub fn set_noise(&mut self, noise: Option<GateNoiseParams>) {
        self.noise = noise;
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().map(GateOp::cnots).sum()
    }

    /// True if any op needs the density executor.
    pub fn has_channels(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, GateOp::AmplitudeDamping { .. }))
    }

    fn check_qubits(&self, qs: &[usize]) -> Result<()> {
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.num_qubits {
                return invalid(format!("qubit {q} out of range for {} qubits", self.num_qubits));
            }
            if qs[..k].contains(&q) {
                return invalid(format!("qubit {q} listed twice"));
            }
        }
        Ok(())
    }

    fn check_cbit(&self, cbit: usize) -> Result<()> {
        if cbit >= self.num_classical {
            return invalid(format!(
                "classical bit {cbit} out of range for {} bits",
                self.num_classical
            ));
        }
        Ok(())
    }

    fn validate(&self, op: &GateOp) -> Result<()> {
        self.check_qubits(&op.qubits())?;
        for p in op.params() {
            if !p.is_finite() {
                return invalid(format!("{} parameter {p} is not finite", op.name()));
            }
        }
        match op {
            GateOp::Unitary { matrix, targets } => {
                if targets.is_empty() {
                    return invalid("UNITARY needs at least one target");
                }
                let dim = 1usize << targets.len();
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: matrix.rows(),
                    });
                }
                if !matrix.is_unitary(UNITARY_TOL) {
                    return invalid("UNITARY matrix is not unitary");
                }
            }
            GateOp::Measure { cbit, .. } => self.check_cbit(*cbit)?,
            GateOp::Conditional { cbit, op } => {
                self.check_cbit(*cbit)?;
                if !self.written[*cbit] {
                    return invalid(format!(
                        "conditional reads classical bit {cbit} before any measurement writes it"
                    ));
                }
                if !op.is_unitary_kind() {
                    return invalid(format!("{} cannot be classically controlled", op.name()));
                }
                self.validate(op)?;
            }
            GateOp::AmplitudeDamping { r, .. } => {
                DampingParams::new(*r)?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Appends an op after checking indices, unitarity and that any
    /// conditional reads a bit some earlier measurement writes.
    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        self.validate(&op)?;
        if let GateOp::Measure { cbit, .. } = op {
            self.written[cbit] = true;
        }
        self.ops.push(op);
        Ok(self)
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self> {
        self.push(GateOp::X(q))
    }

    pub fn z(&mut self, q: usize) -> Result<&mut Self> {
        self.push(GateOp::Z(q))
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.push(GateOp::H(q))
    }

    pub fn rx(&mut self, qubit: usize, theta: f64) -> Result<&mut Self> {
        self.push(GateOp::Rx { qubit, theta })
    }

    pub fn ry(&mut self, qubit: usize, theta: f64) -> Result<&mut Self> {
        self.push(GateOp::Ry { qubit, theta })
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(GateOp::Cnot { control, target })
    }

    pub fn cu(
        &mut self,
        control: usize,
        target: usize,
        theta: f64,
        phi: f64,
        lambda: f64,
        gamma: f64,
    ) -> Result<&mut Self> {
        self.push(GateOp::Cu {
            control,
            target,
            theta,
            phi,
            lambda,
            gamma,
        })
    }

    pub fn unitary(&mut self, matrix: ComplexMatrix, targets: &[usize]) -> Result<&mut Self> {
        self.push(GateOp::Unitary {
            matrix,
            targets: targets.to_vec(),
        })
    }

    pub fn measure(&mut self, qubit: usize, cbit: usize) -> Result<&mut Self> {
        self.push(GateOp::Measure { qubit, cbit })
    }

    pub fn barrier(&mut self) -> Result<&mut Self> {
        self.push(GateOp::Barrier(Vec::new()))
    }

    pub fn conditional(&mut self, cbit: usize, op: GateOp) -> Result<&mut Self> {
        self.push(GateOp::Conditional { cbit, op: Box::new(op) })
    }

    pub fn amplitude_damping(&mut self, qubit: usize, r: f64) -> Result<&mut Self> {
        self.push(GateOp::AmplitudeDamping { qubit, r })
    }

    /// Appends every op of `other`, its qubit `i` mapped to `qubits[i]` and
    /// classical bit `j` to `cbits[j]`.
    pub fn compose(&mut self, other: &Circuit, qubits: &[usize], cbits: &[usize]) -> Result<&mut Self> {
        if qubits.len() != other.num_qubits || cbits.len() != other.num_classical {
            return invalid("compose needs one target index per qubit and classical bit");
        }
        for op in &other.ops {
            self.push(op.remap(qubits, cbits))?;
        }
        Ok(self)
    }
}
