//! Named states and measurement bases used by the swapping protocol.
//!
//! Kets are written with the register's first qubit leftmost, matching the
//! index convention of [`crate::qlinalg`]: `|100⟩` is index 4.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::qlinalg::{ComplexMatrix, StateVector};

/// Parameters of the asymmetric W family
/// `(|100⟩ + √n e^{iγ}|010⟩ + √(n+1) e^{iδ}|001⟩) / √(2+2n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WFamilyParams {
    /// Asymmetry, strictly positive.
    pub n: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl WFamilyParams {
    pub fn new(n: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self { n, gamma, delta };
        p.validate()?;
        Ok(p)
    }

    /// `n = 1` with zero phases: the state the protocol distributes.
    pub const fn standard() -> Self {
        Self {
            n: 1.0,
            gamma: 0.0,
            delta: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.n.is_finite() && self.n > 0.0) {
            return invalid(format!("W-family parameter n must be positive, got {}", self.n));
        }
        if !(self.gamma.is_finite() && self.delta.is_finite()) {
            return invalid("W-family phases must be finite");
        }
        Ok(())
    }

    fn is_standard(&self) -> bool {
        self.n == 1.0 && self.gamma == 0.0 && self.delta == 0.0
    }

    /// The three nonzero amplitudes `(1, √n e^{iγ}, ±√(n+1) e^{iδ})`, scaled.
    fn weights(&self) -> (Complex64, Complex64, Complex64) {
        let norm = 1.0 / (2.0 + 2.0 * self.n).sqrt();
        (
            Complex64::new(norm, 0.0),
            Complex64::from_polar(norm * self.n.sqrt(), self.gamma),
            Complex64::from_polar(norm * (self.n + 1.0).sqrt(), self.delta),
        )
    }
}

impl Default for WFamilyParams {
    fn default() -> Self {
        Self::standard()
    }
}

fn ket3(entries: &[(usize, Complex64)]) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    for &(idx, z) in entries {
        amps[idx] = z;
    }
    StateVector::new(3, amps).expect("3-qubit ket")
}

/// `½(|100⟩ + |010⟩ + √2|001⟩)`.
pub fn w_state() -> StateVector {
    w_family(WFamilyParams::standard()).expect("standard parameters are valid")
}

/// Member of the asymmetric W family.
pub fn w_family(p: WFamilyParams) -> Result<StateVector> {
    p.validate()?;
    let (a, b, c) = p.weights();
    Ok(ket3(&[(0b100, a), (0b010, b), (0b001, c)]))
}

/// The symmetric W state `(|100⟩ + |010⟩ + |001⟩)/√3`.
///
/// Kept only for contrast: swapping it through the four-outcome basis does
/// not give a correctable state on every outcome.
pub fn prototype_w() -> StateVector {
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    ket3(&[(0b100, a), (0b010, a), (0b001, a)])
}

/// Charlie's four named outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedOutcome {
    EtaPlus,
    EtaMinus,
    XiPlus,
    XiMinus,
}

impl NamedOutcome {
    pub const ALL: [NamedOutcome; 4] = [Self::EtaPlus, Self::EtaMinus, Self::XiPlus, Self::XiMinus];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NamedOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::EtaPlus => "eta+",
            Self::EtaMinus => "eta-",
            Self::XiPlus => "xi+",
            Self::XiMinus => "xi-",
        })
    }
}

/// Orthonormal 8-vector basis on Charlie's three qubits: the four named
/// outcome vectors followed by a fixed completion of the complement.
#[derive(Clone, Debug)]
pub struct CharlieBasis {
    outcomes: [StateVector; 4],
    completion: [StateVector; 4],
}

impl CharlieBasis {
    pub fn outcome(&self, which: NamedOutcome) -> &StateVector {
        &self.outcomes[which.index()]
    }

    pub fn outcomes(&self) -> &[StateVector; 4] {
        &self.outcomes
    }

    pub fn completion(&self) -> &[StateVector; 4] {
        &self.completion
    }

    /// All eight vectors: named outcomes in [`NamedOutcome::ALL`] order, then
    /// the completion.
    pub fn vectors(&self) -> impl Iterator<Item = &StateVector> {
        self.outcomes.iter().chain(self.completion.iter())
    }

    /// Gram matrix `G[i][j] = ⟨v_i|v_j⟩` of the eight vectors.
    pub fn gram_matrix(&self) -> ComplexMatrix {
        let vs: Vec<&StateVector> = self.vectors().collect();
        let mut g = ComplexMatrix::zeros(8, 8);
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                g[(i, j)] = a.inner(b).expect("same dimension");
            }
        }
        g
    }
}

/// Charlie's measurement basis for the given W-family parameters.
///
/// For the standard state the completion is the analytic set
/// `{(|010⟩−|001⟩)/√2, (|110⟩−|101⟩)/√2, |011⟩, |111⟩}`; otherwise it comes
/// from Gram–Schmidt over the computational basis in index order.
pub fn charlie_basis(p: WFamilyParams) -> Result<CharlieBasis> {
    p.validate()?;
    let (a, b, c) = p.weights();
    let outcomes = [
        ket3(&[(0b010, a), (0b001, b), (0b100, c)]),
        ket3(&[(0b010, a), (0b001, b), (0b100, -c)]),
        ket3(&[(0b110, a), (0b101, b), (0b000, c)]),
        ket3(&[(0b110, a), (0b101, b), (0b000, -c)]),
    ];
    let completion = if p.is_standard() {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let one = Complex64::new(1.0, 0.0);
        [
            ket3(&[(0b010, h), (0b001, -h)]),
            ket3(&[(0b110, h), (0b101, -h)]),
            ket3(&[(0b011, one)]),
            ket3(&[(0b111, one)]),
        ]
    } else {
        gram_schmidt_completion(&outcomes)
    };
    Ok(CharlieBasis { outcomes, completion })
}

fn gram_schmidt_completion(outcomes: &[StateVector; 4]) -> [StateVector; 4] {
    let mut span: Vec<StateVector> = outcomes.to_vec();
    for idx in 0..8 {
        if span.len() == 8 {
            break;
        }
        let mut v = StateVector::basis(3, idx).expect("3-qubit basis");
        // two sweeps keep the result orthogonal to machine precision
        for _ in 0..2 {
            for u in &span {
                let coeff = u.inner(&v).expect("same dimension");
                let amps = v
                    .amplitudes()
                    .iter()
                    .zip(u.amplitudes())
                    .map(|(x, y)| x - coeff * y)
                    .collect();
                v = StateVector::new(3, amps).expect("3-qubit ket");
            }
        }
        if v.norm_sqr().sqrt() > 1e-8 {
            span.push(v.normalized().expect("nonzero"));
        }
    }
    let completion: Vec<StateVector> = span.split_off(4);
    completion
        .try_into()
        .expect("complement of a 4-dim subspace of C^8 is 4-dim")
}

/// Single-qubit correction operators available to Bob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Z,
    /// The product `σ_x σ_z` (apply `Z` first, then `X`).
    XZ,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        let rows: [&[f64]; 2] = match self {
            Pauli::I => [&[1.0, 0.0], &[0.0, 1.0]],
            Pauli::X => [&[0.0, 1.0], &[1.0, 0.0]],
            Pauli::Z => [&[1.0, 0.0], &[0.0, -1.0]],
            Pauli::XZ => [&[0.0, -1.0], &[1.0, 0.0]],
        };
        ComplexMatrix::from_real_rows(&rows)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Z => "Z",
            Pauli::XZ => "XZ",
        })
    }
}

pub fn pauli(sym: Pauli) -> ComplexMatrix {
    sym.matrix()
}
