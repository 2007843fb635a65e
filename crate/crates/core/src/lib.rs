//! Few-qubit density-matrix simulator for deterministic W-state entanglement
//! swapping.
//!
//! Two parties each hold the W state `½(|100⟩ + |010⟩ + √2|001⟩)`. A relay
//! measures three of the six qubits in a four-outcome W-type basis and one
//! Pauli correction on the receiving qubit leaves the remaining three qubits
//! in the same W state, whatever the outcome. The crate simulates that
//! protocol at the matrix level ([`protocol`]) and gate level ([`circuit`]),
//! with amplitude damping, imperfect CNOT and readout noise ([`channels`]),
//! and weak-measurement purification. Closed-form expressions for every
//! fidelity and probability live in [`protocol::oracle`] and are checked
//! against simulation.
//!
//! ```
//! use wswap::protocol::{damped_swap, oracle};
//! use wswap::states::NamedOutcome;
//!
//! let result = damped_swap(0.3)?;
//! let eta = result.branch(NamedOutcome::EtaPlus);
//! let report = oracle(0.3, 0.0)?;
//! assert!((eta.fidelity.unwrap() - report.fid_ad).abs() < 1e-12);
//! # Ok::<(), wswap::Error>(())
//! ```

pub mod channels;
pub mod circuit;
pub mod error;
pub mod protocol;
pub mod qlinalg;
pub mod states;

pub use error::{Error, Result};

// The guide's Rust snippets run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/swapping.md")]
    mod swapping {}
    #[doc = include_str!("../../../book/src/damping.md")]
    mod damping {}
    #[doc = include_str!("../../../book/src/purification.md")]
    mod purification {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/gate-noise.md")]
    mod gate_noise {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/plotting.md")]
    mod plotting {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
