//! Synthesis and characterization of dual-unitary and 2-unitary two-qudit
//! gates.
//!
//! Random seeds drawn from the circular unitary ensemble are pushed toward
//! maximal operator entanglement by the nonlinear maps in [`maps`]: a
//! linear index reshuffle followed by projection onto the nearest unitary.
//! [`measures`] provides the invariants used to track and classify the
//! results, [`cartan`] the two-qubit Weyl-chamber picture, [`gates`] a set
//! of reference gates, and [`ensemble`] batch runs over many seeds.

pub mod cartan;
pub mod ensemble;
pub mod error;
pub mod gates;
pub mod io;
pub mod maps;
pub mod measures;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use maps::{apply_map, iterate, nearest_unitary, IterateOptions, IterationTrace, MapKind, StopReason};
pub use measures::{
    classify, entangling_power, measure, op_entanglement, op_entanglement_swapped, GateClass,
    GateLabel, MeasureRecord,
};
pub use sampling::{cue_sample, RngSeed};
pub use tensor::{BipartiteUnitary, CMatrix, C64};
