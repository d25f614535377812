//! Exact simulation of truncated lattice QED viewed as a quantum
//! error-correcting code.
//!
//! Links carry `Z_D` flux qudits, sites carry staggered-fermion qubits, and
//! the Gauss constraints define the code space. The crate builds spanning-tree
//! and fermion reference frames, checks Knill-Laflamme conditions on error
//! sets, runs syndrome-measurement recovery and searches for the smallest
//! gauge-invariant flux-shift operator.
//!
//! ```
//! use std::sync::Arc;
//!
//! use gaugecode::qecc::{error_set_tree_u, evaluate_recovery, RecoveryPlan};
//! use gaugecode::{Boundary, HilbertSpace, Lattice, SpanningTree, TreeQrf, Truncation};
//!
//! let lattice = Arc::new(Lattice::new(&[2, 2], Boundary::Smooth)?);
//! let space = HilbertSpace::new(lattice.clone(), Truncation::new(3, false)?)?;
//! let frame = TreeQrf::new(&space, SpanningTree::new(&lattice, 0)?)?;
//!
//! let errors = error_set_tree_u(&frame);
//! let plan = RecoveryPlan::tree(&frame);
//! let report = evaluate_recovery(&errors, &plan, &frame.holonomy_basis()?, 20, 7)?;
//! assert!(report.worst > 1.0 - 1e-9);
//! # Ok::<(), gaugecode::Error>(())
//! ```

pub mod error;
pub mod gauge;
pub mod hamiltonian;
pub mod hilbert;
pub mod lattice;
pub mod qecc;
pub mod qrf;

pub use error::{Error, Result};
pub use gauge::{ChargeVector, ConstraintSet, Measurement};
pub use hamiltonian::{HamiltonianParams, HamiltonianTerms};
pub use hilbert::{HilbertSpace, LinearOperator, Monomial, StateVector, Truncation};
pub use lattice::{Boundary, Lattice, Path, SpanningTree};
pub use qrf::{FermionQrf, ReductionMap, TreeQrf};
