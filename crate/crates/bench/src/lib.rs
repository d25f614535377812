//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use gaugecode::{Boundary, HilbertSpace, Lattice, SpanningTree, StateVector, TreeQrf, Truncation};

pub fn space(dims: &[usize], boundary: Boundary, d: u32, matter: bool) -> Arc<HilbertSpace> {
    let lat = Arc::new(Lattice::new(dims, boundary).expect("valid lattice"));
    HilbertSpace::new(lat, Truncation::new(d, matter).expect("valid truncation")).expect("space fits")
}

pub fn tree_qrf(dims: &[usize], boundary: Boundary, d: u32) -> TreeQrf {
    let h = space(dims, boundary, d, false);
    let tree = SpanningTree::new(h.lattice(), 0).expect("vertex 0 exists");
    TreeQrf::new(&h, tree).expect("pure gauge space")
}

/// Holonomy eigenstates of `q`, at most `cap` of them.
pub fn holonomy_states(q: &TreeQrf, cap: usize) -> Vec<StateVector> {
    q.holonomy_labels().iter().take(cap).map(|t| q.holonomy_basis_state(t).expect("grid label")).collect()
}
