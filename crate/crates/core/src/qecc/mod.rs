//! Error sets, Knill-Laflamme checks, recovery protocols, fidelity sweeps and
//! the U-distance search.

mod distance;
mod errors;
mod fidelity;
mod kl;
mod recovery;

pub use distance::{u_distance, DistanceReport, WeightStats, Witness};
pub use errors::{
    build_aq_tree, build_aq_tree_character, error_set_a, error_set_combined, error_set_fermion_gauge_fix,
    error_set_single_u, error_set_tree_gauge_fix, error_set_tree_u, op_a, single_u_exponents, tree_sector_projector,
    ErrorLabel, ErrorSet,
};
pub use fidelity::{evaluate_recovery, ErrorFidelity, FidelityReport};
pub use kl::{kl_check, KlReport};
pub use recovery::{
    recover_combined, recover_fermion, recover_single_link, recover_tree, tree_chain, Correction, Event, Pairing,
    Protocol, RecoveryPlan, RecoveryResult, WilsonLineRecord,
};
