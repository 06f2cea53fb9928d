//! Clifford modules, spin lifts, Haar quadrature and isotypic decomposition.

pub mod branching;
pub mod clifford;
pub mod group;
pub mod rep;
pub mod spin;

pub use branching::{branching_report, isotypic_projections, BranchingReport, IsotypicProjection};
pub use clifford::{build_clifford, CliffordModel};
pub use group::{haar_quadrature, GroupSample};
pub use rep::{exterior_rep, restrict_to_stabilizer, GroupLabel, RepresentationTable};
pub use spin::{conjugation_rep, spin_lift, spin_rep};
