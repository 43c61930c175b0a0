//! Performance-estimation programs: worst-case regret of a fixed schedule,
//! its Lagrange duals, joint schedule optimisation and potential design.

mod gram;
mod joint;
mod potential;
mod tight;

pub use gram::{
    ConstraintKey, ConstraintTag, Direction, DualCertificate, GramBasis, GramConstraint, GramSdp,
    GramSolution, LinearConstraint, LmiSdp, LmiSolution, LmiVar, Point, SymSparse,
};
pub use joint::{
    build_joint_opt, recover_params, JointOptions, JointProgram, JointSolution, Recovered,
};
pub use potential::{build_potential_design, PotentialProgram, PotentialSolution};
pub use tight::{
    build_dual, build_primal, build_relaxed_dual, domain_points, primal_trace_bound, DualProgram,
    Lifting,
};
