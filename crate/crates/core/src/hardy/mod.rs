//! Weighted Hardy norms `‖f‖_{H^p_u}` and the convergence experiments built on them.

mod experiments;
mod norms;

pub use experiments::{
    canonical_ball_experiment, density_study, dilation_study, norm_comparison, section_tail, strict_inclusion_study,
    weakstar_study, NormComparison,
};
pub use norms::{
    membership, norm_boundary, norm_boundary_trace, norm_levels, norm_riesz, schedule_membership, LevelsLimit, Membership,
    NormResult, NormRoute, Verdict,
};
