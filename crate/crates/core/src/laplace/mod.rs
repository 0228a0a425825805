//! Analytic route: transform-domain amplitudes, their poles, and the inverse
//! transform as a residue sum plus a branch-cut integral.

mod dressed;
mod inversion;
mod poles;
mod transform;

pub use dressed::{find_poles, tabulated_numerators, spectral_functions, table_residues};
pub use inversion::{amplitudes_analytic, branch_cut_integral, check_times as check_times_public, residue_sum, InversionPlan};
pub use poles::{inversion_poles, FunctionTag, Pole, PoleClass, PoleSet, POLE_MERGE_TOLERANCE};
pub use transform::{
    adjugate, symmetric_factor, system_matrix, transform_amplitudes, transform_amplitudes_on, TransformAmplitudes,
};
