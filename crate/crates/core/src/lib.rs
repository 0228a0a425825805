//! Entanglement dynamics of two V-type atoms coupled to the band edge of an
//! isotropic photonic crystal, with direct dipole-dipole exchange.
//!
//! Two independent time-domain engines are provided: an analytic inversion of
//! the transform-domain amplitudes ([`laplace`]) and a discretized-bath
//! integrator ([`bath`]). Both feed [`entanglement`], which turns amplitudes
//! into negativity series.

pub mod bath;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod kernel;
pub mod laplace;
pub mod presets;
pub mod quadrature;
pub mod scenario;
pub mod trajectory;

pub use num_complex::Complex64;

pub use bath::{build_bath, integrate, mode_spectrum, DiscreteBath, OracleRun};
pub use config::{preset_initial, validate, Engine, InitialKind, InitialState, RunConfig, SystemConfig};
pub use entanglement::{
    entanglement_series, log_negativity, partial_transpose_b, reduced_density_matrix, AtomDensityMatrix,
    EntanglementSeries,
};
pub use error::{Error, Result};
pub use kernel::{beta_prime, kernel_values, memory_kernel, spectral_density, KernelValue, Sheet};
pub use laplace::{
    amplitudes_analytic, branch_cut_integral, find_poles, inversion_poles, residue_sum, spectral_functions,
    transform_amplitudes, FunctionTag, Pole, PoleClass, PoleSet, TransformAmplitudes,
};
pub use presets::{preset, preset_names, FigurePreset, PresetKind};
pub use trajectory::AmplitudeTrajectory;
pub use scenario::{run_pipeline, RunOptions, RunOutcome, SweepParam};
