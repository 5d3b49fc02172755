//! Exact arithmetic for Siegel series, local densities and the Fourier
//! coefficients of Kohnen-type lifts.

pub mod exact_algebra;
pub mod padic_forms;
pub mod local_density;
pub mod siegel_series;
pub mod lattice_enum;
pub mod modular_forms;
pub mod km_pipeline;
