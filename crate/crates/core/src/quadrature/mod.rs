//! Integration against σ and λ, the matrix Schur test and Rudin–Forelli integrals.

pub mod gauss;
pub mod rudin_forelli;
pub mod rule;
pub mod schur;

pub use rudin_forelli::{check_integrable, default_z_grid, rudin_forelli, RfPoint, RfReport, RfResolution};
pub use rule::{build_rule, radial_rule, PolarRule, QuadratureRule, RadialRule};
pub use schur::{parse_kernel_file, schur_test, schur_test_with, MatrixKernelSample, SchurBound};
