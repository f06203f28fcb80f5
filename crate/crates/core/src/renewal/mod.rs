//! Fourier inversion against the Fejér pair, the weighted measures ν_u, and
//! the large-t limit that produces the smooth-tail constant.

pub mod fga;
pub mod inversion;
pub mod kernel;
pub mod measure;
pub mod tent;

pub use fga::{fga_limit, m_of_t, FgaReport, FgaRow, MRule, DEFAULT_MAX_PANELS};
pub use inversion::{inversion_batch, inversion_check, InversionCase, InversionResult};
pub use kernel::{kernel_eval, KernelPair, KernelWhich};
pub use measure::{CauchyPoint, WeightedTauMeasure};
pub use tent::{g0, lipschitz_check, tent, tent_laplace, tent_laplace_check, tent_laplace_quadrature, LipschitzReport, TentRow};
