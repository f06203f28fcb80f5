//! Spectral side: the twisted eigenvalue, the aggregate S(s), A(s) and the
//! constants that feed the asymptotic targets.

pub mod aggregate;
pub mod aperiodic;
pub mod constants;
pub mod eigen;
pub mod expansion;
pub mod sample;

pub use aggregate::{a_monte_carlo, a_of_s, wrap, AMethod, AValue, Aggregator, SValue, DEFAULT_S_TOL};
pub use eigen::{cexpm1, Eigen, EigenValue};
pub use constants::{c_p, compute_constants, ConstantsReport, ScalarLimits, Tagged};
pub use expansion::{verify_eigenvalue_expansion, BoundaryDrift, ExpansionConfig, ExpansionReport, PowerFit};
pub use aperiodic::{aperiodicity_scan, spectral_sweep, AperiodicityConfig, AperiodicityReport, SweepRow};
pub use sample::{spectral_sample, SpectralSample};
