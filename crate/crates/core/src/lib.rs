//! Numerical laboratory for cosine operator families and semigroups on
//! finite-dimensional complex spaces.
//!
//! Every routine is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`). Concrete aliases for both are exported at the crate root.

pub mod error;
pub mod family;
pub mod laws;
pub mod linalg;
pub mod quadrature;
pub mod resolvent;
pub mod sample;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use family::{
    growth_bound_estimate, CosineFamily, Evolution, FamilyKind, Generator, GrowthBound, Semigroup, SeriesControl,
};
pub use laws::{
    classify, default_global_horizon, diag_cosine_example, extension_family, limsup_zero_estimate, norm_profile, scalar_distance_profile,
    scalar_distance_sup, ExtensionFamily, LawId, LawVerdict, NormProfile, ProfileKind, ProfilePoint,
};
pub use linalg::{eigenvalues, inverse, op_norm, resolvent, singular_values, solve, ComplexMatrix, MatrixFile};
pub use num_complex::Complex;
pub use quadrature::QuadratureRule;
pub use resolvent::{
    cesaro_check, cosine_laplace_bound_check, laplace_resolvent, resolvent_identity_residual, resolvent_via_s, s_norm_bound_check, s_operator,
    CesaroCheck, LaplaceResolvent, ResolventReport,
};
pub use scalar::Real;
pub use spectral::{
    boundedness_diagnostic, find_r_tilde, parabola_contains, region_params, s_lambda, verify_region_bound,
    BoundednessReport, ParabolaRegion, RegionReport, SpectralRegionParams,
};

pub type ComplexMatrixF64 = ComplexMatrix<f64>;
pub type CosineFamilyF64 = CosineFamily<f64>;
pub type SemigroupF64 = Semigroup<f64>;
pub type GrowthBoundF64 = GrowthBound<f64>;
pub type ResolventReportF64 = ResolventReport<f64>;
pub type SpectralRegionParamsF64 = SpectralRegionParams<f64>;
pub type NormProfileF64 = NormProfile<f64>;
pub type LawVerdictF64 = LawVerdict<f64>;

pub type ComplexMatrixF32 = ComplexMatrix<f32>;
pub type CosineFamilyF32 = CosineFamily<f32>;
pub type SemigroupF32 = Semigroup<f32>;
pub type GrowthBoundF32 = GrowthBound<f32>;
pub type ResolventReportF32 = ResolventReport<f32>;
pub type SpectralRegionParamsF32 = SpectralRegionParams<f32>;
pub type NormProfileF32 = NormProfile<f32>;
pub type LawVerdictF32 = LawVerdict<f32>;

/// Scientific notation with 15 significant digits.
pub fn fmt_sig<T: Real>(x: T) -> String {
    format!("{:.14e}", x.to_f64_lossy())
}
