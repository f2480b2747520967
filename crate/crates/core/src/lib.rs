//! Stability analysis of discrete-time switching systems `v_{n+1} = A_{σ(n)} v_n`
//! driven by finitely many 2×2 complex matrices.
//!
//! [`classify`] places a family in one of four regimes (exponentially stable,
//! marginally stable, marginally unstable, exponentially unstable) and attaches
//! the evidence: a uniform bound on all products in the marginally stable
//! case, or a concrete switching law and initial vector whose trajectory grows
//! linearly in the marginally unstable case.
//!
//! ```
//! use planar_switching::{classify, Complex, Mat2, MatrixSet, Regime};
//!
//! let i = Complex::new(0.0, 1.0);
//! let one = Complex::new(1.0, 0.0);
//! let set = MatrixSet::with_default_tol(vec![
//!     Mat2::diag(i, one),
//!     Mat2::upper(i, one, one),
//! ])
//! .unwrap();
//! let verdict = classify(&set, 8, 1e-6).unwrap();
//! assert_eq!(verdict.regime, Regime::MarginallyUnstable);
//! ```

pub mod certificates;
pub mod classifier;
pub mod error;
pub mod escape;
pub mod matrix;
pub mod spectral;
pub mod structure;
pub mod trajectory;

pub use certificates::{
    bdd_certificate, bdd_certificate_in_basis, kappa_certificate, linear_ceiling, BddCertificate,
    KappaCertificate, LinearCeiling,
};
pub use classifier::{classify, classify_with, Certificate, ClassifyOptions, Regime, Verdict};
pub use error::{Error, Result};
pub use escape::{
    build_escape_witness, CaseTag, EscapeWitness, NormalizedPair, SwitchingSequence,
};
pub use matrix::{operator_norm, spectral_radius, Complex, Mat2, MatrixSet, Tolerance, Vec2};
pub use spectral::{jsr_bounds, rate_sequence, JsrBounds, RateSequence, SearchConfig};
pub use structure::{analyze, RootPolicy, StructureReport};
pub use trajectory::{classify_growth, corollary_check, simulate, GrowthClass, GrowthReport, Trajectory};
