//! Bipartite no-signaling boxes, the local polytope, the random access code
//! built from box pairs, and the information causality functional.
//!
//! Box and polytope code is generic over [`scalar::Scalar`]; the aliases
//! below fix the usual choices: exact big rationals for boxes, membership and
//! protocol probabilities, `f64` for entropies.

pub mod boxes;
pub mod geometry;
pub mod infotheory;
pub mod protocols;
pub mod scalar;

pub use boxes::{BoxError, BoxPoint, ChshTier, Scenario};
pub use geometry::{classical_membership, GeometryError, MembershipCertificate};
pub use infotheory::{ic_sum, tsirelson_threshold, InfoError, JointDistribution};
pub use protocols::{run_ot, run_rac, ProtocolError, RacConfig, RacResult};
pub use scalar::{ExactScalar, Scalar};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

/// A box with exact rational entries.
pub type ExactBox = BoxPoint<Rational>;

pub type ExactCertificate = MembershipCertificate<Rational>;

pub type ExactRacConfig = RacConfig<Rational>;

pub type ExactRacResult = RacResult<Rational>;

/// Joint distribution with `f64` probabilities.
pub type Distribution = JointDistribution<f64>;
