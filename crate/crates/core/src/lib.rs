//! Exact symbolic verification of the operational calculus of strict
//! principal 2-bundles: a truncated supercommutative ring kernel, crossed
//! modules, the Cartan operation engine, gauge and basic data, and
//! nonabelian differential cocycles on finite covers.

pub mod basic;
pub mod cocycle;
pub mod dga;
pub mod derived;
pub mod gauge;
pub mod liecm;
pub mod matrix;
pub mod rational;
pub mod report;
pub mod scenario;
pub mod suites;
pub mod superring;
pub mod tamper;

pub use rational::Rational;

/// Exact rational coefficients used by every layer above the ring kernel.
pub type Q = Rational;
/// Ring element with rational coefficients.
pub type Scalar = superring::GradedScalar<Q>;
