//! Quantum-noise modeling of polarization-interferometer measurements of
//! collective atomic spin.
//!
//! The crate models a dispersive atom–light interface in which an optical
//! pulse, described by collective Stokes operators, probes the alignment of a
//! cold-atom spin ensemble. Two readout strategies are covered:
//!
//! - **LTE** (linear-to-elliptical): the probe ellipticity responds directly
//!   to the spin alignment through the tensor coupling; the readout noise
//!   carries photon shot-noise scaling.
//! - **AOC** (alignment-to-orientation conversion): the tensor coupling first
//!   converts alignment into orientation, which then Faraday-rotates the
//!   probe. The signal grows quadratically with photon number, so the readout
//!   noise falls faster than shot noise.
//!
//! Modules follow the analysis pipeline: [`spectro`] computes the
//! detuning-dependent couplings of the interface, [`dynamics`] propagates
//! Gaussian means and covariances through a pulse (with a Monte-Carlo
//! sampling oracle), [`sensitivity`] assembles closed-form measurement
//! uncertainty budgets, [`squeezing`] evaluates conditional noise reduction
//! and metrological squeezing, [`optimizer`] scans and optimizes over photon
//! number, detuning, and optical depth, and [`magnetometry`] handles the
//! Larmor-precession signal model. [`config`] and [`table`] provide the
//! file-facing plumbing shared by the command-line tools.
//!
//! All physics is generic over the scalar type through the [`Real`] trait;
//! the aliases at the crate root fix the common double-precision case.

pub mod config;
pub mod dynamics;
pub mod fit;
pub mod linalg;
pub mod magnetometry;
pub mod optimizer;
pub mod real;
pub mod sensitivity;
pub mod spectro;
pub mod squeezing;
pub mod table;

pub use real::Real;
pub use sensitivity::Strategy;

// Concrete aliases for the default double-precision scalar.
pub type CouplingModel = spectro::CouplingModel<f64>;
pub type CouplingValues = spectro::CouplingValues<f64>;
pub type ScatteringDamage = spectro::ScatteringDamage<f64>;
pub type GaussianJointState = dynamics::GaussianJointState<f64>;
pub type MixedVariable = dynamics::MixedVariable<f64>;
pub type PulseSampleStats = dynamics::PulseSampleStats<f64>;
pub type ExperimentConfig = sensitivity::ExperimentConfig<f64>;
pub type SensitivityReport = sensitivity::SensitivityReport<f64>;
pub type SqueezingReport = squeezing::SqueezingReport<f64>;
pub type ConditionalEstimate = squeezing::ConditionalEstimate<f64>;
pub type ScanGrid = optimizer::ScanGrid<f64>;
pub type OptimumPoint = optimizer::OptimumPoint<f64>;
pub type FieldScenario = magnetometry::FieldScenario<f64>;
