//! Classical and relativistic rocket dynamics with exact feedback
//! linearization, linear control design and closed-loop simulation.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, the precision used by the CLI.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod linearization;
pub mod params;
pub mod scalar;
pub mod simulation;

pub use error::DynamicsError;
pub use params::{FrameClock, KinematicState, Model, RocketParams, SPEED_OF_LIGHT_SI};
pub use scalar::Scalar;

pub use num_complex::Complex;

pub type RocketParams64 = params::RocketParams<f64>;
pub type RocketParams32 = params::RocketParams<f32>;
pub type KinematicState64 = params::KinematicState<f64>;
pub type FrameClock64 = params::FrameClock<f64>;
pub type LinearStateSpace64 = linearization::LinearStateSpace<f64>;
pub type CompensatorGain64 = linearization::CompensatorGain<f64>;
pub type GainVector64 = control::GainVector<f64>;
pub type PIDGains64 = control::PIDGains<f64>;
pub type PIDState64 = control::PIDState<f64>;
pub type SteeringPlan64 = control::SteeringPlan<f64>;
pub type SimState64 = simulation::SimState<f64>;
pub type SimConfig64 = simulation::SimConfig<f64>;
pub type Sample64 = simulation::Sample<f64>;
pub type Trajectory64 = simulation::Trajectory<f64>;
