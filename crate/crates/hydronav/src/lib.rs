//! Simulator and learning stack for mapless goal-oriented navigation of a
//! hybrid aerial/underwater vehicle.
//!
//! The crate is organized bottom-up:
//!
//! - [`math`]: 3-vectors, rotations on SO(3), seeded RNG streams, and the
//!   Ornstein-Uhlenbeck process used for exploration noise and wind/current.
//! - [`dynamics`]: 6-DOF rigid body with medium-dependent forces (gravity,
//!   buoyancy, drag, disturbances) and a thrust+torque actuation abstraction.
//! - [`control`]: geometric tracking controller on SE(3), used both as the
//!   navigation baseline and as the inner loop turning velocity commands
//!   into thrust and torque.
//! - [`sensing`]: 20-beam rangefinder via analytic ray casting plus assembly
//!   of the 26-value observation vector.
//! - [`env`]: the episode engine (action scaling, reward, target spawning,
//!   termination).
//! - [`nn`]: minimal feedforward network engine with exact backprop
//!   (including input gradients) and Adam.
//! - [`agents`]: replay memory and the two learning agents (deterministic
//!   DDPG-style and stochastic SAC-style).
//! - [`config`], [`checkpoint`], [`harness`]: run configuration, policy
//!   persistence, and the train/eval/baseline drivers behind the CLI.

pub mod agents;
pub mod checkpoint;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod harness;
pub mod math;
pub mod nn;
pub mod sensing;

pub use error::{Error, Result};
