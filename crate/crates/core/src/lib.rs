//! Swarm-based plausibilization of tracked vehicles.
//!
//! Each tracked object leads a flock of boids that follow it with separation,
//! cohesion, alignment and leader-following rules, while neighboring flocks
//! repel each other laterally. Boid motion is filtered through a Dubins-path
//! reachability test. The mean lateral position of a flock is a smoothed
//! estimate of its lead's lateral position; [`experiment`] measures how well
//! it separates vehicles in adjacent lanes compared to the raw tracks.

pub mod config;
pub mod dubins;
pub mod error;
pub mod experiment;
pub mod flocking;
pub mod geometry;
pub mod lifecycle;
pub mod metrics;
pub mod scenario;
pub mod seed;
pub mod sensing;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{FovEllipse, Pose, Vec2};
