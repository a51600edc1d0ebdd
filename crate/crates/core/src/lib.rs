//! Simulation of beeping networks with receiver noise.

pub mod apps;
pub mod beepsim;
pub mod bits;
pub mod channel;
pub mod codes;
pub mod collision;
pub mod congest;
pub mod experiment;
pub mod runner;
pub mod seed;
pub mod stats;
pub mod topology;
pub mod trials;
