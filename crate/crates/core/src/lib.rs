pub mod channel;
pub mod cli;
pub mod config;
pub mod detection;
pub mod experiments;
pub mod numerics;
pub mod particlesim;
pub mod rng;
