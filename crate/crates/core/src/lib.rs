//! Agent-based simulation of situated cognitive consumers foraging for
//! products on a grid, with and without social influence.

pub mod cognition;
pub mod commands;
pub mod config;
pub mod consumer;
pub mod error;
pub mod experiment;
pub mod io;
pub mod network;
pub mod product;
pub mod report;
pub mod rng;
pub mod space;
pub mod stats;
pub mod world;

pub use config::Config;
pub use error::{Error, Result};
pub use world::World;
