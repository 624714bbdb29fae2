pub mod config;
pub mod engine;
pub mod error;
pub mod exec;
pub mod generators;
pub mod gila;
pub mod graph;
pub mod merger;
pub mod metrics;
pub mod partition;
pub mod pipeline;
pub mod placer;
pub mod seed;
