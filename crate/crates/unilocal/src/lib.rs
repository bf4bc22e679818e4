//! Simulation of synchronous local algorithms and the constructions that turn
//! guess-dependent algorithms into guess-free ones.

pub mod config;
pub mod graph;
pub mod problems;
pub mod pruning;
pub mod runtime;
pub mod baselib;
pub mod bounds;
pub mod transformer;
pub mod acceptance;
