//! Config-driven experiments on cellular automata acting on quasisturmian
//! partitions.

pub mod config;
pub mod experiments;
pub mod report;
pub mod selftest;
