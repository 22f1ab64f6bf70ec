//! Generators and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

pub mod fixtures;
pub mod neural;
pub mod oracles;
pub mod programs;
