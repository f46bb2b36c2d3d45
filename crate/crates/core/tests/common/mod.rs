//! Independent reference implementations shared by integration tests.
#![allow(dead_code)]

pub mod gen;
pub mod itc_oracle;
pub mod stats_oracle;
